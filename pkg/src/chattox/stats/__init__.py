from .distributions import betainc, f_sf, t_sf_two_sided
from .multivariate import (
    DistanceMatrix,
    PermTestResult,
    SubclassDistribution,
    centroid_distances,
    distance_matrix,
    pcoa,
    permanova,
    permdisp,
)
from .univariate import (
    KappaResult,
    TestResult,
    anova_oneway,
    cohen_kappa,
    compare_groups,
    format_p,
    levene,
    pooled_t,
    welch_t,
)

__all__ = [
    "DistanceMatrix", "KappaResult", "PermTestResult", "SubclassDistribution", "TestResult",
    "anova_oneway", "betainc", "centroid_distances", "cohen_kappa", "compare_groups",
    "distance_matrix", "f_sf", "format_p", "levene", "pcoa", "permanova", "permdisp",
    "pooled_t", "t_sf_two_sided", "welch_t",
]
