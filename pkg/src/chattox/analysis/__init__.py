from .agreement import AgreementReport, SampleBundle, agreement_sample, agreement_score
from .benchmark import F1Report, f1_benchmark, load_dataset
from .metrics import (
    CooccurrenceMatrix,
    HighLowReport,
    PairwiseComparisonRow,
    PairwiseReport,
    RatioRow,
    cooccurrence,
    high_low_comparison,
    label_counts,
    label_prevalence,
    pairwise_distribution_tests,
    stream_distributions,
    toxicity_ratio,
)
from .view import LabeledCorpusView, LabeledMessage

__all__ = [
    "AgreementReport", "CooccurrenceMatrix", "F1Report", "HighLowReport", "LabeledCorpusView",
    "LabeledMessage", "PairwiseComparisonRow", "PairwiseReport", "RatioRow", "SampleBundle",
    "agreement_sample", "agreement_score", "cooccurrence", "f1_benchmark", "high_low_comparison",
    "label_counts", "label_prevalence", "load_dataset", "pairwise_distribution_tests",
    "stream_distributions", "toxicity_ratio",
]
