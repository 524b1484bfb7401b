"""Acceptance checks, one test per criterion; each prints a PASS/FAIL line."""

from __future__ import annotations

import contextlib
import time
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from chattox import cli
from chattox.analysis import (
    LabeledCorpusView,
    agreement_sample,
    agreement_score,
    cooccurrence,
    f1_benchmark,
    label_counts,
    label_prevalence,
    toxicity_ratio,
)
from chattox.analysis.agreement import rater_from_key
from chattox.classify import ClassifyConfig, LabelStore, MockBackend, Stage, Status, classify_corpus
from chattox.errors import BackendTimeout, BackendUnavailable
from chattox.prelabel import PreLabel, PreLabelRuleSet, apply_prelabels
from chattox.stats import anova_oneway, cohen_kappa, distance_matrix, pcoa, permanova, permdisp, welch_t
from chattox.synthetic import GameSpec, SyntheticSpec, make_corpus, record_replay_log, subclass_mix, write_dumps
from chattox.taxonomy import CATEGORIES, SUBCLASSES

from conftest import stream
from oracles import kappa_from_table, permanova_exact_p, permdisp_exact_p


@pytest.fixture
def criterion(capsys):
    @contextlib.contextmanager
    def run(n: int, title: str):
        t0 = time.perf_counter()
        try:
            yield
        except BaseException:
            with capsys.disabled():
                print(f"\n[FAIL] criterion {n:>2}: {title} ({time.perf_counter() - t0:.2f}s)")
            raise
        with capsys.disabled():
            print(f"\n[PASS] criterion {n:>2}: {title} ({time.perf_counter() - t0:.2f}s)")
    return run


# -- shared planted corpus -----------------------------------------------------

GAMES = [
    GameSpec("League of Legends", 2, 1000, 0.06, subclass_mix(bullying=5, aggression=2, swearing=3)),
    GameSpec("Valorant", 2, 1000, 0.08, subclass_mix(swearing=4, misogyny=2, bullying=2, sexuality_gender=1)),
    GameSpec("Cyberpunk 2077", 2, 1000, 0.03, subclass_mix(swearing=3, sex_based_terms=2)),
    GameSpec("Trackmania", 2, 1000, 0.02),
    GameSpec("Minecraft", 2, 1000, 0.01, subclass_mix(disability=1, race_ethnicity_religion=1, bullying=2)),
]
INVALID_RATE = 0.0006


@pytest.fixture(scope="module")
def planted():
    return make_corpus(SyntheticSpec(GAMES, invalid_rate=INVALID_RATE, seed=2024))


def classify(synth, path, backend, cfg=None):
    with LabelStore(path) as store:
        return classify_corpus(synth.corpus, apply_prelabels(synth.corpus, PreLabelRuleSet()), backend, store,
                               cfg or ClassifyConfig(max_in_flight=4), sleep=lambda s: None)


# -- 1 ---------------------------------------------------------------------------

def test_criterion_01_statistic_oracles(criterion):
    with criterion(1, "statistic oracles (kappa, ANOVA, Welch, Bray-Curtis) within 1e-12, < 1 s"):
        t0 = time.perf_counter()
        a = ["y"] * 60 + ["n"] * 40
        b = ["y"] * 45 + ["n"] * 15 + ["y"] * 25 + ["n"] * 15
        k = cohen_kappa(a, b).kappa
        assert abs(k - float(kappa_from_table(45, 15, 25, 15))) < 1e-12
        assert abs(k - 0.06 / 0.46) < 1e-12
        f = anova_oneway([[1, 2, 3], [2, 3, 4], [3, 4, 5]])
        assert abs(f.statistic - 3.0) < 1e-12 and f.df == (2.0, 6.0)
        w = welch_t([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
        assert abs(w.statistic + 1.0) < 1e-12 and abs(w.df[0] - 8.0) < 1e-12
        assert distance_matrix([[1, 1], [1, 3]]).data[0, 1] == 1 / 3
        assert time.perf_counter() - t0 < 1.0


# -- 2 ---------------------------------------------------------------------------

def _fixtures():
    out = [
        ([[0], [0], [0], [10], [10], [10]], list("aaabbb"), "euclidean"),
        ([[0], [2], [0], [10]], list("aabb"), "euclidean"),
        ([[1, 2], [3, 1], [1, 2], [3, 1]], list("aabb"), "euclidean"),
        ([[29, 12, 8], [28, 12, 7], [27, 11, 7], [27, 11, 8], [35, 0, 0], [18, 13, 0], [42, 16, 0], [28, 2, 1]],
         list("aaaabbbb"), "bray_curtis"),
    ]
    rng = np.random.default_rng(77)
    layouts = [[2, 2], [2, 3], [3, 3], [2, 2, 2], [4, 4], [3, 5], [2, 3, 3], [2, 2, 4]]
    for i in range(16):
        sizes = layouts[i % len(layouts)]
        labels = [chr(97 + g) for g, s in enumerate(sizes) for _ in range(s)]
        pts = (rng.integers(0, 6, (len(labels), 4)) + 1).tolist()
        out.append((pts, labels, "bray_curtis" if i % 2 == 0 else "euclidean"))
    return out


def test_criterion_02_permutation_exactness(criterion):
    with criterion(2, "exhaustive p equals brute-force oracle exactly; MC (9999) within 0.02; < 30 s"):
        t0 = time.perf_counter()
        worst = 0.0
        for pts, labels, metric in _fixtures():
            assert len(pts) <= 8
            d = distance_matrix(pts, metric)
            for test, oracle in ((permanova, permanova_exact_p), (permdisp, permdisp_exact_p)):
                exact = test(d, labels, n_perm=None)
                ref = oracle(pts, labels, metric)
                assert exact.exhaustive and exact.p_value == float(ref), (test.__name__, pts, labels, metric)
                mc = test(d, labels, n_perm=9999, seed=1)
                worst = max(worst, abs(mc.p_value - exact.p_value))
                assert abs(mc.p_value - exact.p_value) <= 0.02, (test.__name__, pts, mc.p_value, exact.p_value)
        assert time.perf_counter() - t0 < 30.0
        print(f"  largest |MC - exact| = {worst:.4f}")


# -- 3 ---------------------------------------------------------------------------

def test_criterion_03_anova_equivalence(criterion):
    with criterion(3, "1-D Euclidean pseudo-F equals one-way ANOVA F within 1e-9 (100 fixtures)"):
        rng = np.random.default_rng(303)
        for _ in range(100):
            k = int(rng.integers(2, 5))
            sizes = rng.integers(2, 8, k)
            groups = [rng.normal(rng.normal(0, 2), rng.uniform(0.5, 3), s) for s in sizes]
            x = np.concatenate(groups)[:, None]
            labels = [g for g, s in enumerate(sizes) for _ in range(s)]
            pseudo = permanova(distance_matrix(x, "euclidean"), labels, n_perm=1).statistic
            assert abs(pseudo - anova_oneway(groups).statistic) < 1e-9


# -- 4 ---------------------------------------------------------------------------

def test_criterion_04_pcoa_fidelity(criterion):
    with criterion(4, "PCoA reconstructs Euclidean distances within 1e-9 (50 point sets)"):
        rng = np.random.default_rng(404)
        for _ in range(50):
            n, dim = int(rng.integers(2, 21)), int(rng.integers(1, 6))
            x = rng.normal(0, rng.uniform(0.1, 10), (n, dim))
            d = distance_matrix(x, "euclidean").data
            coords, _ = pcoa(d)
            rec = np.sqrt(((coords[:, None, :] - coords[None, :, :]) ** 2).sum(-1))
            assert np.abs(rec - d).max() < 1e-9


# -- 5 ---------------------------------------------------------------------------

def test_criterion_05_planted_truth(criterion, planted, tmp_path):
    with criterion(5, "planted toxic rates, prevalences and co-occurrence recovered exactly"):
        corpus = planted.corpus
        assert corpus.n_streams >= 10 and len(corpus) >= 10_000
        classify(planted, tmp_path / "labels.jsonl", MockBackend(planted.responder()))
        view = LabeledCorpusView(corpus, LabelStore(tmp_path / "labels.jsonl").labels())
        truth = planted.truth

        def key(mid, meta, by):
            return {"all": "all", "game": meta.game, "genre": meta.genre.value if meta.genre else None,
                    "stream": meta.stream_id}[by]

        for by in ("all", "game", "genre", "stream"):
            toxic, total = Counter(), Counter()
            prim, sec, comb, n_tox = Counter(), Counter(), Counter(), Counter()
            for sid, meta in corpus.streams.items():
                for m in corpus.messages[sid]:
                    g = key(m.message_id, meta, by)
                    if g is None:
                        continue
                    t = truth[m.message_id]
                    total[g] += 1
                    if t.status is Status.TOXIC:
                        toxic[g] += 1
                        n_tox[g] += 1
                        prim[(g, t.primary.category)] += 1
                        if t.secondary:
                            sec[(g, t.secondary.category)] += 1
                        for c in {t.primary.category, t.secondary.category if t.secondary else None} - {None}:
                            comb[(g, c)] += 1
            ratios = toxicity_ratio(view, by)
            assert {g: r.ratio for g, r in ratios.items()} == {g: Fraction(toxic[g], total[g]) for g in total}
            for slot, want in (("primary", prim), ("secondary", sec), ("combined", comb)):
                counts, ntox = label_counts(view, "category", slot, by)
                assert ntox == {g: n_tox[g] for g in total}
                assert all(counts[(g, c)] == want[(g, c)] for g in total for c in CATEGORIES)
                prev = label_prevalence(view, "category", slot, by)
                assert all(prev[(g, c)] == (100.0 * want[(g, c)] / n_tox[g] if n_tox[g] else 0.0)
                           for g in total for c in CATEGORIES)

        sub_counts, _ = label_counts(view, "subclass", "primary", "game")
        want = Counter((corpus.streams[m.stream_id].game, truth[m.message_id].primary)
                       for m in corpus if truth[m.message_id].status is Status.TOXIC)
        assert all(sub_counts[(g.game, s)] == want[(g.game, s)] for g in GAMES for s in SUBCLASSES)

        m = cooccurrence(view, "subclass")
        for i, a in enumerate(SUBCLASSES):
            for j, b in enumerate(SUBCLASSES):
                n = sum(1 for t in truth.values() if t.status is Status.TOXIC and t.primary is a and t.secondary is b)
                assert m.counts[i, j] == n
            assert m.primary_only[i] == sum(1 for t in truth.values()
                                            if t.status is Status.TOXIC and t.primary is a and t.secondary is None)

        games, genres = toxicity_ratio(view, "game"), toxicity_ratio(view, "genre")
        for genre, row in genres.items():
            members = {meta.game for meta in corpus.streams.values() if meta.genre and meta.genre.value == genre}
            weighted = sum(games[g].ratio * games[g].total for g in members) / sum(games[g].total for g in members)
            assert row.ratio == weighted
        print(f"  {len(corpus)} messages, {corpus.n_streams} streams, "
              f"overall {toxicity_ratio(view)['all'].percent:.2f}% toxic")


# -- 6 ---------------------------------------------------------------------------

class _Killer:
    def __init__(self, inner, limit):
        self.inner, self.limit, self.n = inner, limit, 0
        self.backend_id = inner.backend_id

    def send(self, payload):
        self.n += 1
        if self.n > self.limit:
            raise BackendTimeout("process killed")
        return self.inner.send(payload)


def test_criterion_06_pipeline_invariants(criterion, planted, tmp_path):
    with criterion(6, "no requests for pre-labels, stage 2 only after toxic, byte-identical resume, "
                      "invalid rate recovered exactly"):
        assignment = apply_prelabels(planted.corpus, PreLabelRuleSet())
        backend = MockBackend(planted.responder())
        summary = classify(planted, tmp_path / "ref.jsonl", backend)
        prelabeled = {m for m, a in assignment.by_message.items() if a is not PreLabel.NEEDS_CLASSIFICATION}
        assert prelabeled and not prelabeled & {p.message_id for p in backend.requests}
        stage1 = {p.message_id: p for p in backend.requests if p.stage is Stage.BINARY}
        for p in backend.requests:
            if p.stage is Stage.SUBCLASS:
                assert planted.responder()(stage1[p.message_id]).startswith("Yes")
        n_sub = sum(p.stage is Stage.SUBCLASS for p in backend.requests)
        assert n_sub == sum(t.status is Status.TOXIC for t in planted.truth.values())

        cfg = ClassifyConfig(max_in_flight=4, max_retries=0)
        for limit in (0, 1234, 5000):
            part = tmp_path / f"part{limit}.jsonl"
            with pytest.raises(BackendUnavailable):
                classify(planted, part, _Killer(MockBackend(planted.responder()), limit), cfg)
            classify(planted, part, MockBackend(planted.responder()), cfg)
            assert part.read_bytes() == (tmp_path / "ref.jsonl").read_bytes()

        planted_invalid = len(planted.invalid_ids)
        assert planted_invalid == round(INVALID_RATE * len(planted.corpus))
        assert summary.counts[Status.INVALID] == planted_invalid
        assert summary.invalid_rate == planted_invalid / summary.total
        assert f"{100 * summary.invalid_rate:.2f}%" == "0.06%"
        stored = LabelStore(tmp_path / "ref.jsonl")
        assert {m for m in planted.invalid_ids if stored.get(m).status is Status.INVALID} == planted.invalid_ids
        view = LabeledCorpusView(planted.corpus, stored.labels())
        assert toxicity_ratio(view)["all"].toxic == sum(t.status is Status.TOXIC for t in planted.truth.values())


# -- 7 ---------------------------------------------------------------------------

_results_7: list[bool] = []


@settings(max_examples=60, deadline=None)
@example([(0, 0)] * 120 + [(1, 0)] * 40)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 40)), min_size=1, max_size=160))
def _context_property(steps):
    # offsets advance by 0..3 tenths of a second, so dense bursts exceed the 50-message cap
    offsets, t = [], 0.0
    for gap, _ in steps:
        t = round(t + gap / 10 * (5 if gap == 3 else 1), 1)
        offsets.append(t)
    meta, msgs = stream("s", [(o, f"msg{i}", f"u{i % 7}") for i, o in enumerate(offsets)])
    from chattox.ingest import Corpus
    corpus = Corpus()
    corpus.add(meta, msgs)
    backend = MockBackend(lambda p: "No")
    with contextlib.ExitStack() as stack:
        import tempfile
        tmp = stack.enter_context(tempfile.TemporaryDirectory())
        store = stack.enter_context(LabelStore(f"{tmp}/s.jsonl"))
        classify_corpus(corpus, apply_prelabels(corpus, PreLabelRuleSet(frozenset(), frozenset())),
                        backend, store, ClassifyConfig(max_in_flight=2))
    by_id = {m.message_id: m for m in msgs}
    assert len(backend.requests) == len(msgs)
    for p in backend.requests:
        target = by_id[p.message_id]
        ctx = p.user_content.split("Context:\n", 1)[1].split("\n\nMessage:\n", 1)[0]
        got = [] if ctx == "(no prior context)" else ctx.split("\n")
        want = [f"{m.user}: {m.text}" for m in msgs[:target.seq]
                if target.offset_s - 10 <= m.offset_s < target.offset_s][-50:]
        assert got == want


def test_criterion_07_context_correctness(criterion):
    with criterion(7, "captured request contexts hold exactly the [t-10, t) messages, latest 50"):
        _context_property()


# -- 8 ---------------------------------------------------------------------------

def test_criterion_08_agreement(criterion, planted):
    with criterion(8, "key as rater gives kappa 1.0; raters at (0.44, 0.46, 0.70) average 0.53"):
        view = LabeledCorpusView(planted.corpus, planted.truth)
        bundle = agreement_sample(view, 50, 50, seed=8)
        key = [{"sample_id": r.sample_id, "label": r.label, "primary": r.primary} for r in bundle.rows]
        assert agreement_score(key, [rater_from_key(key)]).binary.model_vs_human == [1.0]

        def flipped(n):
            rows = rater_from_key(key)
            for r in rows[:n]:
                r["label"] = "non_toxic" if r["label"] == "toxic" else "toxic"
            return rows

        # a balanced key fixes expected agreement at 1/2, so kappa = 1 - flips / 50
        rep = agreement_score(key, [flipped(28), flipped(27), flipped(15)])
        assert rep.binary.model_vs_human == pytest.approx([0.44, 0.46, 0.70], abs=1e-12)
        assert f"{rep.binary.mean_model_vs_human:.2f}" == "0.53"


# -- 9 ---------------------------------------------------------------------------

def test_criterion_09_benchmark(criterion):
    with criterion(9, "oracle backend F1 = 1.0; always-toxic on balanced 200 gives F1 = 2/3"):
        data = [(f"benchmark text {i}", i % 2 == 0) for i in range(200)]
        gold = dict(data)
        oracle = MockBackend(lambda p: "Yes" if gold[p.user_content.rsplit("user: ", 1)[1]] else "No")
        assert f1_benchmark(data, oracle).f1 == 1.0
        r = f1_benchmark(data, MockBackend(lambda p: "yes"))
        assert abs(r.f1 - 2 / 3) < 1e-12


# -- 10 --------------------------------------------------------------------------

def _cli_run(root, synth):
    write_dumps(synth.corpus, root / "dumps")
    record_replay_log(synth, root / "replay.jsonl")
    (root / "run.yaml").write_text("backend:\n  kind: replay\n  replay_log: replay.jsonl\n"
                                   "stats:\n  n_perm: 999\n  seed: 7\n")
    cfg = str(root / "run.yaml")
    for args in (["ingest", str(root / "dumps" / "manifest.yaml")], ["prelabel"], ["classify"],
                 ["analyze", "--by", "game"], ["analyze", "--by", "genre"], ["report"]):
        assert cli.main(["-c", cfg, *args]) == 0, args
    names = ["report.json", "report.txt", "analysis_game.json", "analysis_genre.json", "analysis_genre.txt"]
    return {n: (root / "reports" / n).read_bytes() for n in names}


def test_criterion_10_determinism(criterion, tmp_path, capsys):
    with criterion(10, "two full CLI runs with the replay backend give byte-identical reports"):
        synth = make_corpus(SyntheticSpec([GameSpec(g.game, 3, 150, g.toxic_rate, g.subclass_weights)
                                           for g in GAMES], invalid_rate=0.002, seed=10))
        (tmp_path / "a").mkdir()
        (tmp_path / "b").mkdir()
        first = _cli_run(tmp_path / "a", synth)
        second = _cli_run(tmp_path / "b", synth)
        capsys.readouterr()
        assert first == second
