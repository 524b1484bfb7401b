"""Command-line driver: ``chattox <stage> ...``.

Stages never run their prerequisites implicitly. Each one writes its
artifacts under ``paths.reports`` and records itself in the run manifest.
Exit codes: 0 ok, 2 config error, 3 missing input, 4 backend failure,
5 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    LabeledCorpusView,
    agreement_sample,
    agreement_score,
    f1_benchmark,
    load_dataset,
)
from .analysis.reports import analysis_record, dumps, full_report, render_ratio_table, render_report
from .classify import ClassifyConfig, HttpBackend, LabelStore, RecordingBackend, ReplayBackend, classify_corpus
from .classify.pipeline import record_prelabels
from .config import RunConfig, RunManifest, load_config, now
from .errors import ChatToxError, StageMissingInput
from .ingest import corpus_digest, load_corpus, read_corpus, with_genre_overrides, write_corpus
from .prelabel import PreLabelRuleSet, apply_prelabels, top_frequent_messages

log = logging.getLogger("chattox")


class Stage:
    def __init__(self, cfg: RunConfig, name: str):
        self.cfg = cfg
        self.name = name
        self.started = now()
        self.reports = cfg.path(cfg.paths.reports)
        self.manifest = RunManifest(self.reports)

    def corpus_dir(self) -> Path:
        return self.cfg.path(self.cfg.paths.corpus)

    def store_path(self) -> Path:
        return self.cfg.path(self.cfg.paths.store)

    def load_corpus(self):
        d = self.corpus_dir()
        if not (d / "messages.jsonl").exists():
            raise StageMissingInput(f"no normalized corpus in {d}; run 'ingest' first")
        corpus = read_corpus(d)
        if self.cfg.genres:
            corpus = with_genre_overrides(corpus, self.cfg.genres)
        return corpus

    def require_store(self) -> LabelStore:
        if not self.store_path().exists():
            raise StageMissingInput(f"no label store at {self.store_path()}; run 'classify' first")
        return LabelStore(self.store_path())

    def corpus_digest(self) -> str | None:
        d = self.corpus_dir()
        return corpus_digest(d) if (d / "messages.jsonl").exists() else None

    def finish(self, counts: dict) -> dict:
        return self.manifest.record(self.name, self.cfg.digest(), self.corpus_digest(), self.started, counts)

    def write(self, name: str, text: str) -> Path:
        self.reports.mkdir(parents=True, exist_ok=True)
        p = self.reports / name
        p.write_text(text, encoding="utf-8")
        return p

    def rules(self) -> PreLabelRuleSet:
        p = self.cfg.prelabel
        return PreLabelRuleSet.from_files(self.cfg.path(p.allowlist_path), self.cfg.path(p.bots_path),
                                          extra_bots=p.bots)

    def backend(self):
        b = self.cfg.backend
        if b.kind == "replay":
            path = self.cfg.path(b.replay_log)
            if not path.exists():
                raise StageMissingInput(f"replay log {path} not found")
            return ReplayBackend(path)
        backend = HttpBackend(b.url, b.model, timeout_s=b.timeout_s, temperature=self.cfg.classify.temperature)
        if b.record_log:
            return RecordingBackend(backend, self.cfg.path(b.record_log))
        return backend

    def classify_config(self) -> ClassifyConfig:
        return ClassifyConfig(window_s=self.cfg.classify.window_s, context_cap=self.cfg.classify.context_cap,
                              max_in_flight=self.cfg.backend.max_in_flight,
                              max_retries=self.cfg.backend.max_retries)


def cmd_ingest(st: Stage, args) -> None:
    corpus = load_corpus(args.manifest)
    write_corpus(corpus, st.corpus_dir())
    ref = st.finish(corpus.summary())
    st.write("corpus_summary.json", dumps({"manifest": ref, **corpus.summary()}))
    print(json.dumps(corpus.summary()))


def cmd_prelabel(st: Stage, args) -> None:
    corpus = st.load_corpus()
    assignment = apply_prelabels(corpus, st.rules())
    with LabelStore(st.store_path()) as store:
        new = record_prelabels(corpus, assignment, store)
    counts = {k.value: v for k, v in assignment.counts().items()}
    ref = st.finish({**counts, "new_records": new})
    cands = top_frequent_messages(corpus, args.candidates or st.cfg.prelabel.candidates)
    st.write("prelabel.json", dumps({"manifest": ref, "counts": counts,
                                     "candidates": [{"text": t, "count": c} for t, c in cands]}))
    print(json.dumps(counts))


def cmd_classify(st: Stage, args) -> None:
    corpus = st.load_corpus()
    assignment = apply_prelabels(corpus, st.rules())
    with LabelStore(st.store_path()) as store:
        summary = classify_corpus(corpus, assignment, st.backend(), store, st.classify_config())
    ref = st.finish(summary.to_dict())
    # per-run counters stay in the manifest; the report holds only store-derived values
    rec = summary.to_dict()
    rec.pop("newly_labeled"), rec.pop("requests_issued")
    st.write("classification_summary.json", dumps({"manifest": ref, **rec}))
    print(json.dumps(summary.to_dict()))


def _view(st: Stage) -> LabeledCorpusView:
    corpus = st.load_corpus()
    store = st.require_store()
    return LabeledCorpusView(corpus, store.labels())


def cmd_analyze(st: Stage, args) -> None:
    view = _view(st)
    rec = analysis_record(view, args.by)
    ref = st.finish({"messages": len(view), "by": args.by})
    rec = {"manifest": ref, **rec}
    st.write(f"analysis_{args.by}.json", dumps(rec))
    st.write(f"analysis_{args.by}.txt", render_ratio_table(rec) + "\n")
    print(render_ratio_table(rec))


def cmd_agreement(st: Stage, args) -> None:
    if args.action == "sample":
        view = _view(st)
        out = Path(args.out) if args.out else st.reports / "agreement"
        out.mkdir(parents=True, exist_ok=True)
        bundle = agreement_sample(view, args.n_toxic, args.n_nontoxic, args.seed,
                                  window_s=st.cfg.classify.window_s, cap=st.cfg.classify.context_cap)
        bundle.write(out / "rater.csv", out / "key.csv")
        st.finish({"rows": len(bundle.rows)})
        print(f"wrote {len(bundle.rows)} rows to {out}")
    else:
        report = agreement_score(args.key, args.raters)
        ref = st.finish({"raters": len(args.raters)})
        st.write("agreement.json", dumps({"manifest": ref, **report.to_record()}))
        print(json.dumps(report.to_record(), indent=2))


def cmd_benchmark(st: Stage, args) -> None:
    dataset = load_dataset(args.dataset)
    report = f1_benchmark(dataset, st.backend(), st.classify_config())
    ref = st.finish(report.to_record())
    st.write("benchmark.json", dumps({"manifest": ref, **report.to_record()}))
    print(json.dumps(report.to_record()))


def cmd_report(st: Stage, args) -> None:
    view = _view(st)
    s = st.cfg.stats
    ref = st.manifest.reference(st.cfg.digest(), st.corpus_digest())
    report = full_report(view, n_perm=s.n_perm, seed=s.seed, metric=s.metric, alpha=s.alpha, manifest=ref)
    st.write("report.json", dumps(report))
    text = render_report(report)
    st.write("report.txt", text)
    st.finish({"messages": len(view)})
    print(text, end="")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chattox", description="Streaming-chat toxicity pipeline")
    p.add_argument("--config", "-c", help="YAML run configuration (defaults apply if omitted)")
    p.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    p.add_argument("--version", action="version", version=f"chattox {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="parse chat dumps listed in a manifest into the corpus")
    s.add_argument("manifest", help="YAML/JSON mapping dump path -> {streamer, game}")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("prelabel", help="record allowlist and bot pre-labels in the label store")
    s.add_argument("--candidates", type=int, default=None, help="how many frequent texts to list")
    s.set_defaults(func=cmd_prelabel)

    s = sub.add_parser("classify", help="run the two-stage LLM classification (resumable)")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("analyze", help="toxicity ratios and label prevalence")
    s.add_argument("--by", choices=["all", "game", "genre", "stream"], default="all")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("agreement", help="human-model agreement study")
    asub = s.add_subparsers(dest="action", required=True)
    a = asub.add_parser("sample", help="draw a stratified sample and write rater/key files")
    a.add_argument("--n-toxic", type=int, default=50)
    a.add_argument("--n-nontoxic", type=int, default=50)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", help="output directory (default: <reports>/agreement)")
    a.set_defaults(func=cmd_agreement)
    a = asub.add_parser("score", help="kappa of filled rater files against the key")
    a.add_argument("--key", required=True)
    a.add_argument("raters", nargs="+")
    a.set_defaults(func=cmd_agreement)

    s = sub.add_parser("benchmark", help="binary-stage F1 on a labeled dataset")
    s.add_argument("dataset", help="CSV/TSV with text and label (or toxic) columns")
    s.set_defaults(func=cmd_benchmark)

    s = sub.add_parser("report", help="full report: per-game/genre tables, co-occurrence, tests")
    s.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        args.func(Stage(cfg, args.command if args.command != "agreement" else f"agreement_{args.action}"), args)
    except ChatToxError as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e), "exit_code": e.exit_code}),
              file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
