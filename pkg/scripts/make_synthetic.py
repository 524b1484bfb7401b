#!/usr/bin/env python3
"""Write a synthetic workspace: chat dumps, a replay log and run.yaml.

The replay log answers every classification prompt with the planted label,
so the full CLI pipeline runs offline and reproducibly.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from chattox.synthetic import GameSpec, SyntheticSpec, make_corpus, record_replay_log, subclass_mix, write_dumps

GAMES = [
    GameSpec("League of Legends", 3, 800, 0.06, subclass_mix(bullying=5, aggression=2, swearing=3)),
    GameSpec("Valorant", 3, 800, 0.08, subclass_mix(swearing=4, misogyny=2, bullying=2, sexuality_gender=1)),
    GameSpec("Cyberpunk 2077", 3, 800, 0.03, subclass_mix(swearing=3, sex_based_terms=2)),
    GameSpec("Trackmania", 3, 800, 0.02),
    GameSpec("Minecraft", 3, 800, 0.01, subclass_mix(disability=1, race_ethnicity_religion=1, bullying=2)),
]

RUN_YAML = """\
backend:
  kind: replay
  replay_log: replay.jsonl
stats:
  n_perm: {n_perm}
  seed: {seed}
"""


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("out", type=Path, help="workspace directory to create")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--invalid-rate", type=float, default=0.0006)
    p.add_argument("--n-perm", type=int, default=999)
    args = p.parse_args()

    synth = make_corpus(SyntheticSpec(GAMES, invalid_rate=args.invalid_rate, seed=args.seed))
    args.out.mkdir(parents=True, exist_ok=True)
    manifest = write_dumps(synth.corpus, args.out / "dumps")
    record_replay_log(synth, args.out / "replay.jsonl")
    (args.out / "run.yaml").write_text(RUN_YAML.format(n_perm=args.n_perm, seed=args.seed))
    truth = {}
    for t in synth.truth.values():
        truth[t.status.value] = truth.get(t.status.value, 0) + 1
    (args.out / "planted_counts.json").write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n")
    print(f"{len(synth.corpus)} messages in {synth.corpus.n_streams} streams; manifest {manifest}")


if __name__ == "__main__":
    main()
