"""Time every CLI stage on a synthetic corpus of roughly 100k events."""

import argparse
import tempfile
import time
from pathlib import Path

from traceseq import cli

STAGES = ["report", "sessions", "motifs", "cluster", "survival", "hmm", "network", "procmine", "embed"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--users", type=int, default=150)
    ap.add_argument("--median-length", type=float, default=400)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workdir", help="keep outputs here instead of a temp dir")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        work = Path(args.workdir or tmp)
        work.mkdir(parents=True, exist_ok=True)
        corpus = work / "corpus.csv"
        timings = []
        t = time.perf_counter()
        cli.main(["synth", "--seed", str(args.seed), "--users", str(args.users),
                  "--median-length", str(args.median_length), "--out", str(corpus)])
        timings.append(("synth", time.perf_counter() - t))
        for stage in STAGES:
            t = time.perf_counter()
            rc = cli.main([stage, "--in", str(corpus), "--seed", str(args.seed), "--out", str(work / stage)])
            timings.append((stage, time.perf_counter() - t))
            if rc:
                raise SystemExit(f"{stage} exited with {rc}")
        t = time.perf_counter()
        cli.main(["project", "--vectors", str(work / "embed" / "vectors.txt"), "--out", str(work / "coords.csv")])
        timings.append(("project", time.perf_counter() - t))

    events = sum(1 for _ in corpus.open()) - 1 if args.workdir else None
    for name, secs in timings:
        print(f"{name:10s} {secs:7.1f}s")
    print(f"{'total':10s} {sum(s for _, s in timings):7.1f}s" + (f"  ({events} events)" if events else ""))


if __name__ == "__main__":
    main()
