"""Generate the full-size synthetic corpus and print its summary statistics."""

import argparse
import json

from traceseq.ingest import summarize, write_events
from traceseq.synth import SynthConfig, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="also write the corpus as CSV")
    args = ap.parse_args()
    seqs = generate(SynthConfig(seed=args.seed))
    rep = summarize(seqs)
    print(json.dumps({
        "users": rep.users,
        "events": rep.rows_read,
        "multiplicity": rep.multiplicity,
        "platform_events": rep.platform_counts,
        "median_length": rep.median_length,
        "mean_length": round(rep.mean_length, 1),
        "max_length": rep.max_length,
    }, indent=2))
    if args.out:
        write_events(seqs, args.out)


if __name__ == "__main__":
    main()
