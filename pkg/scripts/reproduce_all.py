"""Regenerate every table and figure dataset into one directory."""

import argparse
import sys
from pathlib import Path

from rasec.cli import main as rasec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", type=Path)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    threads = ["--threads", str(args.threads)]
    steps = [
        ["fig2", "--out", str(args.out / "fig2")],
        ["table2", "--out", str(args.out / "table2"), *threads],
        ["table3", "--out", str(args.out / "table3"), "--dump-trials", *threads],
        ["fig4", "--out", str(args.out / "fig4"), *threads],
    ]
    for argv in steps:
        code = rasec(argv)
        if code:
            sys.exit(code)
    dumps = sorted((args.out / "table3" / "trials").glob("*RASEC_t00.json"))
    if dumps:
        sys.exit(rasec(["heatmap", str(dumps[0]), str(args.out / "heatmap")]))


if __name__ == "__main__":
    main()
