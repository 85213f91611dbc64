"""Regenerate the bundled toy corpus and its embedding/lemma/synonym files."""

import argparse

from syntf.fixture import bundled_path, write_fixture

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(bundled_path("")))
    ap.add_argument("--seed", type=int, default=2018)
    args = ap.parse_args()
    for name, path in write_fixture(args.out, args.seed).items():
        print(f"{name}: {path}")
