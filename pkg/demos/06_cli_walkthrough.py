"""Drive the command line end to end in a scratch directory.

Generates a dataset, fits CCA on it, trains a classifier, evaluates the
checkpoint and shows that a corrupt checkpoint is refused with exit code 4.
"""

import argparse
import json
import os
import tempfile

from ccguide.cli import main as ccguide


def run(*argv):
    print("$ ccguide " + " ".join(argv), flush=True)
    code = ccguide(list(argv))
    print(f"  -> exit {code}\n")
    return code


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=3)
    parser.add_argument("--epochs", type=int, default=20)
    args = parser.parse_args()
    with tempfile.TemporaryDirectory() as tmp:
        os.chdir(tmp)
        run("gen", "--kind", "classification", "--n", "600", "--seed", str(args.seed), "--out", "data")
        run("cca-fit", "--data", "data")
        run("train", "--task", "classify", "--data", "data", "--epochs", str(args.epochs),
            "--out", "run")
        with open("run/report.json", encoding="utf-8") as fh:
            report = json.load(fh)
        print("report final test metrics:", report["final"]["test"], "\n")
        run("eval", "--checkpoint", "run/checkpoint.json")
        with open("run/checkpoint.json", "r+", encoding="utf-8") as fh:
            fh.truncate(100)
        run("eval", "--checkpoint", "run/checkpoint.json")


if __name__ == "__main__":
    main()
