#!/usr/bin/env python3
"""MaxSAT-Evaluation style front end to the RC2 solver from python-sat.

Usage: rc2_maxsat.py <file.wcnf>. Prints "s", "o" and a "v" literal line.
"""
import signal
import sys

from pysat.examples.rc2 import RC2, RC2Stratified
from pysat.formula import WCNF


def main():
    if len(sys.argv) != 2:
        print("usage: rc2_maxsat.py <file.wcnf>", file=sys.stderr)
        return 1

    def on_term(signum, frame):
        print("s UNKNOWN", flush=True)
        sys.exit(0)

    signal.signal(signal.SIGTERM, on_term)
    wcnf = WCNF(from_file=sys.argv[1])
    weights = set(wcnf.wght)
    cls = RC2Stratified if len(weights) > 1 else RC2
    with cls(wcnf, solver="g3", adapt=True, exhaust=True, minz=True) as rc2:
        model = rc2.compute()
        if model is None:
            print("s UNSATISFIABLE")
            return 0
        print(f"o {rc2.cost}")
        print("s OPTIMUM FOUND")
        print("v " + " ".join(str(l) for l in model))
    return 0


if __name__ == "__main__":
    sys.exit(main())
