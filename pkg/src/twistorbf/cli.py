"""Command line driver: run verification suites, emit JSON reports.

Exit codes: 0 all checks pass, 1 at least one failure (report is still
written), 2 usage error.  Reports are deterministic for a fixed
configuration up to the wall_time field.
"""

import argparse
import json
import sys
import time

from .suites import SUITE_NAMES, SuiteConfig, run_suite


def _parse_n_range(text):
    try:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(
            "expected A..B with integer endpoints, got %r" % text)


def build_parser():
    p = argparse.ArgumentParser(
        prog="twistorbf",
        description="verification suites for the spectral sphere models, "
                    "homotopy kernels, transfer engine and field theory "
                    "checks")
    p.add_argument("--suite", default="all", choices=SUITE_NAMES)
    p.add_argument("--truncation", type=int, default=None,
                   help="spectral truncation level (suite default if unset)")
    p.add_argument("--quadrature", type=int, default=None,
                   help="quadrature order for kernel checks (default 64)")
    p.add_argument("--tol", type=float, default=None,
                   help="override every non-exact threshold")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-range", type=_parse_n_range, default=None,
                   metavar="A..B", help="twist range (suite default if unset)")
    p.add_argument("--rank", type=int, default=2,
                   help="matrix coefficient rank")
    p.add_argument("--max-arity", type=int, default=4)
    p.add_argument("--out", default=None, metavar="FILE",
                   help="write the JSON report here instead of stdout")
    p.add_argument("--parallel", action="store_true",
                   help="run per-twist checks in a thread pool")
    return p


def _versions():
    import numpy
    import scipy
    try:
        from importlib.metadata import version
        own = version("twistorbf")
    except Exception:
        own = "unknown"
    return {
        "twistorbf": own,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "python": "%d.%d.%d" % sys.version_info[:3],
    }


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = SuiteConfig(suite=args.suite, truncation=args.truncation,
                      quadrature=args.quadrature, tol=args.tol,
                      seed=args.seed, n_range=args.n_range, rank=args.rank,
                      max_arity=args.max_arity, parallel=args.parallel)
    try:
        cfg.validate()
    except ValueError as e:
        build_parser().error(str(e))
    start = time.time()
    report = run_suite(cfg)
    report["wall_time"] = round(time.time() - start, 3)
    report["versions"] = _versions()
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
