#!/usr/bin/env python3
"""Run every verification suite with one shared estimate cache.

Writes <outdir>/<suite>.json and <outdir>/<suite>.csv per suite and prints a
one-line summary per row. Exit code 1 if any row is not as expected.
"""

import argparse
import pathlib
import sys
import time

from assouadlab.harness import (
    SUITE_NAMES,
    SuiteContext,
    reports_to_csv,
    reports_to_json,
    run_suite,
)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="suite_reports")
    ap.add_argument("--suites", nargs="*", default=list(SUITE_NAMES))
    args = ap.parse_args(argv)

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    ctx = SuiteContext()
    failed = 0
    for name in args.suites:
        t0 = time.time()
        reports = run_suite(name, ctx)
        dt = time.time() - t0
        (outdir / f"{name}.json").write_text(reports_to_json(reports) + "\n")
        (outdir / f"{name}.csv").write_text(reports_to_csv(reports))
        bad = [r for r in reports if not r.ok]
        failed += len(bad)
        print(f"{name}: {len(reports)} rows, {len(bad)} unexpected ({dt:.1f}s)")
        for r in bad:
            print(f"  UNEXPECTED {r.row}: {r.verdict} (wanted {r.expected_verdict})")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
