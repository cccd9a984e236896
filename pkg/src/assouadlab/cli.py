"""Command-line front end.

Subcommands: gen, map, dim, spectrum, refine, porosity, verify. Numeric
output uses full round-trip decimal formatting; identical command lines on
identical inputs give byte-identical outputs once --no-timestamp suppresses
the one volatile field. Estimator defaults may be supplied via --config
(JSON) with individual flags taking precedence; worker count comes from
--threads or the ASSOUADLAB_THREADS environment variable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import harness, pointset
from .cmaps import apply_map, parse_map
from .dimension import EstimatorParams, build_count_table, estimate_assouad, estimate_spectrum
from .errors import AssouadLabError
from .porosity import PorosityParams, estimate_porosity
from .refine import RefineSchedule, refine

log = logging.getLogger("assouadlab")


def _parse_theta_grid(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise AssouadLabError("theta grammar is start:stop:step, e.g. 0.05:0.95:0.05")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or start <= 0 or stop >= 1 or start > stop:
        raise AssouadLabError("need 0 < start <= stop < 1 and step > 0")
    out = []
    k = 0
    while True:
        t = start + k * step
        if t > stop + 1e-12:
            break
        out.append(min(t, stop))
        k += 1
    return out


def _resolve_params(args) -> EstimatorParams:
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    merged = {
        "n_centers": cfg.get("n_centers", 4096),
        "r_grid": tuple(cfg.get("r_grid", EstimatorParams().r_grid)),
        "m_max": cfg.get("m_max", 26),
        "c_res": cfg.get("c_res", 4.0),
        "m_min": cfg.get("m_min", 8),
        "threads": cfg.get("threads"),
    }
    for flag, key in (
        ("centers", "n_centers"),
        ("m_max", "m_max"),
        ("c_res", "c_res"),
        ("m_min", "m_min"),
    ):
        v = getattr(args, flag, None)
        if v is not None:
            merged[key] = v
    if getattr(args, "r_grid", None):
        merged["r_grid"] = tuple(float(x) for x in args.r_grid.split(","))
    threads = getattr(args, "threads", None)
    if threads is None:
        env = os.environ.get("ASSOUADLAB_THREADS")
        threads = int(env) if env else merged["threads"]
    merged["threads"] = threads
    params = EstimatorParams(**merged)
    log.info("resolved estimator parameters: %s", json.dumps(params.to_dict(), sort_keys=True))
    return params


def _maybe_timestamp(args):
    if getattr(args, "no_timestamp", False):
        return None
    return datetime.now(timezone.utc).isoformat()


def _emit(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _add_estimator_flags(sp):
    sp.add_argument("--config", help="JSON file with estimator parameter defaults")
    sp.add_argument("--centers", type=int, help="probe center budget")
    sp.add_argument("--m-max", dest="m_max", type=int, help="deepest dyadic level")
    sp.add_argument("--c-res", dest="c_res", type=float,
                    help="resolution multiplier; smallest probed cell is c_res*delta")
    sp.add_argument("--m-min", dest="m_min", type=int, help="count threshold")
    sp.add_argument("--r-grid", dest="r_grid", help="comma-separated radii in (0,1)")
    sp.add_argument("--threads", type=int, help="worker threads (or ASSOUADLAB_THREADS)")
    sp.add_argument("--no-timestamp", action="store_true",
                    help="omit the timestamp field for byte-identical reruns")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="assouadlab", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", help="generate a built-in point family")
    sp.add_argument("--set", required=True, dest="setspec",
                    help="seq:<p> | geom:<q> | cantor:<ratio>:<depth> | grid:<n> "
                         "| spiral:<p>:<tmax>:<step> | file:<path>")
    sp.add_argument("--count", type=int, help="element count (defaults to the "
                    "natural size for grid/cantor)")
    sp.add_argument("-o", "--output", required=True)

    sp = sub.add_parser("map", help="apply a map expression to a point file")
    sp.add_argument("--map", required=True, dest="mapexpr",
                    help="e.g. 'stretch(2)|pow(2)'")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--exclusion", type=float,
                    help="singularity exclusion radius (default 1e-9 * diameter)")

    sp = sub.add_parser("dim", help="estimate the Assouad dimension")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("--json", action="store_true", dest="as_json")
    sp.add_argument("-o", "--output")
    _add_estimator_flags(sp)

    sp = sub.add_parser("spectrum", help="estimate the regularized spectrum")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("--theta", required=True, help="start:stop:step grid in (0,1)")
    sp.add_argument("-o", "--output")
    _add_estimator_flags(sp)

    sp = sub.add_parser("refine", help="run the major/minor refinement schedule")
    sp.add_argument("--map", required=True, dest="mapexpr")
    sp.add_argument("--alpha", required=True, type=float)
    sp.add_argument("--p", required=True, type=float)
    sp.add_argument("--Rprime", required=True, type=float)
    sp.add_argument("--jmax", required=True, type=int)
    sp.add_argument("--theta", type=float, help="optional spectrum constraint")
    sp.add_argument("--max-level", type=int, default=40)
    sp.add_argument("-o", "--output")
    sp.add_argument("--no-timestamp", action="store_true")

    sp = sub.add_parser("porosity", help="estimate the porosity constant")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("--witnesses", action="store_true",
                    help="include the full witness list in the JSON report")
    sp.add_argument("-o", "--output")
    sp.add_argument("--no-timestamp", action="store_true")

    sp = sub.add_parser("verify", help="run a theorem-verification suite")
    sp.add_argument("--suite", required=True, choices=harness.SUITE_NAMES)
    sp.add_argument("-o", "--output")
    sp.add_argument("--csv", help="also write the CSV summary here")
    _add_estimator_flags(sp)
    return ap


def _cmd_gen(args) -> int:
    spec = pointset.parse_setspec(args.setspec)
    count = args.count
    if count is None:
        count = pointset.natural_size(spec)
        if count is None:
            raise AssouadLabError("--count is required for this set family")
    E = pointset.generate(spec, count)
    pointset.save(E, args.output)
    log.info("wrote %d points to %s", len(E), args.output)
    return 0


def _cmd_map(args) -> int:
    expr = parse_map(args.mapexpr)
    E = pointset.load(args.input)
    img = apply_map(expr, E, exclusion=args.exclusion)
    pointset.save(img, args.output)
    log.info("wrote %d image points to %s", len(img), args.output)
    return 0


def _cmd_dim(args) -> int:
    params = _resolve_params(args)
    E = pointset.load(args.input)
    En, _ = pointset.normalize(E)
    est = estimate_assouad(En, params)
    if args.as_json or args.output:
        d = json.loads(est.to_json())
        d["params"] = params.to_dict()
        ts = _maybe_timestamp(args)
        if ts:
            d["timestamp"] = ts
        _emit(json.dumps(d, sort_keys=True, indent=1) + "\n", args.output)
    else:
        _emit(f"assouad_dimension {est.value!r}\n", None)
    return 0


def _cmd_spectrum(args) -> int:
    params = _resolve_params(args)
    thetas = _parse_theta_grid(args.theta)
    E = pointset.load(args.input)
    En, _ = pointset.normalize(E)
    table = build_count_table(En, params)
    curve = estimate_spectrum(En, thetas, table=table)
    header = f"# params={json.dumps(params.to_dict(), sort_keys=True)}\n"
    ts = _maybe_timestamp(args)
    if ts:
        header += f"# timestamp={ts}\n"
    _emit(header + curve.to_csv(), args.output)
    return 0


def _cmd_refine(args) -> int:
    expr = parse_map(args.mapexpr)
    if not expr.is_holomorphic:
        raise AssouadLabError("refine requires a holomorphic map expression")
    sch = RefineSchedule(
        r_prime=args.Rprime,
        d=expr.holomorphic_part_degree,
        alpha=args.alpha,
        p=args.p,
        theta=args.theta,
    )
    j0 = sch.j0
    if args.jmax < j0:
        raise AssouadLabError(f"--jmax must be >= j0 = {j0}")
    runs = []
    for j in range(j0, args.jmax + 1):
        res = refine(expr, sch.root, sch.target(j), max_level=args.max_level)
        runs.append(
            {
                "j": j,
                "target": sch.target(j),
                "total_minors": res.total_minors,
                "major_counts": {str(k): v for k, v in sorted(res.major_counts.items())},
                "majors_below_r_j": res.majors_tail(j + 1),
                "growth_fit": res.growth_fit,
            }
        )
    tails = [max(r["majors_below_r_j"], 1) for r in runs]
    fit = None
    if len(tails) >= 2:
        js = np.arange(j0, args.jmax + 1, dtype=float)
        fit = float(np.polyfit(js, np.log2(np.array(tails, dtype=float)), 1)[0])
    out = {
        "schedule": {
            "Rprime": sch.r_prime,
            "d": sch.d,
            "alpha": sch.alpha,
            "p": sch.p,
            "beta": sch.beta,
            "R": sch.R,
            "theta": sch.theta,
            "j0": j0,
        },
        "runs": runs,
        "tail_exponent_fit": fit,
    }
    ts = _maybe_timestamp(args)
    if ts:
        out["timestamp"] = ts
    _emit(json.dumps(out, sort_keys=True, indent=1) + "\n", args.output)
    return 0


def _cmd_porosity(args) -> int:
    E = pointset.load(args.input)
    En, _ = pointset.normalize(E)
    rep = estimate_porosity(En, PorosityParams())
    d = json.loads(rep.to_json(include_witnesses=args.witnesses))
    ts = _maybe_timestamp(args)
    if ts:
        d["timestamp"] = ts
    _emit(json.dumps(d, sort_keys=True, indent=1) + "\n", args.output)
    return 0


def _cmd_verify(args) -> int:
    params = _resolve_params(args)
    ctx = harness.SuiteContext(params)
    reports = harness.run_suite(args.suite, ctx)
    ts = _maybe_timestamp(args)
    _emit(harness.reports_to_json(reports, timestamp=ts) + "\n", args.output)
    if args.csv:
        _emit(harness.reports_to_csv(reports), args.csv)
    bad = [r for r in reports if not r.ok]
    for r in reports:
        log.info("%s %s: %s", r.suite, r.row, r.verdict)
    if bad:
        for r in bad:
            print(f"UNEXPECTED {r.suite} {r.row}: verdict={r.verdict} "
                  f"expected={r.expected_verdict}", file=sys.stderr)
        return 1
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "map": _cmd_map,
    "dim": _cmd_dim,
    "spectrum": _cmd_spectrum,
    "refine": _cmd_refine,
    "porosity": _cmd_porosity,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _COMMANDS[args.command](args)
    except (AssouadLabError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
