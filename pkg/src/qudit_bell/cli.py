"""Command-line entry point: qbl {pv,mvs,scan,fit,table1,table2,figure}."""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

from .errors import QuditBellError, SolverFailure
from .estimate import BEHAVIOUR, CGLMP, estimate_pv_behaviour, estimate_pv_cglmp
from .optimizer import find_mvs
from .records import RunConfig, ResultRecord, StateSpec
from .reports import FIGURES, emit_figure_data, emit_table1, emit_table2, grid_rows, mvs_state, to_csv
from .scan import fit_decay, scan_family
from .states import make_mes

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3

_SCENARIOS = {"cglmp": CGLMP, "behaviour": BEHAVIOUR}


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # the subcommand copies use SUPPRESS so they do not overwrite values given before the subcommand
    def default(v):
        return argparse.SUPPRESS if suppress else v

    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--seed", type=int, default=default(0))
    g.add_argument("--threads", type=int, default=default(int(os.environ.get("QBL_THREADS", "1"))), help="worker processes (default: $QBL_THREADS or 1)")
    g.add_argument("--out", default=default(None), help="write the JSON record here instead of stdout")
    g.add_argument("--csv", default=default(None), help="also write tabular output as CSV")
    g.add_argument("-v", "--verbose", action="store_true", default=default(False))
    return g


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qbl", description="Probability of violation of local realism for two qudits.", parents=[_global_flags(False)])
    common = _global_flags(True)
    sub = p.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("pv", parents=[common], help="estimate p_v for one state")
    pv.add_argument("scenario", choices=sorted(_SCENARIOS))
    pv.add_argument("--d", type=int, required=True)
    pv.add_argument("--state", choices=["mes", "mss", "family", "alpha", "mvs"], default="mes")
    pv.add_argument("--rank", type=int)
    pv.add_argument("--theta0", type=float)
    pv.add_argument("--theta1", type=float)
    pv.add_argument("--alpha", type=_floats, help="explicit Schmidt coefficients, comma separated")
    pv.add_argument("--settings", type=int, default=2, help="settings per party (behaviour scenario)")
    pv.add_argument("--samples", type=int, default=10**5)
    pv.add_argument("--min-hits", type=int, help="stop early once this many violations are seen (cglmp)")
    pv.add_argument("--restarts", type=int, default=20, help="see-saw restarts when --state mvs")
    pv.add_argument("--checkpoint", help="resume from / write progress to this JSON file")

    mvs = sub.add_parser("mvs", parents=[common], help="find the maximally violating state")
    mvs.add_argument("--d", type=int, required=True)
    mvs.add_argument("--restarts", type=int, default=20)

    scan = sub.add_parser("scan", parents=[common], help="p_v over the rank-3 family")
    scan.add_argument("--d", type=int, default=4)
    scan.add_argument("--scenario", choices=sorted(_SCENARIOS), default="cglmp")
    scan.add_argument("--grid-n", type=int, default=40)
    scan.add_argument("--samples", type=int, default=10**5, help="samples per grid point")

    fit = sub.add_parser("fit", parents=[common], help="fit p_v ~ (2 pi)^(b d) to CGLMP estimates")
    fit.add_argument("--series", choices=["mes", "mvs"], default="mes")
    fit.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 5])
    fit.add_argument("--samples", type=int, nargs="+", default=[10**6, 10**6, 10**7, 10**8], help="sample cap per dimension")
    fit.add_argument("--min-hits", type=int, default=1000)
    fit.add_argument("--points", help="fit these 'd:p' pairs instead of sampling, e.g. 2:0.32,3:0.045")

    t1 = sub.add_parser("table1", parents=[common], help="behaviour-space table, two settings")
    t1.add_argument("--scale", type=float, default=1e-4, help="fraction of the published sample sizes")
    t1.add_argument("--max-d", type=int, default=7)

    t2 = sub.add_parser("table2", parents=[common], help="behaviour-space table, three settings")
    t2.add_argument("--scale", type=float, default=1e-3)
    t2.add_argument("--max-d", type=int, default=5)

    fig = sub.add_parser("figure", parents=[common], help="plot data as CSV")
    fig.add_argument("name", choices=FIGURES)
    fig.add_argument("--dims", type=int, nargs="+")
    fig.add_argument("--samples", type=int)
    fig.add_argument("--grid-n", type=int)
    fig.add_argument("--d", type=int, help="dimension for the grid figures")
    return p


def config_from_args(args) -> RunConfig:
    g = lambda name: getattr(args, name, None)  # noqa: E731
    spec = StateSpec()
    mA = mB = 2
    if args.command == "pv":
        spec = StateSpec(args.state, args.rank, args.theta0, args.theta1, args.alpha)
        if args.scenario == "behaviour":
            mA = mB = args.settings
    elif args.command == "table2":
        mA = mB = 3
    scenario = g("scenario")
    samples = g("samples")
    if isinstance(samples, list):  # fit takes one cap per dimension
        samples = None
    return RunConfig(
        command=args.command,
        d=g("d"),
        rank=g("rank"),
        mA=mA,
        mB=mB,
        scenario=_SCENARIOS.get(scenario, scenario),
        samples=samples,
        seed=args.seed,
        grid_n=g("grid_n"),
        output_path=args.out,
        state_spec=spec,
        restarts=g("restarts") or 20,
        min_hits=g("min_hits"),
        scale=g("scale"),
        figure=g("name"),
        dims=tuple(g("dims")) if g("dims") else None,
    ).validate()


def _run_pv(args, cfg):
    state = cfg.state_spec.build(cfg.d, cfg.seed, cfg.restarts)
    if cfg.scenario == CGLMP:
        est = estimate_pv_cglmp(state, cfg.samples, cfg.seed, args.threads, cfg.min_hits, args.checkpoint)
    else:
        est = estimate_pv_behaviour(state, cfg.mA, cfg.mB, cfg.samples, cfg.seed, args.threads, checkpoint=args.checkpoint)
    result = {**est.to_dict(), "alpha": list(state.alpha)}
    summary = f"p_v = {est.p_hat:.6f} [{est.ci_low:.6f}, {est.ci_high:.6f}] ({est.violations}/{est.samples}, {cfg.state_spec.label()}, d={cfg.d}, {cfg.scenario})"
    return result, summary, None


def _run_mvs(args, cfg):
    res = find_mvs(cfg.d, cfg.restarts, cfg.seed)
    alpha = ", ".join(f"{a:.4f}" for a in res.alpha)
    return res.to_dict(), f"I_max = {res.best_value:.6f} at alpha = ({alpha})", None


def _run_scan(args, cfg):
    grid = scan_family(cfg.d, cfg.scenario, cfg.grid_n, cfg.samples, cfg.seed, args.threads)
    t0, t1, p = grid.argmax
    return grid.to_dict(), f"argmax p_v = {p:.6f} at (theta0, theta1) = ({t0:.4f}, {t1:.4f})", grid_rows(grid)


def _run_fit(args, cfg):
    points = []
    rows = []
    if args.points:
        for item in args.points.split(","):
            d, p = item.split(":")
            points.append((int(d), float(p)))
    else:
        caps = list(args.samples)
        if len(caps) == 1:
            caps = caps * len(args.dims)
        if len(caps) != len(args.dims):
            raise argparse.ArgumentTypeError("--samples needs one value or one per dimension")
        for d, cap in zip(args.dims, caps):
            state = make_mes(d) if args.series == "mes" else mvs_state(d, d, cfg.seed)
            est = estimate_pv_cglmp(state, cap, cfg.seed, args.threads, args.min_hits)
            points.append((d, est.p_hat))
            rows.append({"series": args.series.upper(), "x": d, "y": est.p_hat, "ci_low": est.ci_low, "ci_high": est.ci_high})
    fit = fit_decay(points)
    result = {**fit.to_dict(), "points": [list(p) for p in points]}
    return result, f"p_v ~ (2 pi)^({fit.slope_b:.3f} d), residual {fit.residual:.3g}", rows or None


def _run_table1(args, cfg):
    rows = emit_table1(cfg.scale, cfg.seed, args.threads, args.max_d)
    return {"rows": rows}, f"{len(rows)} rows at scale {cfg.scale:g}", rows


def _run_table2(args, cfg):
    rows = emit_table2(cfg.scale, cfg.seed, args.threads, args.max_d)
    return {"rows": rows}, f"{len(rows)} rows at scale {cfg.scale:g}", rows


def _run_figure(args, cfg):
    params = {}
    for key in ("dims", "samples", "grid_n", "d"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = tuple(val) if isinstance(val, list) else val
    rows = emit_figure_data(args.name, params, cfg.seed, args.threads)
    return {"rows": rows}, f"{args.name}: {len(rows)} rows", rows


_HANDLERS = {
    "pv": _run_pv,
    "mvs": _run_mvs,
    "scan": _run_scan,
    "fit": _run_fit,
    "table1": _run_table1,
    "table2": _run_table2,
    "figure": _run_figure,
}


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    started = time.perf_counter()
    try:
        cfg = config_from_args(args)
        result, summary, rows = _HANDLERS[args.command](args, cfg)
    except SolverFailure as exc:
        print(f"qbl: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (QuditBellError, argparse.ArgumentTypeError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"qbl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    record = ResultRecord.create(cfg, result, started)
    text = record.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    if args.csv and rows is not None:
        Path(args.csv).write_text(to_csv(rows))
    print(summary, file=sys.stderr)
    return EXIT_OK


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
