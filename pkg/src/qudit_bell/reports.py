"""Table and figure data as CSV rows."""
from __future__ import annotations

import csv
import io
import logging
from functools import lru_cache

from .errors import InvalidArgument
from .estimate import BEHAVIOUR, CGLMP, estimate_pv_behaviour, estimate_pv_cglmp
from .optimizer import find_mvs
from .scan import scan_family
from .states import make_mes, make_mss

log = logging.getLogger(__name__)

# configurations per row in the published tables; scaled down by `samples_scale`
TABLE1_SIZES = {2: 10**10, 3: 10**9, 4: 5 * 10**8, 5: 10**8, 6: 10**7, 7: 10**6}
TABLE2_SIZES = {2: 10**9, 3: 10**8, 4: 10**7, 5: 225_000}

TABLE1_COLUMNS = ["d", "r", "state_kind", "samples", "violations", "p_hat", "p_hat_percent", "ci_low", "ci_high"]
TABLE2_COLUMNS = ["d", "settings", "samples", "violations", "p_hat", "p_hat_percent", "ci_low", "ci_high"]
SERIES_COLUMNS = ["series", "x", "y", "ci_low", "ci_high"]
GRID_COLUMNS = ["theta0", "theta1", "pv", "violations", "samples"]

FIGURES = ("fig2", "fig4", "fig5", "fig3", "fig6")
MVS_RESTARTS = 20


@lru_cache(maxsize=None)
def mvs_state(r: int, d: int, seed: int = 0):
    """Rank-r CGLMP maximizer, zero-padded to dimension d (d = r gives the full-rank one)."""
    return find_mvs(r, MVS_RESTARTS, seed).state.padded(d)


def scaled(size: int, scale: float) -> int:
    if not 0 < scale <= 1:
        raise InvalidArgument("samples_scale must lie in (0, 1]")
    return max(1, int(round(size * scale)))


def _pct_row(est) -> dict:
    return {
        "samples": est.samples,
        "violations": est.violations,
        "p_hat": est.p_hat,
        "p_hat_percent": 100 * est.p_hat,
        "ci_low": 100 * est.ci_low,
        "ci_high": 100 * est.ci_high,
    }


def emit_table1(samples_scale: float, seed: int = 0, workers: int | None = None, max_d: int = 7) -> list[dict]:
    """Behaviour-space p_v with two settings per party for every (d, r) row, both state kinds."""
    rows = []
    for d in range(2, max_d + 1):
        n = scaled(TABLE1_SIZES[d], samples_scale)
        for r in range(2, d + 1):
            for kind, state in (("mss", make_mss(r, d)), ("mvs", mvs_state(r, d, seed))):
                est = estimate_pv_behaviour(state, 2, 2, n, seed, workers)
                rows.append({"d": d, "r": r, "state_kind": kind, **_pct_row(est)})
                log.info("table1 d=%d r=%d %s: %.3f%%", d, r, kind, 100 * est.p_hat)
    return rows


def emit_table2(samples_scale: float, seed: int = 0, workers: int | None = None, max_d: int = 5) -> list[dict]:
    """Behaviour-space p_v of the maximally entangled state with three settings per party."""
    rows = []
    for d in range(2, max_d + 1):
        est = estimate_pv_behaviour(make_mes(d), 3, 3, scaled(TABLE2_SIZES[d], samples_scale), seed, workers)
        rows.append({"d": d, "settings": 3, **_pct_row(est)})
    return rows


def _series_row(series, x, est) -> dict:
    return {"series": series, "x": x, "y": est.p_hat, "ci_low": est.ci_low, "ci_high": est.ci_high}


def emit_figure_data(figure: str, params: dict | None = None, seed: int = 0, workers: int | None = None) -> list[dict]:
    """Long-format series rows (fig2, fig4, fig5) or grid rows (fig3, fig6).

    params: dims, samples, min_hits, grid_n as applicable.
    """
    params = dict(params or {})
    if figure not in FIGURES:
        raise InvalidArgument(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    rows = []
    if figure == "fig2":
        dims = params.get("dims", (2, 3, 4, 5))
        samples = params.get("samples", 10**6)
        min_hits = params.get("min_hits", 1000)
        for d in dims:
            for series, state in (("MES", make_mes(d)), ("MVS", mvs_state(d, d, seed))):
                rows.append(_series_row(series, d, estimate_pv_cglmp(state, samples, seed, workers, min_hits)))
    elif figure == "fig4":
        dims = params.get("dims", (2, 3, 4, 5))
        samples = params.get("samples", 10**4)
        for d in dims:
            for series, state in (("MES", make_mes(d)), ("MVS", mvs_state(d, d, seed))):
                rows.append(_series_row(series, d, estimate_pv_behaviour(state, 2, 2, samples, seed, workers)))
    elif figure == "fig5":
        dims = params.get("dims", (2, 3, 4, 5, 6))
        samples = params.get("samples", 10**4)
        for d in dims:
            for r in range(2, d + 1):
                est = estimate_pv_behaviour(make_mss(r, d), 2, 2, samples, seed, workers)
                rows.append(_series_row(f"r={r}", d, est))
    else:
        scenario = CGLMP if figure == "fig3" else BEHAVIOUR
        grid_n = params.get("grid_n", 40 if figure == "fig3" else 10)
        samples = params.get("samples", 10**5 if figure == "fig3" else 1000)
        grid = scan_family(params.get("d", 4), scenario, grid_n, samples, seed, workers)
        rows = grid_rows(grid)
    return rows


def grid_rows(grid) -> list[dict]:
    rows = []
    for i, t0 in enumerate(grid.theta0_axis):
        for j, t1 in enumerate(grid.theta1_axis):
            v = int(grid.violations[i, j])
            rows.append({"theta0": float(t0), "theta1": float(t1), "pv": v / grid.samples, "violations": v, "samples": grid.samples})
    return rows


def columns_for(rows: list[dict]) -> list[str]:
    if not rows:
        return []
    keys = list(rows[0])
    for cols in (TABLE1_COLUMNS, TABLE2_COLUMNS, SERIES_COLUMNS, GRID_COLUMNS):
        if keys == cols:
            return cols
    return keys


def to_csv(rows: list[dict], columns: list[str] | None = None) -> str:
    """CSV text with a header row; floats use repr, so the decimal separator is always a dot."""
    columns = columns or columns_for(rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in (row[c] for c in columns)])
    return buf.getvalue()
