"""Write the CSV data behind every figure into one directory."""
import argparse
import logging
from pathlib import Path

from qudit_bell.reports import FIGURES, emit_figure_data, to_csv

# desk-scale defaults; raise --samples for smoother curves
PARAMS = {
    "fig2": {"dims": (2, 3, 4, 5), "samples": 10**7, "min_hits": 1000},
    "fig4": {"dims": (2, 3, 4, 5), "samples": 10**4},
    "fig5": {"dims": (2, 3, 4, 5, 6), "samples": 10**4},
    "fig3": {"grid_n": 40, "samples": 10**6},
    "fig6": {"grid_n": 10, "samples": 1000},
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("figures", nargs="*", default=list(FIGURES), choices=FIGURES)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.figures:
        rows = emit_figure_data(name, PARAMS[name], args.seed, args.threads)
        (out / f"{name}.csv").write_text(to_csv(rows))
        print(f"{name}: {len(rows)} rows -> {out / (name + '.csv')}")


if __name__ == "__main__":
    main()
