"""Write the c(n) table and the F(n0)^lambda curve as CSV files.

    python3 scripts/reproduce_figures.py --out-dir results/
"""

import argparse
from pathlib import Path

from qsl import analysis


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    ap.add_argument("--n-max", type=int, default=30)
    ap.add_argument("--n0", type=int, default=5)
    ap.add_argument("--lambda-max", type=int, default=300)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    rows = analysis.bounds_rows(args.n_max)
    with open(args.out_dir / "bounds.csv", "w", newline="") as fh:
        analysis.write_csv(fh, analysis.BoundsRow.HEADER, (r.cells() for r in rows))
    with open(args.out_dir / "fig4.csv", "w", newline="") as fh:
        analysis.write_csv(fh, analysis.FIG4_HEADER, (analysis.fig4_cells(r) for r in rows))
    curve = analysis.fig5_rows(args.n0, args.lambda_max)
    with open(args.out_dir / "fig5.csv", "w", newline="") as fh:
        analysis.write_csv(fh, analysis.CurveRow.HEADER, (r.cells() for r in curve))

    print(f"F({args.n0}) = {analysis.f_bound(args.n0):.15f}")
    print(f"F({args.n0})^{args.lambda_max} = {curve[-1].value:.10g}")
    n0, lam, published = analysis.PUBLISHED_FIG5
    if args.n0 == n0:
        print(f"published value at lambda={lam}: {published} "
              f"(reached at lambda = {analysis.lambda_for_level(n0, published):.3f})")
    print(f"halving step: {analysis.halving_lambda(args.n0):.3f}")
    print(f"wrote bounds.csv, fig4.csv, fig5.csv to {args.out_dir}")


if __name__ == "__main__":
    main()
