"""Sweep the forging harness over colluders k and security parameter lambda.

Each row compares the empirical acceptance rate with the strategy's exact
rate F(k)^(K lambda) (blind guessing when k = 0).

    python3 scripts/attack_sweep.py --trials 200000 --out sweep.csv
"""

import argparse
import sys

from qsl.adversary import BlindRandom, Measured
from qsl.analysis import fmt, write_csv
from qsl.harness import ExperimentConfig, run_forging


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k-max", type=int, default=3)
    ap.add_argument("--lambda-max", type=int, default=10)
    ap.add_argument("--flips", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--l", type=int, default=2)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--gate", type=float, default=3.0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    header = None
    rows = []
    failures = 0
    for k in range(args.k_max + 1):
        for lam in range(1, args.lambda_max + 1):
            for flips in args.flips:
                cfg = ExperimentConfig(
                    lam=lam, l=max(args.l, flips), n_participants=k + 1, k_colluders=k,
                    trials=args.trials, master_seed=args.seed,
                    strategy=Measured(k) if k else BlindRandom(), flips=flips)
                d = run_forging(cfg).to_dict()
                header = header or list(d)
                rows.append([fmt(v) if not isinstance(v, str) else v for v in d.values()])
                z = d["z_score"]
                failures += z is None or abs(z) > args.gate

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        write_csv(out, header, rows)
    finally:
        if args.out:
            out.close()
    print(f"{len(rows)} configurations, {failures} outside |z| <= {args.gate}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
