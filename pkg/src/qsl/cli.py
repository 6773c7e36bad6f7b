"""Command-line front end.

Exit codes: 0 success, 1 acceptance-gate failure (or a failed honest demo),
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager
from fractions import Fraction

from . import analysis
from .adversary import BlindRandom, Measured, parse_strategy
from .harness import ExperimentConfig, cost_accounting, default_threads, run_forging
from .protocol import (
    ProtocolParams,
    Signature,
    Verdict,
    acceptance_probability,
    issue_copy,
    pk_gen,
    random_message,
    sign,
    sk_gen,
    verify,
)
from .qubit import KeyCell
from .seeding import CounterRng, derive_trial_seed
from .serialization import (
    message_to_obj,
    private_key_to_obj,
    public_key_to_obj,
    signature_to_obj,
)

TAMPER_MODES = ("none", "flip-one-eigenvalue", "wrong-basis-block")


class UsageError(Exception):
    pass


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def tamper(sig: Signature, mode: str) -> Signature:
    """Corrupt block 0: flip one eigenvalue, or swap the basis of every cell."""
    if mode == "none":
        return sig
    blocks = [list(b) for b in sig.blocks]
    if mode == "flip-one-eigenvalue":
        cell = blocks[0][0]
        blocks[0][0] = KeyCell(cell.eigenvalue.flipped(), cell.basis)
    elif mode == "wrong-basis-block":
        blocks[0] = [KeyCell(cell.eigenvalue, cell.basis.other) for cell in blocks[0]]
    else:
        raise ValueError(f"unknown tamper mode {mode!r}")
    return Signature(tuple(tuple(b) for b in blocks))


def _demo_run(params: ProtocolParams, seed: int, mode: str):
    rng = CounterRng(seed)
    sk = sk_gen(params, rng)
    pk = pk_gen(sk)
    reg = issue_copy(pk, 0)
    m = random_message(params.l, rng)
    sig = tamper(sign(sk, m), mode)
    return sk, pk, m, sig, verify(reg, m, sig, rng)


def cmd_demo(args) -> int:
    params = ProtocolParams(args.lam, args.l)
    sk, pk, m, sig, verdict = _demo_run(params, derive_trial_seed(args.seed, 0), args.tamper)
    p = acceptance_probability(pk, m, sig)
    transcript = {
        "lambda": args.lam,
        "l": args.l,
        "seed": args.seed,
        "tamper": args.tamper,
        "private_key": "redacted" if args.redact else private_key_to_obj(sk),
        "public_key": public_key_to_obj(pk),
        "message": message_to_obj(m),
        "signature": signature_to_obj(sig),
        "acceptance_probability": str(p),
        "verdict": "accept" if verdict else "reject",
    }
    if args.repeat > 1:
        accepts = sum(bool(_demo_run(params, derive_trial_seed(args.seed, r), args.tamper)[4])
                      for r in range(args.repeat))
        expected = {"none": Fraction(1), "flip-one-eigenvalue": Fraction(0),
                    "wrong-basis-block": Fraction(1, 2 ** args.lam)}[args.tamper]
        transcript.update(repeat=args.repeat, accept_count=accepts,
                          empirical_rate=accepts / args.repeat, expected_rate=str(expected))
    with _output(args.out) as fh:
        fh.write(json.dumps(transcript, indent=2, ensure_ascii=False) + "\n")
    if args.tamper == "none" and verdict is not Verdict.ACCEPT:
        return 1
    return 0


def cmd_bounds(args) -> int:
    rows = analysis.bounds_rows(args.n_max)
    fig4 = args.command == "fig4"
    with _output(args.out) as fh:
        if args.json:
            if fig4:
                data = [{"n": r.n, "one_minus_F": r.one_minus_F,
                         "log2_one_minus_F": math.log2(r.one_minus_F), "c_n": r.c_n} for r in rows]
            else:
                data = [{"n": r.n, "alpha": list(r.alpha), "F_n": r.F_n,
                         "one_minus_F": r.one_minus_F, "c_n": r.c_n} for r in rows]
            fh.write(json.dumps(data, indent=2) + "\n")
        elif fig4:
            analysis.write_csv(fh, analysis.FIG4_HEADER, (analysis.fig4_cells(r) for r in rows))
        else:
            analysis.write_csv(fh, analysis.BoundsRow.HEADER, (r.cells() for r in rows))
    return 0


def cmd_fig5(args) -> int:
    rows = analysis.fig5_rows(args.n0, args.lambda_max)
    with _output(args.out) as fh:
        if args.json:
            pub_n0, pub_lam, pub_value = analysis.PUBLISHED_FIG5
            summary = {
                "n0": args.n0,
                "F_n0": analysis.f_bound(args.n0),
                "halving_lambda": analysis.halving_lambda(args.n0),
                "rows": [{"lambda": r.lam, "value": r.value, "published_value": r.published}
                         for r in rows],
            }
            if args.n0 == pub_n0:
                summary["published_check"] = {
                    "lambda": pub_lam,
                    "computed": analysis.curve_value(args.n0, pub_lam),
                    "published": pub_value,
                    "lambda_matching_published": analysis.lambda_for_level(args.n0, pub_value),
                }
            fh.write(json.dumps(summary, indent=2) + "\n")
        else:
            analysis.write_csv(fh, analysis.CurveRow.HEADER, (r.cells() for r in rows))
    return 0


def _attack_config(args) -> ExperimentConfig:
    if args.strategy is None:
        strategy = Measured(args.k) if args.k >= 1 else BlindRandom()
    elif args.strategy == "measured":
        copies = args.copies or args.k
        if copies < 1:
            raise UsageError("--strategy measured needs --k >= 1")
        strategy = Measured(copies)
    else:
        try:
            strategy = parse_strategy(args.strategy, cell=args.cell)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    participants = args.participants if args.participants is not None else args.k + 1
    try:
        return ExperimentConfig(
            lam=args.lam, l=args.l, n_participants=participants, k_colluders=args.k,
            trials=args.trials, master_seed=args.seed, strategy=strategy, flips=args.flips,
            fixed_positions=args.fixed_positions)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_attack(args) -> int:
    cfg = _attack_config(args)
    result = run_forging(cfg, engine=args.engine, threads=args.threads)
    with _output(args.out) as fh:
        if args.csv:
            d = result.to_dict()
            analysis.write_csv(fh, list(d), [[analysis.fmt(v) if isinstance(v, float) else
                                              ("" if v is None else str(v)) for v in d.values()]])
        else:
            fh.write(result.to_json() + "\n")
    z = result.z_score
    return 0 if z is not None and abs(z) <= args.gate else 1


def cmd_cost(args) -> int:
    report = cost_accounting(args.lam, args.l)
    with _output(args.out) as fh:
        if args.csv:
            d = report.to_dict()
            analysis.write_csv(fh, list(d), [[str(v) for v in d.values()]])
        else:
            fh.write(json.dumps({"lambda": args.lam, "l": args.l, **report.to_dict()}, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_non_negative, default=0, help="master seed (u64)")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="emit JSON")
    fmt.add_argument("--csv", action="store_true", help="emit CSV")

    parser = argparse.ArgumentParser(
        prog="qsl", description="Single-qubit quantum digital signature simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo", parents=[common], help="honest keygen/sign/verify transcript")
    p.add_argument("--lambda", dest="lam", type=_positive, default=2)
    p.add_argument("--l", type=_positive, default=2)
    p.add_argument("--redact", action="store_true", help="omit the private key")
    p.add_argument("--tamper", choices=TAMPER_MODES, default="none")
    p.add_argument("--repeat", type=_positive, default=1)
    p.set_defaults(func=cmd_demo)

    for name, help_ in (("bounds", "F(n), alpha and c(n) table"),
                        ("fig4", "c(n) table: log2(1 - F(n)) against n")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--n-max", type=_positive, default=30)
        p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("fig5", parents=[common], help="F(n0)^lambda curve")
    p.add_argument("--n0", type=_positive, default=5)
    p.add_argument("--lambda-max", type=_positive, default=300)
    p.set_defaults(func=cmd_fig5)

    p = sub.add_parser("attack", parents=[common], help="Monte Carlo forging experiment")
    p.add_argument("--lambda", dest="lam", type=_positive, default=4)
    p.add_argument("--l", type=_positive, default=2)
    p.add_argument("--participants", type=_positive, default=None,
                   help="number of participants (default k+1)")
    p.add_argument("--k", type=_non_negative, default=0, help="colluding participants")
    p.add_argument("--flips", type=_positive, default=1)
    p.add_argument("--trials", type=_positive, default=100_000)
    p.add_argument("--strategy", choices=("blind-fixed", "blind-random", "measured"), default=None,
                   help="default: measured when k >= 1, else blind-random")
    p.add_argument("--copies", type=_positive, default=None,
                   help="copies used by the measured strategy (default k)")
    p.add_argument("--cell", default="+Z", help="cell for blind-fixed")
    p.add_argument("--fixed-positions", action="store_true",
                   help="always flip the first K positions")
    p.add_argument("--gate", type=float, default=3.0, help="|z| gate for exit status")
    p.add_argument("--engine", choices=("vector", "object"), default="vector")
    p.add_argument("--threads", type=_positive, default=None,
                   help=f"worker threads (default QSL_THREADS or 1; now {default_threads()})")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("cost", parents=[common], help="bit/qubit cost report")
    p.add_argument("--lambda", dest="lam", type=_positive, required=True)
    p.add_argument("--l", type=_positive, required=True)
    p.set_defaults(func=cmd_cost)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qsl {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
