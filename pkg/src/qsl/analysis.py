"""Tables behind the F(n) / c(n) figure and the F(n0)^lambda security curve."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from typing import Iterable, Optional, Sequence, TextIO

from .identification import alpha_vector, f_bound, f_bound_decimal, one_minus_f

#: (n0, lambda, value): an externally quoted F(5)^300, kept as a labelled reference column.
PUBLISHED_FIG5 = (5, 300, 0.0370882)


def fmt(x) -> str:
    """Integers verbatim, floats to 12 significant digits."""
    if isinstance(x, int):
        return str(x)
    if x is None:
        return ""
    return f"{float(x) + 0.0:.12g}"


def c_value(n: int) -> float:
    """c(n) = log2(1 - F(n)) / (-(n+1)) - 1; exactly 0 at n = 1."""
    return math.log2(one_minus_f(n)) / -(n + 1) - 1


@dataclass(frozen=True)
class BoundsRow:
    n: int
    alpha: tuple[int, int, int, int]
    F_n: float
    one_minus_F: float
    c_n: float

    HEADER = ("n", "alpha0", "alpha1", "alpha2", "alpha3", "F_n", "one_minus_F", "c_n")

    def cells(self) -> list[str]:
        return [fmt(self.n), *map(fmt, self.alpha), fmt(self.F_n), fmt(self.one_minus_F),
                fmt(self.c_n)]


def bounds_rows(n_max: int) -> list[BoundsRow]:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return [BoundsRow(n, alpha_vector(n), f_bound(n), one_minus_f(n), c_value(n))
            for n in range(1, n_max + 1)]


FIG4_HEADER = ("n", "one_minus_F", "log2_one_minus_F", "c_n")


def fig4_cells(row: BoundsRow) -> list[str]:
    return [fmt(row.n), fmt(row.one_minus_F), fmt(math.log2(row.one_minus_F)), fmt(row.c_n)]


@dataclass(frozen=True)
class CurveRow:
    lam: int
    value: float
    published: Optional[float] = None

    HEADER = ("lambda", "value", "published_value")

    def cells(self) -> list[str]:
        return [fmt(self.lam), fmt(self.value), fmt(self.published)]


def curve_value(n0: int, lam: int) -> float:
    """F(n0)^lam from the high-precision F."""
    with localcontext() as ctx:
        ctx.prec = 50 + n0 // 2
        return float(f_bound_decimal(n0, ctx.prec) ** lam)


def fig5_rows(n0: int = 5, lambda_max: int = 300) -> list[CurveRow]:
    if lambda_max < 1:
        raise ValueError("lambda_max must be >= 1")
    pub_n0, pub_lam, pub_value = PUBLISHED_FIG5
    return [CurveRow(lam, curve_value(n0, lam),
                     pub_value if (n0, lam) == (pub_n0, pub_lam) else None)
            for lam in range(1, lambda_max + 1)]


def halving_lambda(n0: int) -> float:
    """Increase in lambda that halves F(n0)^lambda."""
    return math.log(2) / -math.log(f_bound(n0))


def lambda_for_level(n0: int, level: float) -> float:
    """Real lambda at which F(n0)^lambda equals ``level``."""
    f = f_bound_decimal(n0)
    return float(Decimal(level).ln() / f.ln())


def write_csv(fh: TextIO, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
