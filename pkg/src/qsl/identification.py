"""Identifying one of four phase states from n copies.

The states |f_x> = (|e0> + i^x |e1>)/sqrt(2), x in Z_4, are the BB84 states
rewritten in the Y eigenbasis (|0>, |+>, |1>, |-> for x = 0, 1, 2, 3, up to
global phase).  Their n-fold tensor powers live in the <=4-dimensional span
K_n of the vectors beta_j (j in Z_4), and everything below is computed in
that basis.  Indices j with alpha_{j,n} = 0 carry no beta_j; a support mask
removes them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .qubit import Bb84Label, UniformSource

#: i**k for k mod 4, exact.
_PHASES = np.array([1, 1j, -1, -1j], dtype=complex)
_J = np.arange(4)


def alpha(j: int, n: int) -> int:
    """Sum of binomial(n, k) over k congruent to j mod 4."""
    if n < 0:
        raise ValueError("n must be non-negative")
    j %= 4
    return sum(math.comb(n, k) for k in range(j, n + 1, 4))


def alpha_vector(n: int) -> tuple[int, int, int, int]:
    return tuple(alpha(j, n) for j in range(4))


def support_mask(n: int) -> np.ndarray:
    return np.array([a > 0 for a in alpha_vector(n)])


@dataclass(frozen=True)
class KnVector:
    """Coefficients over (beta_0, .., beta_3); masked entries are exactly 0."""

    coeffs: np.ndarray
    mask: np.ndarray
    n: int

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


@dataclass(frozen=True)
class PovmElement:
    matrix: np.ndarray

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, atol=tol, rtol=0))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())

    def is_psd(self, tol: float = 1e-12) -> bool:
        return self.is_hermitian(tol) and self.min_eigenvalue() >= -tol

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


def _magnitudes(n: int) -> np.ndarray:
    # int / int is correctly rounded, so no overflow or precision loss for large n
    return np.array([math.sqrt(a / 2**n) for a in alpha_vector(n)])


def f_state(x: int, n: int) -> KnVector:
    """|f_x>^{(x)n} expressed over the beta basis of K_n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    mask = support_mask(n)
    coeffs = _magnitudes(n) * _PHASES[(_J * x) % 4]
    coeffs[~mask] = 0
    return KnVector(coeffs, mask, n)


def rep_unitary(x: int, n: int) -> np.ndarray:
    """Diagonal action of x in Z_4 on K_n (identity on masked indices is irrelevant)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return np.diag(_PHASES[(_J * x) % 4])


_RISK = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(1, 2))


def risk(x: int, xhat: int) -> Fraction:
    """(1 - cos((x - xhat) pi/2)) / 2, exactly."""
    return _RISK[(x - xhat) % 4]


_RISK_MATRIX = np.array([[float(risk(x, y)) for y in range(4)] for x in range(4)])


def covariant_povm(seed: np.ndarray, n: int) -> list[PovmElement]:
    """{U_y T U_y^dagger}_{y in Z_4} for a seed T on K_n."""
    mask = support_mask(n)
    seed = np.array(seed, dtype=complex)
    seed[~mask, :] = 0
    seed[:, ~mask] = 0
    out = []
    for y in range(4):
        u = rep_unitary(y, n)
        out.append(PovmElement(u @ seed @ u.conj().T))
    return out


def optimal_seed(n: int) -> np.ndarray:
    """Seed with every supported entry equal to 1/4 (all a_{j,j'} = 1)."""
    mask = support_mask(n)
    return np.outer(mask, mask).astype(complex) / 4


def optimal_povm(n: int) -> list[PovmElement]:
    if n < 1:
        raise ValueError("n must be >= 1")
    return covariant_povm(optimal_seed(n), n)


def random_covariant_seed(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random admissible seed: PSD, diagonal 1/4 on the support, |a_{j,j'}| <= 1.

    Built as a Gram matrix of random unit vectors of random rank; rank 1 gives
    the pure-phase seeds a_{j,j'} = exp(i(t_j - t_j')).
    """
    mask = support_mask(n)
    rank = int(rng.integers(1, 5))
    v = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    gram = v @ v.conj().T
    gram[~mask, :] = 0
    gram[:, ~mask] = 0
    return gram / 4


def check_povm(povm: Sequence[PovmElement], n: int, tol: float = 1e-9) -> None:
    """Raise ValueError unless ``povm`` is 4 PSD elements summing to I on K_n."""
    if len(povm) != 4:
        raise ValueError(f"expected 4 POVM elements, got {len(povm)}")
    for y, el in enumerate(povm):
        if el.matrix.shape != (4, 4):
            raise ValueError(f"element {y} is not 4x4")
        if not el.is_psd(tol):
            raise ValueError(f"element {y} is not positive semidefinite")
    mask = support_mask(n)
    total = sum(el.matrix for el in povm)[np.ix_(mask, mask)]
    if not np.allclose(total, np.eye(int(mask.sum())), atol=tol, rtol=0):
        raise ValueError("POVM elements do not sum to the identity on the supported subspace")


def outcome_matrix(povm: Sequence[PovmElement], n: int) -> np.ndarray:
    """P[x, y] = <f_x| Pi_y |f_x> for the n-copy states."""
    probs = np.empty((4, 4))
    for x in range(4):
        v = f_state(x, n).coeffs
        for y, el in enumerate(povm):
            probs[x, y] = (v.conj() @ el.matrix @ v).real
    return probs


def average_risk(povm: Sequence[PovmElement], n: int, tol: float = 1e-9) -> float:
    """Uniform-prior Bayes risk sum_x 1/4 sum_y R(x, y) tr(Pi_y rho_x)."""
    check_povm(povm, n, tol)
    return float((_RISK_MATRIX * outcome_matrix(povm, n)).sum() / 4)


def min_risk_decimal(n: int, digits: int | None = None) -> Decimal:
    """1/2 - 2^{-(n+1)} sum_j sqrt(alpha_j alpha_{j+1}) in decimal arithmetic.

    The two terms cancel to about 2^{-(n+2)}, so the working precision grows
    with n.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a = alpha_vector(n)
    with localcontext() as ctx:
        ctx.prec = digits or (40 + n // 2)
        s = sum(Decimal(a[j] * a[(j + 1) % 4]).sqrt() for j in range(4))
        return Decimal(1) / 2 - s / Decimal(2) ** (n + 1)


def min_risk_closed_form(n: int) -> float:
    return float(min_risk_decimal(n))


def f_bound_decimal(n: int, digits: int | None = None) -> Decimal:
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return Decimal(1) / 2
    with localcontext() as ctx:
        ctx.prec = digits or (40 + n // 2)
        return 1 - min_risk_decimal(n, ctx.prec)


def f_bound(n: int) -> float:
    """Best per-qubit acceptance probability of a forger holding n copies.

    F(0) = 1/2 is the blind-guess value.
    """
    return float(f_bound_decimal(n))


def one_minus_f(n: int) -> float:
    """1 - F(n) without cancellation error (F(n) itself rounds to 1.0 near n=53)."""
    return 0.5 if n == 0 else float(min_risk_decimal(n))


@lru_cache(maxsize=None)
def _estimate_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    probs = np.clip(outcome_matrix(optimal_povm(n), n), 0.0, 1.0)
    cdf = np.cumsum(probs, axis=1)
    cdf[:, -1] = 1.0
    probs.setflags(write=False)
    cdf.setflags(write=False)
    return probs, cdf


def estimate_distribution(n: int) -> np.ndarray:
    """P[x_true, xhat] of the optimal n-copy measurement."""
    return _estimate_tables(n)[0]


def estimate_cdf(n: int) -> np.ndarray:
    """Row-wise cumulative form of :func:`estimate_distribution`; last column is 1."""
    return _estimate_tables(n)[1]


def sample_estimate(x_true: int, n: int, rng: UniformSource) -> int:
    """Draw the optimal measurement's estimate for n copies of |f_{x_true}>.

    Consumes one uniform; the estimate is the number of CDF entries <= u.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    u = rng.random()
    return int(np.searchsorted(estimate_cdf(n)[x_true % 4], u, side="right"))


_PHASE_OF_LABEL = {Bb84Label.ZERO: 0, Bb84Label.PLUS: 1, Bb84Label.ONE: 2, Bb84Label.MINUS: 3}
_LABEL_OF_PHASE = {x: label for label, x in _PHASE_OF_LABEL.items()}
#: phase index by Bb84Label value, and the inverse, for vectorised code.
PHASE_OF_LABEL = np.array([_PHASE_OF_LABEL[Bb84Label(i)] for i in range(4)])
LABEL_OF_PHASE = np.array([int(_LABEL_OF_PHASE[x]) for x in range(4)])


def label_phase_map(label: Bb84Label) -> int:
    return _PHASE_OF_LABEL[Bb84Label(label)]


def phase_label_map(x: int) -> Bb84Label:
    return _LABEL_OF_PHASE[x % 4]


# -- symmetric-subspace (g-basis) cross-check, small n only --------------------

G_BASIS_MAX_N = 12


def g_state(x: int, n: int) -> np.ndarray:
    """|f_x>^{(x)n} over the symmetric basis g_0..g_n."""
    if not 1 <= n <= G_BASIS_MAX_N:
        raise ValueError(f"g-basis expansion only supported for 1 <= n <= {G_BASIS_MAX_N}")
    k = np.arange(n + 1)
    mags = np.sqrt([math.comb(n, int(i)) for i in k]) / 2 ** (n / 2)
    return mags * _PHASES[(k * x) % 4]


def beta_in_g(n: int) -> np.ndarray:
    """Rows are beta_0..beta_3 in the g basis (zero rows off the support)."""
    if not 1 <= n <= G_BASIS_MAX_N:
        raise ValueError(f"g-basis expansion only supported for 1 <= n <= {G_BASIS_MAX_N}")
    out = np.zeros((4, n + 1))
    for j, a in enumerate(alpha_vector(n)):
        if a:
            for k in range(j, n + 1, 4):
                out[j, k] = math.sqrt(math.comb(n, k) / a)
    return out
