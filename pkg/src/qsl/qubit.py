"""The four BB84 states and Pauli X/Z measurements.

Probabilities are exact ``Fraction`` values in {0, 1/2, 1}; amplitudes are only
kept for cross-checking the Born rule.  Global phases are never stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from fractions import Fraction
from typing import Protocol


class Basis(IntEnum):
    Z = 0
    X = 1

    @property
    def other(self) -> "Basis":
        return Basis(1 - self)


class Eigenvalue(Enum):
    PLUS = 1
    MINUS = -1

    @property
    def bit(self) -> int:
        return 0 if self is Eigenvalue.PLUS else 1

    @classmethod
    def from_bit(cls, bit: int) -> "Eigenvalue":
        return cls.PLUS if bit == 0 else cls.MINUS

    def flipped(self) -> "Eigenvalue":
        return Eigenvalue.MINUS if self is Eigenvalue.PLUS else Eigenvalue.PLUS


class Bb84Label(IntEnum):
    ZERO = 0
    ONE = 1
    PLUS = 2
    MINUS = 3

    @property
    def basis(self) -> Basis:
        return Basis.Z if self < 2 else Basis.X

    @property
    def eigenvalue(self) -> Eigenvalue:
        return Eigenvalue.PLUS if self % 2 == 0 else Eigenvalue.MINUS

    @property
    def symbol(self) -> str:
        return "01+-"[self]


@dataclass(frozen=True)
class KeyCell:
    """One (eigenvalue, basis) pair: two bits of private key or signature."""

    eigenvalue: Eigenvalue
    basis: Basis

    @property
    def index(self) -> int:
        # Shares its numbering with Bb84Label, so index == state_from_cell(cell).
        return 2 * int(self.basis) + self.eigenvalue.bit

    @property
    def code(self) -> str:
        return ("+" if self.eigenvalue is Eigenvalue.PLUS else "-") + self.basis.name

    @classmethod
    def from_code(cls, code: str) -> "KeyCell":
        if len(code) != 2 or code[0] not in "+-" or code[1] not in "ZX":
            raise ValueError(f"bad key cell code {code!r}")
        eig = Eigenvalue.PLUS if code[0] == "+" else Eigenvalue.MINUS
        return cls(eig, Basis[code[1]])

    def __str__(self) -> str:
        return self.code


#: All four cells, ordered so that ``CELLS[i].index == i``.
CELLS: tuple[KeyCell, ...] = (
    KeyCell(Eigenvalue.PLUS, Basis.Z),
    KeyCell(Eigenvalue.MINUS, Basis.Z),
    KeyCell(Eigenvalue.PLUS, Basis.X),
    KeyCell(Eigenvalue.MINUS, Basis.X),
)


@dataclass(frozen=True)
class QubitState:
    amp0: complex
    amp1: complex

    def __post_init__(self):
        norm = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state not normalised: |a0|^2+|a1|^2 = {norm!r}")

    def overlap(self, other: "QubitState") -> complex:
        return self.amp0.conjugate() * other.amp0 + self.amp1.conjugate() * other.amp1


_R = 1 / math.sqrt(2)
_AMPLITUDES = {
    Bb84Label.ZERO: QubitState(1 + 0j, 0j),
    Bb84Label.ONE: QubitState(0j, 1 + 0j),
    Bb84Label.PLUS: QubitState(_R + 0j, _R + 0j),
    Bb84Label.MINUS: QubitState(_R + 0j, -_R + 0j),
}


def amplitudes(label: Bb84Label) -> QubitState:
    return _AMPLITUDES[label]


class UniformSource(Protocol):
    def random(self) -> float: ...


def state_from_cell(cell: KeyCell) -> Bb84Label:
    return Bb84Label(cell.index)


def cell_from_state(label: Bb84Label) -> KeyCell:
    """Inverse of :func:`state_from_cell`."""
    return CELLS[label]


_HALF = Fraction(1, 2)
_ONE = Fraction(1)
_ZERO = Fraction(0)


def outcome_probability(label: Bb84Label, basis: Basis, eig: Eigenvalue) -> Fraction:
    """Born-rule probability of reading ``eig`` when measuring ``label`` in ``basis``."""
    label = Bb84Label(label)
    if label.basis != basis:
        return _HALF
    return _ONE if label.eigenvalue is eig else _ZERO


def measure(label: Bb84Label, basis: Basis, rng: UniformSource) -> Eigenvalue:
    """Sample a measurement outcome; consumes exactly one uniform draw."""
    u = rng.random()
    p_plus = outcome_probability(label, basis, Eigenvalue.PLUS)
    return Eigenvalue.PLUS if u < p_plus else Eigenvalue.MINUS
