"""Forging strategies: blind guessing and the optimal n-copy measurement.

The forger sees Alice's published (m, s), flips some message bits and has to
fill in the signature blocks for the flipped positions.  Everything else is
copied verbatim from s.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .identification import f_bound, label_phase_map, phase_label_map, sample_estimate
from .protocol import Message, QubitRegister, Signature, flipped_positions
from .qubit import CELLS, KeyCell, UniformSource, cell_from_state


class InsufficientCopiesError(ValueError):
    pass


@dataclass(frozen=True)
class BlindFixed:
    cell: KeyCell = CELLS[0]

    def __str__(self) -> str:
        return f"blind-fixed:{self.cell.code}"


@dataclass(frozen=True)
class BlindRandom:
    def __str__(self) -> str:
        return "blind-random"


@dataclass(frozen=True)
class Measured:
    copies: int

    def __post_init__(self):
        if self.copies < 1:
            raise ValueError("the measured strategy needs at least one copy")

    def __str__(self) -> str:
        return f"measured:{self.copies}"


ForgeStrategy = Union[BlindFixed, BlindRandom, Measured]


def parse_strategy(name: str, copies: Optional[int] = None, cell: str = "+Z") -> ForgeStrategy:
    """Build a strategy from its CLI / JSON name (``measured:3`` also accepted)."""
    kind, _, arg = name.partition(":")
    if kind == "blind-random":
        return BlindRandom()
    if kind == "blind-fixed":
        return BlindFixed(KeyCell.from_code(arg or cell))
    if kind == "measured":
        n = int(arg) if arg else copies
        if n is None:
            raise ValueError("measured strategy needs a copy count")
        return Measured(n)
    raise ValueError(f"unknown strategy {name!r}")


def strategy_bound(strategy: ForgeStrategy, lam: int, flips: int = 1) -> float:
    """Acceptance probability of a package forged at ``flips`` positions.

    Exact for uniformly drawn keys: (1/2)^(K lam) blind, F(n)^(K lam) measured.
    """
    per_qubit = f_bound(strategy.copies) if isinstance(strategy, Measured) else 0.5
    return per_qubit ** (flips * lam)


def blind_cell(strategy: ForgeStrategy, rng: UniformSource) -> KeyCell:
    if isinstance(strategy, BlindFixed):
        return strategy.cell
    if isinstance(strategy, BlindRandom):
        return CELLS[int(4 * rng.random())]
    raise TypeError(f"blind_cell called with non-blind strategy {strategy}")


def measured_cell(registers: Sequence[QubitRegister], slot: tuple[int, int, int],
                  rng: UniformSource) -> KeyCell:
    """Consume ``slot`` in every register and guess its cell from the n copies.

    The copies are measured jointly with the optimal covariant POVM; the
    estimate xhat maps back to the BB84 label, whose own cell is the guess.
    """
    if not registers:
        raise InsufficientCopiesError("need at least one copy")
    a, k, c = slot
    for reg in registers:
        if not reg.is_present(a, k, c):
            raise InsufficientCopiesError(f"slot {slot} already consumed in register {reg.owner}")
    labels = {reg.take(a, k, c) for reg in registers}
    if len(labels) != 1:
        raise ValueError("registers do not hold copies of the same public key")
    x_true = label_phase_map(labels.pop())
    xhat = sample_estimate(x_true, len(registers), rng)
    return cell_from_state(phase_label_map(xhat))


@dataclass(frozen=True)
class ForgedPackage:
    m_prime: Message
    sig_prime: Signature
    flipped_positions: tuple[int, ...]


def splice_forge(m: Message, s: Signature, m_prime: Message,
                 colluder_registers: Sequence[QubitRegister], strategy: ForgeStrategy,
                 rng: UniformSource) -> ForgedPackage:
    flips = flipped_positions(m, m_prime)
    if not flips:
        raise ValueError("forged message must differ from the signed one")
    if s.l != len(m):
        raise ValueError("signature and message lengths differ")
    if isinstance(strategy, Measured):
        if len(colluder_registers) < strategy.copies:
            raise InsufficientCopiesError(
                f"measured strategy needs {strategy.copies} registers, got {len(colluder_registers)}")
        pool = list(colluder_registers[: strategy.copies])

    blocks = list(s.blocks)
    for a in flips:  # ascending
        if isinstance(strategy, Measured):
            blocks[a] = tuple(measured_cell(pool, (a, m_prime[a], c), rng) for c in range(s.lam))
        else:
            blocks[a] = tuple(blind_cell(strategy, rng) for _ in range(s.lam))
    return ForgedPackage(m_prime, Signature(tuple(blocks)), flips)
