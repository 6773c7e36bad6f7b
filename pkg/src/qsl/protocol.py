"""SKGen / PKGen / Sign / Ver for the single-qubit signature scheme.

Index convention everywhere: ``[a][k][c]`` with message position ``a`` in
``0..l-1``, branch ``k`` in {0, 1} (the message bit the branch signs) and cell
``c`` in ``0..lam-1``.  Reports convert to one-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

from .qubit import (
    CELLS,
    Bb84Label,
    KeyCell,
    UniformSource,
    measure,
    outcome_probability,
    state_from_cell,
)


class KeyReuseError(RuntimeError):
    """A one-time private key was asked to sign a second message."""


class SlotConsumedError(RuntimeError):
    """A register slot was measured after it had already been consumed."""


@dataclass(frozen=True)
class ProtocolParams:
    lam: int
    l: int
    n_participants: int = 1

    def __post_init__(self):
        for name in ("lam", "l", "n_participants"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")


Cells3 = tuple[tuple[tuple[KeyCell, ...], ...], ...]
Labels3 = tuple[tuple[tuple[Bb84Label, ...], ...], ...]


def _shape3(nested) -> tuple[int, int, int]:
    l = len(nested)
    if l == 0:
        raise ValueError("empty key")
    lam = len(nested[0][0])
    for branch_pair in nested:
        if len(branch_pair) != 2 or any(len(branch) != lam for branch in branch_pair):
            raise ValueError("key arrays must have shape (l, 2, lam)")
    if lam == 0:
        raise ValueError("empty key")
    return l, 2, lam


@dataclass
class PrivateKey:
    """Eigenvalue and basis of every prepared qubit.

    Holds 4*lam*l bits.  The key is one-time: :func:`sign` marks it used.
    """

    cells: Cells3
    used: bool = field(default=False, compare=False)

    def __post_init__(self):
        self.cells = tuple(tuple(tuple(branch) for branch in pair) for pair in self.cells)
        _shape3(self.cells)

    @property
    def l(self) -> int:
        return len(self.cells)

    @property
    def lam(self) -> int:
        return len(self.cells[0][0])

    @property
    def n_bits(self) -> int:
        return 4 * self.lam * self.l


@dataclass(frozen=True)
class PublicKeyDescription:
    """Alice's classical record of which BB84 state sits in each slot."""

    labels: Labels3

    def __post_init__(self):
        labels = tuple(tuple(tuple(Bb84Label(x) for x in branch) for branch in pair)
                       for pair in self.labels)
        object.__setattr__(self, "labels", labels)
        _shape3(labels)

    @property
    def l(self) -> int:
        return len(self.labels)

    @property
    def lam(self) -> int:
        return len(self.labels[0][0])

    @property
    def n_qubits(self) -> int:
        return 2 * self.lam * self.l


class QubitRegister:
    """One participant's physical copy of the public key.

    Slots hold a label until measured; a measured slot is gone for good.
    Not thread-safe: a register has a single owner.
    """

    def __init__(self, pk: PublicKeyDescription, owner: int):
        self.owner = owner
        self.l = pk.l
        self.lam = pk.lam
        self._slots: list[list[list[Optional[Bb84Label]]]] = [
            [list(branch) for branch in pair] for pair in pk.labels
        ]

    @property
    def n_qubits(self) -> int:
        return 2 * self.lam * self.l

    def n_present(self) -> int:
        return sum(x is not None for pair in self._slots for branch in pair for x in branch)

    def is_present(self, a: int, k: int, c: int) -> bool:
        return self._slots[a][k][c] is not None

    def take(self, a: int, k: int, c: int) -> Bb84Label:
        """Remove the qubit in slot (a, k, c) and hand it to the caller's measurement."""
        label = self._slots[a][k][c]
        if label is None:
            raise SlotConsumedError(f"slot (a={a}, k={k}, c={c}) of register {self.owner} already consumed")
        self._slots[a][k][c] = None
        return label

    def measure(self, a: int, k: int, c: int, basis, rng: UniformSource):
        return measure(self.take(a, k, c), basis, rng)

    def __repr__(self) -> str:
        return f"QubitRegister(owner={self.owner}, present={self.n_present()}/{self.n_qubits})"


@dataclass(frozen=True)
class Message:
    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise ValueError("message must be non-empty")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("message bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    def __len__(self) -> int:
        return len(self.bits)

    def __getitem__(self, a: int) -> int:
        return self.bits[a]

    def flip(self, positions) -> "Message":
        bits = list(self.bits)
        for a in positions:
            bits[a] ^= 1
        return Message(tuple(bits))


@dataclass(frozen=True)
class Signature:
    """``blocks[a]`` is the lam cells of branch ``m[a]`` at position ``a``."""

    blocks: tuple[tuple[KeyCell, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(block) for block in self.blocks)
        if not blocks or not blocks[0] or any(len(b) != len(blocks[0]) for b in blocks):
            raise ValueError("signature blocks must form a non-empty (l, lam) array")
        object.__setattr__(self, "blocks", blocks)

    @property
    def l(self) -> int:
        return len(self.blocks)

    @property
    def lam(self) -> int:
        return len(self.blocks[0])

    @property
    def n_bits(self) -> int:
        return 2 * self.lam * self.l


class Verdict(Enum):
    ACCEPT = "T"
    REJECT = "⊥"

    def __bool__(self) -> bool:
        return self is Verdict.ACCEPT


# -- operations ---------------------------------------------------------------


def sk_gen(params: ProtocolParams, rng: UniformSource) -> PrivateKey:
    """Draw every cell i.i.d. uniform; one uniform per cell, in [a][k][c] order."""
    cells = tuple(
        tuple(tuple(CELLS[int(4 * rng.random())] for _ in range(params.lam)) for _ in range(2))
        for _ in range(params.l)
    )
    return PrivateKey(cells)


def pk_gen(sk: PrivateKey) -> PublicKeyDescription:
    return PublicKeyDescription(
        tuple(tuple(tuple(state_from_cell(c) for c in branch) for branch in pair) for pair in sk.cells)
    )


def issue_copy(pk: PublicKeyDescription, owner: int) -> QubitRegister:
    return QubitRegister(pk, owner)


def random_message(l: int, rng: UniformSource) -> Message:
    return Message(tuple(int(2 * rng.random()) for _ in range(l)))


def sign(sk: PrivateKey, m: Message) -> Signature:
    if len(m) != sk.l:
        raise ValueError(f"message length {len(m)} does not match key length l={sk.l}")
    if sk.used:
        raise KeyReuseError("private key already used to sign a message")
    sk.used = True
    return Signature(tuple(sk.cells[a][m[a]] for a in range(sk.l)))


def _check_shapes(l: int, lam: int, m: Message, sig: Signature) -> None:
    if len(m) != l or sig.l != l or sig.lam != lam:
        raise ValueError(
            f"shape mismatch: key (l={l}, lam={lam}), message l={len(m)}, "
            f"signature (l={sig.l}, lam={sig.lam})"
        )


def verify_outcomes(reg: QubitRegister, m: Message, sig: Signature,
                    rng: UniformSource) -> list[list[bool]]:
    """Measure slot (a, m[a], c) in the signed basis for every a, c.

    Returns whether each outcome matched the signed eigenvalue.  All lam*l
    slots are measured even after a mismatch, one uniform draw each.
    """
    _check_shapes(reg.l, reg.lam, m, sig)
    for a in range(reg.l):
        for c in range(reg.lam):
            if not reg.is_present(a, m[a], c):
                raise SlotConsumedError(f"slot (a={a}, k={m[a]}, c={c}) already consumed")
    matches = []
    for a, block in enumerate(sig.blocks):
        row = []
        for c, cell in enumerate(block):
            outcome = reg.measure(a, m[a], c, cell.basis, rng)
            row.append(outcome is cell.eigenvalue)
        matches.append(row)
    return matches


def verify(reg: QubitRegister, m: Message, sig: Signature, rng: UniformSource) -> Verdict:
    matches = verify_outcomes(reg, m, sig, rng)
    return Verdict.ACCEPT if all(all(row) for row in matches) else Verdict.REJECT


def acceptance_probability(pk: PublicKeyDescription, m: Message, sig: Signature) -> Fraction:
    """Exact probability that an intact register accepts ``(m, sig)``."""
    _check_shapes(pk.l, pk.lam, m, sig)
    p = Fraction(1)
    for a, block in enumerate(sig.blocks):
        for c, cell in enumerate(block):
            p *= outcome_probability(pk.labels[a][m[a]][c], cell.basis, cell.eigenvalue)
            if not p:
                return p
    return p


def flipped_positions(m: Message, m_prime: Message) -> tuple[int, ...]:
    if len(m) != len(m_prime):
        raise ValueError("messages differ in length")
    return tuple(a for a in range(len(m)) if m[a] != m_prime[a])


def honest_run(params: ProtocolParams, rng: UniformSource, m: Optional[Sequence[int]] = None):
    """Keygen, one copy to the verifier, sign, verify.  Returns (sk, pk, m, sig, verdict)."""
    sk = sk_gen(params, rng)
    pk = pk_gen(sk)
    reg = issue_copy(pk, 0)
    msg = random_message(params.l, rng) if m is None else Message(tuple(m))
    sig = sign(sk, msg)
    return sk, pk, msg, sig, verify(reg, msg, sig, rng)
