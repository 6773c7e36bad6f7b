"""Monte Carlo experiments: honest runs and forging attacks with k colluders.

Each trial owns a uniform stream seeded by ``derive_trial_seed(master, t)``.
Draws are consumed in a fixed layout:

    keygen        2*lam*l   one per cell, [a][k][c] order
    message       l
    flip choice   K         partial Fisher-Yates; skipped in fixed-position mode
    forgery       K*lam     flipped positions ascending, c inner; none for blind-fixed
    verification  lam*l     one per measured slot, [a][c] order

Two engines follow this layout.  ``object`` drives the real protocol and
adversary objects trial by trial and can record an event log; ``vector``
replays the same draws in numpy batches.  Both give identical tallies.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, TextIO

import numpy as np

from .adversary import (
    BlindFixed,
    BlindRandom,
    ForgeStrategy,
    Measured,
    splice_forge,
    strategy_bound,
)
from .identification import LABEL_OF_PHASE, PHASE_OF_LABEL, estimate_cdf
from .protocol import (
    ProtocolParams,
    issue_copy,
    pk_gen,
    random_message,
    sign,
    sk_gen,
    verify_outcomes,
)
from .seeding import CounterRng, derive_trial_seed, derive_trial_seeds, uniform_block

ALICE = "alice"
ADVERSARY = "adversary"
PUBLIC = "public"


def participant(i: int) -> str:
    return f"p{i}"


@dataclass(frozen=True)
class ExperimentConfig:
    lam: int
    l: int = 1
    n_participants: int = 2
    k_colluders: int = 0
    trials: int = 1000
    master_seed: int = 0
    strategy: ForgeStrategy = BlindRandom()
    flips: int = 1
    fixed_positions: bool = False

    def __post_init__(self):
        ProtocolParams(self.lam, self.l, self.n_participants)
        if not 0 <= self.k_colluders < self.n_participants:
            raise ValueError("need 0 <= k_colluders < n_participants (the verifier never colludes)")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 1 <= self.flips <= self.l:
            raise ValueError("flips must satisfy 1 <= flips <= l")
        if isinstance(self.strategy, Measured) and self.strategy.copies > self.k_colluders:
            raise ValueError(
                f"measured strategy with {self.strategy.copies} copies needs at least that many "
                f"colluders, got k={self.k_colluders}")

    @property
    def params(self) -> ProtocolParams:
        return ProtocolParams(self.lam, self.l, self.n_participants)


@dataclass
class ExperimentResult:
    lam: int
    l: int
    n_participants: int
    k_colluders: int
    trials: int
    flips: int
    strategy: str
    master_seed: int
    accept_count: int
    empirical_rate: float
    bound: float
    z_score: Optional[float]
    block_accept_rate: Optional[float] = None  # P(S_a) over flipped blocks
    qubit_accept_rate: Optional[float] = None  # P(S_{a,c}) over flipped qubits
    wall_time: float = field(default=0.0, compare=False)

    @property
    def trial_count(self) -> int:
        return self.trials

    def to_dict(self, extended: bool = False) -> dict:
        out = {
            "lambda": self.lam,
            "l": self.l,
            "n_participants": self.n_participants,
            "k_colluders": self.k_colluders,
            "trials": self.trials,
            "flips": self.flips,
            "strategy": self.strategy,
            "accept_count": self.accept_count,
            "empirical_rate": self.empirical_rate,
            "bound": self.bound,
            "z_score": self.z_score,
            "master_seed": self.master_seed,
        }
        if extended:
            out["block_accept_rate"] = self.block_accept_rate
            out["qubit_accept_rate"] = self.qubit_accept_rate
            out["wall_time"] = self.wall_time
        return out

    def to_json(self, extended: bool = False) -> str:
        return json.dumps(self.to_dict(extended), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentResult":
        return cls(
            lam=d["lambda"], l=d["l"], n_participants=d["n_participants"],
            k_colluders=d["k_colluders"], trials=d["trials"], flips=d["flips"],
            strategy=d["strategy"], master_seed=d["master_seed"],
            accept_count=d["accept_count"], empirical_rate=d["empirical_rate"],
            bound=d["bound"], z_score=d["z_score"],
            block_accept_rate=d.get("block_accept_rate"),
            qubit_accept_rate=d.get("qubit_accept_rate"),
            wall_time=d.get("wall_time", 0.0),
        )


def binomial_z(accepts: int, trials: int, p: float) -> Optional[float]:
    """z-score of ``accepts/trials`` against Binomial(trials, p); None if undefined."""
    rate = accepts / trials
    var = p * (1 - p) / trials
    if var == 0:
        return 0.0 if rate == p else None
    return (rate - p) / math.sqrt(var)


# -- event log ----------------------------------------------------------------


@dataclass(frozen=True)
class EventRecord:
    trial: int
    step: int
    sender: str
    receiver: str
    kind: str
    size_bits: int  # bits for classical payloads, qubits for quantum ones


class EventLog:
    """Append-only transcript of who sent what to whom."""

    FIELDS = ("trial", "step", "sender", "receiver", "kind", "size_bits")

    def __init__(self):
        self._records: list[EventRecord] = []
        self._step: dict[int, int] = {}

    def append(self, trial: int, sender: str, receiver: str, kind: str, size: int) -> None:
        step = self._step.get(trial, 0)
        self._step[trial] = step + 1
        self._records.append(EventRecord(trial, step, sender, receiver, kind, size))

    @property
    def records(self) -> tuple[EventRecord, ...]:
        return tuple(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def volume(self, kind: str, trial: Optional[int] = None, sender: Optional[str] = None) -> int:
        return sum(r.size_bits for r in self._records
                   if r.kind == kind and (trial is None or r.trial == trial)
                   and (sender is None or r.sender == sender))

    def count(self, kind: str, trial: Optional[int] = None) -> int:
        return sum(1 for r in self._records if r.kind == kind and (trial is None or r.trial == trial))

    def write_csv(self, fh: TextIO) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.FIELDS)
        for r in self._records:
            w.writerow([r.trial, r.step, r.sender, r.receiver, r.kind, r.size_bits])

    def to_csv(self) -> str:
        buf = io.StringIO()
        self.write_csv(buf)
        return buf.getvalue()


# -- cost accounting ----------------------------------------------------------


@dataclass(frozen=True)
class CostReport:
    c1: int  # private key bits
    c2: int  # signature bits
    c3: int  # public-key qubits per copy
    total: int

    def to_dict(self) -> dict:
        return asdict(self)


def cost_accounting(lam: int, l: int) -> CostReport:
    if lam < 1 or l < 1:
        raise ValueError("lam and l must be positive")
    c1, c2, c3 = 4 * lam * l, 2 * lam * l, 2 * lam * l
    return CostReport(c1, c2, c3, c1 + c2 + c3)


# -- object engine ------------------------------------------------------------


def choose_flips(l: int, flips: int, rng, fixed: bool = False) -> tuple[int, ...]:
    if fixed:
        return tuple(range(flips))
    perm = list(range(l))
    for i in range(flips):
        j = i + int(rng.random() * (l - i))
        perm[i], perm[j] = perm[j], perm[i]
    return tuple(sorted(perm[:flips]))


def _distribute(cfg: ExperimentConfig, t: int, log: Optional[EventLog]):
    rng = CounterRng(derive_trial_seed(cfg.master_seed, t))
    sk = sk_gen(cfg.params, rng)
    pk = pk_gen(sk)
    registers = [issue_copy(pk, i) for i in range(cfg.n_participants)]
    if log is not None:
        log.append(t, ALICE, ALICE, "private_key", sk.n_bits)
        for reg in registers:
            log.append(t, ALICE, participant(reg.owner), "public_key", reg.n_qubits)
    m = random_message(cfg.l, rng)
    sig = sign(sk, m)
    return rng, registers, m, sig


def _honest_trial(cfg: ExperimentConfig, t: int, log: Optional[EventLog]) -> tuple[int, int, int]:
    rng, registers, m, sig = _distribute(cfg, t, log)
    bob = registers[0]
    if log is not None:
        log.append(t, ALICE, participant(bob.owner), "message", len(m))
        log.append(t, ALICE, participant(bob.owner), "signature", sig.n_bits)
    matches = verify_outcomes(bob, m, sig, rng)
    return int(all(all(row) for row in matches)), 0, 0


def _forging_trial(cfg: ExperimentConfig, t: int, log: Optional[EventLog]) -> tuple[int, int, int]:
    rng, registers, m, sig = _distribute(cfg, t, log)
    bob, colluders = registers[0], registers[1:1 + cfg.k_colluders]
    if log is not None:
        log.append(t, ALICE, PUBLIC, "message", len(m))
        log.append(t, ALICE, PUBLIC, "signature", sig.n_bits)
        for reg in colluders:
            log.append(t, participant(reg.owner), ADVERSARY, "register_handover", reg.n_qubits)
    positions = choose_flips(cfg.l, cfg.flips, rng, cfg.fixed_positions)
    pkg = splice_forge(m, sig, m.flip(positions), colluders, cfg.strategy, rng)
    if log is not None:
        log.append(t, ADVERSARY, participant(bob.owner), "message", len(pkg.m_prime))
        log.append(t, ADVERSARY, participant(bob.owner), "signature", pkg.sig_prime.n_bits)
    matches = verify_outcomes(bob, pkg.m_prime, pkg.sig_prime, rng)
    flipped = [matches[a] for a in pkg.flipped_positions]
    return (int(all(all(row) for row in matches)),
            sum(sum(row) for row in flipped),
            sum(all(row) for row in flipped))


def _object_range(cfg: ExperimentConfig, t0: int, t1: int, forging: bool,
                  log: Optional[EventLog]) -> np.ndarray:
    trial = _forging_trial if forging else _honest_trial
    tally = np.zeros(3, dtype=np.int64)
    for t in range(t0, t1):
        tally += trial(cfg, t, log)
    return tally


# -- vector engine ------------------------------------------------------------

# P(+1) for label (row) measured in basis (column Z, X)
_P_PLUS = np.array([[1.0, 0.5], [0.0, 0.5], [0.5, 1.0], [0.5, 0.0]])


def _draw_count(cfg: ExperimentConfig, forging: bool) -> int:
    d = 2 * cfg.lam * cfg.l + cfg.l + cfg.lam * cfg.l
    if forging:
        if not cfg.fixed_positions:
            d += cfg.flips
        if not isinstance(cfg.strategy, BlindFixed):
            d += cfg.flips * cfg.lam
    return d


def _vector_range(cfg: ExperimentConfig, t0: int, t1: int, forging: bool) -> np.ndarray:
    T, lam, l, K = t1 - t0, cfg.lam, cfg.l, cfg.flips
    u = uniform_block(derive_trial_seeds(cfg.master_seed, np.arange(t0, t1)), 0,
                      _draw_count(cfg, forging))
    n_cells = 2 * lam * l
    cells = (4 * u[:, :n_cells]).astype(np.intp).reshape(T, l, 2, lam)
    off = n_cells
    m = (2 * u[:, off:off + l]).astype(np.intp)
    off += l
    rows = np.arange(T)[:, None]

    m_prime = m
    if forging:
        if cfg.fixed_positions:
            flips = np.broadcast_to(np.arange(K), (T, K))
        else:
            perm = np.tile(np.arange(l), (T, 1))
            r = np.arange(T)
            for i in range(K):
                j = i + (u[:, off + i] * (l - i)).astype(np.intp)
                held = perm[:, i].copy()
                perm[:, i] = perm[r, j]
                perm[r, j] = held
            off += K
            flips = np.sort(perm[:, :K], axis=1)
        m_prime = m.copy()
        m_prime[rows, flips] ^= 1

    # label of the slot Bob measures, and the claimed cell, both shape (T, l, lam)
    target = np.take_along_axis(cells, m_prime[:, :, None, None], axis=2)[:, :, 0, :]
    claimed = np.take_along_axis(cells, m[:, :, None, None], axis=2)[:, :, 0, :]

    if forging:
        strategy = cfg.strategy
        if isinstance(strategy, BlindFixed):
            forged = np.full((T, K, lam), strategy.cell.index)
        elif isinstance(strategy, BlindRandom):
            forged = (4 * u[:, off:off + K * lam]).astype(np.intp).reshape(T, K, lam)
            off += K * lam
        else:
            cdf = estimate_cdf(strategy.copies)
            x = PHASE_OF_LABEL[target[rows, flips]]
            draws = u[:, off:off + K * lam].reshape(T, K, lam)
            xhat = (cdf[x] <= draws[..., None]).sum(axis=-1)
            forged = LABEL_OF_PHASE[xhat]
            off += K * lam
        claimed = claimed.copy()
        claimed[rows, flips] = forged

    draws = u[:, off:off + lam * l].reshape(T, l, lam)
    outcome_minus = ~(draws < _P_PLUS[target, claimed // 2])
    match = outcome_minus == (claimed % 2).astype(bool)
    accepted = int(match.all(axis=(1, 2)).sum())
    if not forging:
        return np.array([accepted, 0, 0], dtype=np.int64)
    flipped = match[rows, flips]
    return np.array([accepted, int(flipped.sum()), int(flipped.all(axis=-1).sum())], dtype=np.int64)


# -- drivers ------------------------------------------------------------------

_CHUNK_BUDGET = 4_000_000  # uniforms per vector chunk


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("QSL_THREADS", "1")))
    except ValueError:
        return 1


def _chunks(total: int, size: int):
    return [(s, min(s + size, total)) for s in range(0, total, size)]


def _tally(cfg: ExperimentConfig, forging: bool, engine: str, threads: Optional[int],
           log: Optional[EventLog]) -> np.ndarray:
    if engine == "auto":
        engine = "object" if log is not None else "vector"
    if engine not in ("object", "vector"):
        raise ValueError(f"unknown engine {engine!r}")
    if log is not None and engine != "object":
        raise ValueError("event logs are only recorded by the object engine")
    threads = threads or default_threads()

    if engine == "object":
        if log is not None or threads == 1:
            return _object_range(cfg, 0, cfg.trials, forging, log)
        work = lambda span: _object_range(cfg, span[0], span[1], forging, None)  # noqa: E731
        spans = _chunks(cfg.trials, max(1, -(-cfg.trials // threads)))
    else:
        size = max(1, min(1 << 16, _CHUNK_BUDGET // _draw_count(cfg, forging)))
        work = lambda span: _vector_range(cfg, span[0], span[1], forging)  # noqa: E731
        spans = _chunks(cfg.trials, size)
    if threads == 1:
        return sum((work(s) for s in spans), np.zeros(3, dtype=np.int64))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return sum(pool.map(work, spans), np.zeros(3, dtype=np.int64))


def _result(cfg: ExperimentConfig, tally: np.ndarray, bound: float, strategy: str,
            forging: bool, started: float) -> ExperimentResult:
    accepts = int(tally[0])
    n_flip_qubits = cfg.trials * cfg.flips * cfg.lam
    return ExperimentResult(
        lam=cfg.lam, l=cfg.l, n_participants=cfg.n_participants,
        k_colluders=cfg.k_colluders if forging else 0, trials=cfg.trials,
        flips=cfg.flips if forging else 0, strategy=strategy, master_seed=cfg.master_seed,
        accept_count=accepts, empirical_rate=accepts / cfg.trials, bound=bound,
        z_score=binomial_z(accepts, cfg.trials, bound),
        block_accept_rate=int(tally[2]) / (cfg.trials * cfg.flips) if forging else None,
        qubit_accept_rate=int(tally[1]) / n_flip_qubits if forging else None,
        wall_time=time.perf_counter() - started,
    )


def run_honest(config: ExperimentConfig, *, engine: str = "auto", threads: Optional[int] = None,
               log: Optional[EventLog] = None) -> ExperimentResult:
    """Keygen, distribution to every participant, signing, verification by p0."""
    started = time.perf_counter()
    tally = _tally(config, False, engine, threads, log)
    return _result(config, tally, 1.0, "honest", False, started)


def run_forging(config: ExperimentConfig, *, engine: str = "auto", threads: Optional[int] = None,
                log: Optional[EventLog] = None) -> ExperimentResult:
    """Splice-forge attacks judged by the non-colluding participant p0.

    Colluders are p1..pk; the reported bound is the exact acceptance
    probability of the configured strategy, (1/2)^(K lam) or F(n)^(K lam).
    """
    started = time.perf_counter()
    tally = _tally(config, True, engine, threads, log)
    bound = strategy_bound(config.strategy, config.lam, config.flips)
    return _result(config, tally, bound, str(config.strategy), True, started)

