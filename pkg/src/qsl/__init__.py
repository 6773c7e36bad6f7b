"""Single-qubit quantum digital signatures without a trusted third party.

Submodules: ``qubit`` (BB84 states and measurements), ``protocol`` (key
generation, signing, verification), ``identification`` (optimal n-copy state
identification and the F(n) bound), ``adversary`` (forging strategies),
``harness`` (Monte Carlo experiments) and ``cli``.
"""

from .adversary import BlindFixed, BlindRandom, Measured, splice_forge, strategy_bound
from .harness import ExperimentConfig, ExperimentResult, cost_accounting, run_forging, run_honest
from .identification import f_bound, min_risk_closed_form, optimal_povm
from .protocol import (
    Message,
    ProtocolParams,
    Verdict,
    acceptance_probability,
    issue_copy,
    pk_gen,
    sign,
    sk_gen,
    verify,
)
from .seeding import CounterRng, derive_trial_seed

__version__ = "0.1.0"
