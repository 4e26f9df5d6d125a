"""Quantum cloning attacks on PUF-based quantum authentication.

Modules:

* :mod:`pufclone.quantum` -- dense states, Haar sampling, partial trace, fidelity.
* :mod:`pufclone.cloning` -- explicit optimal universal N -> M cloner.
* :mod:`pufclone.bounds` -- closed-form false-accept bounds and special functions.
* :mod:`pufclone.protocol` -- enrollment/verification Monte Carlo with attackers.
* :mod:`pufclone.cli` -- batch command-line front-end.
"""
from .bounds import (
    est_fidelity,
    monotonicity_report,
    poisson_avg_bound,
    pqcm_fidelity_1to2,
    reg_inc_beta,
    total_false_accept,
    uqcm_fidelity,
)
from .cloning import CloneParams, avg_clone_fidelity_mc, single_clone_state, sym_dim, sym_projector, uqcm_clone
from .protocol import (
    PhotonSource,
    ProtocolParams,
    ProverStrategy,
    PufRecord,
    PufRegistry,
    enroll,
    estimate_rates,
    run_verification,
)
from .quantum import (
    DensityOperator,
    PureState,
    SeededRng,
    UnitaryMatrix,
    apply_unitary,
    fidelity,
    haar_state,
    haar_unitary,
    measure_accept,
    partial_trace,
    tensor_power,
)

__version__ = "0.1.0"
