"""Phase-space Monte Carlo for multipartite GHZ Bell statistics.

Samples the positive SU(2)-Q distribution of M-qubit GHZ states, estimates
Mermin/Ardehali Bell quantities and their sampling-error scaling, and applies
a collective dephasing model. Exact dense state-vector references for small M
live in :mod:`ghzq.oracle`.
"""

from ghzq.core import (
    BellConvention,
    BlochSample,
    ConventionLabel,
    Extraction,
    GENUINE_THRESHOLD,
    GhzSpec,
    MAX_QUBITS,
    MomentAccumulator,
    PhasePoint,
    ardehali_convention,
    f_qm_closed_form,
    lhv_bound_ratio,
    mermin_convention,
)
from ghzq.sampling import SampleStreamSpec, sample_batch
from ghzq.estimators import BellEstimate, bell_weight, estimate_bell, spin_up_total
from ghzq.decoherence import NoiseSpec

__version__ = "0.1.0"

__all__ = [
    "BellConvention",
    "BellEstimate",
    "BlochSample",
    "ConventionLabel",
    "Extraction",
    "GENUINE_THRESHOLD",
    "GhzSpec",
    "MAX_QUBITS",
    "MomentAccumulator",
    "NoiseSpec",
    "PhasePoint",
    "SampleStreamSpec",
    "ardehali_convention",
    "bell_weight",
    "estimate_bell",
    "f_qm_closed_form",
    "lhv_bound_ratio",
    "mermin_convention",
    "sample_batch",
    "spin_up_total",
    "__version__",
]
