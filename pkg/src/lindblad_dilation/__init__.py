"""Open-quantum-system simulation by dilating the Lindblad generator into a
Hermitian matrix on an ancilla-extended space: one matrix exponential plus an
ancilla partial trace advances the density matrix with order-k accuracy, and
every step is an exactly completely-positive trace-preserving map.

Layers, bottom up: linear-algebra primitives (linalg), model definitions
(models), half-power matrix series (series), a trusted RK4 reference
(reference), truncated Kraus expansions of the Lindblad propagator (kraus),
the dilation constructors (dilation), the density-matrix stepper (stepper), a
Monte-Carlo SDE unraveler (unraveler), and experiment drivers (experiments).
"""

from .dilation import (
    DilatedHamiltonian,
    dilate_by_order,
    dilate_generic,
    dilate_order1,
    dilate_order2,
    dilate_order2_compact,
    dilate_order3,
    first_column_residual,
)
from .kraus import (
    KrausBlock,
    KrausSeriesSet,
    apply_kraus,
    kraus_series,
    kraus_series_compact_order2,
    trace_residual,
)
from .linalg import DensityMatrix, expm_hermitian, operator_norm, partial_trace_ancilla, trace_norm
from .models import (
    LindbladModel,
    be_norm,
    damped_qubit,
    effective_drift,
    finite_difference_model,
    peak_be_norm,
    periodic_qubit,
    site_operator,
    static_model,
    tfim_damping,
    tfim_driven,
)
from .reference import apply_lindbladian, reference_solution, rk4_evolve, rk4_trajectory
from .stepper import evolve, kraus_operators, step
from .unraveler import TrajectoryBatch, em_step, evolve_batch, mc_density, weak2_step

__version__ = "0.1.0"

__all__ = [
    "DilatedHamiltonian",
    "dilate_by_order",
    "dilate_generic",
    "dilate_order1",
    "dilate_order2",
    "dilate_order2_compact",
    "dilate_order3",
    "first_column_residual",
    "KrausBlock",
    "KrausSeriesSet",
    "apply_kraus",
    "kraus_series",
    "kraus_series_compact_order2",
    "trace_residual",
    "DensityMatrix",
    "expm_hermitian",
    "operator_norm",
    "partial_trace_ancilla",
    "trace_norm",
    "LindbladModel",
    "be_norm",
    "damped_qubit",
    "effective_drift",
    "finite_difference_model",
    "peak_be_norm",
    "periodic_qubit",
    "site_operator",
    "static_model",
    "tfim_damping",
    "tfim_driven",
    "apply_lindbladian",
    "reference_solution",
    "rk4_evolve",
    "rk4_trajectory",
    "evolve",
    "kraus_operators",
    "step",
    "TrajectoryBatch",
    "em_step",
    "evolve_batch",
    "mc_density",
    "weak2_step",
    "__version__",
]
