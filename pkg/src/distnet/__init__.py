"""Gain analysis, signed-Laplacian tests and weight allocation for distribution networks."""

__version__ = "0.1.0"

from .errors import (
    DistNetError,
    IndefiniteMatrixError,
    InfeasibleAllocationError,
    NumericalFailure,
    PortDisconnectedError,
)
from .graph import (
    Edge,
    Graph,
    Port,
    component_labels,
    connected_components,
    incidence_matrix,
    laplacian,
    port_matrix,
    validate_ports,
)
from .spectral import DEFAULT_TOL, TolerancePolicy, is_psd, laplacian_pinv, pseudo_inverse, sym_eig
from .hinf import (
    GainCertificate,
    NetworkSystem,
    SymmetricSystem,
    corollary_bound,
    freq_response,
    hinf_general,
    hinf_network,
    hinf_symmetric,
    hinf_sweep,
    lmi_feasible,
    lmi_feasible_schur,
    riccati_check,
)
from .signed import critical_scale, effective_resistance, psd_check, split_signed
from .allocate import (
    AllocationProblem,
    AllocationResult,
    SolverOptions,
    grid_oracle,
    objective,
    project_simplex,
    solve,
    subgradient,
)
