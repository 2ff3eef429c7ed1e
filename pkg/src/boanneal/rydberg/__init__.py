"""Maximum-independent-set instances on lattice unit-disk graphs and
their simulation on neutral-atom (Rydberg) hardware models.

graphs    -- lattice UDG generation, exact MIS oracles, hardness parameter
dynamics  -- Rydberg Hamiltonian, trapezoidal/interpolated drive schedules,
             state-vector propagation, measurement sampling
scoring   -- MIS cost function and sample-based figures of merit
io        -- graph JSON files and measurement-record ingestion
"""

from .graphs import (
    DEFAULT_LATTICE_A,
    MISResult,
    UnitDiskGraph,
    are_isomorphic,
    blockade_radius,
    branch_and_bound_mis,
    brute_force_mis,
    filter_unique_mis_noniso,
    generate_lattice_udgs,
    hardness_parameter,
)
from .dynamics import (
    DEFAULT_C6,
    RydbergParams,
    delta_schedule,
    evolve_rydberg,
    omega_schedule,
    rydberg_hamiltonian,
    sample,
)
from .scoring import (
    DEFAULT_ALPHA,
    SampleSet,
    approximation_ratio,
    excitation_probabilities,
    fom_top_quantile,
    mis_energy,
    p_mis,
    p_mis_exact,
)
from .io import SampleFormatError, ingest_samples, load_graph, save_graph

__all__ = [
    "DEFAULT_LATTICE_A",
    "DEFAULT_C6",
    "DEFAULT_ALPHA",
    "UnitDiskGraph",
    "MISResult",
    "RydbergParams",
    "SampleSet",
    "SampleFormatError",
    "generate_lattice_udgs",
    "filter_unique_mis_noniso",
    "brute_force_mis",
    "branch_and_bound_mis",
    "hardness_parameter",
    "are_isomorphic",
    "blockade_radius",
    "rydberg_hamiltonian",
    "omega_schedule",
    "delta_schedule",
    "evolve_rydberg",
    "sample",
    "mis_energy",
    "p_mis",
    "p_mis_exact",
    "fom_top_quantile",
    "approximation_ratio",
    "excitation_probabilities",
    "ingest_samples",
    "load_graph",
    "save_graph",
]
