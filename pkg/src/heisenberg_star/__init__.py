"""Central spin on an isotropic Heisenberg ring: spectrum and dynamics."""

__version__ = "0.1.0"

from .core import BasisSector, ModelParams, StateVector, enumerate_bath_sector, enumerate_sector, make_params, sector_dimension
from .operators import (
    SparseOperator,
    apply,
    build_bath_ring,
    build_L_squared,
    build_modified_star,
    build_staggered,
    build_star_hamiltonian,
    build_system_bath,
    build_zeeman,
    expectation,
)
from .spectrum import (
    GroundScanRow,
    LevelTable,
    bath_subground_energy,
    degeneracy,
    ground_scan,
    lanczos_lowest,
    level_table,
    single_magnon_energy,
    star_energy,
    state_count,
    sub_ground_energy,
    transition_point,
)
from .states import (
    CoherentSpec,
    central_initial,
    dicke_state,
    neel_state,
    spin_coherent,
    subground_coefficients,
    subground_state,
)
from .dynamics import (
    TimeSeries,
    coherent_experiment,
    evolve,
    first_crossing,
    j_independence_check,
    neel_experiment,
)
