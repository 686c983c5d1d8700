"""Rigidity analysis and nonlinear mechanisms of periodic spring lattices."""

from .errors import (
    ConsistencyFailed,
    DegenerateGeometry,
    HypothesesUnmet,
    InvalidSequence,
    MaxlatError,
    NewtonDiverged,
    NotAGHMode,
    NotAStandardKagome,
    ParseError,
    RangeExceeded,
    SingularSystem,
    SOutOfRange,
    Theta4Undefined,
    ThetaAtSingularity,
    ValidationError,
)
from .lattice import (
    Edge,
    PeriodicLattice,
    build_deformed_two_periodic,
    build_special_two_by_one,
    build_special_two_by_two,
    build_standard_kagome,
    build_twisted_kagome,
    load_lattice,
    save_lattice,
    supercell,
)
from .rigidity import (
    CompatibilityMatrix,
    ModeBasis,
    assemble_compatibility,
    gh_modes,
    is_maxwell,
    line_self_stress,
    nullspace,
    self_stresses,
)
from .effective import (
    EffectiveTensor,
    SymStrain,
    corrector_blowup_scan,
    effective_energy,
    effective_tensor,
    macroscopic_stress,
    minimum_norm_corrector,
    self_stress_from_strain,
)
from .mechanisms import (
    LayerSequence,
    MechanismPath,
    four_by_one_mechanism,
    infinitesimal_mode,
    layered_mechanism,
    nonlinear_energy,
    one_periodic_mechanism,
    two_by_one_mechanism,
    two_by_two_mechanism,
    two_periodic_mechanism,
    twisted_to_twisted,
    validate_layer_sequence,
)
from .secondorder import (
    SecondOrderVerdict,
    consistency_condition_kagome,
    necessary_condition_test,
    solve_xi2_from_line_sums,
    two_periodic_tangent_cone_test,
)
from .bloch import (
    BlochWave,
    FHMode,
    classify_fh_combination,
    complex_compatibility,
    fh_basis,
    fh_full_basis,
    fh_modes,
    fh_null_vector,
)
from .continuation import (
    ContinuationResult,
    continue_mechanism,
    jacobian_check,
    solve_second_order_unique,
)

__version__ = "0.1.0"
