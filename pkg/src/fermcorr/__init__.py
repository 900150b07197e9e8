"""Slater correlations of two-fermion states.

Pure states are antisymmetric coefficient matrices, mixed states are
density matrices on the antisymmetric two-particle space.  The toolkit
covers Slater decompositions, the K=2 correlation measure and Slater
number test for mixed states, and Slater witnesses for general K.
"""

from .basis import dim, embed_operator, embedding, pair_operator
from .linalg import (
    ConvergenceError,
    LinAlgInputError,
    epsilon_contract,
    pfaffian4,
    takagi_factorize,
    youla_decompose,
)
from .mixed import (
    MixedState,
    correlation_matrix,
    has_slater_number_one,
    maximally_mixed,
    slater_measure,
    spectral_decompose,
    synthesize_optimal_decomposition,
)
from .pure import (
    StateError,
    TwoFermionState,
    determinant,
    dual_state,
    eta,
    maximally_correlated,
    slater_decompose,
    slater_rank,
    wedge,
)
from .witnesses import (
    Budget,
    WitnessOperator,
    canonical_witness,
    edge_check,
    evaluate,
    example_witness,
    jamiolkowski_map,
    min_over_slater_class,
    optimize_witness,
    subtract_rank_deficient,
    tangent_probe,
)

__all__ = [name for name in dir() if not name.startswith("_")]
