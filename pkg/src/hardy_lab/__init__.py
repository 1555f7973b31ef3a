"""Weighted discrete Hardy constants on trees, cube coverings of Holder cusp
domains, constructive mean-zero decompositions, and inequality checkers."""

__version__ = "0.1.0"

from .tree import (  # noqa: F401
    Antichain,
    AntichainCapExceeded,
    RootedTree,
    TreeError,
    build_tree,
    chain_tree,
    enumerate_antichains,
    induced_subtree,
    random_tree,
    star_tree,
)
from .hardy import (  # noqa: F401
    HardyProblem,
    HardyReport,
    a_chain,
    a_tree,
    alpha_K,
    assemble_uv,
    chain_equivalence_check,
    ehp_B,
    exact_constant,
    hardy_report,
    make_problem,
    optimize_theta,
)
from .covering import (  # noqa: F401
    CubeCovering,
    HolderProfile,
    build_covering,
    check_disjoint_and_coverage,
    counting_profiles,
    profile_demo,
    profile_flat,
    profile_rough,
    tail_integrability,
    verify_counting_bounds,
    weights_from_beta,
)
from .decomp import (  # noqa: F401
    CellFunction,
    CellSpace,
    DecompositionError,
    Fragment,
    decompose,
    random_mean_zero,
    space_from_covering,
    split_pair,
    toy_two_cell_space,
    verify_decomposition,
)
from .inequalities import (  # noqa: F401
    RatioReport,
    TestFunction,
    check_gradient,
    density_split,
    f_bilinear,
    f_distance_power,
    f_linear,
    inequality_ratio,
    parameter_sweep,
    u_rigid_rotation,
    u_shear,
)
