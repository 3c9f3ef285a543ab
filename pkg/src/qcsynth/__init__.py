"""Minimum entangling-gate counts for few-qubit circuits, by exhaustive search.

The package enumerates every entangling-gate configuration for a given
circuit size, optimizes the interleaved single-qubit rotations with a
first-order gradient method, and post-processes the per-configuration
fidelities into counts, histograms, depth tables and equivalence classes.
"""

from .bounds import circuit_params, lower_bound, target_params
from .circuits import (
    GateConfiguration,
    ParamCircuit,
    apply_to_state,
    compose,
    config_from_id,
    count_configs,
    depth,
    enumerate_configs,
    parse_config,
    permutation_operator,
    permute,
    reverse,
)
from .grape import (
    OptimizerSettings,
    OptResult,
    circuit_fidelity,
    gradient,
    init_rotations,
    insertion_points,
    multi_restart,
    optimize,
)
from .linalg import embed_single, kron, su2_exp, trace_inner
from .seeds import child_rng
from .targets import (
    TargetSpec,
    debias,
    load_target,
    multi_cz,
    random_state,
    random_target,
    random_unitary,
    save_target,
    state_fidelity,
    toffoli,
    toffoli_target,
    unitary_fidelity,
)

__version__ = "0.1.0"
