"""Optimal conversion of bipartite pure states into maximally entangled states."""

from .bounds import (
    BoundTable,
    RunLengthSpectrum,
    bound_table,
    case_a_criterion,
    check_lemma4_shape,
    check_lemma5_shape,
    pmax_runlength,
    tensor_power_spectrum,
)
from .compiler import (
    CompiledStrategy,
    MeasurementStep,
    StrategyBranch,
    case_a_step,
    case_b_trim,
    compile_strategy,
    lemma2_step,
    lemma3_step,
)
from .states import (
    BipartitePureState,
    DensityOperator,
    SchmidtDecomposition,
    entropy_of_entanglement,
    fidelity_to,
    from_schmidt,
    make_me_state,
    make_precursor,
    partial_trace_a,
    partial_trace_b,
    schmidt_decompose,
    spectra_equal,
)

__version__ = "0.1.0"
