"""Weighted tree automata, weighted MSO on trees, and branching closure.

Exact semiring weights throughout; all values immutable.  See the demos
directory for worked, narrative examples of each capability.
"""

from .caps import Caps, DEFAULT_CAPS
from .errors import (
    BadMacroParams,
    ExplosionGuard,
    InvalidEncoding,
    NotNormalized,
    NotProgressFormula,
    NotStepFamily,
    NotStepFormula,
    ParseError,
    PositionOutOfRange,
    TreeLogicError,
    UnboundVariable,
    VariableOutOfRange,
)
from .semirings import (
    BOOLEAN,
    INF,
    NATURALS,
    SEMIRINGS,
    Semiring,
    TROPICAL,
    VITERBI,
    by_name,
    is_zero,
    semiring_product,
    semiring_sum,
)
from .trees import (
    EPSILON,
    Position,
    RankedAlphabet,
    Tree,
    TreeHomomorphism,
    all_trees,
    hom_preimage_count,
    leaf,
    lex_leq,
    node,
    parse_position,
    parse_term,
    render_position,
    render_term,
    trees_of_size,
)
from .formulas import (
    And,
    Const,
    Edge,
    EncodedTree,
    EvalCache,
    ExistsFO,
    ExistsSO,
    ForallFO,
    ForallSO,
    Formula,
    In,
    Label,
    Leq,
    Mod,
    Not,
    Or,
    classical_holds,
    decode,
    encode,
    evaluate,
    evaluate_at,
    fragment_of,
    free_vars,
    parse_formula,
    render_formula,
    step_dnf,
)
from .slicing import (
    Decomposition,
    Slice,
    dec,
    enumerate_slices,
    head_cut,
    max_breadth,
)
from .automata import (
    Wta,
    normalize_final,
    parse_wta,
    random_wta,
    recognize,
    render_wta,
    run,
    string_recognize,
)
from .closure import (
    ClosureRun,
    CustomProgress,
    DescBounded,
    DescPlus,
    FormulaFamily,
    build_tc,
    build_tc_level,
    eval_tc,
    eval_tc_levels,
    lift_bounded,
    parse_family,
    random_step_family,
    render_family,
)
from .automata_to_closure import (
    PhiConstruction,
    build_phi,
    check_recognize_equals_closure,
    phi_semantics_direct,
    theta,
)
from .forks import (
    PsiConstruction,
    branching_degree,
    build_psi,
    check_closure_equals_psi,
    eval_psi,
    find_fork,
    forks_below,
    theta_to_step,
)
