"""Exact calculus for (a,b)-modules over truncated rational power series.

The algebra has two generators a and b with ab - ba = b^2; everything is
computed with exact rational coefficients modulo a truncation order in b.
"""

from .errors import (
    AbcalcError,
    NonGeometric,
    NonUnit,
    NoSuchBlock,
    NotRegular,
    NotSimplePole,
    ObstructedSplit,
    OrderMismatch,
    PrecisionExhausted,
    Resonance,
    SyntaxErrorAt,
)
from .series import TruncSeries, series_derive, series_invert, series_mul
from .operators import (
    AbOperator,
    GradedOperator,
    RightNormalForm,
    ab_mul,
    act_on_disc,
    binomial_shift,
    divide_factored,
    divide_linear,
    gamma_coeff,
    invert_graded,
    to_left,
    to_right,
)
from .lattices import Lattice
from .modules import (
    ModulePresentation,
    SaturationResult,
    ShiftedLattice,
    apply_a,
    apply_op,
    bernstein_min,
    decompose_primitive,
    is_simple_pole,
    jordan_chain,
    make_E_theta,
    normalize_submodule,
    saturate,
    solve_shifted,
    split_extension,
    tensor,
    xi_module,
)
from .monodromy import (
    FiltrationResult,
    nilpotent_order,
    nilpotent_part,
    semisimple_filtration,
    u_matrix,
)
from .frescos import (
    BernsteinPolynomial,
    CharSequence,
    FactoredFresco,
    annihilator_of,
    bernstein_element,
    bernstein_fresco,
    fresco_to_module,
    higher_bernstein,
    is_semisimple_fresco,
    pole_report,
    primitive_parts,
    principal_jh,
)
from .embedding import EmbeddingResult, embed_in_xi
from .parsing import parse_element

__version__ = "0.1.0"
