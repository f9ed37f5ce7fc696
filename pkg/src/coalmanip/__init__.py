"""Coalitional manipulability of scoring-rule elections.

Exact rational decision of whether a coalition can overturn a scoring
rule outcome, explicit strategic-ballot construction, independent LP
and brute-force oracles, and Monte Carlo estimation of manipulable
shares under the impartial anonymous culture limit.
"""

__version__ = "0.1.0"

from .errors import (
    CoalmanipError,
    DegenerateRuleError,
    InfeasibleError,
    InternalInvariantError,
    MassMismatchError,
    NotApplicableError,
    NotManipulableError,
    SameAlternativeError,
    SelectionBoundsError,
    SizeLimitError,
    TiedArrangementError,
    UnknownRuleError,
    ValidationError,
    WeightOrderError,
)
from .manip import (
    BoundedCoalitionSpec,
    Coalition,
    DVector,
    ManipVerdict,
    check_all,
    check_bounded,
    check_plurality,
    check_theorem,
    coalition,
    d_vector,
    emit_system,
)
from .mc import EstimateResult, estimate_share, sample_simplex
from .oracle import FiniteResult, OracleResult, finite_brute_force, lp_manipulable
from .prefs import (
    IntProfile,
    Profile,
    TieReport,
    arrangement,
    enumerate_rankings,
    points_matrix,
    ranking_index,
    ranking_label,
    relabel,
    tally,
)
from .rules import ScoringRule, make_rule, named_rule, normalize
from .witness import Witness, WitnessStep, build_witness, validate_witness
