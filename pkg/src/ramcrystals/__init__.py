"""Exact Newton/Hodge/Pappas-Rapoport polygons and mu-ordinary Hasse
invariants for F-crystals with an unramified-times-totally-ramified
endomorphism action over finite fields.

Everything computes in exact truncated Witt arithmetic: polygons are exact
rationals, Hasse invariants are exact residue-field (or artinian-algebra)
elements, and every division is certified or refused.
"""

from .errors import (
    EmptyEtalePart,
    EmptyList,
    FiltrationInvalid,
    HypothesisViolated,
    InvalidDatum,
    NoConvergence,
    NoPreimage,
    NotABreakContact,
    NotASummand,
    NotDecomposable,
    NotDivisible,
    NotMuOrdinary,
    OrderedDatumRequired,
    OutOfRange,
    PrecisionExhausted,
    RamCrystalsError,
    WellDefinednessFailure,
    WidthMismatch,
)
from .witt import ABOVE_PRECISION, AbovePrecision, BaseField, FFElem, WittElem
from .ramified import LocalField, RamElem
from .linalg import RamMatrix, smith_form, solve_right
from .polygon import Polygon, mean_polygons
from .crystal import (
    Crystal,
    PRDatum,
    PRFiltration,
    PRReport,
    default_precision,
    derive_seed,
    exterior_datum,
    exterior_power,
    graded_datum,
    hodge_polygon,
    hodge_polygon_tau,
    newton_oracle,
    newton_polygon,
    pr_polygon,
    pr_polygon_tau,
    random_ordered_datum,
    random_pr_crystal,
    validate_pr,
)
from .hasse import (
    HasseLevel,
    HasseReport,
    VerschiebungView,
    adapted_basis,
    contact_test,
    ha_endomorphism,
    hasse_scalar,
    is_mu_ordinary,
    rapoport_test,
    total_hasse,
    zeta_exponent,
    zeta_matrix,
)
from .ordinary import (
    EtalePart,
    SplitResult,
    change_basis,
    etale_part,
    hodge_newton_split,
    mu_ordinary_decomposition,
    mu_ordinary_model,
    rank_one_crystal,
    slope_break_data,
)
from .artinian import (
    ArtinAlgebra,
    ArtinElem,
    BT1Crystal,
    BT1Report,
    GeneralHasseLevel,
    GeneralHasseReport,
    RingMap,
    deformed_flag_instance,
    general_hasse,
    total_general_hasse,
    validate_bt1,
)

try:
    from importlib.metadata import PackageNotFoundError, version

    __version__ = version("ramcrystals")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

__all__ = [
    "ABOVE_PRECISION",
    "AbovePrecision",
    "ArtinAlgebra",
    "ArtinElem",
    "BT1Crystal",
    "BT1Report",
    "BaseField",
    "Crystal",
    "EmptyEtalePart",
    "EmptyList",
    "EtalePart",
    "FFElem",
    "FiltrationInvalid",
    "GeneralHasseLevel",
    "GeneralHasseReport",
    "HasseLevel",
    "HasseReport",
    "HypothesisViolated",
    "InvalidDatum",
    "LocalField",
    "NoConvergence",
    "NoPreimage",
    "NotABreakContact",
    "NotASummand",
    "NotDecomposable",
    "NotDivisible",
    "NotMuOrdinary",
    "OrderedDatumRequired",
    "OutOfRange",
    "PRDatum",
    "PRFiltration",
    "PRReport",
    "Polygon",
    "PrecisionExhausted",
    "RamCrystalsError",
    "RamElem",
    "RamMatrix",
    "RingMap",
    "SplitResult",
    "VerschiebungView",
    "WellDefinednessFailure",
    "WidthMismatch",
    "WittElem",
    "adapted_basis",
    "change_basis",
    "contact_test",
    "default_precision",
    "deformed_flag_instance",
    "derive_seed",
    "etale_part",
    "exterior_datum",
    "exterior_power",
    "general_hasse",
    "graded_datum",
    "ha_endomorphism",
    "hasse_scalar",
    "hodge_newton_split",
    "hodge_polygon",
    "hodge_polygon_tau",
    "is_mu_ordinary",
    "mean_polygons",
    "mu_ordinary_decomposition",
    "mu_ordinary_model",
    "newton_oracle",
    "newton_polygon",
    "pr_polygon",
    "pr_polygon_tau",
    "random_ordered_datum",
    "random_pr_crystal",
    "rank_one_crystal",
    "rapoport_test",
    "slope_break_data",
    "smith_form",
    "solve_right",
    "total_general_hasse",
    "total_hasse",
    "validate_bt1",
    "validate_pr",
    "zeta_exponent",
    "zeta_matrix",
]
