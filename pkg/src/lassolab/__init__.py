"""lassolab: explore bounded behaviours of typed labelled transition models."""

from .lks import (
    EventInfo,
    Lasso,
    TypedLks,
    make_lks,
    successors,
    unroll,
    validate_lasso,
    validate_lks,
)
from .seltl import (
    BoundFormula,
    Formula,
    ParseError,
    UnknownAtomError,
    bind,
    compile_evaluator,
    eval_lasso,
    nnf,
    parse_formula,
    text,
)
from .encode import encode_prefix, encode_state, nest_next
from .checker import (
    BoundedChecker,
    BuchiAutomaton,
    CheckResult,
    InvalidModelError,
    OracleLimitError,
    find_counterexample,
    iter_lassos,
    ltl_to_buchi,
    oracle_find,
)
from .egs import (
    CompileError,
    CompiledModel,
    DeadlockError,
    EmptyInitialError,
    EventSystem,
    GroundEvent,
    ModelError,
    StateCapError,
    compile_lks,
    ground,
    parse_model,
)
from .explorer import (
    BoundaryError,
    ExplorationState,
    NoAlternative,
    PropertyHolds,
    RestrictionMap,
    alt_event,
    alt_state,
    enabled_types,
    init_session,
    set_event_type,
    step_backward,
    step_forward,
)
from .models import bad_safety_property, hotel_source, toggle_source

__all__ = [
    "BoundFormula",
    "BoundaryError",
    "BoundedChecker",
    "BuchiAutomaton",
    "CheckResult",
    "CompileError",
    "CompiledModel",
    "DeadlockError",
    "EmptyInitialError",
    "EventInfo",
    "EventSystem",
    "ExplorationState",
    "Formula",
    "GroundEvent",
    "InvalidModelError",
    "Lasso",
    "ModelError",
    "NoAlternative",
    "OracleLimitError",
    "ParseError",
    "PropertyHolds",
    "RestrictionMap",
    "StateCapError",
    "TypedLks",
    "UnknownAtomError",
    "alt_event",
    "alt_state",
    "bad_safety_property",
    "bind",
    "compile_evaluator",
    "compile_lks",
    "enabled_types",
    "encode_prefix",
    "encode_state",
    "eval_lasso",
    "find_counterexample",
    "ground",
    "hotel_source",
    "init_session",
    "iter_lassos",
    "ltl_to_buchi",
    "make_lks",
    "nest_next",
    "nnf",
    "oracle_find",
    "parse_formula",
    "parse_model",
    "set_event_type",
    "step_backward",
    "step_forward",
    "successors",
    "text",
    "toggle_source",
    "unroll",
    "validate_lasso",
    "validate_lks",
]
