"""olcvar: object life cycle composition, compliance checking, and
exception-driven process-model variant generation."""

from .adaptation import (
    AdaptedOlc,
    BcfInsertion,
    InsertedTransition,
    Position,
    adapt_olc,
    aolc_from_dict,
    aolc_to_dict,
    get_position,
    insert_bcf,
    parse_aolc,
    serialize_aolc,
)
from .compliance import (
    CheckReport,
    ComplianceReport,
    Violation,
    check_compliance,
    check_conformance,
    check_coverage,
)
from .errors import (
    AmbiguousHostError,
    AmbiguousPositionError,
    DuplicateTransitionError,
    ExplosionError,
    HostNotFoundError,
    InvalidSyncError,
    NoContextError,
    NotAdjacentError,
    OlcvarError,
    ParseError,
    StructureError,
    UnknownBcfError,
    UnsupportedElementError,
)
from .olc import (
    CompositeOlc,
    CompositeTransition,
    Effect,
    LifecyclePath,
    ObjectLifeCycle,
    OlcTransition,
    State,
    SyncSpec,
    ValidationIssue,
    ValidationReport,
    compose,
    olc_from_dict,
    olc_paths,
    olc_to_dict,
    parse_lifecycle_bundle,
    parse_olc,
    serialize_olc,
    validate_olc,
)
from .process_model import (
    Node,
    NodeKind,
    ProcessModel,
    Provenance,
    SequenceFlow,
    Trigger,
    export_dot,
    induced_transitions,
    model_from_dict,
    model_to_dict,
    parse_model,
    serialize_model,
    structurally_equal,
)
from .sequence_diagram import (
    BreakCombinedFragment,
    Message,
    SequenceDiagram,
    context_of,
    extract_bcfs,
    parse_sd,
    sd_from_dict,
    sd_to_dict,
    serialize_sd,
)
from .traces import DEFAULT_TRACE_CAP, enumerate_traces
from .variants import (
    ExceptionPattern,
    PATTERNS,
    find_host,
    generate_variant,
    insert_pattern,
    pattern_for,
    strip_variant,
    verify_variant,
)

__version__ = "0.1.0"
