"""riskgraph: event-schema libraries, merging, quadruple scoring, and
GCN + constraint disruption analysis for supply chain news."""

__version__ = "0.1.0"

from .schema import (  # noqa: F401
    Gate,
    Participant,
    SchemaEvent,
    SchemaLibrary,
    TemporalRelation,
    ValidationReport,
    library_from,
    parse_sdf,
    serialize_sdf,
    validate,
)
from .hierarchy import parse_hierarchy_text  # noqa: F401
from .merge import build_name_to_id, merge, merge_event_details  # noqa: F401
from .metric import PRF, Quadruple, SearchConfig, best_mapping, decompose, score, score_report  # noqa: F401
from .embedding import HashEmbedder, cosine, embed, hash_embed  # noqa: F401
from .ingest import (  # noqa: F401
    CorefClusters,
    CorefConfig,
    Document,
    ExtractedEvent,
    baseline_extract,
    coref_link,
    impact_score,
    load_extractions,
)
from .matching import (  # noqa: F401
    InstantiatedGraph,
    Match,
    MatchConfig,
    composite_sim,
    consistency_check,
    instantiate,
    match_events,
    sem_sim,
    str_sim,
)
from .gcn import Activation, AdjacencyMode, GcnModel, TrainConfig, gcn_forward, init_model, train  # noqa: F401
from .constraints import (  # noqa: F401
    DEFAULT_RULES,
    ConstraintRule,
    NodeState,
    PredictionResult,
    RuleKind,
    apply_constraints,
    check_constraints,
    coref_refine,
)
from .synth import MaskConfig, generate_training_set, random_library  # noqa: F401
from .pipeline import PipelineConfig, prediction_prf, run_prediction  # noqa: F401
