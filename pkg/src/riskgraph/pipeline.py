"""End-to-end disruption analysis: match extracted events onto a schema,
score the remaining nodes with a GCN, then refine with constraints and
argument coreference.

Stages are toggleable (``gcn_only`` / ``constraints`` / ``full``) so
ablations and the service expose the same switch.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import gcn
from .constraints import (
    DEFAULT_RULES,
    NodeState,
    PredictionResult,
    apply_constraints,
    coref_refine,
)
from .embedding import EmbeddingProvider, HashEmbedder, embed
from .ingest import CorefConfig, ExtractedEvent, coref_link
from .matching import (
    ConsistencyReport,
    InstantiatedGraph,
    MatchConfig,
    MatchReport,
    consistency_check,
    instantiate,
    match_events,
)
from .metric import PRF
from .schema import SchemaLibrary, id_sort_key, schema_text
from .synth import MaskConfig, TrainingSample, generate_training_set

log = logging.getLogger(__name__)

STAGES = ("gcn_only", "constraints", "full")


class StageFailure(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class PipelineConfig:
    stages: str = "full"
    seed: int = 42
    threshold: float = 0.5
    match: MatchConfig = field(default_factory=MatchConfig)
    coref: CorefConfig = field(default_factory=CorefConfig)
    hidden_dims: tuple[int, ...] = (16, 8)
    epochs: int = 150
    learning_rate: float = 0.1
    lam: float = 1e-4
    train_samples: int = 20
    mask_fraction: float = 0.5

    def __post_init__(self) -> None:
        if self.stages not in STAGES:
            raise ValueError(f"stages must be one of {STAGES}, got {self.stages!r}")


@dataclass(frozen=True)
class PipelineOutcome:
    match_report: MatchReport
    graph: InstantiatedGraph
    consistency: ConsistencyReport
    result: PredictionResult


def node_text_vectors(lib: SchemaLibrary, provider: EmbeddingProvider) -> dict[str, np.ndarray]:
    return {nid: embed(provider, schema_text(lib.events[nid])) for nid in lib.events}


def _vectorize(
    model: gcn.GcnModel,
    samples: Sequence[TrainingSample],
    lib: SchemaLibrary,
    adjacency: np.ndarray,
    node_ids: list[str],
    text_vectors: Mapping[str, np.ndarray],
) -> list[gcn.Batch]:
    index = {nid: i for i, nid in enumerate(node_ids)}
    batches = []
    for sample in samples:
        x = gcn.build_features(sample.graph, lib, text_vectors=text_vectors)
        labels = {index[nid]: float(v) for nid, v in sample.labels.items()}
        batches.append(gcn.make_batch(model, adjacency, x, labels))
    return batches


def train_for_library(
    lib: SchemaLibrary,
    provider: EmbeddingProvider,
    config: PipelineConfig,
    samples: Sequence[TrainingSample] | None = None,
) -> tuple[gcn.GcnModel, list[float]]:
    """Train a fresh GCN on mask-out samples drawn from the library itself."""
    node_ids, adjacency = gcn.build_adjacency(lib)
    text_vectors = node_text_vectors(lib, provider)
    feature_dim = provider.dimension + 7
    model = gcn.init_model(
        [feature_dim, *config.hidden_dims],
        seed=config.seed,
    )
    if samples is None:
        samples = generate_training_set(
            lib, MaskConfig(mask_fraction=config.mask_fraction, count=config.train_samples, seed=config.seed),
        )
    batches = _vectorize(model, samples, lib, adjacency, node_ids, text_vectors)
    cfg = gcn.TrainConfig(
        lam=config.lam, learning_rate=config.learning_rate,
        epochs=config.epochs, seed=config.seed, threshold=config.threshold,
    )
    return gcn.train(model, batches, cfg)


def score_graph(
    model: gcn.GcnModel,
    graph: InstantiatedGraph,
    provider: EmbeddingProvider,
    text_vectors: Mapping[str, np.ndarray] | None = None,
) -> dict[str, float]:
    """Raw GCN scores per node id."""
    lib = graph.library
    node_ids, adjacency = gcn.build_adjacency(lib)
    if text_vectors is None:
        text_vectors = node_text_vectors(lib, provider)
    x = gcn.build_features(graph, lib, text_vectors=text_vectors)
    scores = gcn.gcn_forward(model, adjacency, x)
    return {nid: float(scores[i]) for i, nid in enumerate(node_ids)}


def refine(
    graph: InstantiatedGraph,
    scores: Mapping[str, float],
    config: PipelineConfig,
    exts: Sequence[ExtractedEvent] = (),
) -> PredictionResult:
    """Apply the configured refinement stages to raw scores."""
    if config.stages == "gcn_only":
        states = {
            nid: NodeState.MATCHED if graph.is_matched(nid)
            else NodeState.PREDICTED if scores[nid] >= config.threshold
            else NodeState.NOT_PREDICTED
            for nid in graph.library.events
        }
        return PredictionResult(raw_scores=dict(scores), states=states)
    result = apply_constraints(graph, scores, DEFAULT_RULES, config.threshold)
    if config.stages == "full":
        clusters = coref_link(list(exts), config.coref)
        result = coref_refine(result, clusters, graph)
    return result


def run_prediction(
    lib: SchemaLibrary,
    exts: Sequence[ExtractedEvent],
    provider: EmbeddingProvider | None = None,
    model: gcn.GcnModel | None = None,
    config: PipelineConfig = PipelineConfig(),
) -> PipelineOutcome:
    """Match, instantiate, score, and refine; raises StageFailure with the stage name."""
    provider = provider or HashEmbedder()
    try:
        match_report = match_events(exts, lib, provider, config.match)
        graph = instantiate(match_report.matches, lib, exts)
        consistency = consistency_check(graph)
    except Exception as exc:
        raise StageFailure("matching", exc) from exc
    try:
        if model is None:
            model, _ = train_for_library(lib, provider, config)
        scores = score_graph(model, graph, provider)
    except Exception as exc:
        raise StageFailure("gcn", exc) from exc
    try:
        result = refine(graph, scores, config, exts)
    except Exception as exc:
        raise StageFailure("refinement", exc) from exc
    return PipelineOutcome(match_report=match_report, graph=graph, consistency=consistency, result=result)


def prediction_prf(
    result: PredictionResult,
    gold_positive: set[str],
    eligible: Sequence[str],
) -> PRF:
    """Precision/recall/F of PREDICTED nodes against gold positives.

    ``eligible`` is the supervised node set (typically every unmatched node).
    """
    eligible_set = set(eligible)
    predicted = {n for n in result.predicted() if n in eligible_set}
    gold = gold_positive & eligible_set
    tp = len(predicted & gold)
    precision = tp / len(predicted) if predicted else 1.0
    recall = tp / len(gold) if gold else 1.0
    fscore = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return PRF(precision=precision, recall=recall, fscore=fscore)


def prediction_report(outcome: PipelineOutcome) -> dict:
    """JSON-ready report: scores, states, audit trail, consistency."""
    result = outcome.result
    node_ids = sorted(result.states, key=id_sort_key)
    return {
        "nodes": [
            {
                "id": nid,
                "state": result.states[nid].value,
                "score": result.raw_scores[nid],
                "inherited_arguments": sorted(result.coref_arguments.get(nid, ())),
            }
            for nid in node_ids
        ],
        "applied_rules": [
            {"rule": a.rule.value, "node": a.node, "iteration": a.iteration}
            for a in result.applied_rules
        ],
        "matches": [
            {
                "extracted_id": m.extracted_id,
                "schema_id": m.schema_id,
                "composite": m.composite,
                "semantic": m.semantic,
                "structural": m.structural,
            }
            for m in outcome.match_report.matches
        ],
        "unmatched_extracted": list(outcome.match_report.unmatched),
        "consistency": {
            "ok": outcome.consistency.ok,
            "gate_violations": [list(v) for v in outcome.consistency.gate_violations],
            "temporal_violations": [list(v) for v in outcome.consistency.temporal_violations],
        },
    }
