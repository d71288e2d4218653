"""Graph convolutional scoring of schema nodes, trained with plain
full-batch gradient descent on a squared-error objective with L2 weight
decay.

Everything is numpy: the propagation rule per layer is
``H' = act(A_hat @ H @ W)`` followed by a logistic scalar head, and the
gradients are analytic (verified against central finite differences in
the test suite).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .embedding import EmbeddingProvider, embed
from .matching import InstantiatedGraph
from .schema import Gate, SchemaLibrary, id_sort_key, schema_text

log = logging.getLogger(__name__)


class ShapeMismatch(ValueError):
    pass


class EmptyBatch(ValueError):
    pass


class Divergence(RuntimeError):
    pass


class Activation(Enum):
    RELU = "relu"
    TANH = "tanh"
    IDENTITY = "identity"


class AdjacencyMode(Enum):
    RAW = "raw"
    SELF_LOOP_SYM_NORM = "self_loop_sym_norm"


@dataclass
class GcnModel:
    weights: list[np.ndarray]           # W per layer, shapes chain
    head_w: np.ndarray                  # (d_last,)
    head_b: float
    activation: Activation = Activation.TANH
    adjacency_mode: AdjacencyMode = AdjacencyMode.SELF_LOOP_SYM_NORM

    @property
    def layer_count(self) -> int:
        return len(self.weights)

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    def copy(self) -> "GcnModel":
        return GcnModel(
            weights=[w.copy() for w in self.weights],
            head_w=self.head_w.copy(),
            head_b=self.head_b,
            activation=self.activation,
            adjacency_mode=self.adjacency_mode,
        )


@dataclass(frozen=True)
class TrainConfig:
    lam: float = 1e-4
    learning_rate: float = 0.1
    epochs: int = 200
    seed: int = 0
    threshold: float = 0.5

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if not (0.0 < self.threshold < 1.0):
            raise ValueError("threshold must be in (0, 1)")


def init_model(
    layer_dims: Sequence[int],
    seed: int = 0,
    activation: Activation = Activation.TANH,
    adjacency_mode: AdjacencyMode = AdjacencyMode.SELF_LOOP_SYM_NORM,
) -> GcnModel:
    """Uniform +-1/sqrt(fan_in) initialization, seeded."""
    if len(layer_dims) < 2:
        raise ValueError("need at least input and one hidden/output dimension")
    rng = np.random.default_rng(seed)
    weights = []
    for fan_in, fan_out in zip(layer_dims, layer_dims[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
    bound = 1.0 / np.sqrt(layer_dims[-1])
    head_w = rng.uniform(-bound, bound, size=layer_dims[-1])
    return GcnModel(weights=weights, head_w=head_w, head_b=0.0,
                    activation=activation, adjacency_mode=adjacency_mode)


def normalize_adjacency(a: np.ndarray, mode: AdjacencyMode) -> np.ndarray:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"adjacency must be square, got {a.shape}")
    if mode is AdjacencyMode.RAW:
        return a
    with_loops = a + np.eye(a.shape[0])
    inv_sqrt_deg = 1.0 / np.sqrt(with_loops.sum(axis=1))
    return with_loops * inv_sqrt_deg[:, None] * inv_sqrt_deg[None, :]


def build_adjacency(lib: SchemaLibrary) -> tuple[list[str], np.ndarray]:
    """Undirected adjacency over id-sorted nodes: hierarchy plus temporal edges."""
    node_ids = sorted(lib.events, key=id_sort_key)
    index = {nid: i for i, nid in enumerate(node_ids)}
    a = np.zeros((len(node_ids), len(node_ids)), dtype=np.float64)
    for event in lib.events.values():
        for part in event.participants:
            if part.child_id in index:
                i, j = index[event.id], index[part.child_id]
                a[i, j] = a[j, i] = 1.0
    for rel in lib.relations:
        if rel.subject in index and rel.object in index:
            i, j = index[rel.subject], index[rel.object]
            a[i, j] = a[j, i] = 1.0
    return node_ids, a


_GATE_ORDER = (Gate.AND, Gate.OR, Gate.XOR, Gate.NONE)


def build_features(
    g: InstantiatedGraph,
    lib: SchemaLibrary | None = None,
    provider: EmbeddingProvider | None = None,
    *,
    text_vectors: Mapping[str, np.ndarray] | None = None,
) -> np.ndarray:
    """Per-node features: text embedding, matched flag, importance, gate one-hot, depth.

    ``text_vectors`` short-circuits the provider for callers that embed the
    (fixed) node texts once per schema.
    """
    lib = lib if lib is not None else g.library
    node_ids = sorted(lib.events, key=id_sort_key)
    parents = lib.parent_map()
    importance: dict[str, float] = {}
    for event in lib.events.values():
        for part in event.participants:
            importance.setdefault(part.child_id, part.importance)
    depths = lib.depth_map()
    max_depth = max(depths.values(), default=0)

    rows = []
    for nid in node_ids:
        event = lib.events[nid]
        if text_vectors is not None and nid in text_vectors:
            vec = text_vectors[nid]
        elif provider is not None:
            vec = embed(provider, schema_text(event))
        else:
            raise ValueError("need a provider or precomputed text_vectors")
        gate_one_hot = [1.0 if event.gate is gate else 0.0 for gate in _GATE_ORDER]
        rows.append(np.concatenate([
            vec,
            [1.0 if g.is_matched(nid) else 0.0],
            [importance.get(nid, 0.0) if nid in parents else 0.0],
            gate_one_hot,
            [depths[nid] / max_depth if max_depth else 0.0],
        ]))
    return np.vstack(rows) if rows else np.zeros((0, 0))


def _activate(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.RELU:
        return np.maximum(z, 0.0)
    if activation is Activation.TANH:
        return np.tanh(z)
    return z


def _activate_grad(z: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.RELU:
        return (z > 0).astype(np.float64)
    if activation is Activation.TANH:
        return 1.0 - np.tanh(z) ** 2
    return np.ones_like(z)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    exp_z = np.exp(z[~pos])
    out[~pos] = exp_z / (1.0 + exp_z)
    return out


def _forward_cached(model: GcnModel, a_hat: np.ndarray, x: np.ndarray):
    if x.shape[0] != a_hat.shape[0]:
        raise ShapeMismatch(f"X has {x.shape[0]} rows but adjacency is {a_hat.shape}")
    if x.shape[1] != model.input_dim:
        raise ShapeMismatch(f"X has {x.shape[1]} columns but the model expects {model.input_dim}")
    hiddens = [x]
    pre_acts = []
    h = x
    for w in model.weights:
        z = a_hat @ h @ w
        pre_acts.append(z)
        h = _activate(z, model.activation)
        hiddens.append(h)
    logits = h @ model.head_w + model.head_b
    scores = _sigmoid(logits)
    return hiddens, pre_acts, scores


def gcn_forward(model: GcnModel, a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Node scores in (0, 1); ``a`` is the raw adjacency, normalized per mode."""
    a_hat = normalize_adjacency(np.asarray(a, dtype=np.float64), model.adjacency_mode)
    _, _, scores = _forward_cached(model, a_hat, np.asarray(x, dtype=np.float64))
    return scores


@dataclass(frozen=True)
class Batch:
    """One graph sample: normalized adjacency, features, supervised labels."""

    a_hat: np.ndarray
    x: np.ndarray
    label_idx: np.ndarray  # indices of supervised nodes
    labels: np.ndarray     # 0/1 targets aligned with label_idx


def make_batch(model: GcnModel, a: np.ndarray, x: np.ndarray, labels: Mapping[int, float]) -> Batch:
    a_hat = normalize_adjacency(np.asarray(a, dtype=np.float64), model.adjacency_mode)
    idx = np.array(sorted(labels), dtype=np.intp)
    y = np.array([labels[i] for i in sorted(labels)], dtype=np.float64)
    return Batch(a_hat=a_hat, x=np.asarray(x, dtype=np.float64), label_idx=idx, labels=y)


def _reg_term(model: GcnModel) -> float:
    total = sum(float(np.sum(w ** 2)) for w in model.weights)
    total += float(np.sum(model.head_w ** 2)) + model.head_b ** 2
    return total


def loss(model: GcnModel, batch: Sequence[Batch], lam: float) -> float:
    """Mean squared error over supervised nodes plus lam * ||W||^2."""
    n_total = sum(len(b.label_idx) for b in batch)
    if n_total == 0:
        raise EmptyBatch("no supervised nodes in batch")
    squared = 0.0
    for b in batch:
        _, _, scores = _forward_cached(model, b.a_hat, b.x)
        squared += float(np.sum((b.labels - scores[b.label_idx]) ** 2))
    return squared / n_total + lam * _reg_term(model)


def gradients(model: GcnModel, batch: Sequence[Batch], lam: float):
    """Analytic gradients of loss() w.r.t. every weight, head_w, head_b."""
    n_total = sum(len(b.label_idx) for b in batch)
    if n_total == 0:
        raise EmptyBatch("no supervised nodes in batch")
    grad_w = [np.zeros_like(w) for w in model.weights]
    grad_head = np.zeros_like(model.head_w)
    grad_b = 0.0
    for b in batch:
        hiddens, pre_acts, scores = _forward_cached(model, b.a_hat, b.x)
        d_scores = np.zeros_like(scores)
        d_scores[b.label_idx] = (2.0 / n_total) * (scores[b.label_idx] - b.labels)
        d_logits = d_scores * scores * (1.0 - scores)
        grad_head += hiddens[-1].T @ d_logits
        grad_b += float(d_logits.sum())
        d_h = np.outer(d_logits, model.head_w)
        for layer in range(model.layer_count - 1, -1, -1):
            d_z = d_h * _activate_grad(pre_acts[layer], model.activation)
            propagated = b.a_hat @ hiddens[layer]
            grad_w[layer] += propagated.T @ d_z
            if layer > 0:
                d_h = b.a_hat.T @ (d_z @ model.weights[layer].T)
    for layer, w in enumerate(model.weights):
        grad_w[layer] += 2.0 * lam * w
    grad_head += 2.0 * lam * model.head_w
    grad_b += 2.0 * lam * model.head_b
    return grad_w, grad_head, grad_b


def train(model: GcnModel, dataset: Sequence[Batch], cfg: TrainConfig) -> tuple[GcnModel, list[float]]:
    """Full-batch gradient descent; returns the trained copy and loss trace."""
    current = model.copy()
    trace = [loss(current, dataset, cfg.lam)]
    for _ in range(cfg.epochs):
        grad_w, grad_head, grad_b = gradients(current, dataset, cfg.lam)
        for layer in range(current.layer_count):
            current.weights[layer] -= cfg.learning_rate * grad_w[layer]
        current.head_w -= cfg.learning_rate * grad_head
        current.head_b -= cfg.learning_rate * grad_b
        value = loss(current, dataset, cfg.lam)
        if not np.isfinite(value):
            raise Divergence(f"loss became {value} during training")
        trace.append(value)
    return current, trace


# --- checkpoint file format ---------------------------------------------------

def save_model(model: GcnModel, path: Path | str) -> None:
    """Plain-text checkpoint: header lines then row-major decimal weights."""
    dims = [model.weights[0].shape[0]] + [w.shape[1] for w in model.weights]
    lines = [
        "gcn-checkpoint v1",
        "dims: " + " ".join(str(d) for d in dims),
        f"activation: {model.activation.value}",
        f"adjacency: {model.adjacency_mode.value}",
    ]
    for i, w in enumerate(model.weights):
        lines.append(f"W{i} {w.shape[0]}x{w.shape[1]}")
        for row in w:
            lines.append(" ".join(repr(float(v)) for v in row))
    lines.append(f"head {model.head_w.shape[0]}")
    lines.append(" ".join(repr(float(v)) for v in model.head_w))
    lines.append(f"head_bias {model.head_b!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: Path | str) -> GcnModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "gcn-checkpoint v1":
        raise ValueError(f"{path}: not a gcn checkpoint")
    header: dict[str, str] = {}
    cursor = 1
    while cursor < len(lines) and ":" in lines[cursor] and not lines[cursor].startswith("W"):
        key, value = lines[cursor].split(":", 1)
        header[key.strip()] = value.strip()
        cursor += 1
    dims = [int(d) for d in header["dims"].split()]
    activation = Activation(header["activation"])
    adjacency = AdjacencyMode(header["adjacency"])
    weights = []
    for i, (fan_in, fan_out) in enumerate(zip(dims, dims[1:])):
        expect = f"W{i} {fan_in}x{fan_out}"
        if lines[cursor] != expect:
            raise ValueError(f"{path}: expected {expect!r}, found {lines[cursor]!r}")
        cursor += 1
        rows = [np.array([float(v) for v in lines[cursor + r].split()]) for r in range(fan_in)]
        cursor += fan_in
        weights.append(np.vstack(rows))
    if not lines[cursor].startswith("head "):
        raise ValueError(f"{path}: missing head section")
    cursor += 1
    head_w = np.array([float(v) for v in lines[cursor].split()])
    cursor += 1
    head_b = float(lines[cursor].split()[1])
    return GcnModel(weights=weights, head_w=head_w, head_b=head_b,
                    activation=activation, adjacency_mode=adjacency)
