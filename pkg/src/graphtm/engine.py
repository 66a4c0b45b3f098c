"""Layered clause evaluation over graphs, training, and model files.

The forward pass follows five phases. Node-layer components are evaluated
everywhere first. Wherever a component holds, the clause's message bits are
bound to each outgoing edge's type by index offset and deposited into the
neighbor's next-layer inbox. Message layers then evaluate their components
against the inboxes, AND the result into the running match, and keep
forwarding messages (gated on the layer's own component value) until the
last layer. A clause fires on the graph if its final match holds at any
node, and classes are scored by summing the weights of firing clauses.

Training applies the automata feedback schedules. The sample's class pulls
every clause with probability (T - clip(votes)) / 2T; one other class,
drawn uniformly, pushes back with probability (T + clip(votes)) / 2T. Both
act on a single node drawn uniformly from the nodes where the clause
matched (or any node when it did not), and every layer's component is
updated against that node's vector for its layer.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .automata import ClauseWeights, TaTeam, type_i_feedback, type_ii_feedback
from .errors import ConfigError, CorruptModelError, InputError
from .graph import InputGraph, LayerState
from .hypervector import Hypervector, MessageSpace, SymbolSpace

MODEL_MAGIC = b"GTM1"
MODEL_VERSION = 1


@dataclass
class TrainConfig:
    """Hyperparameters for one model.

    threshold is the vote clip bound (the voting margin), specificity the
    automata s parameter. depth counts layers, so depth 1 is a flat model
    with no message passing.
    """

    num_clauses: int = 10
    threshold: int = 100
    specificity: float = 2.0
    depth: int = 1
    hv_size: int = 128
    msg_size: int = 256
    bits_per_symbol: int = 2
    bits_per_clause: int = 2
    states_per_action: int = 128
    max_included_literals: int | None = None
    epochs: int = 10
    seed: int = 0

    def validate(self) -> None:
        positive = {
            "num_clauses": self.num_clauses,
            "threshold": self.threshold,
            "depth": self.depth,
            "hv_size": self.hv_size,
            "msg_size": self.msg_size,
            "bits_per_symbol": self.bits_per_symbol,
            "bits_per_clause": self.bits_per_clause,
            "states_per_action": self.states_per_action,
        }
        for name, value in positive.items():
            if int(value) != value or value <= 0:
                raise ConfigError(f"{name} must be a positive integer, got {value}")
        if self.specificity < 1:
            raise ConfigError(f"specificity must be >= 1, got {self.specificity}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.max_included_literals is not None and self.max_included_literals <= 0:
            raise ConfigError("max_included_literals must be positive when set")


@dataclass
class EpochMetrics:
    epoch: int
    train_acc: float
    test_acc: float | None
    elapsed_ms: float


def eval_component(include_mask: np.ndarray, hv: Hypervector | np.ndarray) -> bool:
    """Conjunction of the included literals against one vector.

    An empty component is vacuously true. Width mismatches are rejected
    rather than broadcast.
    """
    bits = hv.bits if isinstance(hv, Hypervector) else np.asarray(hv, dtype=bool)
    mask = np.asarray(include_mask, dtype=bool)
    if mask.shape != bits.shape:
        raise ConfigError(
            f"literal bank width {mask.shape} does not match vector {bits.shape}"
        )
    return bool(not np.any(mask & ~bits))


def _matches(mask_f32: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """(clauses, width) x (nodes, width) -> bool (clauses, nodes).

    A clause component matches where none of its included literals miss.
    """
    if vectors.shape[0] == 0:
        return np.zeros((mask_f32.shape[0], 0), dtype=bool)
    misses = mask_f32 @ (~vectors).astype(np.float32).T
    return misses == 0.0


class GraphTmModel:
    """A clause bank, its automata, per-class weights, and the two spaces."""

    def __init__(
        self,
        config: TrainConfig,
        space: SymbolSpace,
        num_classes: int,
        message_space: MessageSpace | None = None,
    ):
        config.validate()
        if num_classes <= 0:
            raise ConfigError("need at least one class")
        if space.hv_size != config.hv_size:
            raise ConfigError(
                f"symbol space size {space.hv_size} != config hv_size {config.hv_size}"
            )
        self.config = config
        self.space = space
        self.num_classes = num_classes
        if config.depth >= 2:
            if message_space is None:
                if space.num_edge_types == 0:
                    raise ConfigError(
                        "a model with message layers needs registered edge types"
                    )
                message_space = MessageSpace(
                    msg_size=config.msg_size,
                    bits_per_clause=config.bits_per_clause,
                    num_clauses=config.num_clauses,
                    num_edge_types=space.num_edge_types,
                    seed=config.seed,
                )
            if message_space.msg_size != config.msg_size:
                raise ConfigError("message space size disagrees with config")
            if message_space.num_clauses != config.num_clauses:
                raise ConfigError("message space clause count disagrees with config")
        else:
            message_space = None
        self.message_space = message_space

        widths = [2 * config.hv_size] + [2 * config.msg_size] * (config.depth - 1)
        self.team = TaTeam(config.num_clauses, widths, config.states_per_action)
        self.weights = ClauseWeights(config.num_clauses, num_classes)
        self._deposit_rows: list[np.ndarray] | None = None
        self.reset_rng(config.seed)

    # -- rng streams ------------------------------------------------------

    def reset_rng(self, seed: int) -> None:
        """One stream per clause plus one for shuffling and class sampling.

        Streams are keyed by clause index, never by thread, so results do
        not depend on how clauses are partitioned across workers.
        """
        root = np.random.SeedSequence(seed)
        children = root.spawn(self.config.num_clauses + 1)
        self._rng = np.random.Generator(np.random.PCG64(children[0]))
        self._clause_rngs = [
            np.random.Generator(np.random.PCG64(c)) for c in children[1:]
        ]

    # -- hand construction -------------------------------------------------

    def set_clause(self, clause: int, layer_literals: list[list[int]]) -> None:
        """Pin a clause's components from per-layer literal index lists."""
        if len(layer_literals) != self.config.depth:
            raise ConfigError(
                f"expected {self.config.depth} layers, got {len(layer_literals)}"
            )
        for layer, lits in enumerate(layer_literals):
            self.team.set_included(clause, layer, lits)

    def set_weights(self, clause: int, per_class: list[int]) -> None:
        if len(per_class) != self.num_classes:
            raise ConfigError(f"expected {self.num_classes} weights")
        self.weights.values[clause] = per_class

    # -- forward -----------------------------------------------------------

    def _bit_rows(self) -> list[np.ndarray]:
        """Per edge-type code: float32 (clauses, msg_size) deposit patterns."""
        if self._deposit_rows is None:
            ms = self.message_space
            rows = []
            for code in range(self.space.num_edge_types):
                mat = np.zeros((self.config.num_clauses, ms.msg_size), dtype=np.float32)
                for j in range(self.config.num_clauses):
                    mat[j, ms.shifted_indices(j, code)] = 1.0
                rows.append(mat)
            self._deposit_rows = rows
        return self._deposit_rows

    def _deliver(self, graph: InputGraph, gate: np.ndarray) -> np.ndarray:
        """Deposit messages of gated (clause, node) pairs into neighbor inboxes."""
        msg = self.message_space.msg_size
        n = graph.num_nodes
        inbox = np.zeros((n, 2 * msg), dtype=bool)
        if n:
            gate_f = gate.astype(np.float32)
            for code, adj in enumerate(graph.adjacency()):
                if not adj.any():
                    continue
                arrived = gate_f @ adj.T.astype(np.float32)  # (clauses, nodes) at dst
                deposits = arrived.T @ self._bit_rows()[code]  # (nodes, msg)
                inbox[:, :msg] |= deposits > 0.0
        inbox[:, msg:] = ~inbox[:, :msg]
        return inbox

    def forward(self, graph: InputGraph) -> tuple[np.ndarray, LayerState]:
        """Run all layers; returns per-class votes and the full layer state."""
        if graph.space is not self.space:
            raise ConfigError("graph was built against a different symbol space")
        component = [_matches(self.team.include_mask_f32(0), graph.node_vectors)]
        match = [component[0]]
        inboxes: list[np.ndarray] = []
        for layer in range(1, self.config.depth):
            inbox = self._deliver(graph, component[layer - 1])
            inboxes.append(inbox)
            comp = _matches(self.team.include_mask_f32(layer), inbox)
            component.append(comp)
            match.append(comp & match[-1])
        votes = self.weights.votes(match[-1].any(axis=1))
        state = LayerState(
            node_vectors=graph.node_vectors,
            message_vectors=inboxes,
            match=match,
            component=component,
        )
        return votes, state

    def predict(self, graph: InputGraph) -> int:
        """Argmax of the class votes; ties go to the lowest class index."""
        votes, _ = self.forward(graph)
        return int(np.argmax(votes))

    # -- training ----------------------------------------------------------

    def _pick_node(
        self, match_row: np.ndarray, fired: bool, rng: np.random.Generator, n: int
    ) -> int:
        if fired:
            hits = np.flatnonzero(match_row)
            return int(hits[rng.integers(hits.shape[0])])
        return int(rng.integers(n))

    def _apply_type_i(
        self,
        clause: int,
        layer_vectors: list[np.ndarray],
        match_row: np.ndarray,
        fired: bool,
        num_nodes: int,
        rng: np.random.Generator,
    ) -> None:
        cap = self.config.max_included_literals
        allow = cap is None or self.team.included_count(clause) < cap
        if num_nodes:
            node = self._pick_node(match_row, fired, rng, num_nodes)
            rows = [vec[node] for vec in layer_vectors]
        else:
            rows = [
                np.zeros(self.team.layer_width(layer), dtype=bool)
                for layer in range(self.config.depth)
            ]
        for layer, row in enumerate(rows):
            type_i_feedback(
                self.team, clause, layer, row, fired,
                self.config.specificity, rng, allow_include=allow,
            )

    def _apply_type_ii(
        self,
        clause: int,
        layer_vectors: list[np.ndarray],
        match_row: np.ndarray,
        fired: bool,
        num_nodes: int,
        rng: np.random.Generator,
    ) -> None:
        if not (fired and num_nodes):
            return
        node = self._pick_node(match_row, True, rng, num_nodes)
        for layer, vec in enumerate(layer_vectors):
            type_ii_feedback(self.team, clause, layer, vec[node], True)

    def _feedback_one(
        self,
        clause: int,
        layer_vectors: list[np.ndarray],
        match_last: np.ndarray,
        fired: bool,
        num_nodes: int,
        p_target: float,
        p_other: float,
        label: int,
        other: int | None,
    ) -> None:
        # A clause's role for a class is the sign of its weight: non-negative
        # means it votes for the class (its pattern should cover the class),
        # negative means it votes against. Feedback is routed accordingly,
        # while the weight itself always moves toward the correct vote on
        # this sample: up for the true class, down for the sampled rival.
        rng = self._clause_rngs[clause]
        row = match_last[clause]
        if rng.random() < p_target:
            if self.weights.values[clause, label] >= 0:
                self._apply_type_i(
                    clause, layer_vectors, row, fired, num_nodes, rng,
                )
            else:
                self._apply_type_ii(
                    clause, layer_vectors, row, fired, num_nodes, rng,
                )
            if fired:
                self.weights.reinforce(clause, label, +1)
        if other is not None and rng.random() < p_other:
            if self.weights.values[clause, other] >= 0:
                self._apply_type_ii(
                    clause, layer_vectors, row, fired, num_nodes, rng,
                )
            else:
                self._apply_type_i(
                    clause, layer_vectors, row, fired, num_nodes, rng,
                )
            if fired:
                self.weights.reinforce(clause, other, -1)

    def train_step(
        self, graph: InputGraph, label: int, pool: ThreadPoolExecutor | None = None
    ) -> int:
        """One stochastic update; returns the pre-update prediction."""
        if not 0 <= label < self.num_classes:
            raise IndexError(f"label {label} outside {self.num_classes} classes")
        votes, state = self.forward(graph)
        prediction = int(np.argmax(votes))
        thr = self.config.threshold
        clipped = np.clip(votes, -thr, thr)

        if self.num_classes > 1:
            draw = int(self._rng.integers(self.num_classes - 1))
            other = draw + (draw >= label)
            p_other = (thr + clipped[other]) / (2.0 * thr)
        else:
            other, p_other = None, 0.0
        p_target = (thr - clipped[label]) / (2.0 * thr)

        match_last = state.match[-1]
        fired = match_last.any(axis=1)
        layer_vectors = [state.node_vectors] + state.message_vectors

        def run(clauses) -> None:
            for j in clauses:
                self._feedback_one(
                    j, layer_vectors, match_last, bool(fired[j]),
                    graph.num_nodes, p_target, p_other, label, other,
                )

        m = self.config.num_clauses
        if pool is None or pool._max_workers <= 1 or m < 2:
            run(range(m))
        else:
            k = pool._max_workers
            chunks = [range(i, m, k) for i in range(k)]
            list(pool.map(run, chunks))
        return prediction

    def fit(
        self,
        graphs: list[InputGraph],
        epochs: int | None = None,
        test_graphs: list[InputGraph] | None = None,
        workers: int = 1,
        target_accuracy: float | None = None,
        log=None,
    ) -> list[EpochMetrics]:
        """Epoch loop with seeded shuffling and per-epoch metrics.

        Stops early once the test accuracy reaches target_accuracy. The
        train accuracy is measured online, from each step's pre-update
        prediction.
        """
        if not graphs:
            raise InputError("training corpus is empty")
        epochs = self.config.epochs if epochs is None else epochs
        metrics: list[EpochMetrics] = []
        pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
        try:
            for epoch in range(1, epochs + 1):
                started = time.perf_counter()
                order = self._rng.permutation(len(graphs))
                correct = 0
                for idx in order:
                    g = graphs[idx]
                    correct += self.train_step(g, g.label, pool) == g.label
                train_acc = correct / len(graphs)
                test_acc = None
                if test_graphs:
                    test_acc, _ = evaluate(self, test_graphs)
                elapsed_ms = (time.perf_counter() - started) * 1e3
                record = EpochMetrics(epoch, train_acc, test_acc, elapsed_ms)
                metrics.append(record)
                if log is not None:
                    log(record)
                if (
                    target_accuracy is not None
                    and test_acc is not None
                    and test_acc >= target_accuracy
                ):
                    break
        finally:
            if pool is not None:
                pool.shutdown()
        return metrics


def evaluate(
    model: GraphTmModel, graphs: list[InputGraph]
) -> tuple[float, np.ndarray]:
    """Accuracy and a (true class, predicted class) confusion matrix."""
    if not graphs:
        raise InputError("evaluation corpus is empty")
    confusion = np.zeros((model.num_classes, model.num_classes), dtype=np.int64)
    for g in graphs:
        confusion[g.label, model.predict(g)] += 1
    accuracy = float(np.trace(confusion) / confusion.sum())
    return accuracy, confusion


# ----------------------------------------------------------------------
# Model files
# ----------------------------------------------------------------------


def save_model(model: GraphTmModel, path: str) -> None:
    """Write magic, version, a JSON header, then raw little-endian arrays."""
    header = {
        "config": asdict(model.config),
        "num_classes": model.num_classes,
        "hv_size": model.space.hv_size,
        "bits_per_symbol": model.space.bits_per_symbol,
        "space_seed": model.space.seed,
        "symbols": [[s, model.space.indices_of(s)] for s in model.space.symbols()],
        "edge_types": model.space.edge_types(),
        "vocab_hash": model.space.vocab_hash(),
        "message_space": (
            None
            if model.message_space is None
            else {
                "msg_size": model.message_space.msg_size,
                "bits_per_clause": model.message_space.bits_per_clause,
                "num_edge_types": model.message_space.num_edge_types,
                "clause_base_indices": model.message_space.clause_base_indices,
            }
        ),
        "layer_widths": [model.team.layer_width(i) for i in range(model.team.num_layers)],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(MODEL_VERSION.to_bytes(4, "little"))
        fh.write(len(blob).to_bytes(4, "little"))
        fh.write(blob)
        for st in model.team.states:
            fh.write(st.astype("<i4").tobytes())
        fh.write(model.weights.values.astype("<i4").tobytes())


def load_model(path: str) -> GraphTmModel:
    """Inverse of save_model; every structural check failure is a corruption."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read model {path}: {exc}") from exc
    if len(raw) < 12 or raw[:4] != MODEL_MAGIC:
        raise CorruptModelError(f"{path}: bad magic bytes")
    version = int.from_bytes(raw[4:8], "little")
    if version != MODEL_VERSION:
        raise CorruptModelError(f"{path}: unsupported version {version}")
    hlen = int.from_bytes(raw[8:12], "little")
    if 12 + hlen > len(raw):
        raise CorruptModelError(f"{path}: truncated header")
    try:
        header = json.loads(raw[12 : 12 + hlen].decode())
        config = TrainConfig(**header["config"])
        num_classes = int(header["num_classes"])
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptModelError(f"{path}: malformed header ({exc})") from exc

    space = SymbolSpace(
        int(header["hv_size"]), int(header["bits_per_symbol"]), int(header["space_seed"])
    )
    for name, indices in header["symbols"]:
        space.register(name, indices)
    for name in header["edge_types"]:
        space.register_edge_type(name)

    message_space = None
    if header.get("message_space") is not None:
        ms = header["message_space"]
        message_space = MessageSpace(
            msg_size=int(ms["msg_size"]),
            bits_per_clause=int(ms["bits_per_clause"]),
            num_clauses=config.num_clauses,
            num_edge_types=int(ms["num_edge_types"]),
            clause_base_indices=ms["clause_base_indices"],
        )

    try:
        model = GraphTmModel(config, space, num_classes, message_space)
    except ConfigError as exc:
        raise CorruptModelError(f"{path}: inconsistent header ({exc})") from exc

    offset = 12 + hlen
    for layer, width in enumerate(header["layer_widths"]):
        if width != model.team.layer_width(layer):
            raise CorruptModelError(f"{path}: layer {layer} width mismatch")
        count = config.num_clauses * int(width)
        end = offset + 4 * count
        if end > len(raw):
            raise CorruptModelError(f"{path}: truncated state array")
        st = np.frombuffer(raw[offset:end], dtype="<i4").reshape(
            config.num_clauses, int(width)
        )
        if st.min() < 0 or st.max() >= 2 * config.states_per_action:
            raise CorruptModelError(f"{path}: automaton state out of range")
        model.team.states[layer][:] = st
        offset = end
    count = config.num_clauses * num_classes
    end = offset + 4 * count
    if end != len(raw):
        raise CorruptModelError(f"{path}: weight array size mismatch")
    model.weights.values[:] = np.frombuffer(raw[offset:end], dtype="<i4").reshape(
        config.num_clauses, num_classes
    )
    model.team.invalidate_cache()
    return model
