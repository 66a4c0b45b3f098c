"""Decode clauses to symbols and trace message literals to node patterns.

A trained clause is a set of included literals per layer. Decoding reports
every registered symbol (or clause/edge-type message set) whose bits are all
included; bits claimed by no full set render as raw literals. Tracing
recursively replaces each message literal with the clause component it
references one layer down, shifted to the neighbor implied by the edge
direction, until only node-layer patterns remain. On two-edge-type chains
("right", "left") the result flattens to a formula over node offsets that
can be evaluated directly, giving an independent oracle for the engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import GraphTmModel
from .errors import ConfigError, InputError

CHAIN_EDGE_TYPES = ["right", "left"]


@dataclass(frozen=True)
class Literal:
    """One rendered literal. kind is "symbol", "message", or "raw"."""

    polarity: bool
    kind: str
    symbol: str | None = None
    layer: int | None = None
    clause: int | None = None
    edge_code: int | None = None
    edge_name: str | None = None
    bit: int | None = None

    @classmethod
    def sym(cls, symbol: str, positive: bool = True) -> "Literal":
        return cls(positive, "symbol", symbol=symbol)

    @classmethod
    def msg(
        cls,
        layer: int,
        clause: int,
        edge_code: int,
        positive: bool = True,
        edge_name: str | None = None,
    ) -> "Literal":
        return cls(
            positive, "message",
            layer=layer, clause=clause, edge_code=edge_code, edge_name=edge_name,
        )

    @classmethod
    def raw_bit(cls, bit: int, positive: bool) -> "Literal":
        return cls(positive, "raw", bit=bit)

    def render(self) -> str:
        neg = "" if self.polarity else "¬"
        if self.kind == "symbol":
            return f"{neg}{self.symbol}"
        if self.kind == "raw":
            return f"{neg}b{self.bit}"
        prefix = {"right": "r", "left": "l"}.get(self.edge_name or "")
        if prefix is None:
            prefix = f"e{self.edge_code}@"
        return f"{neg}{prefix}{self.layer}:{self.clause}"


@dataclass
class SymbolicClause:
    """Per-layer literal lists for one clause, plus its class weights."""

    clause_index: int
    layers: list[list[Literal]]
    weights: list[int] = field(default_factory=list)

    def render(self) -> str:
        flat = [lit for lits in self.layers for lit in lits]
        if not flat:
            return "φ"
        return " ∧ ".join(lit.render() for lit in flat)


def _decode_component(model: GraphTmModel, clause: int, layer: int) -> list[Literal]:
    """Literals of one clause component, symbol-aligned where possible."""
    mask = model.team.include_mask(layer)[clause]
    covered = np.zeros_like(mask)
    literals: list[Literal] = []
    if layer == 0:
        half = model.space.hv_size
        for symbol in model.space.symbols():
            idx = np.asarray(model.space.indices_of(symbol), dtype=int)
            if idx.size and mask[idx].all():
                literals.append(Literal.sym(symbol, True))
                covered[idx] = True
            if idx.size and mask[half + idx].all():
                literals.append(Literal.sym(symbol, False))
                covered[half + idx] = True
    else:
        ms = model.message_space
        half = ms.msg_size
        names = model.space.edge_types()
        for code in range(ms.num_edge_types):
            for k in range(ms.num_clauses):
                idx = np.asarray(ms.shifted_indices(k, code), dtype=int)
                if mask[idx].all():
                    literals.append(Literal.msg(layer, k, code, True, names[code]))
                    covered[idx] = True
                if mask[half + idx].all():
                    literals.append(Literal.msg(layer, k, code, False, names[code]))
                    covered[half + idx] = True
    for bit in np.flatnonzero(mask & ~covered):
        bit = int(bit)
        if bit < half:
            literals.append(Literal.raw_bit(bit, True))
        else:
            literals.append(Literal.raw_bit(bit - half, False))
    return literals


def decode_clause(model: GraphTmModel, clause: int) -> SymbolicClause:
    """Render every layer of one clause; collisions report all claimants."""
    layers = [
        _decode_component(model, clause, layer)
        for layer in range(model.config.depth)
    ]
    return SymbolicClause(
        clause_index=clause,
        layers=layers,
        weights=[int(w) for w in model.weights.values[clause]],
    )


def component_mask(model: GraphTmModel, literals: list[Literal], layer: int) -> np.ndarray:
    """Inverse of _decode_component for symbol-aligned literal lists."""
    width = model.team.layer_width(layer)
    half = width // 2
    mask = np.zeros(width, dtype=bool)
    for lit in literals:
        if lit.kind == "symbol":
            if layer != 0:
                raise ConfigError("symbol literals live at layer 0")
            idx = np.asarray(model.space.indices_of(lit.symbol), dtype=int)
        elif lit.kind == "message":
            if layer == 0:
                raise ConfigError("message literals live above layer 0")
            idx = np.asarray(
                model.message_space.shifted_indices(lit.clause, lit.edge_code),
                dtype=int,
            )
        else:
            idx = np.asarray([lit.bit], dtype=int)
        mask[idx if lit.polarity else half + idx] = True
    return mask


def install_clauses(model: GraphTmModel, clauses: list[SymbolicClause]) -> None:
    """Hand-set a whole model from symbolic clause descriptions."""
    for sc in clauses:
        if len(sc.layers) != model.config.depth:
            raise ConfigError(
                f"clause {sc.clause_index} has {len(sc.layers)} layers, "
                f"model depth is {model.config.depth}"
            )
        per_layer = []
        for layer, lits in enumerate(sc.layers):
            mask = component_mask(model, lits, layer)
            per_layer.append(np.flatnonzero(mask).tolist())
        model.set_clause(sc.clause_index, per_layer)
        if sc.weights:
            model.set_weights(sc.clause_index, sc.weights)


# ----------------------------------------------------------------------
# Trace-back
# ----------------------------------------------------------------------


@dataclass
class TraceNode:
    """One expanded component. The root covers all of its clause's layers."""

    clause: int
    layer: int | None  # None at the root
    offset: int | None  # node offset on chains, None otherwise
    literals: list[Literal]  # non-message literals shown at this node
    children: list[tuple[Literal, "TraceNode"]]

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        where = _offset_name(self.offset) if self.offset is not None else "X_n"
        body = " ∧ ".join(l.render() for l in self.literals) if self.literals else "φ"
        label = "clause" if self.layer is None else f"component {self.layer} of clause"
        lines = [f"{pad}{label} {self.clause} at {where}: {body}"]
        for lit, child in self.children:
            lines.append(f"{pad}  {lit.render()} ->")
            lines.append(child.render(indent + 2))
        return "\n".join(lines)


# Formula nodes for the flattened chain form.


@dataclass(frozen=True)
class TrueF:
    def render(self) -> str:
        return "True"


@dataclass(frozen=True)
class MatchF:
    """Node-layer pattern matched at an offset; empty pattern = existence."""

    literals: tuple[tuple[str, bool], ...]  # (symbol, polarity)
    offset: int

    def render(self) -> str:
        if not self.literals:
            body = "φ"
        else:
            body = " ∧ ".join(("" if pol else "¬") + sym for sym, pol in self.literals)
        return f"M({body}, {_offset_name(self.offset)})"


@dataclass(frozen=True)
class NotF:
    child: "Formula"

    def render(self) -> str:
        inner = self.child.render()
        if isinstance(self.child, (AndF,)):
            inner = f"({inner})"
        return f"¬{inner}"


@dataclass(frozen=True)
class AndF:
    children: tuple["Formula", ...]

    def render(self) -> str:
        return " ∧ ".join(
            f"({c.render()})" if isinstance(c, AndF) else c.render()
            for c in self.children
        )


Formula = TrueF | MatchF | NotF | AndF


def _offset_name(offset: int) -> str:
    if offset == 0:
        return "X_n"
    return f"X_n+{offset}" if offset > 0 else f"X_n-{-offset}"


@dataclass
class TraceResult:
    clause: int
    tree: TraceNode
    formula: Formula | None  # None when edge types are not the chain pair

    def render(self) -> str:
        lines = [self.tree.render()]
        if self.formula is not None:
            lines.append(f"flattened: {self.formula.render()}")
        return "\n".join(lines)


def _split_literals(lits: list[Literal]) -> tuple[list[Literal], list[Literal]]:
    plain = [l for l in lits if l.kind != "message"]
    messages = [l for l in lits if l.kind == "message"]
    return plain, messages


def trace_to_nodes(model: GraphTmModel, clause: int) -> TraceResult:
    """Expand a clause's message literals down to node-layer patterns."""
    chain = model.space.edge_types() == CHAIN_EDGE_TYPES

    def offset_delta(edge_code: int) -> int:
        # A message crossing the rightward edge came from the left neighbor.
        return -1 if edge_code == 0 else +1

    def expand(k: int, comp_layer: int, offset: int | None) -> TraceNode:
        lits = _decode_component(model, k, comp_layer)
        plain, messages = _split_literals(lits)
        children = []
        for lit in messages:
            child_offset = (
                offset + offset_delta(lit.edge_code)
                if chain and offset is not None
                else None
            )
            children.append((lit, expand(lit.clause, comp_layer - 1, child_offset)))
        return TraceNode(k, comp_layer, offset, plain, children)

    root_plain = _decode_component(model, clause, 0)
    root_children = []
    for layer in range(1, model.config.depth):
        _, messages = _split_literals(_decode_component(model, clause, layer))
        for lit in messages:
            child_offset = offset_delta(lit.edge_code) if chain else None
            root_children.append((lit, expand(lit.clause, layer - 1, child_offset)))
    tree = TraceNode(clause, None, 0 if chain else None, root_plain, root_children)

    formula = None
    if chain:
        try:
            formula = _flatten(tree)
        except InputError:
            # Clauses holding bits that align to no symbol still get a tree,
            # just not a closed-form chain formula.
            formula = None
    return TraceResult(clause, tree, formula)


def _node_pattern(literals: list[Literal]) -> tuple[tuple[str, bool], ...]:
    pattern = []
    for lit in literals:
        if lit.kind == "raw":
            raise InputError(
                "clause contains raw bits not aligned to any symbol; "
                "its trace cannot be evaluated symbolically"
            )
        pattern.append((lit.symbol, lit.polarity))
    return tuple(pattern)


def _flatten(node: TraceNode) -> Formula:
    parts: list[Formula] = [MatchF(_node_pattern(node.literals), node.offset)]
    for lit, child in node.children:
        sub = _flatten(child)
        parts.append(sub if lit.polarity else NotF(sub))
    return _normalize(AndF(tuple(parts)))


def _normalize(formula: Formula) -> Formula:
    """Flatten conjunctions, drop redundant existence checks, dedup."""
    if isinstance(formula, NotF):
        child = _normalize(formula.child)
        return NotF(child)
    if isinstance(formula, MatchF):
        # The evaluation node itself always exists.
        return TrueF() if not formula.literals and formula.offset == 0 else formula
    if not isinstance(formula, AndF):
        return formula

    flat: list[Formula] = []

    def collect(f: Formula) -> None:
        f = _normalize(f)
        if isinstance(f, AndF):
            for c in f.children:
                collect(c)
        elif not isinstance(f, TrueF):
            flat.append(f)

    for child in formula.children:
        collect(child)

    # An empty pattern at an offset only asserts the node exists; any other
    # positive match at the same offset implies it.
    anchored = {
        f.offset for f in flat if isinstance(f, MatchF) and f.literals
    }
    kept: list[Formula] = []
    seen: set = set()
    for f in flat:
        if isinstance(f, MatchF) and not f.literals and f.offset in anchored:
            continue
        if f in seen:
            continue
        seen.add(f)
        kept.append(f)
    kept.sort(
        key=lambda f: (0, f.offset, f.render()) if isinstance(f, MatchF)
        else (1, 0, f.render())
    )
    if not kept:
        return TrueF()
    if len(kept) == 1:
        return kept[0]
    return AndF(tuple(kept))


def evaluate_symbolic(formula: Formula, sequence) -> np.ndarray:
    """Truth value of a flattened formula at every node of a chain.

    `sequence` may be a string (each character is that node's only
    property), a list of symbol lists, or a list of symbol sets. Matching
    against a missing node is False, which negation then flips.
    """
    props = _as_property_sets(sequence)
    n = len(props)

    def ev(f: Formula, node: int) -> bool:
        if isinstance(f, TrueF):
            return True
        if isinstance(f, MatchF):
            pos = node + f.offset
            if not 0 <= pos < n:
                return False
            return all((sym in props[pos]) == pol for sym, pol in f.literals)
        if isinstance(f, NotF):
            return not ev(f.child, node)
        return all(ev(c, node) for c in f.children)

    return np.fromiter((ev(formula, i) for i in range(n)), dtype=bool, count=n)


def _as_property_sets(sequence) -> list[set[str]]:
    if isinstance(sequence, str):
        return [{ch} for ch in sequence]
    return [set(item) for item in sequence]


def symbolic_truth_table(model: GraphTmModel, sequence) -> np.ndarray:
    """(clauses, nodes) truth table from the traced formulas."""
    props = _as_property_sets(sequence)
    rows = []
    for j in range(model.config.num_clauses):
        result = trace_to_nodes(model, j)
        if result.formula is None:
            raise InputError(
                "symbolic evaluation needs the chain edge types and "
                "symbol-aligned clauses"
            )
        rows.append(evaluate_symbolic(result.formula, props))
    return np.vstack(rows) if rows else np.zeros((0, len(props)), dtype=bool)
