"""Input multigraphs and the line-oriented corpus file format.

A graph holds nodes with bundled property hypervectors and typed directed
edges. Bi-directional links are written as two directed edges. Parallel
edges and self-loops are allowed; message delivery treats duplicate arrivals
as one (set semantics, since bundling is idempotent).

Corpus file layout (text, whitespace-separated)::

    gtm-corpus 1
    space <vocabulary hash>
    symbols A B C D E
    edge_types right left
    graph <num_nodes> <num_edges> <label>
    <node 0 symbols, or "-" for none>
    ...
    <src> <dst> <edge type name>
    ...

The `graph` header repeats once per record. Symbol names must be free of
whitespace; a lone "-" means the node carries no properties.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, UnknownSymbolError
from .hypervector import Hypervector, SymbolSpace, vocabulary_hash

CORPUS_MAGIC = "gtm-corpus"
CORPUS_VERSION = 1


@dataclass
class InputGraph:
    """A validated graph bound to a symbol space."""

    num_nodes: int
    node_symbols: list[list[str]]
    edges: list[tuple[int, int, str]]
    space: SymbolSpace
    label: int | None = None
    node_vectors: np.ndarray = field(repr=False, default=None)  # (n, 2*hv_size) bool
    _out: list[list[tuple[int, str]]] = field(repr=False, default=None)
    _adjacency: list[np.ndarray] = field(repr=False, default=None)

    def node_hypervector(self, node: int) -> Hypervector:
        return Hypervector(self.space.hv_size, self.node_vectors[node].copy())

    def adjacency(self) -> list[np.ndarray]:
        """Per edge-type code: bool matrix A[dst, src] of arrivals."""
        if self._adjacency is None:
            n = self.num_nodes
            mats = [
                np.zeros((n, n), dtype=bool) for _ in range(self.space.num_edge_types)
            ]
            for src, dst, name in self.edges:
                mats[self.space.edge_type_code(name)][dst, src] = True
            self._adjacency = mats
        return self._adjacency


def build_graph(
    num_nodes: int,
    properties: list[list[str]],
    edges: list[tuple[int, int, str]],
    space: SymbolSpace,
    label: int | None = None,
) -> InputGraph:
    """Validate inputs and precompute the node-layer hypervectors.

    Raises:
        UnknownSymbolError: a property or edge type is not in `space`.
        IndexError: an edge endpoint falls outside [0, num_nodes).
    """
    if num_nodes < 0:
        raise InputError(f"num_nodes must be >= 0, got {num_nodes}")
    if len(properties) != num_nodes:
        raise InputError(
            f"expected {num_nodes} property lists, got {len(properties)}"
        )
    width = 2 * space.hv_size
    vectors = np.zeros((num_nodes, width), dtype=bool)
    vectors[:, space.hv_size :] = True
    for node, symbol_list in enumerate(properties):
        for sym in symbol_list:
            for k in space.indices_of(sym):
                vectors[node, k] = True
                vectors[node, space.hv_size + k] = False

    out: list[list[tuple[int, str]]] = [[] for _ in range(num_nodes)]
    for src, dst, name in edges:
        if not (0 <= src < num_nodes and 0 <= dst < num_nodes):
            raise IndexError(
                f"edge ({src}, {dst}) outside a {num_nodes}-node graph"
            )
        space.edge_type_code(name)  # raises UnknownSymbolError if missing
        out[src].append((dst, name))

    return InputGraph(
        num_nodes=num_nodes,
        node_symbols=[list(p) for p in properties],
        edges=list(edges),
        space=space,
        label=label,
        node_vectors=vectors,
        _out=out,
    )


def neighbors_out(graph: InputGraph, node: int) -> list[tuple[int, str]]:
    """Outgoing (destination, edge type name) pairs in insertion order."""
    if not 0 <= node < graph.num_nodes:
        raise IndexError(f"node {node} outside a {graph.num_nodes}-node graph")
    return list(graph._out[node])


@dataclass
class LayerState:
    """Everything the forward pass computed, kept for interpretability.

    match[i] is the cumulative per-clause, per-node match through layer i;
    component[i] is layer i's own conjunction value before combining.
    message_vectors[i - 1] holds layer i's inbox contents for i >= 1.
    """

    node_vectors: np.ndarray  # (n, 2*hv_size) bool
    message_vectors: list[np.ndarray]  # each (n, 2*msg_size) bool
    match: list[np.ndarray]  # each (num_clauses, n) bool
    component: list[np.ndarray]  # each (num_clauses, n) bool

    def message_hypervector(self, layer: int, node: int) -> Hypervector:
        """Inbox vector for a message layer (layer >= 1) at one node."""
        if layer < 1 or layer > len(self.message_vectors):
            raise IndexError(f"no message vectors at layer {layer}")
        row = self.message_vectors[layer - 1][node]
        return Hypervector(row.shape[0] // 2, row.copy())


# ----------------------------------------------------------------------
# Corpus records and file I/O
# ----------------------------------------------------------------------


@dataclass
class GraphRecord:
    """One unbound graph: symbol names only, no bit assignments."""

    node_symbols: list[list[str]]
    edges: list[tuple[int, int, str]]
    label: int


@dataclass
class Corpus:
    """A list of graph records plus the vocabulary they draw from."""

    symbols: list[str]
    edge_types: list[str]
    records: list[GraphRecord]

    def vocab_hash(self) -> str:
        return vocabulary_hash(self.symbols, self.edge_types)

    def make_space(
        self, hv_size: int, bits_per_symbol: int, seed: int = 0
    ) -> SymbolSpace:
        """Build a symbol space covering this corpus, in vocabulary order."""
        space = SymbolSpace(hv_size, bits_per_symbol, seed)
        for sym in self.symbols:
            space.register(sym)
        for name in self.edge_types:
            space.register_edge_type(name)
        return space

    def bind_all(self, space: SymbolSpace) -> list[InputGraph]:
        return [
            build_graph(
                len(rec.node_symbols), rec.node_symbols, rec.edges, space, rec.label
            )
            for rec in self.records
        ]


def write_corpus(path: str, corpus: Corpus) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{CORPUS_MAGIC} {CORPUS_VERSION}\n")
        fh.write(f"space {corpus.vocab_hash()}\n")
        fh.write("symbols " + " ".join(corpus.symbols) + "\n")
        fh.write("edge_types " + " ".join(corpus.edge_types) + "\n")
        for rec in corpus.records:
            fh.write(f"graph {len(rec.node_symbols)} {len(rec.edges)} {rec.label}\n")
            for symbol_list in rec.node_symbols:
                fh.write((" ".join(symbol_list) if symbol_list else "-") + "\n")
            for src, dst, name in rec.edges:
                fh.write(f"{src} {dst} {name}\n")


def read_corpus(path: str) -> Corpus:
    """Parse a corpus file, verifying magic, version, and vocabulary hash."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read corpus {path}: {exc}") from exc

    def fail(msg: str) -> InputError:
        return InputError(f"{path}: {msg}")

    if not lines:
        raise fail("empty file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != CORPUS_MAGIC:
        raise fail("not a corpus file (bad magic line)")
    if int(head[1]) != CORPUS_VERSION:
        raise fail(f"unsupported corpus version {head[1]}")
    if len(lines) < 4:
        raise fail("truncated header")
    if not lines[1].startswith("space "):
        raise fail("missing space hash line")
    stored_hash = lines[1].split()[1]
    sym_parts = lines[2].split()
    et_parts = lines[3].split()
    if not sym_parts or sym_parts[0] != "symbols":
        raise fail("missing symbols line")
    if not et_parts or et_parts[0] != "edge_types":
        raise fail("missing edge_types line")
    symbols = sym_parts[1:]
    edge_types = et_parts[1:]
    if vocabulary_hash(symbols, edge_types) != stored_hash:
        raise fail("vocabulary hash mismatch (file corrupted?)")

    records: list[GraphRecord] = []
    i = 4
    known = set(symbols)
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        parts = lines[i].split()
        if parts[0] != "graph" or len(parts) != 4:
            raise fail(f"line {i + 1}: expected a graph header, got {lines[i]!r}")
        try:
            num_nodes, num_edges, label = (int(p) for p in parts[1:])
        except ValueError:
            raise fail(f"line {i + 1}: non-integer graph header") from None
        i += 1
        if i + num_nodes + num_edges > len(lines):
            raise fail(f"line {i}: record truncated")
        node_symbols = []
        for _ in range(num_nodes):
            row = lines[i].split()
            if row == ["-"]:
                row = []
            for sym in row:
                if sym not in known:
                    raise fail(f"line {i + 1}: symbol {sym!r} not in vocabulary")
            node_symbols.append(row)
            i += 1
        edges = []
        for _ in range(num_edges):
            row = lines[i].split()
            if len(row) != 3:
                raise fail(f"line {i + 1}: bad edge line {lines[i]!r}")
            if row[2] not in edge_types:
                raise fail(f"line {i + 1}: edge type {row[2]!r} not in vocabulary")
            edges.append((int(row[0]), int(row[1]), row[2]))
            i += 1
        records.append(GraphRecord(node_symbols, edges, label))
    return Corpus(symbols=symbols, edge_types=edge_types, records=records)
