"""Sparse Boolean hypervector space.

A hypervector of size `half` is a Boolean array of length 2*half. The first
half holds original feature bits and the second half always holds their
negations, so an empty vector is all-zero then all-one. Symbols own small
index sets inside [0, half); bundling a symbol into a vector sets its bits
and clears the mirrored negation bits. Messages are associated with the edge
type they crossed by adding the edge-type code to each index (bind-by-offset).
"""

from __future__ import annotations

import hashlib
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BindingOverflowError,
    ConfigError,
    SymbolExistsError,
    UnknownSymbolError,
)


class Hypervector:
    """Boolean vector of length 2*half whose top half mirrors the bottom.

    Attributes:
        half: number of original feature bits.
        bits: numpy bool array of length 2*half.
    """

    __slots__ = ("half", "bits")

    def __init__(self, half: int, bits: np.ndarray):
        self.half = half
        self.bits = bits

    @classmethod
    def empty(cls, half: int) -> "Hypervector":
        """The vector with no features set: zeros then ones."""
        if half <= 0:
            raise ConfigError(f"hypervector size must be positive, got {half}")
        bits = np.zeros(2 * half, dtype=bool)
        bits[half:] = True
        return cls(half, bits)

    def include(self, indices: Iterable[int]) -> None:
        """Set feature bits in place, keeping the negation half mirrored."""
        for k in indices:
            if not 0 <= k < self.half:
                raise ConfigError(f"bit index {k} outside [0, {self.half})")
            self.bits[k] = True
            self.bits[self.half + k] = False

    def copy(self) -> "Hypervector":
        return Hypervector(self.half, self.bits.copy())

    def to_hex(self) -> str:
        """Hex encoding of the bit string, most-significant bit = index 0."""
        return np.packbits(self.bits).tobytes().hex()

    @classmethod
    def from_hex(cls, text: str, half: int) -> "Hypervector":
        raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
        bits = np.unpackbits(raw)[: 2 * half].astype(bool)
        hv = cls(half, bits)
        if not hv.mirror_ok():
            raise ConfigError("hex string violates the negation mirror")
        return hv

    def mirror_ok(self) -> bool:
        return bool(np.all(self.bits[self.half :] == ~self.bits[: self.half]))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Hypervector)
            and self.half == other.half
            and bool(np.array_equal(self.bits, other.bits))
        )

    def __repr__(self) -> str:
        on = np.flatnonzero(self.bits[: self.half])
        return f"Hypervector(half={self.half}, set={list(on)})"


def bundle(hv: Hypervector, indices: Sequence[int]) -> Hypervector:
    """Return a copy of `hv` with `indices` added to the feature half.

    Bundling is idempotent and order-independent: it sets bits and clears
    their mirrors, nothing else.
    """
    out = hv.copy()
    out.include(indices)
    return out


def bind_offset(
    base_indices: Sequence[int], edge_type_code: int, msg_size: int
) -> list[int]:
    """Shift every clause bit index by the edge-type code.

    Args:
        base_indices: the clause's message bit indices.
        edge_type_code: non-negative integer code of the edge type crossed.
        msg_size: feature-half width of the message space.

    Returns:
        The element-wise sums, still sorted.

    Raises:
        BindingOverflowError: if any shifted index reaches msg_size.
    """
    if edge_type_code < 0:
        raise ConfigError(f"edge type code must be >= 0, got {edge_type_code}")
    shifted = [b + edge_type_code for b in base_indices]
    if shifted and shifted[-1] >= msg_size:
        raise BindingOverflowError(
            f"index {shifted[-1]} overflows message size {msg_size}; "
            "enlarge msg_size or reduce edge types"
        )
    return shifted


class SymbolSpace:
    """Registry mapping symbol ids to feature bit index sets.

    Index sets are drawn without replacement from a seeded generator, so a
    fixed seed and registration order always reproduce the same assignment.
    Individual bits may be shared between symbols; identical full sets are
    rejected (sparse disambiguation needs at least one distinguishing bit).
    Edge types are registered separately and receive consecutive integer
    codes in registration order; they own no bits.
    """

    def __init__(self, hv_size: int, bits_per_symbol: int, seed: int = 0):
        if hv_size <= 0 or bits_per_symbol <= 0:
            raise ConfigError("hv_size and bits_per_symbol must be positive")
        if bits_per_symbol > hv_size:
            raise ConfigError(
                f"bits_per_symbol {bits_per_symbol} exceeds hv_size {hv_size}"
            )
        self.hv_size = hv_size
        self.bits_per_symbol = bits_per_symbol
        self.seed = seed
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self._assignments: dict[str, list[int]] = {}
        self._taken: set[tuple[int, ...]] = set()
        self._edge_types: dict[str, int] = {}

    # -- symbols ---------------------------------------------------------

    def register(self, symbol_id: str, indices: Sequence[int] | None = None) -> list[int]:
        """Allocate (or force) the bit index set for a new symbol.

        Passing `indices` pins the assignment, which keeps hand-laid-out
        models reproducible in tests. Returns the sorted index list.
        """
        if symbol_id in self._assignments:
            raise SymbolExistsError(f"symbol {symbol_id!r} already registered")
        if indices is not None:
            chosen = sorted(int(i) for i in indices)
            if len(set(chosen)) != len(chosen):
                raise ConfigError(f"duplicate indices in forced set {chosen}")
            if chosen and not (0 <= chosen[0] and chosen[-1] < self.hv_size):
                raise ConfigError(f"forced indices {chosen} outside [0, {self.hv_size})")
            if tuple(chosen) in self._taken:
                raise ConfigError(f"forced index set {chosen} duplicates another symbol")
        else:
            chosen = self._draw()
        self._assignments[symbol_id] = chosen
        self._taken.add(tuple(chosen))
        return list(chosen)

    def _draw(self) -> list[int]:
        for _ in range(64):
            picks = sorted(
                int(i)
                for i in self._rng.choice(
                    self.hv_size, size=self.bits_per_symbol, replace=False
                )
            )
            if tuple(picks) not in self._taken:
                return picks
        raise ConfigError(
            "could not draw a distinct index set; the space is too crowded "
            f"(hv_size={self.hv_size}, bits_per_symbol={self.bits_per_symbol})"
        )

    def indices_of(self, symbol_id: str) -> list[int]:
        try:
            return list(self._assignments[symbol_id])
        except KeyError:
            raise UnknownSymbolError(f"symbol {symbol_id!r} is not registered") from None

    def __contains__(self, symbol_id: str) -> bool:
        return symbol_id in self._assignments

    def symbols(self) -> list[str]:
        """Symbol ids in registration order."""
        return list(self._assignments)

    # -- edge types ------------------------------------------------------

    def register_edge_type(self, name: str) -> int:
        """Assign the next consecutive code to an edge-type name."""
        if name in self._edge_types:
            raise SymbolExistsError(f"edge type {name!r} already registered")
        code = len(self._edge_types)
        self._edge_types[name] = code
        return code

    def edge_type_code(self, name: str) -> int:
        try:
            return self._edge_types[name]
        except KeyError:
            raise UnknownSymbolError(f"edge type {name!r} is not registered") from None

    def edge_types(self) -> list[str]:
        """Edge-type names in code order."""
        return list(self._edge_types)

    @property
    def num_edge_types(self) -> int:
        return len(self._edge_types)

    # -- misc ------------------------------------------------------------

    def empty_vector(self) -> Hypervector:
        return Hypervector.empty(self.hv_size)

    def vector_for(self, symbol_ids: Iterable[str]) -> Hypervector:
        """Bundle several symbols into one fresh vector."""
        hv = self.empty_vector()
        for sym in symbol_ids:
            hv.include(self.indices_of(sym))
        return hv

    def vocab_hash(self) -> str:
        """Stable digest of the ordered vocabulary, shared by corpus files.

        Only names participate, not bit assignments: a corpus knows its
        vocabulary but not how a model laid it out.
        """
        return vocabulary_hash(self.symbols(), self.edge_types())


def vocabulary_hash(symbols: Sequence[str], edge_types: Sequence[str]) -> str:
    """Digest of an ordered vocabulary; pairs corpora with models."""
    payload = "\n".join(symbols) + "\x00" + "\n".join(edge_types)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def new_symbol_space(hv_size: int, bits_per_symbol: int, seed: int = 0) -> SymbolSpace:
    """Construct an empty symbol space (see SymbolSpace)."""
    return SymbolSpace(hv_size, bits_per_symbol, seed)


def register_symbol(
    space: SymbolSpace, symbol_id: str, indices: Sequence[int] | None = None
) -> list[int]:
    """Functional alias for SymbolSpace.register."""
    return space.register(symbol_id, indices)


class MessageSpace:
    """Per-clause message bit layout for layers past the node layer.

    Each clause owns `bits_per_clause` indices inside [0, msg_size). A message
    deposited across an edge of type code e lands at the clause's indices
    shifted by e. Construction fails fast if any shift can overflow or if two
    (clause, edge type) pairs collapse onto an identical shifted set.
    """

    def __init__(
        self,
        msg_size: int,
        bits_per_clause: int,
        num_clauses: int,
        num_edge_types: int,
        seed: int = 0,
        clause_base_indices: Sequence[Sequence[int]] | None = None,
    ):
        if msg_size <= 0 or bits_per_clause <= 0 or num_clauses <= 0:
            raise ConfigError("msg_size, bits_per_clause, num_clauses must be positive")
        if num_edge_types <= 0:
            raise ConfigError("a message space needs at least one edge type")
        self.msg_size = msg_size
        self.bits_per_clause = bits_per_clause
        self.num_edge_types = num_edge_types
        usable = msg_size - (num_edge_types - 1)
        if usable < bits_per_clause:
            raise BindingOverflowError(
                f"msg_size {msg_size} cannot hold {bits_per_clause} bits "
                f"with {num_edge_types} edge types"
            )

        if clause_base_indices is not None:
            if len(clause_base_indices) != num_clauses:
                raise ConfigError("need one forced index set per clause")
            base = [sorted(int(i) for i in row) for row in clause_base_indices]
            for row in base:
                if len(row) != bits_per_clause or len(set(row)) != bits_per_clause:
                    raise ConfigError(f"forced clause set {row} has wrong arity")
                if row[0] < 0 or row[-1] >= usable:
                    raise BindingOverflowError(
                        f"clause bits {row} leave no room for edge offsets "
                        f"(usable range [0, {usable}))"
                    )
        else:
            rng = np.random.Generator(np.random.PCG64(seed))
            base = []
            taken: set[tuple[int, ...]] = set()
            for _ in range(num_clauses):
                for _ in range(256):
                    picks = sorted(
                        int(i)
                        for i in rng.choice(
                            usable, size=bits_per_clause, replace=False
                        )
                    )
                    shifts = [
                        tuple(bind_offset(picks, code, msg_size))
                        for code in range(num_edge_types)
                    ]
                    if not any(sh in taken for sh in shifts):
                        taken.update(shifts)
                        base.append(list(picks))
                        break
                else:
                    raise ConfigError(
                        "could not allocate distinct clause bit sets; "
                        f"enlarge msg_size (={msg_size})"
                    )
        self.clause_base_indices = base
        self._validate_distinct_shifts()

    def _validate_distinct_shifts(self) -> None:
        seen: dict[tuple[int, ...], tuple[int, int]] = {}
        for j, row in enumerate(self.clause_base_indices):
            for code in range(self.num_edge_types):
                shifted = tuple(bind_offset(row, code, self.msg_size))
                if shifted in seen:
                    other = seen[shifted]
                    raise ConfigError(
                        f"clause {j} with edge type {code} collides with "
                        f"clause {other[0]} edge type {other[1]} on bits "
                        f"{list(shifted)}; enlarge msg_size"
                    )
                seen[shifted] = (j, code)

    @property
    def num_clauses(self) -> int:
        return len(self.clause_base_indices)

    def shifted_indices(self, clause: int, edge_type_code: int) -> list[int]:
        return bind_offset(
            self.clause_base_indices[clause], edge_type_code, self.msg_size
        )

    def empty_vector(self) -> Hypervector:
        return Hypervector.empty(self.msg_size)
