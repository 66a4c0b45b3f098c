"""Synthetic corpora: multivalue XOR pairs, letter chains, pixel-grid patches.

Every generator is a pure function of its parameters and seed, emitting the
corpus structures from the graph module. Label noise never perturbs inputs,
only the stored labels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .graph import Corpus, GraphRecord

EDGE_RIGHT = "right"
EDGE_LEFT = "left"
TASKS = ("mv_xor", "seq", "bar_stripe")


@dataclass
class DatasetSpec:
    """Parameters for the `generate` dispatcher, one task at a time."""

    task: str
    count: int = 1000
    seed: int = 0
    noise: float = 0.0
    n_values: int = 10
    length: int = 5
    num_classes: int = 2
    alphabet: str = "ABCDE"
    class_counts: tuple[int, ...] | None = None
    grid_size: int = 8
    patch: int = 2

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"unknown task {self.task!r}, expected one of {TASKS}")
        if not 0.0 <= self.noise <= 1.0:
            raise ConfigError(f"noise rate {self.noise} outside [0, 1]")
        if self.count <= 0 and self.class_counts is None:
            raise ConfigError("count must be positive")


def generate(spec: DatasetSpec) -> Corpus:
    spec.validate()
    if spec.task == "mv_xor":
        return gen_mv_xor(spec.n_values, spec.count, spec.noise, spec.seed)
    if spec.task == "seq":
        return gen_seq_consecutive(
            length=spec.length,
            count=spec.count,
            num_classes=spec.num_classes,
            noise=spec.noise,
            seed=spec.seed,
            alphabet=spec.alphabet,
            class_counts=spec.class_counts,
        )
    return gen_bar_stripe(
        spec.count, size=spec.grid_size, patch=spec.patch,
        noise=spec.noise, seed=spec.seed,
    )


# ----------------------------------------------------------------------
# Multivalue XOR
# ----------------------------------------------------------------------


def gen_mv_xor(n_values: int, count: int, noise: float = 0.0, seed: int = 0) -> Corpus:
    """Two-node graphs carrying integers; label 1 when the sum is even.

    Nodes are joined by a single edge type in both directions. Noise flips
    the stored label with the given probability.
    """
    if n_values < 2:
        raise ConfigError(f"n_values must be at least 2, got {n_values}")
    if not 0.0 <= noise <= 1.0:
        raise ConfigError(f"noise rate {noise} outside [0, 1]")
    rng = np.random.default_rng(seed)
    xs = rng.integers(0, n_values, size=(count, 2))
    labels = ((xs[:, 0] + xs[:, 1]) % 2 == 0).astype(np.int64)
    flips = rng.random(count) < noise
    labels[flips] ^= 1

    edges = [(0, 1, "plain"), (1, 0, "plain")]
    records = [
        GraphRecord(
            node_symbols=[[str(int(a))], [str(int(b))]],
            edges=list(edges),
            label=int(lab),
        )
        for (a, b), lab in zip(xs, labels)
    ]
    symbols = [str(v) for v in range(n_values)]
    return Corpus(symbols=symbols, edge_types=["plain"], records=records)


# ----------------------------------------------------------------------
# Consecutive-symbol chains
# ----------------------------------------------------------------------


def longest_run(seq: str, ch: str = "A") -> int:
    best = run = 0
    for c in seq:
        run = run + 1 if c == ch else 0
        best = max(best, run)
    return best


def chain_edges(length: int) -> list[tuple[int, int, str]]:
    edges: list[tuple[int, int, str]] = []
    for n in range(length - 1):
        edges.append((n, n + 1, EDGE_RIGHT))
        edges.append((n + 1, n, EDGE_LEFT))
    return edges


def _class_counts(count: int, k: int) -> list[int]:
    base, rem = divmod(count, k)
    return [base + (1 if i < rem else 0) for i in range(k)]


def gen_seq_consecutive(
    length: int = 5,
    count: int = 1000,
    num_classes: int = 2,
    noise: float = 0.0,
    seed: int = 0,
    alphabet: str = "ABCDE",
    class_counts: tuple[int, ...] | None = None,
) -> Corpus:
    """Chain graphs labeled by the longest run of consecutive 'A's.

    Binary task: class 1 iff the run reaches 3. Three-class task: classes
    are run lengths 1, 2, and 3-or-more; runs of zero are never emitted.
    Class sizes follow `class_counts` when given, or split `count` evenly
    within one sample. Label noise is applied after balancing.
    """
    if "A" not in alphabet or len(alphabet) < 2:
        raise ConfigError("alphabet must contain 'A' plus at least one other letter")
    if num_classes not in (2, 3):
        raise ConfigError(f"num_classes must be 2 or 3, got {num_classes}")
    if length < 3:
        raise ConfigError(f"length {length} cannot hold a run of three")
    if not 0.0 <= noise <= 1.0:
        raise ConfigError(f"noise rate {noise} outside [0, 1]")
    counts = list(class_counts) if class_counts is not None else _class_counts(count, num_classes)
    if len(counts) != num_classes or any(c < 0 for c in counts):
        raise ConfigError(f"class_counts {counts} do not fit {num_classes} classes")

    rng = np.random.default_rng(seed)
    letters = np.array(list(alphabet))
    others = np.array([c for c in alphabet if c != "A"])

    def rand_seq() -> np.ndarray:
        return letters[rng.integers(0, len(letters), size=length)]

    def with_run_at_least(r: int) -> str:
        seq = rand_seq()
        start = int(rng.integers(0, length - r + 1))
        seq[start:start + r] = "A"
        return "".join(seq)

    def with_run_below(r: int) -> str:
        for _ in range(10_000):
            seq = "".join(rand_seq())
            if longest_run(seq) < r:
                return seq
        raise ConfigError("could not draw a sequence with a short enough run")

    def with_exact_run(r: int) -> str:
        for _ in range(10_000):
            seq = rand_seq()
            start = int(rng.integers(0, length - r + 1))
            seq[start:start + r] = "A"
            if start > 0:
                seq[start - 1] = others[rng.integers(0, len(others))]
            if start + r < length:
                seq[start + r] = others[rng.integers(0, len(others))]
            text = "".join(seq)
            if longest_run(text) == r:
                return text
        raise ConfigError(f"could not pin the longest run at {r}")

    if num_classes == 2:
        makers = [lambda: with_run_below(3), lambda: with_run_at_least(3)]
    else:
        makers = [
            lambda: with_exact_run(1),
            lambda: with_exact_run(2),
            lambda: with_run_at_least(3),
        ]

    sequences: list[str] = []
    labels: list[int] = []
    for cls, n_cls in enumerate(counts):
        for _ in range(n_cls):
            sequences.append(makers[cls]())
            labels.append(cls)

    order = rng.permutation(len(sequences))
    sequences = [sequences[i] for i in order]
    label_arr = np.array(labels, dtype=np.int64)[order]

    flips = rng.random(len(sequences)) < noise
    if num_classes == 2:
        label_arr[flips] ^= 1
    else:
        shifted = rng.integers(1, num_classes, size=len(sequences))
        label_arr[flips] = (label_arr[flips] + shifted[flips]) % num_classes

    edges = chain_edges(length)
    records = [
        GraphRecord(
            node_symbols=[[ch] for ch in seq],
            edges=list(edges),
            label=int(lab),
        )
        for seq, lab in zip(sequences, label_arr)
    ]
    return Corpus(
        symbols=list(alphabet),
        edge_types=[EDGE_RIGHT, EDGE_LEFT],
        records=records,
    )


# ----------------------------------------------------------------------
# Pixel grids cut into patches
# ----------------------------------------------------------------------


def grid_symbols(grid_shape: tuple[int, int], patch_shape: tuple[int, int]) -> list[str]:
    """Vocabulary for grid corpora: local pixels plus patch positions."""
    gh, gw = grid_shape
    ph, pw = patch_shape
    syms = [f"px{r},{c}" for r in range(ph) for c in range(pw)]
    syms += [f"row{r}" for r in range(gh // ph)]
    syms += [f"col{c}" for c in range(gw // pw)]
    return syms


def gen_grid_patches(
    image: np.ndarray,
    patch_h: int,
    patch_w: int,
    label: int | None = None,
) -> GraphRecord:
    """Cut a Boolean grid into patch nodes with no edges.

    Each node carries its patch-position symbols and one symbol per set
    pixel, named by position inside the patch.
    """
    image = np.asarray(image)
    if image.ndim != 2:
        raise InputError(f"expected a 2-d grid, got shape {image.shape}")
    h, w = image.shape
    if patch_h <= 0 or patch_w <= 0 or h % patch_h or w % patch_w:
        raise InputError(
            f"patch {patch_h}x{patch_w} does not tile a {h}x{w} grid"
        )
    node_symbols: list[list[str]] = []
    for pr in range(h // patch_h):
        for pc in range(w // patch_w):
            block = image[pr * patch_h:(pr + 1) * patch_h,
                          pc * patch_w:(pc + 1) * patch_w]
            syms = [f"row{pr}", f"col{pc}"]
            for r, c in zip(*np.nonzero(block)):
                syms.append(f"px{int(r)},{int(c)}")
            node_symbols.append(syms)
    return GraphRecord(node_symbols=node_symbols, edges=[], label=label)


def gen_bar_stripe(
    count: int,
    size: int = 8,
    patch: int = 2,
    noise: float = 0.0,
    seed: int = 0,
) -> Corpus:
    """One full row (class 0) or one full column (class 1) per image."""
    if size % patch:
        raise ConfigError(f"patch {patch} does not divide size {size}")
    if not 0.0 <= noise <= 1.0:
        raise ConfigError(f"noise rate {noise} outside [0, 1]")
    rng = np.random.default_rng(seed)
    records = []
    for _ in range(count):
        orient = int(rng.integers(0, 2))
        index = int(rng.integers(0, size))
        image = np.zeros((size, size), dtype=bool)
        if orient == 0:
            image[index, :] = True
        else:
            image[:, index] = True
        label = orient
        if rng.random() < noise:
            label ^= 1
        records.append(gen_grid_patches(image, patch, patch, label=label))
    return Corpus(
        symbols=grid_symbols((size, size), (patch, patch)),
        edge_types=["plain"],
        records=records,
    )
