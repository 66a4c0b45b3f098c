import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphtm import ConfigError, DatasetSpec, InputError, generate
from graphtm.datasets import (
    chain_edges,
    gen_bar_stripe,
    gen_grid_patches,
    gen_mv_xor,
    gen_seq_consecutive,
    grid_symbols,
    longest_run,
)


def test_longest_run():
    assert longest_run("") == 0
    assert longest_run("BBB") == 0
    assert longest_run("ABA") == 1
    assert longest_run("AABAAA") == 3
    assert longest_run("AAAAA") == 5


def test_chain_edges_pair_per_link():
    assert chain_edges(1) == []
    assert chain_edges(3) == [
        (0, 1, "right"), (1, 0, "left"),
        (1, 2, "right"), (2, 1, "left"),
    ]


# -- digit pairs -------------------------------------------------------------


def test_mv_xor_labels_are_sum_parity_without_noise():
    corpus = gen_mv_xor(10, 200, noise=0.0, seed=1)
    for rec in corpus.records:
        a = int(rec.node_symbols[0][0])
        b = int(rec.node_symbols[1][0])
        assert rec.label == ((a + b) % 2 == 0)
        assert rec.edges == [(0, 1, "plain"), (1, 0, "plain")]
    assert corpus.symbols == [str(v) for v in range(10)]
    assert corpus.edge_types == ["plain"]


def test_mv_xor_deterministic():
    a = gen_mv_xor(6, 50, noise=0.1, seed=42)
    b = gen_mv_xor(6, 50, noise=0.1, seed=42)
    assert a.records == b.records


def test_mv_xor_noise_flips_roughly_the_requested_fraction():
    corpus = gen_mv_xor(10, 4000, noise=0.25, seed=0)
    flipped = sum(
        rec.label != ((int(rec.node_symbols[0][0]) + int(rec.node_symbols[1][0])) % 2 == 0)
        for rec in corpus.records
    )
    assert 0.20 < flipped / 4000 < 0.30


def test_mv_xor_validates_inputs():
    with pytest.raises(ConfigError):
        gen_mv_xor(1, 10)
    with pytest.raises(ConfigError):
        gen_mv_xor(4, 10, noise=1.5)


# -- letter chains -----------------------------------------------------------


def test_seq_binary_labels_without_noise():
    corpus = gen_seq_consecutive(length=6, count=120, num_classes=2, seed=2)
    for rec in corpus.records:
        text = "".join(sym[0] for sym in rec.node_symbols)
        assert rec.label == (longest_run(text) >= 3)
    assert corpus.edge_types == ["right", "left"]


def test_seq_three_class_labels_without_noise():
    corpus = gen_seq_consecutive(length=6, count=90, num_classes=3, seed=3)
    for rec in corpus.records:
        text = "".join(sym[0] for sym in rec.node_symbols)
        run = longest_run(text)
        assert run >= 1, "three-class corpora never emit run-free sequences"
        assert rec.label == min(run, 3) - 1


def test_seq_class_balance_within_one():
    corpus = gen_seq_consecutive(length=5, count=101, num_classes=2, seed=4)
    ones = sum(rec.label for rec in corpus.records)
    assert abs(ones - (101 - ones)) <= 1


def test_seq_respects_class_counts():
    corpus = gen_seq_consecutive(
        length=5, count=0, num_classes=2, seed=5, class_counts=(30, 10)
    )
    labels = [rec.label for rec in corpus.records]
    assert labels.count(0) == 30
    assert labels.count(1) == 10


def test_seq_deterministic():
    a = gen_seq_consecutive(count=40, noise=0.05, seed=6)
    b = gen_seq_consecutive(count=40, noise=0.05, seed=6)
    assert a.records == b.records


def test_seq_validates_inputs():
    with pytest.raises(ConfigError):
        gen_seq_consecutive(alphabet="BCD")
    with pytest.raises(ConfigError):
        gen_seq_consecutive(num_classes=4)
    with pytest.raises(ConfigError):
        gen_seq_consecutive(length=2)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 500), length=st.integers(4, 8))
def test_seq_nodes_carry_single_letters(seed, length):
    corpus = gen_seq_consecutive(length=length, count=12, seed=seed)
    for rec in corpus.records:
        assert len(rec.node_symbols) == length
        for syms in rec.node_symbols:
            assert len(syms) == 1
            assert syms[0] in "ABCDE"


# -- pixel grids -------------------------------------------------------------


def test_grid_patch_cut():
    image = np.zeros((4, 4), dtype=bool)
    image[0, :] = True  # a bar through the two top patches
    rec = gen_grid_patches(image, 2, 2, label=0)
    assert len(rec.node_symbols) == 4
    assert rec.edges == []
    assert rec.node_symbols[0] == ["row0", "col0", "px0,0", "px0,1"]
    assert rec.node_symbols[1] == ["row0", "col1", "px0,0", "px0,1"]
    assert rec.node_symbols[2] == ["row1", "col0"]
    assert rec.node_symbols[3] == ["row1", "col1"]


def test_grid_patch_tiling_validated():
    with pytest.raises(InputError):
        gen_grid_patches(np.zeros((4, 5), dtype=bool), 2, 2)
    with pytest.raises(InputError):
        gen_grid_patches(np.zeros(4, dtype=bool), 2, 2)


def test_grid_symbols_cover_positions_and_pixels():
    syms = grid_symbols((4, 4), (2, 2))
    assert "px0,0" in syms and "px1,1" in syms
    assert "row0" in syms and "row1" in syms and "col1" in syms
    assert "row2" not in syms


def test_bar_stripe_labels_match_orientation():
    corpus = gen_bar_stripe(60, size=4, patch=2, noise=0.0, seed=7)
    assert len(corpus.records) == 60
    for rec in corpus.records:
        # a horizontal bar puts identical pixel rows in every column patch
        assert len(rec.node_symbols) == 4
        px = [{s for s in syms if s.startswith("px")} for syms in rec.node_symbols]
        if rec.label == 0:
            rows = {s[2] for syms in px for s in syms}
            assert len(rows) == 1  # all set pixels share one local row
        else:
            cols = {s[4] for syms in px for s in syms}
            assert len(cols) == 1


def test_bar_stripe_patch_must_divide():
    with pytest.raises(ConfigError):
        gen_bar_stripe(5, size=5, patch=2)


# -- dispatcher ---------------------------------------------------------------


def test_generate_dispatches_all_tasks():
    for task, expected_edges in (
        ("mv_xor", ["plain"]),
        ("seq", ["right", "left"]),
        ("bar_stripe", ["plain"]),
    ):
        corpus = generate(DatasetSpec(task=task, count=8, seed=0))
        assert corpus.edge_types == expected_edges
        assert len(corpus.records) == 8


def test_dataset_spec_validation():
    with pytest.raises(ConfigError):
        generate(DatasetSpec(task="unknown", count=5))
    with pytest.raises(ConfigError):
        generate(DatasetSpec(task="seq", count=-3))
    with pytest.raises(ConfigError):
        generate(DatasetSpec(task="seq", count=5, noise=2.0))
