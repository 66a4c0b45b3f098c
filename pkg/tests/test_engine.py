import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphtm import (
    ConfigError,
    CorruptModelError,
    GraphTmModel,
    InputError,
    SymbolSpace,
    TrainConfig,
    build_graph,
    evaluate,
    load_model,
    save_model,
)
from graphtm.engine import eval_component
from graphtm.datasets import gen_seq_consecutive

from handsets import chain_graph, chain_space, run_of_three_model


def flat_space(num_symbols=3, hv_size=16):
    sp = SymbolSpace(hv_size, 2, seed=0)
    for k in range(num_symbols):
        sp.register(f"s{k}", indices=[2 * k, 2 * k + 1])
    sp.register_edge_type("plain")
    return sp


def test_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(num_clauses=0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(specificity=0.5).validate()
    with pytest.raises(ConfigError):
        TrainConfig(epochs=-1).validate()
    with pytest.raises(ConfigError):
        TrainConfig(max_included_literals=0).validate()
    TrainConfig().validate()


def test_eval_component_vacuous_and_mismatch():
    assert eval_component(np.zeros(4, dtype=bool), np.zeros(4, dtype=bool))
    mask = np.array([True, False, False, False])
    assert eval_component(mask, np.array([True, False, True, True]))
    assert not eval_component(mask, np.array([False, True, True, True]))
    with pytest.raises(ConfigError):
        eval_component(np.zeros(4, dtype=bool), np.zeros(6, dtype=bool))


def test_model_checks_space_size():
    cfg = TrainConfig(num_clauses=2, hv_size=32)
    with pytest.raises(ConfigError):
        GraphTmModel(cfg, flat_space(hv_size=16), num_classes=2)


def test_depth_two_needs_edge_types():
    sp = SymbolSpace(16, 2, seed=0)
    sp.register("a")
    cfg = TrainConfig(num_clauses=2, depth=2, hv_size=16, msg_size=16)
    with pytest.raises(ConfigError):
        GraphTmModel(cfg, sp, num_classes=2)


def test_forward_rejects_foreign_graph():
    model = run_of_three_model()
    other = chain_space()
    g = chain_graph(other, "AAA")
    with pytest.raises(ConfigError):
        model.forward(g)


def test_fresh_clauses_match_everything():
    sp = flat_space()
    cfg = TrainConfig(num_clauses=3, depth=1, hv_size=16)
    model = GraphTmModel(cfg, sp, num_classes=2)
    g = build_graph(2, [["s0"], []], [], sp)
    votes, state = model.forward(g)
    assert state.match[0].all()
    assert votes.tolist() == [0, 0]


def test_predict_breaks_ties_toward_lowest_class():
    sp = flat_space()
    cfg = TrainConfig(num_clauses=1, depth=1, hv_size=16)
    model = GraphTmModel(cfg, sp, num_classes=3)
    model.set_weights(0, [4, 4, 1])
    g = build_graph(1, [["s0"]], [], sp)
    assert model.predict(g) == 0


def test_cumulative_match_is_monotone():
    model = run_of_three_model()
    for text in ("BAAAE", "AABAA", "EEEEE", "AAAAA"):
        _, state = model.forward(chain_graph(model.space, text))
        for deeper, shallower in zip(state.match[1:], state.match):
            assert not (deeper & ~shallower).any()


def test_message_inboxes_keep_negation_mirror():
    model = run_of_three_model()
    _, state = model.forward(chain_graph(model.space, "ABAAE"))
    inbox = state.message_vectors[0]
    half = inbox.shape[1] // 2
    assert (inbox[:, half:] == ~inbox[:, :half]).all()


def test_train_step_rejects_bad_label():
    model = run_of_three_model()
    g = chain_graph(model.space, "AAAAA", label=1)
    with pytest.raises(IndexError):
        model.train_step(g, 2)


def test_fit_requires_training_data():
    model = run_of_three_model()
    with pytest.raises(InputError):
        model.fit([], epochs=1)


def test_fit_zero_epochs_changes_nothing():
    corpus = gen_seq_consecutive(count=10, seed=0)
    space = corpus.make_space(16, 2, seed=0)
    cfg = TrainConfig(num_clauses=4, depth=2, hv_size=16, msg_size=32,
                      bits_per_clause=1, seed=0)
    model = GraphTmModel(cfg, space, num_classes=2)
    metrics = model.fit(corpus.bind_all(space), epochs=0)
    assert metrics == []
    for st_ in model.team.states:
        assert (st_ == cfg.states_per_action).all()
    assert not model.weights.values.any()


def test_evaluate_accuracy_and_confusion():
    model = run_of_three_model()
    graphs = [
        chain_graph(model.space, "BAAAE", label=1),
        chain_graph(model.space, "ABABA", label=0),
        chain_graph(model.space, "AAAAA", label=0),  # deliberately mislabeled
    ]
    acc, confusion = evaluate(model, graphs)
    assert acc == pytest.approx(2 / 3)
    assert confusion.tolist() == [[1, 1], [0, 1]]
    with pytest.raises(InputError):
        evaluate(model, [])


def test_max_included_literals_caps_growth():
    corpus = gen_seq_consecutive(count=40, seed=3)
    space = corpus.make_space(16, 2, seed=3)
    cfg = TrainConfig(num_clauses=4, depth=2, hv_size=16, msg_size=32,
                      bits_per_clause=1, threshold=20, specificity=2.0,
                      max_included_literals=3, seed=3)
    model = GraphTmModel(cfg, space, num_classes=2)
    model.fit(corpus.bind_all(space), epochs=3)
    for j in range(4):
        assert model.team.included_count(j) <= 3


@settings(max_examples=30, deadline=None)
@given(data=st.data())
def test_matches_agrees_with_eval_component(data):
    # the vectorized clause-vs-nodes product against the scalar definition
    from graphtm.engine import _matches

    width = data.draw(st.integers(2, 12))
    clauses = data.draw(st.integers(1, 4))
    nodes = data.draw(st.integers(0, 4))
    mask = np.array(
        [[data.draw(st.booleans()) for _ in range(width)] for _ in range(clauses)]
    )
    vectors = np.array(
        [[data.draw(st.booleans()) for _ in range(width)] for _ in range(nodes)]
    ).reshape(nodes, width)
    got = _matches(mask.astype(np.float32), vectors)
    for j in range(clauses):
        for n in range(nodes):
            assert got[j, n] == eval_component(mask[j], vectors[n])


# -- model files -------------------------------------------------------------


def small_trained_model(tmp_path, seed=0, workers=1, epochs=2, name="model.bin"):
    corpus = gen_seq_consecutive(count=30, seed=5)
    space = corpus.make_space(16, 2, seed=seed)
    cfg = TrainConfig(num_clauses=4, depth=2, hv_size=16, msg_size=32,
                      bits_per_clause=1, threshold=50, specificity=1.5,
                      seed=seed)
    model = GraphTmModel(cfg, space, num_classes=2)
    model.fit(corpus.bind_all(space), epochs=epochs, workers=workers)
    path = tmp_path / name
    save_model(model, str(path))
    return model, path, corpus


def test_save_load_round_trip(tmp_path):
    model, path, corpus = small_trained_model(tmp_path)
    loaded = load_model(str(path))
    for a, b in zip(model.team.states, loaded.team.states):
        assert (a == b).all()
    assert (model.weights.values == loaded.weights.values).all()
    assert loaded.space.symbols() == model.space.symbols()
    assert loaded.space.vocab_hash() == model.space.vocab_hash()

    graphs_a = corpus.bind_all(model.space)
    graphs_b = corpus.bind_all(loaded.space)
    for ga, gb in zip(graphs_a, graphs_b):
        assert model.predict(ga) == loaded.predict(gb)

    again = tmp_path / "resaved.bin"
    save_model(loaded, str(again))
    assert again.read_bytes() == path.read_bytes()


def test_same_seed_same_file(tmp_path):
    _, p1, _ = small_trained_model(tmp_path, seed=3, name="first.bin")
    _, p2, _ = small_trained_model(tmp_path, seed=3, name="second.bin")
    assert p1.read_bytes() == p2.read_bytes()


def test_load_rejects_bad_magic(tmp_path):
    p = tmp_path / "junk.bin"
    p.write_bytes(b"NOPE" + b"\0" * 32)
    with pytest.raises(CorruptModelError):
        load_model(str(p))


def test_load_rejects_unknown_version(tmp_path):
    _, path, _ = small_trained_model(tmp_path)
    raw = bytearray(path.read_bytes())
    raw[4:8] = (99).to_bytes(4, "little")
    path.write_bytes(bytes(raw))
    with pytest.raises(CorruptModelError):
        load_model(str(path))


def test_load_rejects_truncation(tmp_path):
    _, path, _ = small_trained_model(tmp_path)
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) - 5])
    with pytest.raises(CorruptModelError):
        load_model(str(path))


def test_load_rejects_out_of_range_states(tmp_path):
    _, path, _ = small_trained_model(tmp_path)
    raw = bytearray(path.read_bytes())
    # first state cell sits right after the JSON header
    hlen = int.from_bytes(raw[8:12], "little")
    raw[12 + hlen : 12 + hlen + 4] = (1 << 20).to_bytes(4, "little")
    path.write_bytes(bytes(raw))
    with pytest.raises(CorruptModelError):
        load_model(str(path))


def test_load_missing_file():
    with pytest.raises(InputError):
        load_model("/nonexistent/model.bin")
