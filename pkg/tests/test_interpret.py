import numpy as np
import pytest

from graphtm import ConfigError, GraphTmModel, InputError, TrainConfig
from graphtm.hypervector import MessageSpace
from graphtm.interpret import (
    AndF,
    Literal,
    MatchF,
    NotF,
    SymbolicClause,
    TrueF,
    component_mask,
    decode_clause,
    evaluate_symbolic,
    install_clauses,
    symbolic_truth_table,
    trace_to_nodes,
)

from handsets import chain_graph, chain_space, run_length_model, run_of_three_model


def test_literal_renders():
    assert Literal.sym("A").render() == "A"
    assert Literal.sym("A", False).render() == "¬A"
    assert Literal.msg(1, 0, 0, True, "right").render() == "r1:0"
    assert Literal.msg(2, 1, 1, False, "left").render() == "¬l2:1"
    assert Literal.msg(1, 3, 2, True, "diag").render() == "e2@1:3"
    assert Literal.raw_bit(5, False).render() == "¬b5"


def test_empty_clause_renders_phi():
    sc = SymbolicClause(0, [[], []])
    assert sc.render() == "φ"


def test_decode_run_of_three_clauses():
    model = run_of_three_model()
    rendered = [decode_clause(model, j).render() for j in range(4)]
    assert rendered[0] == "¬A ∧ r1:0 ∧ r1:1"
    # within a layer, literals come out grouped by edge type, then clause id
    assert rendered[1] == "¬r1:0 ∧ l1:0 ∧ l1:1 ∧ l1:3"
    assert rendered[2] == "A ∧ ¬r1:0 ∧ r1:2 ∧ r1:3 ∧ l1:0"
    assert "¬l1:0" in rendered[3] and rendered[3].startswith("A")
    assert decode_clause(model, 0).weights == [3, -3]


def test_decode_reports_unaligned_bits_as_raw():
    model = run_of_three_model()
    model.set_clause(0, [[0, 2], []])  # bit 2 belongs to no symbol
    lits = decode_clause(model, 0).layers[0]
    assert [l.render() for l in lits] == ["b0", "b2"]


def test_install_decode_round_trip():
    model = run_of_three_model()
    for j in range(4):
        decoded = decode_clause(model, j)
        masks = [
            model.team.include_mask(layer)[j].copy()
            for layer in range(model.config.depth)
        ]
        install_clauses(model, [decoded])
        for layer, before in enumerate(masks):
            after = model.team.include_mask(layer)[j]
            assert (before == after).all()


def test_component_mask_layer_checks():
    model = run_of_three_model()
    with pytest.raises(ConfigError):
        component_mask(model, [Literal.sym("A")], layer=1)
    with pytest.raises(ConfigError):
        component_mask(model, [Literal.msg(1, 0, 0)], layer=0)


def test_install_rejects_wrong_depth():
    model = run_of_three_model()
    with pytest.raises(ConfigError):
        install_clauses(model, [SymbolicClause(0, [[]])])


# -- trace-back ---------------------------------------------------------------


def test_trace_flattens_run_of_three():
    model = run_length_model()
    result = trace_to_nodes(model, 1)
    assert result.formula is not None
    assert result.formula.render() == "M(A, X_n) ∧ M(A, X_n+1) ∧ M(A, X_n+2)"


def test_trace_tree_shows_expansion():
    model = run_of_three_model()
    text = trace_to_nodes(model, 0).render()
    assert text.startswith("clause 0 at X_n: ¬A")
    assert "r1:0 ->" in text
    assert "component 0 of clause 0 at X_n-1: ¬A" in text
    assert "flattened:" in text


def test_trace_without_chain_edges_has_no_formula():
    from graphtm import SymbolSpace

    sp = SymbolSpace(8, 2, seed=0)
    sp.register("A", indices=[0, 1])
    sp.register_edge_type("plain")
    cfg = TrainConfig(num_clauses=1, depth=2, hv_size=8, msg_size=8,
                      bits_per_clause=1, seed=0)
    ms = MessageSpace(8, 1, 1, 1, clause_base_indices=[[0]])
    model = GraphTmModel(cfg, sp, num_classes=2, message_space=ms)
    result = trace_to_nodes(model, 0)
    assert result.formula is None
    assert "clause 0" in result.render()


def test_trace_with_raw_bits_keeps_tree_drops_formula():
    model = run_of_three_model()
    model.set_clause(0, [[2], []])  # unaligned bit at layer 0
    result = trace_to_nodes(model, 0)
    assert result.formula is None
    assert "b2" in result.tree.render()
    with pytest.raises(InputError):
        symbolic_truth_table(model, "AAA")


def test_trace_offsets_follow_edge_direction():
    model = run_of_three_model()
    # clause 2 reads r (from the left neighbor) and l (from the right one)
    result = trace_to_nodes(model, 2)
    offsets = {
        lit.render(): child.offset for lit, child in result.tree.children
    }
    assert offsets["r1:2"] == -1
    assert offsets["l1:0"] == 1


# -- formula evaluation --------------------------------------------------------


def test_evaluate_symbolic_out_of_range_is_false():
    f = MatchF((("A", True),), offset=-1)
    assert evaluate_symbolic(f, "AA").tolist() == [False, True]
    assert evaluate_symbolic(NotF(f), "AA").tolist() == [True, False]


def test_evaluate_symbolic_accepts_property_sets():
    f = AndF((MatchF((("A", True),), 0), MatchF((("B", False),), 0)))
    seq = [{"A"}, {"A", "B"}, set()]
    assert evaluate_symbolic(f, seq).tolist() == [True, False, False]


def test_evaluate_symbolic_true_formula():
    assert evaluate_symbolic(TrueF(), "ABC").all()


def test_normalize_drops_redundant_existence_checks():
    model = run_length_model()
    # clause 1 reaches X_n through an empty component; only the anchored
    # matches survive in the flattened form
    formula = trace_to_nodes(model, 1).formula
    assert isinstance(formula, AndF)
    assert all(isinstance(c, MatchF) and c.literals for c in formula.children)


def test_symbolic_table_matches_engine():
    model = run_of_three_model(extra_symbols=("B", "E"))
    for text in ("BAAAE", "AAABB", "EABAA", "AAAAA", "BB"):
        g = chain_graph(model.space, text)
        _, state = model.forward(g)
        table = symbolic_truth_table(model, text)
        assert (table == state.match[-1]).all(), text
