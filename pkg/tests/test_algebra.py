from fractions import Fraction as F
from itertools import combinations
from math import factorial

import networkx as nx
import pytest

from racah.algebra import (
    InsufficientSites,
    OperatorModel,
    RepeatedIndex,
    bg_model,
    chain_label,
    connection_graph,
    dunkl_model,
    graph_summary,
    graph_to_dot,
    labeling_chains,
    legal_commuting_pairs,
    make_model,
    operator_matrix_model,
    rational_sphere_points,
    relation_suite,
    shortest_chain_path,
    sphere_hamiltonian,
    validate_chain,
    verify_centralizer,
    verify_cij_linear_independence,
    verify_commutativity,
    verify_f_antisymmetry,
    verify_linear_dependence,
    verify_rel1,
    verify_sphere_hamiltonian,
    verify_structure_relations,
)
from racah.linalg import Matrix
from racah.operators import BasisSpec, OperatorExpr, apply_and_evaluate
from racah.realizations import EPSILONS, RepSpec, all_subsets, casimir_subset

# the n = 4 figure: a 12-cycle at angles 30, 60, ..., 360 plus six chords
FIGURE_CYCLE = [
    "(C_{12},C_{123})", "(C_{12},C_{124})", "(C_{14},C_{124})", "(C_{24},C_{124})",
    "(C_{24},C_{234})", "(C_{23},C_{234})", "(C_{34},C_{234})", "(C_{34},C_{134})",
    "(C_{14},C_{134})", "(C_{13},C_{134})", "(C_{13},C_{123})", "(C_{23},C_{123})",
]
FIGURE_CHORDS = [(180, 0), (90, 270), (60, 120), (150, 210), (240, 300), (330, 30)]


def figure_graph():
    at = {30 * (i + 1) % 360: label for i, label in enumerate(FIGURE_CYCLE)}
    g = nx.Graph()
    for i in range(12):
        g.add_edge(FIGURE_CYCLE[i], FIGURE_CYCLE[(i + 1) % 12])
    for a, b in FIGURE_CHORDS:
        g.add_edge(at[a], at[b])
    return g


@pytest.fixture(scope="module")
def bg3():
    return bg_model(RepSpec("bg", 3, k=2))


def test_generator_examples(bg3):
    assert bg3.c(1) == Matrix.scalar(3, F(3, 4))
    rhs = bg3.c(1, 2) + bg3.c(1, 3) + bg3.c(2, 3) - bg3.c(1) - bg3.c(2) - bg3.c(3)
    assert bg3.c(1, 2, 3) == rhs


def test_sphere_full_casimir_on_sphere():
    spec = RepSpec("sphere", 3, (1, 1, 1))
    c = casimir_subset(spec, (1, 2, 3))
    diff = c + sphere_hamiltonian(spec) * F(1, 4) - F(9 - 12, 16)
    assert apply_and_evaluate(diff, {(1, 1, 0): F(1)}, [F(3, 13), F(4, 13), F(12, 13)]) == 0
    # off the sphere the identity does not hold
    assert apply_and_evaluate(diff, {(1, 1, 0): F(1)}, [F(1), F(1), F(1)]) != 0


def test_p_elem_by_hand():
    m = bg_model(RepSpec("bg", 3, (1, 1, 1), k=1))
    assert m.p_elem(1, 2) == Matrix.from_rows([[6, 2], [0, 2]])
    with pytest.raises(RepeatedIndex):
        m.p_elem(1, 1)


def test_f_elem(bg3):
    assert bg3.f_elem(2, 1, 3) == -bg3.f_elem(1, 2, 3)
    assert all(r.passed for r in verify_f_antisymmetry(bg3, 1, 2, 3))
    with pytest.raises(RepeatedIndex):
        bg3.f_elem(1, 2, 1)
    c = bg3.c
    f = bg3.f_elem(1, 2, 3) * 2
    assert f == c(2, 3) * c(1, 3) - c(1, 3) * c(2, 3)
    assert f == c(1, 3) * c(1, 2) - c(1, 2) * c(1, 3)


def test_linear_dependence_and_commutativity():
    m = bg_model(RepSpec("bg", 4, k=3))
    assert verify_linear_dependence(m, (1, 2)).passed
    assert verify_linear_dependence(m, (1, 2, 3, 4)).passed
    assert verify_commutativity(m, (1,), (2, 3, 4)).passed
    assert verify_commutativity(m, (1, 2), (3, 4)).passed
    assert verify_commutativity(m, (1, 2), (1, 2, 3)).passed
    with pytest.raises(ValueError):
        verify_commutativity(m, (1, 2), (2, 3))


def test_noncommuting_pair_has_nonzero_residual():
    m = bg_model(RepSpec("bg", 3, k=2))
    from racah.algebra import comm

    assert not comm(m.c(1, 2), m.c(2, 3)).is_zero()


def test_structure_relation_examples():
    assert all(r.passed for r in verify_rel1(bg_model(RepSpec("bg", 3, k=3))))
    m4 = bg_model(RepSpec("bg", 4, k=2))
    assert [r.relation for r in verify_structure_relations(m4, (1, 2, 3, 4))] == ["[P_kl,F_ijk]", "[F_ijk,F_jkl]"]
    assert all(r.passed for r in verify_structure_relations(m4, (1, 2, 3, 4)))
    m5 = bg_model(RepSpec("bg", 5, k=2))
    assert all(r.passed for r in verify_structure_relations(m5, (1, 2, 3, 4, 5)))
    with pytest.raises(InsufficientSites):
        verify_structure_relations(m4, (1, 2, 3, 4, 5))
    with pytest.raises(RepeatedIndex):
        verify_structure_relations(m4, (1, 2, 2))


def test_report_residual_on_failure(bg3):
    from racah.algebra import RelationReport

    bad = RelationReport.from_residual("probe", ((1, 2),), bg3.c(1, 2))
    assert not bad.passed
    assert "residual" in bad.to_json_obj()
    assert "residual" not in RelationReport.from_residual("probe", (), bg3.c(1) - bg3.c(1)).to_json_obj()


@pytest.mark.parametrize("model", [
    lambda: bg_model(RepSpec("bg", 4, k=2)),
    lambda: bg_model(RepSpec("bg", 4, k=2), route="theorem"),
    lambda: OperatorModel(RepSpec("sphere", 3)),
    lambda: OperatorModel(RepSpec("dunkl", 3)),
    lambda: dunkl_model(RepSpec("dunkl", 3, k=3)),
])
def test_relation_suite_small(model):
    reports = relation_suite(model())
    assert reports and all(r.passed for r in reports)


def test_fast_mode_stops_on_failure():
    from racah.algebra import MatrixModel

    good = bg_model(RepSpec("bg", 3, k=2))

    def broken(A):
        m = good.generator(A)
        return m + Matrix.identity(3) if A == (1, 2, 3) else m

    model = MatrixModel(3, 3, broken)
    full = relation_suite(model)
    fast = relation_suite(model, fast=True)
    assert any(not r.passed for r in full)
    assert len(fast) < len(full) and not fast[-1].passed


@pytest.mark.parametrize("real,n", [("bg", 4), ("dunkl", 3), ("sphere", 3)])
def test_centralizer(real, n):
    spec = RepSpec(real, n)
    for A in all_subsets(n):
        for eps in EPSILONS:
            assert verify_centralizer(spec, A, eps).passed


def test_chain_enumeration():
    assert labeling_chains(3) == [((1, 2),), ((1, 3),), ((2, 3),)]
    for n in (3, 4, 5, 6):
        assert len(labeling_chains(n)) == factorial(n) // 2
    with pytest.raises(ValueError):
        validate_chain([(1, 2), (1, 3, 4)], 4)


def test_graph_matches_figure():
    g = connection_graph(4)
    relabelled = nx.relabel_nodes(g, {v: chain_label(v) for v in g.nodes})
    fig = figure_graph()
    assert set(relabelled.nodes) == set(fig.nodes)
    assert {frozenset(e) for e in relabelled.edges} == {frozenset(e) for e in fig.edges}
    s = graph_summary(4)
    assert (s["vertices"], s["edges"], s["connected"], s["degrees"]) == (12, 18, True, [3])


def test_graph_small_and_paths():
    g3 = connection_graph(3)
    assert g3.number_of_nodes() == 3 and g3.number_of_edges() == 3
    for n in range(3, 8):
        assert nx.is_connected(connection_graph(n))
    path = shortest_chain_path(4, [(1, 2), (1, 2, 3)], [(3, 4), (2, 3, 4)])
    assert len(path) == 4
    dot = graph_to_dot(4)
    assert dot.count("--") == 18 and '"(C_{12},C_{123})"' in dot


def test_sphere_points_are_on_sphere():
    for pt in rational_sphere_points(4, 20, seed=3):
        assert sum(c * c for c in pt) == 1 and all(pt)


def test_sphere_hamiltonian_small():
    assert all(r.passed for r in verify_sphere_hamiltonian(3, points=6, polys=2))


def test_linear_independence():
    # irreducible Pi_k: the C_ij sum to a scalar, so rank drops by exactly one
    r = verify_cij_linear_independence(bg_model(RepSpec("bg", 3, k=2)))
    assert not r.passed and r.detail == "rank 3 of 4"
    assert verify_cij_linear_independence(OperatorModel(RepSpec("sphere", 4))).passed
    spec = RepSpec("bg", 4)
    assert verify_cij_linear_independence(operator_matrix_model(spec, BasisSpec(4, "homogeneous", 3))).passed
