from fractions import Fraction as F

import pytest

from racah.algebra import bg_model, connection_graph
from racah.connection import (
    BIVARIATE_PATH,
    LabelCollision,
    NotAdjacent,
    bivariate_formula_matrix,
    compose_path,
    connection_matrix,
    eigenbasis_for_chain,
    final_chain,
    formula_path_matrix,
    gauge_equal,
    graph_paths,
    initial_chain,
    lemma_overlap_matrix,
    step_matrix,
    tratnik_matrix,
)
from racah.linalg import Matrix
from racah.polynomials import BetaLadder
from racah.realizations import RepSpec


def setup(n, N, nus=()):
    spec = RepSpec("bg", n, nus, k=N)
    return bg_model(spec), BetaLadder.from_nu(spec.params, N)


def test_gauge_equal_examples():
    m = Matrix.from_rows([[1, 2], [3, 4]])
    r = gauge_equal(m, m)
    assert r.equal and r.row_scalars == [1, 1]
    r = gauge_equal(m.scale(2), m)
    assert r.equal and r.row_scalars == [2, 2]
    assert not gauge_equal(Matrix.identity(2), Matrix.from_rows([[1, 1], [0, 1]]))
    both = Matrix.diag([2, -3]) * m * Matrix.diag([5, F(1, 7)])
    assert not gauge_equal(both, m) and gauge_equal(both, m, two_sided=True)
    assert not gauge_equal(m, Matrix.from_rows([[1, 2], [3, 5]]), two_sided=True)


def test_eigenbasis_labels():
    model, lad = setup(3, 2)
    b = eigenbasis_for_chain([(1, 2)], model, lad)
    assert b.labels == [(0,), (1,), (2,)]
    model, lad = setup(4, 2)
    b = eigenbasis_for_chain([(1, 2), (1, 2, 3)], model, lad)
    assert len(b.labels) == 6 and all(l[0] <= l[1] <= 2 for l in b.labels)


def test_label_collision():
    # beta_12 = (2 nu_1 - 1) + (2 nu_2 - 1) + 1 = -1 and kappa(0, -1) = kappa(1, -1) = 0
    model, lad = setup(3, 2, ("-1/2", "1/2", "5/2"))
    assert lad.beta_of((1, 2)) == -1
    with pytest.raises(LabelCollision):
        eigenbasis_for_chain([(1, 2)], model, lad)


def test_identity_overlap():
    model, lad = setup(4, 2)
    r = connection_matrix(initial_chain(4), initial_chain(4), model, lad)
    assert r.matrix == Matrix.identity(6)


@pytest.mark.parametrize("N,nus", [(2, ()), (4, ("1/3", "2/5", "3/7")), (6, ("5/2", "1/2", "7/3"))])
def test_rank_one_overlap_is_racah(N, nus):
    model, lad = setup(3, N, nus)
    r = connection_matrix([(1, 2)], [(2, 3)], model, lad)
    assert gauge_equal(r.matrix, lemma_overlap_matrix(lad), two_sided=True)


def test_adjacent_overlap_is_delta_factorized():
    model, lad = setup(4, 2)
    g = connection_graph(4)
    bases = {}
    for a, b in g.edges:
        r = connection_matrix(a, b, model, lad, bases)
        pos = [i for i in range(2) if a[i] != b[i]][0]
        for i, jt in enumerate(r.row_labels):
            for j, jf in enumerate(r.col_labels):
                if any(jt[l] != jf[l] for l in range(2) if l != pos):
                    assert r.matrix[i, j] == 0
        assert gauge_equal(r.matrix, step_matrix(a, b, lad).matrix, two_sided=True)


def test_mutual_inverses_up_to_normalization():
    model, lad = setup(4, 2)
    a, b = initial_chain(4), [(3, 4), (1, 3, 4)]
    prod = connection_matrix(a, b, model, lad).matrix * connection_matrix(b, a, model, lad).matrix
    assert prod.is_diagonal() and all(prod[i, i] != 0 for i in range(prod.rows))


def test_compose_path():
    model, lad = setup(4, 3)
    bases = {}
    start, end = BIVARIATE_PATH[0], BIVARIATE_PATH[-1]
    direct = connection_matrix(start, end, model, lad, bases)
    composed = compose_path(BIVARIATE_PATH, model, lad, bases)
    assert composed.matrix == direct.matrix and len(composed.path) == 4
    single = compose_path(BIVARIATE_PATH[:2], model, lad, bases)
    assert single.matrix == connection_matrix(*BIVARIATE_PATH[:2], model, lad, bases).matrix
    with pytest.raises(NotAdjacent):
        compose_path([start, end], model, lad)


def test_path_independence():
    model, lad = setup(4, 2)
    bases = {}
    paths = graph_paths(4, initial_chain(4), final_chain(4), count=4)
    mats = [compose_path(p, model, lad, bases).matrix for p in paths]
    assert len({len(p) for p in paths}) > 1
    assert all(m == mats[0] for m in mats)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_tratnik_reproduction(N):
    model, lad = setup(4, N)
    direct = compose_path(graph_paths(4, initial_chain(4), final_chain(4), 1)[0], model, lad)
    assert gauge_equal(direct.matrix, tratnik_matrix(lad).matrix, two_sided=True)


def test_formula_products_need_consistent_normalization():
    """Closed-form steps compose to the true overlap along the Tratnik path,
    but the literal three-factor bivariate sum does not match up to gauge."""
    model, lad = setup(4, 2)
    bases = {}
    tpath = [initial_chain(4), ((2, 3), (1, 2, 3)), final_chain(4)]
    assert gauge_equal(formula_path_matrix(tpath, lad).matrix, compose_path(tpath, model, lad, bases).matrix, True)
    direct = connection_matrix(BIVARIATE_PATH[0], BIVARIATE_PATH[-1], model, lad, bases)
    biv = bivariate_formula_matrix(lad)
    assert biv.matrix == formula_path_matrix(BIVARIATE_PATH, lad).matrix
    assert not gauge_equal(biv.matrix, direct.matrix, two_sided=True)


def test_overlap_json():
    model, lad = setup(3, 1)
    obj = connection_matrix([(1, 2)], [(2, 3)], model, lad).to_json_obj()
    assert obj["from"] == "(C_{12})" and obj["row_labels"] == [[0], [1]]
    assert Matrix.from_json_obj(obj["matrix"]).shape == (2, 2)
