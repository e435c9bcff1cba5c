"""Generators C_A of the Racah algebra, their relations, chains and the connection graph."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Callable, Iterable, Sequence

import networkx as nx

from .linalg import Matrix, format_rational, rank_of_vectors, to_rational
from .operators import BasisSpec, OperatorExpr, apply_and_evaluate, matrix_on_basis
from .realizations import (
    RepSpec,
    all_subsets,
    casimir_subset,
    gauged_casimir,
    bg_theorem_matrices,
    j_sum,
    subset_label,
)


class RepeatedIndex(ValueError):
    pass


class InsufficientSites(ValueError):
    pass


Element = Matrix | OperatorExpr


class RacahModel:
    """A concrete realization: maps a subset A to the element C_A.

    Subclasses implement ``_build(A)``; results are cached.
    """

    kind = "abstract"

    def __init__(self, n: int, name: str = ""):
        if n < 3:
            raise ValueError("n must be >= 3")
        self.n = n
        self.name = name or self.kind
        self._cache: dict = {}

    def _build(self, A: tuple) -> Element:
        raise NotImplementedError

    def identity(self) -> Element:
        raise NotImplementedError

    def generator(self, A: Iterable[int]) -> Element:
        A = subset_label(A, self.n)
        key = ("C", A)
        if key not in self._cache:
            self._cache[key] = self._build(A)
        return self._cache[key]

    def c(self, *sites: int) -> Element:
        return self.generator(sites)

    def p_elem(self, i: int, j: int) -> Element:
        if i == j:
            raise RepeatedIndex("P_ij needs distinct indices")
        key = ("P", frozenset((i, j)))
        if key not in self._cache:
            self._cache[key] = self.c(i, j) - self.c(i) - self.c(j)
        return self._cache[key]

    def f_elem(self, i: int, j: int, k: int) -> Element:
        if len({i, j, k}) != 3:
            raise RepeatedIndex("F_ijk needs distinct indices")
        key = ("F", (i, j, k))
        if key not in self._cache:
            self._cache[key] = comm(self.c(i, j), self.c(j, k)) * Fraction(1, 2)
        return self._cache[key]

    def prod(self, a: Element, b: Element) -> Element:
        return a * b


class OperatorModel(RacahModel):
    """Symbolic generators from an su(1,1) realization."""

    kind = "operator"

    def __init__(self, spec: RepSpec):
        if not spec.is_operator:
            raise ValueError(f"{spec.realization} has no operator form")
        super().__init__(spec.n, spec.realization)
        self.spec = spec

    def _build(self, A):
        return casimir_subset(self.spec, A)

    def identity(self):
        return OperatorExpr.one(self.spec.n)


class MatrixModel(RacahModel):
    """Generators given by a function returning matrices."""

    kind = "matrix"

    def __init__(self, n: int, dim: int, build: Callable[[tuple], Matrix], name: str = "matrix"):
        super().__init__(n, name)
        self.dim = dim
        self._builder = build

    def _build(self, A):
        return self._builder(A)

    def identity(self):
        return Matrix.identity(self.dim)


def bg_model(spec: RepSpec, k: int | None = None, route: str = "gauge") -> MatrixModel:
    """Barut-Girardello generators on polynomials of degree <= k in n-2 variables.

    ``route="gauge"`` conjugates the tensor-product Casimirs, ``"theorem"``
    uses the closed formulas for one- and two-index generators and extends
    them linearly.
    """
    k = spec.k if k is None else k
    if k is None:
        raise ValueError("bg model needs a degree k")
    basis = BasisSpec(spec.n - 2, "total", k)
    if route == "gauge":
        def build(A):
            return matrix_on_basis(gauged_casimir(spec, A, k), basis)
    elif route == "theorem":
        mats = bg_theorem_matrices(spec, k)

        def build(A):
            if A in mats:
                return mats[A]
            return linear_dependence_rhs(lambda *s: mats[tuple(sorted(s))], A)
    else:
        raise ValueError(f"unknown route {route!r}")
    return MatrixModel(spec.n, len(basis), build, name=f"bg[{route}] k={k}")


def operator_matrix_model(spec: RepSpec, basis: BasisSpec) -> MatrixModel:
    """Generators of an operator realization as matrices on a polynomial basis."""
    def build(A):
        return matrix_on_basis(casimir_subset(spec, A), basis)
    return MatrixModel(spec.n, len(basis), build, name=f"{spec.realization} on {basis.kind} deg {basis.degree}")


def dunkl_model(spec: RepSpec, d: int | None = None) -> MatrixModel:
    d = spec.k if d is None else d
    if d is None:
        raise ValueError("dunkl model needs a degree d")
    return operator_matrix_model(spec, BasisSpec(spec.n, "homogeneous", d))


def make_model(spec: RepSpec, symbolic: bool | None = None) -> RacahModel:
    """Default model for a spec: symbolic for sphere, matrices otherwise."""
    real = spec.realization
    if real == "discrete":
        from .discrete import discrete_model
        if spec.k is None:
            raise ValueError("discrete model needs a grid size N")
        return discrete_model(spec.n, spec.k, spec.params)
    if symbolic or (symbolic is None and (real == "sphere" or spec.k is None)):
        return OperatorModel(spec)
    if real == "dunkl":
        return dunkl_model(spec)
    return bg_model(spec)


def comm(a: Element, b: Element) -> Element:
    return a * b - b * a


def linear_dependence_rhs(c: Callable[..., Element], K: Sequence[int]) -> Element:
    """``sum_{i<j in K} C_ij - (|K|-2) sum_{i in K} C_i``."""
    K = tuple(K)
    out = None
    for i, j in combinations(K, 2):
        out = c(i, j) if out is None else out + c(i, j)
    singles = None
    for i in K:
        singles = c(i) if singles is None else singles + c(i)
    if out is None:
        return singles
    return out - singles * (len(K) - 2)


# reports ----------------------------------------------------------------------

@dataclass
class RelationReport:
    relation: str
    args: tuple
    residual: Element | None = None
    passed: bool = False
    detail: str = ""

    @classmethod
    def from_residual(cls, relation: str, args, residual: Element) -> "RelationReport":
        return cls(relation, tuple(args), residual, residual.is_zero())

    def to_json_obj(self) -> dict:
        out = {"relation": self.relation, "args": [list(a) if isinstance(a, tuple) else a for a in self.args],
               "pass": self.passed}
        if self.detail:
            out["detail"] = self.detail
        if not self.passed and self.residual is not None:
            out["residual"] = self.residual.to_json_obj()
        return out


def _fmt_set(A) -> str:
    return "".join(str(a) for a in A)


def verify_linear_dependence(model: RacahModel, K: Iterable[int]) -> RelationReport:
    K = subset_label(K, model.n)
    rhs = linear_dependence_rhs(model.c, K)
    return RelationReport.from_residual("linear_dependence", (K,), model.generator(K) - rhs)


def verify_commutativity(model: RacahModel, A, B) -> RelationReport:
    A = subset_label(A, model.n)
    B = subset_label(B, model.n)
    sa, sb = set(A), set(B)
    if not (sa <= sb or sb <= sa or not (sa & sb)):
        raise ValueError(f"C_{_fmt_set(A)} and C_{_fmt_set(B)} are neither nested nor disjoint")
    return RelationReport.from_residual("commutativity", (A, B), comm(model.generator(A), model.generator(B)))


def legal_commuting_pairs(n: int) -> list[tuple[tuple, tuple]]:
    subsets = all_subsets(n)
    out = []
    for a in range(len(subsets)):
        for b in range(a + 1, len(subsets)):
            A, B = set(subsets[a]), set(subsets[b])
            if A <= B or B <= A or not (A & B):
                out.append((subsets[a], subsets[b]))
    return out


def verify_rel1(model: RacahModel, i: int = 1, j: int = 2, k: int = 3) -> list[RelationReport]:
    """The rank-one relations lifted to sites (i, j, k)."""
    c = model.c
    c12, c23, c13 = c(i, j), c(j, k), c(i, k)
    c1, c2, c3, c123 = c(i), c(j), c(k), c(i, j, k)
    f = comm(c12, c23) * Fraction(1, 2)
    args = (i, j, k)
    reports = [
        RelationReport.from_residual("F_equal_a", args, comm(c12, c23) - comm(c23, c13)),
        RelationReport.from_residual("F_equal_b", args, comm(c23, c13) - comm(c13, c12)),
        RelationReport.from_residual(
            "rel1_12", args, comm(c12, f) - (c23 * c12 - c12 * c13 + (c2 - c1) * (c3 - c123))
        ),
        RelationReport.from_residual(
            "rel1_23", args, comm(c23, f) - (c13 * c23 - c23 * c12 + (c3 - c2) * (c1 - c123))
        ),
        RelationReport.from_residual(
            "rel1_13", args, comm(c13, f) - (c12 * c13 - c13 * c23 + (c1 - c3) * (c2 - c123))
        ),
    ]
    return reports


def _require_sites(model: RacahModel, needed: int) -> None:
    if model.n < needed:
        raise InsufficientSites(f"relation needs {needed} distinct sites, model has n={model.n}")


def verify_cf(model: RacahModel, i, j, k) -> RelationReport:
    c, F = model.c, model.f_elem
    lhs = comm(c(j, k), F(i, j, k))
    rhs = c(i, k) * c(j, k) - c(j, k) * c(i, j) + (c(k) - c(j)) * (c(i) - c(i, j, k))
    return RelationReport.from_residual("[C_jk,F_ijk]", (i, j, k), lhs - rhs)


def verify_pf(model: RacahModel, i, j, k, l) -> RelationReport:
    P, F = model.p_elem, model.f_elem
    lhs = comm(P(k, l), F(i, j, k))
    rhs = P(i, k) * P(j, l) - P(i, l) * P(j, k)
    return RelationReport.from_residual("[P_kl,F_ijk]", (i, j, k, l), lhs - rhs)


def verify_ff_shared(model: RacahModel, i, j, k, l) -> RelationReport:
    P, F, c = model.p_elem, model.f_elem, model.c
    lhs = comm(F(i, j, k), F(j, k, l))
    rhs = F(j, k, l) * P(i, j) - F(i, k, l) * (P(j, k) + c(j) * 2) - F(i, j, k) * P(j, l)
    return RelationReport.from_residual("[F_ijk,F_jkl]", (i, j, k, l), lhs - rhs)


def verify_ff_disjoint(model: RacahModel, i, j, k, l, m) -> RelationReport:
    P, F = model.p_elem, model.f_elem
    lhs = comm(F(i, j, k), F(k, l, m))
    rhs = F(i, l, m) * P(j, k) - P(i, k) * F(j, l, m)
    return RelationReport.from_residual("[F_ijk,F_klm]", (i, j, k, l, m), lhs - rhs)


def verify_structure_relations(model: RacahModel, indices: Sequence[int]) -> list[RelationReport]:
    """Structure relations for one index tuple; its length picks the relations."""
    idx = tuple(indices)
    if len(set(idx)) != len(idx):
        raise RepeatedIndex(f"indices must be distinct: {idx}")
    _require_sites(model, len(idx))
    if any(not 1 <= a <= model.n for a in idx):
        raise ValueError(f"indices {idx} outside 1..{model.n}")
    if len(idx) == 3:
        return [verify_cf(model, *idx)]
    if len(idx) == 4:
        return [verify_pf(model, *idx), verify_ff_shared(model, *idx)]
    if len(idx) == 5:
        return [verify_ff_disjoint(model, *idx)]
    raise ValueError("structure relations take 3, 4 or 5 indices")


def verify_f_antisymmetry(model: RacahModel, i, j, k) -> list[RelationReport]:
    base = model.f_elem(i, j, k)
    out = []
    for perm in permutations((i, j, k)):
        # sign of the permutation relative to (i, j, k)
        pos = [(i, j, k).index(p) for p in perm]
        inv = sum(1 for a in range(3) for b in range(a + 1, 3) if pos[a] > pos[b])
        sign = -1 if inv % 2 else 1
        out.append(RelationReport.from_residual("F_antisymmetry", perm, model.f_elem(*perm) - base * sign))
    return out


def relation_suite(model: RacahModel, fast: bool = False) -> list[RelationReport]:
    """Every relation over every legal index tuple, in lexicographic order.

    With ``fast`` the run stops at the first failure.
    """
    reports: list[RelationReport] = []
    n = model.n

    def add(items):
        items = items if isinstance(items, list) else [items]
        reports.extend(items)
        return fast and any(not r.passed for r in items)

    for K in all_subsets(n):
        if len(K) >= 3 and add(verify_linear_dependence(model, K)):
            return reports
    for A, B in legal_commuting_pairs(n):
        if add(verify_commutativity(model, A, B)):
            return reports
    for trip in combinations(range(1, n + 1), 3):
        if add(verify_rel1(model, *trip)) or add(verify_f_antisymmetry(model, *trip)):
            return reports
    for size in (3, 4, 5):
        if n < size:
            break
        for idx in permutations(range(1, n + 1), size):
            if add(verify_structure_relations(model, idx)):
                return reports
    return reports


def verify_centralizer(spec: RepSpec, A, eps: str) -> RelationReport:
    """``[C_A, J_{eps,[n]}] = 0`` as an operator identity."""
    A = subset_label(A, spec.n)
    full = tuple(range(1, spec.n + 1))
    res = comm(casimir_subset(spec, A), j_sum(spec, full, eps))
    return RelationReport.from_residual("centralizer", (A, eps), res)


# chains and the connection graph ------------------------------------------------

Chain = tuple  # tuple of sorted site tuples, sizes 2..n-1


def labeling_chains(n: int) -> list[Chain]:
    """All chains A_1 < ... < A_{n-2} with |A_k| = k + 1, sorted."""
    if n < 3:
        raise ValueError("n must be >= 3")
    out = []

    def extend(chain):
        if len(chain) == n - 2:
            out.append(tuple(chain))
            return
        last = set(chain[-1])
        for a in range(1, n + 1):
            if a not in last:
                extend(chain + [tuple(sorted(last | {a}))])

    for pair in combinations(range(1, n + 1), 2):
        extend([pair])
    return sorted(set(out))


def validate_chain(chain: Sequence[Sequence[int]], n: int) -> Chain:
    sets = [subset_label(A, n) for A in chain]
    if len(sets) != n - 2:
        raise ValueError(f"a chain for n={n} has {n - 2} sets, got {len(sets)}")
    for k, A in enumerate(sets, start=1):
        if len(A) != k + 1:
            raise ValueError(f"set {A} in position {k} must have {k + 1} elements")
        if k > 1 and not set(sets[k - 2]) < set(A):
            raise ValueError(f"chain is not nested at {sets[k - 2]} -> {A}")
    return tuple(sets)


def chains_differ_in(a: Chain, b: Chain) -> list[int]:
    return [i for i, (x, y) in enumerate(zip(a, b)) if x != y]


def chain_label(chain: Chain) -> str:
    return "(" + ",".join("C_{" + _fmt_set(A) + "}" for A in chain) + ")"


def connection_graph(n: int) -> nx.Graph:
    """Vertices are labeling chains; edges join chains differing in one set."""
    chains = labeling_chains(n)
    g = nx.Graph()
    g.add_nodes_from(chains)
    for a, b in combinations(chains, 2):
        if len(chains_differ_in(a, b)) == 1:
            g.add_edge(a, b)
    return g


def graph_summary(n: int) -> dict:
    g = connection_graph(n)
    return {
        "n": n,
        "vertices": g.number_of_nodes(),
        "edges": g.number_of_edges(),
        "connected": nx.is_connected(g),
        "degrees": sorted({d for _, d in g.degree()}),
    }


def shortest_chain_path(n: int, start: Chain, end: Chain) -> list[Chain]:
    g = connection_graph(n)
    return nx.shortest_path(g, validate_chain(start, n), validate_chain(end, n))


def graph_to_dot(n: int) -> str:
    g = connection_graph(n)
    lines = [f"graph connection_graph_{n} {{"]
    ids = {v: f"v{i}" for i, v in enumerate(sorted(g.nodes))}
    for v in sorted(g.nodes):
        lines.append(f'  {ids[v]} [label="{chain_label(v)}"];')
    for a, b in sorted(tuple(sorted(e)) for e in g.edges):
        lines.append(f"  {ids[a]} -- {ids[b]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_json_obj(n: int) -> dict:
    g = connection_graph(n)
    out = graph_summary(n)
    out["vertex_labels"] = [chain_label(v) for v in sorted(g.nodes)]
    out["edge_list"] = sorted([sorted([chain_label(a), chain_label(b)]) for a, b in g.edges])
    return out


# sphere model ---------------------------------------------------------------------

def sphere_hamiltonian(spec: RepSpec) -> OperatorExpr:
    """Laplace-Beltrami operator plus ``sum b_i / y_i^2``."""
    n = spec.n
    out = OperatorExpr.zero(n)
    for i, j in combinations(range(n), 2):
        L = OperatorExpr.x(n, i) * OperatorExpr.d(n, j) - OperatorExpr.x(n, j) * OperatorExpr.d(n, i)
        out = out + L * L
    for i in range(n):
        out = out + OperatorExpr.x(n, i, -2) * spec.params[i]
    return out


def rational_sphere_points(n: int, count: int, seed: int = 0) -> list[tuple[Fraction, ...]]:
    """Points of the unit sphere with all coordinates nonzero, via inverse stereographic projection."""
    rng = random.Random(seed)
    out = []
    seen = set()
    while len(out) < count:
        v = [rng.choice([-1, 1]) * rng.randint(1, 6) for _ in range(n - 1)]
        s = sum(a * a for a in v)
        if s == 1:
            continue
        pt = tuple(Fraction(2 * a, s + 1) for a in v) + (Fraction(s - 1, s + 1),)
        if any(c == 0 for c in pt) or pt in seen:
            continue
        seen.add(pt)
        out.append(pt)
    return out


def random_test_polynomials(n: int, count: int, degree: int = 4, seed: int = 0) -> list[dict]:
    rng = random.Random(seed + 7919)
    monos = [m for m in _all_monomials(n, degree)]
    out = []
    for _ in range(count):
        chosen = rng.sample(monos, min(4, len(monos)))
        out.append({m: Fraction(rng.randint(-5, 5) or 1, rng.randint(1, 4)) for m in chosen})
    return out


def _all_monomials(n, degree):
    from .operators import monomials
    return monomials(n, degree)


def verify_sphere_hamiltonian(
    n: int,
    b: Sequence | None = None,
    points: int = 20,
    polys: int = 5,
    seed: int = 0,
) -> list[RelationReport]:
    """(a) ``[C_ij, C_[n]] = 0`` symbolically; (b) ``C_[n] + H/4 - (n^2-4n)/16`` vanishes on the sphere."""
    spec = RepSpec("sphere", n, tuple(b) if b else ())
    full = tuple(range(1, n + 1))
    c_full = casimir_subset(spec, full)
    reports = []
    for i, j in combinations(full, 2):
        reports.append(
            RelationReport.from_residual("sphere_[C_ij,C_[n]]", ((i, j),), comm(casimir_subset(spec, (i, j)), c_full))
        )
    diff = c_full + sphere_hamiltonian(spec) * Fraction(1, 4) - Fraction(n * n - 4 * n, 16)
    pts = rational_sphere_points(n, points, seed)
    fs = random_test_polynomials(n, polys, seed=seed)
    worst = []
    for fi, f in enumerate(fs):
        for pt in pts:
            val = apply_and_evaluate(diff, f, pt)
            if val != 0:
                worst.append((fi, pt, val))
    rep = RelationReport(
        "sphere_hamiltonian_on_sphere",
        (n, len(pts), len(fs)),
        None,
        not worst,
        "" if not worst else f"nonzero at {len(worst)} evaluations, first {worst[0][1]} -> {format_rational(worst[0][2])}",
    )
    reports.append(rep)
    return reports


def verify_cij_linear_independence(model: RacahModel) -> RelationReport:
    """Rank of {C_ij} together with the identity, vectorized."""
    n = model.n
    elems = [model.identity()] + [model.c(i, j) for i, j in combinations(range(1, n + 1), 2)]
    if isinstance(elems[0], OperatorExpr):
        keys = sorted(set(k for e in elems for k in e.terms))
        vectors = [[e.terms.get(k, Fraction(0)) for k in keys] for e in elems]
    else:
        vectors = [e.vectorize() for e in elems]
    r = rank_of_vectors(vectors)
    expected = n * (n - 1) // 2 + 1
    return RelationReport("cij_linear_independence", (n,), None, r == expected, f"rank {r} of {expected}")
