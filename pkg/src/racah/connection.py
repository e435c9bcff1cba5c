"""Eigenbases of labeling chains, overlap matrices and their closed-form counterparts.

Orientation: an overlap from chain A to chain B has rows indexed by the
labels of B and columns by the labels of A, with ``phi_s = sum_k R[s,k] psi_k``
where psi diagonalizes A and phi diagonalizes B.  Labels are cumulative:
``j_i`` is the kappa-label of the i-th set of the chain, so
``0 <= j_1 <= ... <= j_{n-2} <= N``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import networkx as nx

from .algebra import (
    Chain,
    RacahModel,
    chain_label,
    chains_differ_in,
    connection_graph,
    validate_chain,
)
from .linalg import IncompleteSpectrum, Matrix, format_rational, simultaneous_eigenbasis, solve
from .polynomials import (
    BetaLadder,
    RacahParams,
    increments,
    kappa,
    racah_univariate,
    simplex_points,
    tratnik_multivariate,
)


class LabelCollision(ValueError):
    pass


class NotAdjacent(ValueError):
    pass


@dataclass
class ChainBasis:
    chain: Chain
    labels: list[tuple[int, ...]]
    vectors: list[list[Fraction]]

    def as_matrix(self) -> Matrix:
        return Matrix.from_columns(self.vectors)


def eigenbasis_for_chain(chain: Sequence, model: RacahModel, ladder: BetaLadder) -> ChainBasis:
    """Joint eigenvectors of the chain's generators, labelled by kappa-matching."""
    chain = validate_chain(chain, model.n)
    ops = [model.generator(A) for A in chain]
    expected, lookup = [], []
    for A in chain:
        clash = ladder.collisions(A)
        if clash:
            raise LabelCollision(f"kappa values coincide for C_{''.join(map(str, A))} at labels {clash}")
        vals = ladder.eigenvalues(A)
        expected.append(vals)
        lookup.append({v: j for j, v in enumerate(vals)})
    try:
        dec = simultaneous_eigenbasis(ops, expected)
    except IncompleteSpectrum as exc:
        raise IncompleteSpectrum(f"chain {chain_label(chain)}: {exc}") from exc
    labelled = []
    for lam, vecs in dec:
        label = tuple(lookup[i][v] for i, v in enumerate(lam))
        if len(vecs) != 1:
            raise LabelCollision(f"label {label} of {chain_label(chain)} has multiplicity {len(vecs)}")
        labelled.append((label, vecs[0]))
    labelled.sort()
    return ChainBasis(chain, [l for l, _ in labelled], [v for _, v in labelled])


@dataclass
class OverlapMatrix:
    from_chain: Chain
    to_chain: Chain
    row_labels: list[tuple[int, ...]]
    col_labels: list[tuple[int, ...]]
    matrix: Matrix
    path: list[Chain] = field(default_factory=list)

    def __matmul__(self, other: "OverlapMatrix") -> "OverlapMatrix":
        """``self @ other``: first ``other`` (A -> B), then ``self`` (B -> C)."""
        if other.to_chain != self.from_chain or other.row_labels != self.col_labels:
            raise ValueError("overlap matrices do not chain")
        path = (other.path or [other.from_chain, other.to_chain]) + (self.path or [self.from_chain, self.to_chain])[1:]
        return OverlapMatrix(other.from_chain, self.to_chain, self.row_labels, other.col_labels,
                             self.matrix.matmul(other.matrix), path)

    def to_json_obj(self) -> dict:
        return {
            "from": chain_label(self.from_chain),
            "to": chain_label(self.to_chain),
            "row_labels": [list(l) for l in self.row_labels],
            "col_labels": [list(l) for l in self.col_labels],
            "path": [chain_label(c) for c in self.path],
            "matrix": self.matrix.to_json_obj(),
        }


def connection_matrix(chain_from, chain_to, model: RacahModel, ladder: BetaLadder,
                      bases: dict | None = None) -> OverlapMatrix:
    """Solve ``phi_s = sum_k R[s,k] psi_k`` exactly.

    ``bases`` may cache ChainBasis objects between calls.
    """
    def basis(chain):
        chain = validate_chain(chain, model.n)
        if bases is not None:
            if chain not in bases:
                bases[chain] = eigenbasis_for_chain(chain, model, ladder)
            return bases[chain]
        return eigenbasis_for_chain(chain, model, ladder)

    psi, phi = basis(chain_from), basis(chain_to)
    coeffs = solve(psi.as_matrix(), phi.as_matrix())  # column s: phi_s in the psi basis
    return OverlapMatrix(psi.chain, phi.chain, phi.labels, psi.labels, coeffs.T, [psi.chain, phi.chain])


@dataclass
class GaugeResult:
    equal: bool
    row_scalars: list[Fraction]
    col_scalars: list[Fraction]
    reason: str = ""

    def __bool__(self) -> bool:
        return self.equal

    def to_json_obj(self) -> dict:
        return {
            "equal": self.equal,
            "row_scalars": [format_rational(d) for d in self.row_scalars],
            "col_scalars": [format_rational(c) for c in self.col_scalars],
            "reason": self.reason,
        }


def gauge_equal(m1: Matrix, m2: Matrix, two_sided: bool = False) -> GaugeResult:
    """Find nonzero d_s (and c_k if ``two_sided``) with ``m1[s,k] = d_s c_k m2[s,k]``.

    Row gauge alone is the rescaling of the target eigenvectors; the column
    factors absorb the normalization of the source eigenvectors.
    """
    if m1.shape != m2.shape:
        return GaugeResult(False, [], [], f"shapes differ: {m1.shape} vs {m2.shape}")
    rows, cols = m1.shape
    for s in range(rows):
        for k in range(cols):
            if (m1[s, k] == 0) != (m2[s, k] == 0):
                return GaugeResult(False, [], [], f"zero pattern differs at ({s},{k})")
    if not two_sided:
        d = []
        for s in range(rows):
            ratio = None
            for k in range(cols):
                if m2[s, k] == 0:
                    continue
                r = m1[s, k] / m2[s, k]
                if ratio is None:
                    ratio = r
                elif r != ratio:
                    return GaugeResult(False, [], [], f"row {s}: ratios {ratio} and {r}")
            if ratio is None:
                return GaugeResult(False, [], [], f"row {s} is zero")
            d.append(ratio)
        return GaugeResult(True, d, [Fraction(1)] * cols)

    # two-sided: ratios r_sk = d_s c_k on the bipartite support graph
    d: list[Fraction | None] = [None] * rows
    c: list[Fraction | None] = [None] * cols
    for start in range(rows):
        if d[start] is not None:
            continue
        d[start] = Fraction(1)
        queue = deque([("r", start)])
        while queue:
            side, idx = queue.popleft()
            if side == "r":
                for k in range(cols):
                    if m2[idx, k] == 0:
                        continue
                    val = m1[idx, k] / m2[idx, k] / d[idx]
                    if c[k] is None:
                        c[k] = val
                        queue.append(("c", k))
                    elif c[k] != val:
                        return GaugeResult(False, [], [], f"inconsistent ratio at ({idx},{k})")
            else:
                for s in range(rows):
                    if m2[s, idx] == 0:
                        continue
                    val = m1[s, idx] / m2[s, idx] / c[idx]
                    if d[s] is None:
                        d[s] = val
                        queue.append(("r", s))
                    elif d[s] != val:
                        return GaugeResult(False, [], [], f"inconsistent ratio at ({s},{idx})")
    if any(v is None for v in c):
        return GaugeResult(False, [], [], "a column is zero")
    return GaugeResult(True, list(d), list(c))


def check_adjacent(a: Chain, b: Chain) -> int:
    diff = chains_differ_in(a, b)
    if len(diff) != 1:
        raise NotAdjacent(f"{chain_label(a)} and {chain_label(b)} differ in {len(diff)} sets")
    return diff[0]


def compose_path(path: Sequence, model: RacahModel, ladder: BetaLadder, bases: dict | None = None) -> OverlapMatrix:
    """Product of single-step overlaps along consecutive adjacent chains."""
    chains = [validate_chain(c, model.n) for c in path]
    if len(chains) < 2:
        raise ValueError("a path needs at least two chains")
    for a, b in zip(chains, chains[1:]):
        check_adjacent(a, b)
    bases = {} if bases is None else bases
    out = connection_matrix(chains[0], chains[1], model, ladder, bases)
    for a, b in zip(chains[1:], chains[2:]):
        out = connection_matrix(a, b, model, ladder, bases) @ out
    return out


def initial_chain(n: int) -> Chain:
    return tuple(tuple(range(1, m + 1)) for m in range(2, n))


def final_chain(n: int) -> Chain:
    return tuple(tuple(range(2, m + 2)) for m in range(2, n))


def graph_paths(n: int, start, end, count: int = 2) -> list[list[Chain]]:
    """Up to ``count`` distinct simple paths, shortest first."""
    g = connection_graph(n)
    gen = nx.shortest_simple_paths(g, validate_chain(start, n), validate_chain(end, n))
    out = []
    for p in gen:
        out.append(p)
        if len(out) == count:
            break
    return out


# closed forms -------------------------------------------------------------------

def rank1_params(e_a, e_mid, e_b, top: int) -> RacahParams:
    """Parameters of the rank-one overlap for site parameters (e_a, e_mid, e_b) and total label ``top``."""
    b0 = e_a
    b1 = b0 + 1 + e_mid
    b2 = b1 + 1 + e_b
    return RacahParams(b1 - b0 - 1, b2 - b1 - 1, -top - 1, b1 + top)


def lemma_overlap_matrix(ladder: BetaLadder) -> Matrix:
    """``[r_s(beta_1-beta_0-1, beta_2-beta_1-1, -N-1, beta_1+N; k)]_{s,k}``."""
    b, N = ladder.betas, ladder.N
    p = RacahParams(b[1] - b[0] - 1, b[2] - b[1] - 1, -N - 1, b[1] + N)
    return Matrix.from_rows([[racah_univariate(s, p, k) for k in range(N + 1)] for s in range(N + 1)])


def step_entry(chain_from: Chain, chain_to: Chain, pos: int, j_from, j_to, ladder: BetaLadder) -> Fraction:
    """Closed-form entry of the single-step overlap at position ``pos`` (0-based)."""
    for l in range(len(j_from)):
        if l != pos and j_from[l] != j_to[l]:
            return Fraction(0)
    K, L = set(chain_from[pos]), set(chain_to[pos])
    shared = K & L
    (a,), (b,) = tuple(K - L), tuple(L - K)
    lower = 0 if pos == 0 else j_from[pos - 1]
    upper = ladder.N if pos == len(j_from) - 1 else j_from[pos + 1]
    e = ladder.site_params()
    e_mid = ladder.beta_of(sorted(shared)) + 2 * lower
    params = rank1_params(e[a - 1], e_mid, e[b - 1], upper - lower)
    return racah_univariate(j_to[pos] - lower, params, j_from[pos] - lower)


def step_matrix(chain_from, chain_to, ladder: BetaLadder) -> OverlapMatrix:
    n = ladder.n
    a, b = validate_chain(chain_from, n), validate_chain(chain_to, n)
    pos = check_adjacent(a, b)
    labels = simplex_points(n - 2, ladder.N)
    rows = [[step_entry(a, b, pos, jf, jt, ladder) for jf in labels] for jt in labels]
    return OverlapMatrix(a, b, labels, labels, Matrix.from_rows(rows), [a, b])


def formula_path_matrix(path: Sequence, ladder: BetaLadder) -> OverlapMatrix:
    """Product of closed-form single-step matrices along ``path``."""
    out = step_matrix(path[0], path[1], ladder)
    for a, b in zip(path[1:], path[2:]):
        out = step_matrix(a, b, ladder) @ out
    return out


BIVARIATE_PATH = (
    ((1, 2), (1, 2, 3)),
    ((2, 3), (1, 2, 3)),
    ((2, 3), (2, 3, 4)),
    ((3, 4), (2, 3, 4)),
)


def bivariate_formula_matrix(ladder: BetaLadder) -> OverlapMatrix:
    """The n=4 triple sum over one intermediate label.

    ``R[(s1,s2),(k1,k2)] = sum_l R(C_2,C_3,C_4,C_234)[s1,l] R(C_1,C_23,C_4,C_1234)[s2,k2] R(C_1,C_2,C_3,C_123)[l,k1]``
    written out in cumulative labels.
    """
    if ladder.n != 4:
        raise ValueError("the bivariate formula is for n = 4")
    p0, p1, p2, p3 = BIVARIATE_PATH
    labels = simplex_points(2, ladder.N)
    rows = []
    for jt in labels:
        row = []
        for jf in labels:
            total = Fraction(0)
            for l in range(0, ladder.N + 1):
                mid1 = (l, jf[1])      # after C_12 -> C_23
                mid2 = (l, jt[1])      # after C_123 -> C_234
                if not (mid1[0] <= mid1[1] and mid2[0] <= mid2[1]):
                    continue
                t1 = step_entry(p0, p1, 0, jf, mid1, ladder)
                if t1 == 0:
                    continue
                t2 = step_entry(p1, p2, 1, mid1, mid2, ladder)
                if t2 == 0:
                    continue
                total += step_entry(p2, p3, 0, mid2, jt, ladder) * t2 * t1
            row.append(total)
        rows.append(row)
    return OverlapMatrix(p0, p3, labels, labels, Matrix.from_rows(rows), list(BIVARIATE_PATH))


def tratnik_matrix(ladder: BetaLadder) -> OverlapMatrix:
    """Rows: final-chain labels (degrees k are their increments); columns: initial-chain labels s."""
    n = ladder.n
    labels = simplex_points(n - 2, ladder.N)
    rows = [[tratnik_multivariate(increments(jt), s, ladder) for s in labels] for jt in labels]
    return OverlapMatrix(initial_chain(n), final_chain(n), labels, labels, Matrix.from_rows(rows))


def final_chain_eigenvalue(ladder: BetaLadder, m: int, k: Sequence[int]) -> Fraction:
    """Eigenvalue of ``C_[2..m+1]`` on the Tratnik function of degree k."""
    b = ladder.betas
    return kappa(sum(k[: m - 1]), b[m] - b[0] - 1)
