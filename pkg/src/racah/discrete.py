"""Discrete model: Racah difference operators acting on functions on a simplex grid.

Coordinates are ``x_0 = 0, x_1, ..., x_{n-2}, x_{n-1} = N``; only
``x_1..x_{n-2}`` vary over the grid ``0 <= x_1 <= ... <= x_{n-2} <= N``.
A difference operator ``(Lf)(x) = sum G_nu(x) (f(x+nu) - f(x))`` becomes the
matrix with ``M[x, x+nu] = G_nu(x)`` on the point basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Sequence

from .algebra import MatrixModel, RelationReport, linear_dependence_rhs
from .linalg import Matrix, format_rational, to_rational
from .polynomials import BetaLadder, increments, kappa, simplex_points, tratnik_multivariate


class PoleOnGrid(ZeroDivisionError):
    pass


class GridInvarianceError(ValueError):
    pass


# coefficient functions -----------------------------------------------------------

def _inv(x, beta):
    """The involution ``x -> -x - beta``."""
    return -x - beta


def b_coeff(i: int, s: int, x: Sequence, beta: Sequence) -> Fraction:
    """``b_i^s`` at coordinates x (indexable by i) and parameters beta."""
    xi, bi = to_rational(x[i]), to_rational(beta[i])
    if s == 0:
        return (2 * xi + bi + 1) * (2 * xi + bi - 1)
    if s == 1:
        return (2 * xi + bi + 1) * (2 * xi + bi)
    if s == -1:
        y = _inv(xi, bi)
        return (2 * y + bi + 1) * (2 * y + bi)
    raise ValueError("s must be -1, 0 or 1")


def _B_base(s: int, t: int, xi, xj, bi, bj) -> Fraction:
    if (s, t) == (0, 0):
        return xi * (xi + bi) + xj * (xj + bj) + (bi + 1) * (bj - 1) / 2
    if (s, t) == (0, 1):
        return (xj + xi + bj) * (xj - xi + bj - bi)
    if (s, t) == (1, 0):
        return (xj - xi) * (xj + xi + bj)
    if (s, t) == (1, 1):
        return (xj + xi + bj) * (xj + xi + bj + 1)
    raise ValueError("base case needs s, t in {0, 1}")


def B_coeff(i: int, s: int, t: int, x: Sequence, beta: Sequence) -> Fraction:
    """``B_i^{s,t}``; negative superscripts through the involutions on x_i and x_{i+1}."""
    if s not in (-1, 0, 1) or t not in (-1, 0, 1):
        raise ValueError("superscripts must be -1, 0 or 1")
    xi, xj = to_rational(x[i]), to_rational(x[i + 1])
    bi, bj = to_rational(beta[i]), to_rational(beta[i + 1])
    if s == -1:
        xi, s = _inv(xi, bi), 1
    if t == -1:
        xj, t = _inv(xj, bj), 1
    return _B_base(s, t, xi, xj, bi, bj)


def G_coeff(nu: Sequence[int], x: Sequence, beta: Sequence, j: int | None = None, offset: int = 0) -> Fraction:
    """``G_nu`` of ``L_j`` with ``nu_0 = nu_{j+1} = 0``.

    ``offset`` applies the index shift sigma^offset: every index i in the
    definition reads ``i + offset``.
    """
    nu = tuple(nu)
    j = len(nu) if j is None else j
    if len(nu) != j:
        raise ValueError(f"nu needs {j} entries")
    if not any(nu):
        raise ValueError("nu = 0 is excluded")
    full = (0,) + nu + (0,)
    num = Fraction(2) ** sum(1 for v in nu if v == 0)
    for i in range(j + 1):
        num *= B_coeff(i + offset, full[i], full[i + 1], x, beta)
        if num == 0:
            return Fraction(0)
    den = Fraction(1)
    for i in range(1, j + 1):
        den *= b_coeff(i + offset, full[i], x, beta)
    if den == 0:
        raise PoleOnGrid(f"b denominator vanishes for nu={nu} at x={[format_rational(v) for v in x]}")
    return num / den


# symbolic index shift -----------------------------------------------------------------

@dataclass(frozen=True)
class IndexedMonomial:
    """``coeff * prod symbol_i^power`` over symbols x_i, beta_i, E_i."""

    coeff: Fraction = Fraction(1)
    factors: tuple = ()  # sorted ((kind, index), power)

    @classmethod
    def of(cls, *items, coeff=1) -> "IndexedMonomial":
        powers: dict = {}
        for item in items:
            kind, index, power = item if len(item) == 3 else (*item, 1)
            powers[(kind, index)] = powers.get((kind, index), 0) + power
        return cls(to_rational(coeff), tuple(sorted((k, p) for k, p in powers.items() if p)))

    def __str__(self) -> str:
        names = {"x": "x", "beta": "beta", "E": "E_x"}
        parts = [format_rational(self.coeff)] if self.coeff != 1 or not self.factors else []
        rank = {"x": 0, "beta": 1, "E": 2}
        for (kind, idx), p in sorted(self.factors, key=lambda f: (rank[f[0][0]], f[0][1])):
            parts.append(f"{names[kind]}{idx}" + (f"^{p}" if p != 1 else ""))
        return "*".join(parts)


@dataclass(frozen=True)
class RacahDifferenceOperator:
    """``sign * sigma^offset(L_j) + scalar`` with coefficients evaluated per grid point."""

    j: int
    offset: int = 0
    sign: int = 1
    scalar: Fraction = Fraction(0)

    def shift_vectors(self) -> list[tuple[int, ...]]:
        return [nu for nu in product((-1, 0, 1), repeat=self.j) if any(nu)]

    def shifted_variables(self) -> list[int]:
        return [i + self.offset for i in range(1, self.j + 1)]

    def terms_at(self, x: Sequence, beta: Sequence) -> list[tuple[tuple[int, ...], Fraction]]:
        """Nonzero (nu, G_nu(x)) pairs at one point (full coordinate vector)."""
        out = []
        for nu in self.shift_vectors():
            g = G_coeff(nu, x, beta, self.j, self.offset)
            if g:
                out.append((nu, g))
        return out

    def apply(self, f, x: Sequence, beta: Sequence) -> Fraction:
        """Value at x of the operator applied to a function of the full coordinate vector."""
        x = list(x)
        total = Fraction(0)
        base = f(tuple(x))
        for nu, g in self.terms_at(x, beta):
            y = list(x)
            for v, step in zip(self.shifted_variables(), nu):
                y[v] += step
            total += g * (f(tuple(y)) - base)
        return self.sign * total + self.scalar * base


def racah_operator_L(j: int) -> RacahDifferenceOperator:
    if j < 0:
        raise ValueError("j must be nonnegative")
    return RacahDifferenceOperator(j)


def sigma_shift(expr, times: int = 1):
    """Add ``times`` to every index of x, beta and the shifts."""
    if isinstance(expr, RacahDifferenceOperator):
        return RacahDifferenceOperator(expr.j, expr.offset + times, expr.sign, expr.scalar)
    if isinstance(expr, IndexedMonomial):
        return IndexedMonomial(expr.coeff, tuple(sorted(((k, i + times), p) for (k, i), p in expr.factors)))
    raise TypeError(f"cannot shift {type(expr).__name__}")


# grid and generators --------------------------------------------------------------------

@dataclass
class GridSpec:
    n: int
    N: int
    points: list[tuple[int, ...]] = field(default_factory=list)

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n must be >= 3")
        if self.N < 0:
            raise ValueError("N must be nonnegative")
        self.points = simplex_points(self.n - 2, self.N)
        self.index = {p: i for i, p in enumerate(self.points)}

    @property
    def m(self) -> int:
        return self.n - 2

    def full(self, p: Sequence[int]) -> list[Fraction]:
        """``(x_0 = 0, x_1, ..., x_{n-2}, x_{n-1} = N)``."""
        return [Fraction(0)] + [Fraction(v) for v in p] + [Fraction(self.N)]

    def to_json_obj(self) -> dict:
        return {"n": self.n, "N": self.N, "points": [list(p) for p in self.points]}


def interval_operator(p: int, q: int, betas: Sequence) -> RacahDifferenceOperator | tuple[str, int]:
    """Closed form of ``C_[p..q]``: a diagonal kappa or a shifted Racah operator."""
    if not 1 <= p <= q:
        raise ValueError("need 1 <= p <= q")
    if p == 1:
        return ("kappa", q - 1)
    b = [to_rational(v) for v in betas]
    # C_[2..m+1] = -L_{m-1} + kappa(0, beta_m - beta_0 - 1), shifted by sigma^{p-2}
    op = RacahDifferenceOperator(q - p, 0, -1, kappa(0, b[q - p + 1] - b[0] - 1))
    op = sigma_shift(op, p - 2)
    return RacahDifferenceOperator(op.j, op.offset, op.sign, kappa(0, b[q - 1] - b[p - 2] - 1))


def check_poles(grid: GridSpec, betas: Sequence) -> list[tuple]:
    """Grid points and indices where some b_i^s vanishes."""
    witnesses = []
    for pt in grid.points:
        x = grid.full(pt)
        for i in range(1, grid.n - 1):
            for s in (-1, 0, 1):
                if b_coeff(i, s, x, betas) == 0:
                    witnesses.append((pt, i, s))
    return witnesses


def operator_matrix(op: RacahDifferenceOperator, grid: GridSpec, betas: Sequence) -> Matrix:
    """Grid matrix; raises GridInvarianceError for a nonzero coefficient leaving the grid."""
    dim = len(grid.points)
    rows = [[Fraction(0)] * dim for _ in range(dim)]
    shifted = op.shifted_variables()
    for r, pt in enumerate(grid.points):
        x = grid.full(pt)
        diag = op.scalar
        for nu, g in op.terms_at(x, betas):
            y = list(pt)
            for v, step in zip(shifted, nu):
                y[v - 1] += step
            c = grid.index.get(tuple(y))
            if c is None:
                raise GridInvarianceError(f"shift {nu} at {pt} leaves the grid with G = {format_rational(g)}")
            rows[r][c] += op.sign * g
            diag -= op.sign * g
        rows[r][r] += diag
    return Matrix.from_rows(rows)


def interval_matrix(p: int, q: int, grid: GridSpec, betas: Sequence) -> Matrix:
    op = interval_operator(p, q, betas)
    if isinstance(op, tuple):
        idx = op[1]
        bq = to_rational(betas[idx])
        return Matrix.diag([kappa(grid.full(pt)[idx], bq) for pt in grid.points])
    return operator_matrix(op, grid, betas)


def discrete_generators(n: int, N: int, betas: Sequence | None = None) -> dict[tuple, Matrix]:
    """All interval generators ``C_[p..q]`` as grid matrices."""
    betas = _betas(n, betas)
    grid = GridSpec(n, N)
    poles = check_poles(grid, betas)
    if poles:
        raise PoleOnGrid(f"b coefficient vanishes at {poles[:3]}")
    return {tuple(range(p, q + 1)): interval_matrix(p, q, grid, betas)
            for p in range(1, n + 1) for q in range(p, n + 1)}


def _betas(n: int, betas) -> tuple[Fraction, ...]:
    if betas is None or len(betas) == 0:
        return tuple(Fraction(1, 2) + 2 * i for i in range(n))
    betas = tuple(to_rational(b) for b in betas)
    if len(betas) != n:
        raise ValueError(f"expected {n} beta values, got {len(betas)}")
    return betas


def discrete_model(n: int, N: int, betas: Sequence | None = None) -> MatrixModel:
    """Generators for every subset: intervals directly, pairs by inclusion-exclusion,
    larger sets by linear dependence."""
    betas = _betas(n, betas)
    intervals = discrete_generators(n, N, betas)
    dim = len(simplex_points(n - 2, N))

    def interval(i, j):
        if i > j:
            return Matrix.zeros(dim)
        return intervals[tuple(range(i, j + 1))]

    def pair(i, j):
        if i == j:
            return interval(i, i)
        i, j = min(i, j), max(i, j)
        return interval(i, j) - interval(i, j - 1) - interval(i + 1, j) + interval(i + 1, j - 1) + interval(i, i) + interval(j, j)

    def build(A):
        if A == tuple(range(A[0], A[-1] + 1)):
            return intervals[A]
        if len(A) == 2:
            return pair(*A)
        return linear_dependence_rhs(lambda *s: pair(*s) if len(s) == 2 else interval(s[0], s[0]), A)

    model = MatrixModel(n, dim, build, name=f"discrete N={N}")
    model.betas = betas
    model.grid = GridSpec(n, N)
    return model


def grid_invariance_report(n: int, N: int, betas: Sequence | None = None) -> RelationReport:
    """Every shift term leaving the grid has a vanishing coefficient."""
    betas = _betas(n, betas)
    grid = GridSpec(n, N)
    leaks = []
    for p in range(2, n + 1):
        for q in range(p + 1, n + 1):
            op = interval_operator(p, q, betas)
            for pt in grid.points:
                x = grid.full(pt)
                for nu in op.shift_vectors():
                    y = list(pt)
                    for v, step in zip(op.shifted_variables(), nu):
                        y[v - 1] += step
                    if tuple(y) not in grid.index and G_coeff(nu, x, betas, op.j, op.offset) != 0:
                        leaks.append(((p, q), pt, nu))
    return RelationReport("grid_invariance", (n, N), None, not leaks, f"{len(leaks)} leaking terms" if leaks else "")


def verify_discrete_eigenfunctions(n: int, N: int, betas: Sequence | None = None) -> RelationReport:
    """Tratnik functions are joint eigenvectors of C_[2..m+1], m = 2..n-1."""
    betas = _betas(n, betas)
    model = discrete_model(n, N, betas)
    ladder = BetaLadder(betas, N)
    points = model.grid.points
    failures = []
    for label in points:
        k = increments(label)
        f = [tratnik_multivariate(k, s, ladder) for s in points]
        if not any(f):
            failures.append((label, "zero function"))
            continue
        for m in range(2, n):
            lam = kappa(sum(k[: m - 1]), betas[m] - betas[0] - 1)
            g = model.generator(tuple(range(2, m + 2))).apply(f)
            if any(a != lam * b for a, b in zip(g, f)):
                failures.append((label, f"C_[2..{m + 1}]"))
    detail = f"{len(points)} functions checked" if not failures else f"mismatch at {failures[:3]}"
    return RelationReport("discrete_eigenfunctions", (n, N), None, not failures, detail)


def grid_matrix_json(model: MatrixModel, A: Sequence[int]) -> dict:
    return {"subset": list(A), "grid": model.grid.to_json_obj(), "matrix": model.generator(A).to_json_obj()}
