"""su(1,1) triples, intermediate Casimirs and the Barut-Girardello gauge."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

from .linalg import Matrix, format_rational, to_rational
from .operators import BasisSpec, OperatorExpr, OperatorError, matrix_on_basis, op_commutator

REALIZATIONS = ("sphere", "dunkl", "bg", "discrete", "abstract")
OPERATOR_REALIZATIONS = ("sphere", "dunkl", "bg", "abstract")
EPSILONS = ("+", "-", "0")

_PRIMES = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31)


class RelationFailure(AssertionError):
    """An su(1,1) relation failed; this is an implementation bug."""


class EmptySubset(ValueError):
    pass


class NotInKernelInvariant(OperatorError):
    pass


def default_params(realization: str, n: int) -> tuple[Fraction, ...]:
    """Generic parameters: distinct prime halves for bg, small rationals elsewhere."""
    if realization in ("bg", "abstract"):
        return tuple(Fraction(p, 2) for p in _PRIMES[:n])
    if realization == "sphere":
        return tuple(Fraction(i + 1, i + 3) for i in range(n))
    if realization == "dunkl":
        return tuple(Fraction(1, 2 * i + 3) for i in range(n))
    if realization == "discrete":
        return tuple(Fraction(1, 2) + 2 * i for i in range(n))
    raise ValueError(f"unknown realization {realization!r}")


@dataclass(frozen=True)
class RepSpec:
    """A realization choice with its per-site parameters and truncation.

    ``params`` holds b_i (sphere), mu_i (dunkl), nu_i (bg/abstract) or
    beta_0..beta_{n-1} (discrete).  ``k`` is the degree for bg/dunkl and
    the grid size N for discrete.
    """

    realization: str
    n: int
    params: tuple = ()
    k: int | None = None

    def __post_init__(self):
        if self.realization not in REALIZATIONS:
            raise ValueError(f"unknown realization {self.realization!r}; expected one of {REALIZATIONS}")
        if self.n < 3:
            raise ValueError("n must be >= 3")
        params = tuple(to_rational(p) for p in self.params) if self.params else default_params(self.realization, self.n)
        if len(params) != self.n:
            raise ValueError(f"expected {self.n} parameters, got {len(params)}")
        if self.realization == "dunkl" and any(p <= 0 for p in params):
            raise ValueError("Dunkl parameters mu_i must be positive")
        if self.k is not None and self.k < 1:
            raise ValueError("truncation must be positive")
        object.__setattr__(self, "params", params)

    @property
    def is_operator(self) -> bool:
        return self.realization in OPERATOR_REALIZATIONS

    def param(self, i: int) -> Fraction:
        """Parameter of site ``i`` (1-based)."""
        return self.params[i - 1]

    def to_json_obj(self) -> dict:
        out = {"realization": self.realization, "n": self.n, "params": [format_rational(p) for p in self.params]}
        if self.k is not None:
            out["k"] = self.k
        return out

    @classmethod
    def from_json_obj(cls, obj: dict) -> "RepSpec":
        k = obj.get("k", obj.get("N", obj.get("d")))
        return cls(obj["realization"], int(obj["n"]), tuple(obj.get("params", ())), None if k is None else int(k))

    @classmethod
    def from_json(cls, text: str) -> "RepSpec":
        return cls.from_json_obj(json.loads(text))


def subset_label(K: Iterable[int], n: int | None = None) -> tuple[int, ...]:
    K = tuple(sorted(set(K)))
    if not K:
        raise EmptySubset("subset must be nonempty")
    if n is not None and (K[0] < 1 or K[-1] > n):
        raise ValueError(f"subset {K} outside 1..{n}")
    return K


@dataclass(frozen=True)
class Su11Triple:
    j_plus: OperatorExpr
    j_minus: OperatorExpr
    j_zero: OperatorExpr
    realization: str = "abstract"
    params: dict = field(default_factory=dict, compare=False, hash=False)

    def relation_residuals(self) -> dict[str, OperatorExpr]:
        return {
            "[J0,J+]-J+": op_commutator(self.j_zero, self.j_plus) - self.j_plus,
            "[J0,J-]+J-": op_commutator(self.j_zero, self.j_minus) + self.j_minus,
            "[J-,J+]-2J0": op_commutator(self.j_minus, self.j_plus) - self.j_zero * 2,
        }

    def check(self) -> None:
        for name, res in self.relation_residuals().items():
            if not res.is_zero():
                raise RelationFailure(f"{self.realization}: {name} = {res}")

    @property
    def casimir(self) -> OperatorExpr:
        j0 = self.j_zero
        return j0 * j0 - j0 - self.j_plus * self.j_minus

    def get(self, eps: str) -> OperatorExpr:
        return {"+": self.j_plus, "-": self.j_minus, "0": self.j_zero}[eps]


def _site_ops(spec: RepSpec, i: int) -> tuple[OperatorExpr, OperatorExpr, OperatorExpr]:
    n = spec.n
    v = i - 1
    p = spec.param(i)
    X = OperatorExpr.x(n, v)
    D = OperatorExpr.d(n, v)
    half = Fraction(1, 2)
    real = spec.realization
    if real == "sphere":
        jp = X * X * half
        jm = (D * D + OperatorExpr.x(n, v, -2) * p) * half
        j0 = (X * D * 2 + 1) * Fraction(1, 4)
    elif real == "dunkl":
        T = dunkl_operator(n, v, p)
        jp = X * X * half
        jm = T * T * half
        j0 = (X * D + p + half) * half
    elif real in ("bg", "abstract"):
        jp = X * X * D + X * (2 * p)
        jm = D
        j0 = X * D + p
    else:
        raise ValueError(f"realization {real!r} has no su(1,1) triple")
    return jp, jm, j0


def dunkl_operator(nvars: int, v: int, mu) -> OperatorExpr:
    """``d_v + mu (1 - R_v) / x_v`` (0-based variable index)."""
    mu = to_rational(mu)
    xinv = OperatorExpr.x(nvars, v, -1)
    return OperatorExpr.d(nvars, v) + xinv * mu - xinv * OperatorExpr.refl(nvars, v) * mu


@lru_cache(maxsize=None)
def make_triple(spec: RepSpec, i: int) -> Su11Triple:
    if not 1 <= i <= spec.n:
        raise ValueError(f"site {i} outside 1..{spec.n}")
    jp, jm, j0 = _site_ops(spec, i)
    triple = Su11Triple(jp, jm, j0, spec.realization, {"site": i, "param": spec.param(i)})
    triple.check()
    return triple


@lru_cache(maxsize=None)
def j_sum(spec: RepSpec, K: tuple, eps: str) -> OperatorExpr:
    """``J_{eps,K}``: the site operators summed over K."""
    K = subset_label(K, spec.n)
    if eps not in EPSILONS:
        raise ValueError(f"epsilon must be one of {EPSILONS}")
    out = OperatorExpr.zero(spec.n)
    for i in K:
        out = out + make_triple(spec, i).get(eps)
    return out


@lru_cache(maxsize=None)
def casimir_subset(spec: RepSpec, K: tuple) -> OperatorExpr:
    """``C_K = J0K^2 - J0K - J+K J-K``."""
    K = subset_label(K, spec.n)
    j0 = j_sum(spec, K, "0")
    return j0 * j0 - j0 - j_sum(spec, K, "+") * j_sum(spec, K, "-")


# comultiplication route -----------------------------------------------------
#
# An element of U(su(1,1))^{(x)m} is a dict mapping a tuple of m words over
# {'+','-','0'} to a coefficient.  Words in different tensor slots commute.

CASIMIR_WORDS = {(("0", "0"),): Fraction(1), (("0",),): Fraction(-1), (("+", "-"),): Fraction(-1)}


def comultiply_last(elem: dict) -> dict:
    """Apply ``1 (x) ... (x) 1 (x) mu*`` to the last tensor slot."""
    out: dict = {}
    for key, c in elem.items():
        w = key[-1]
        for mask in range(1 << len(w)):
            left = tuple(a for t, a in enumerate(w) if not (mask >> t) & 1)
            right = tuple(a for t, a in enumerate(w) if (mask >> t) & 1)
            new = key[:-1] + (left, right)
            out[new] = out.get(new, 0) + c
    return {k: v for k, v in out.items() if v}


@lru_cache(maxsize=None)
def _iterated_casimir(m: int) -> tuple:
    elem = dict(CASIMIR_WORDS)
    for _ in range(m - 1):
        elem = comultiply_last(elem)
    return tuple(sorted(elem.items()))


def iterated_casimir(m: int) -> dict:
    """The m-fold comultiplied Casimir as a word dictionary."""
    if m < 1:
        raise EmptySubset("need at least one tensor factor")
    return dict(_iterated_casimir(m))


def insert_identities(elem: dict, A: Sequence[int], n: int) -> dict:
    """Lift from |A| slots to n slots, placing slot p at site A[p]."""
    positions = {site: p for p, site in enumerate(A)}
    out = {}
    for key, c in elem.items():
        new = tuple(key[positions[s]] if s in positions else () for s in range(1, n + 1))
        out[new] = out.get(new, 0) + c
    return out


def realize_words(spec: RepSpec, elem: dict) -> OperatorExpr:
    out = OperatorExpr.zero(spec.n)
    for key, c in sorted(elem.items()):
        term = OperatorExpr.scalar(spec.n, c)
        for site, word in enumerate(key, start=1):
            if word:
                triple = make_triple(spec, site)
                for eps in word:
                    term = term * triple.get(eps)
        out = out + term
    return out


@lru_cache(maxsize=None)
def casimir_via_comultiplication(spec: RepSpec, A: tuple) -> OperatorExpr:
    A = subset_label(A, spec.n)
    return realize_words(spec, insert_identities(iterated_casimir(len(A)), A, spec.n))


# Barut-Girardello gauge --------------------------------------------------------

def _bg_coordinate_images(n: int) -> tuple[list[OperatorExpr], list[OperatorExpr]]:
    """Images of x_i and d/dx_i in coordinates (u_1..u_{n-2}, t, s).

    ``s = x_2``, ``t = x_1 - x_2``, ``u_j = (x_{j+2} - x_{j+1}) / t``.
    """
    m = n - 2
    ti, si = m, m + 1
    s = OperatorExpr.x(n, si)
    t = OperatorExpr.x(n, ti)
    tinv = OperatorExpr.x(n, ti, -1)
    us = [OperatorExpr.x(n, j) for j in range(m)]
    dus = [OperatorExpr.d(n, j) for j in range(m)]
    xs = [s + t, s]
    partial = OperatorExpr.zero(n)
    for j in range(m):
        partial = partial + us[j]
        xs.append(s + t * partial)
    euler_u = OperatorExpr.zero(n)
    for j in range(m):
        euler_u = euler_u + us[j] * dus[j]
    radial = OperatorExpr.d(n, ti) - tinv * euler_u
    ds = []
    for i in range(1, n + 1):
        op = OperatorExpr.zero(n)
        if i == 2:
            op = op + OperatorExpr.d(n, si) - radial
        if i == 1:
            op = op + radial
        for j in range(1, m + 1):
            sign = (1 if i == j + 2 else 0) - (1 if i == j + 1 else 0)
            if sign:
                op = op + tinv * dus[j - 1] * sign
        ds.append(op)
    return xs, ds


@lru_cache(maxsize=None)
def _coordinate_images(n: int):
    return _bg_coordinate_images(n)


def bg_gauge(op: OperatorExpr, k: int) -> OperatorExpr:
    """``(x1-x2)^{-k} op (x1-x2)^k`` written in u_1..u_{n-2} on the kernel of J_-.

    The result acts on polynomials of degree <= k in the u variables.
    """
    n = op.nvars
    m = n - 2
    xs, ds = _coordinate_images(n)
    moved = op.substitute(xs, ds)
    ti, si = m, m + 1
    conj = OperatorExpr.x(n, ti, -k) * moved * OperatorExpr.x(n, ti, k)
    kept = {}
    for key, c in conj.terms.items():
        ft, fs = key[ti], key[si]
        if ft[1] or fs[1]:
            continue
        if ft != (0, 0, 0, 0) or fs != (0, 0, 0, 0):
            raise NotInKernelInvariant(f"gauged operator keeps t/s dependence {key}")
        kept[key[:m]] = c
    out = OperatorExpr(m, kept)
    basis = BasisSpec(m, "total", k)
    try:
        matrix_on_basis(out, basis)
    except OperatorError as exc:
        raise NotInKernelInvariant(str(exc)) from exc
    return out


@lru_cache(maxsize=None)
def gauged_casimir(spec: RepSpec, K: tuple, k: int) -> OperatorExpr:
    if spec.realization not in ("bg", "abstract"):
        raise ValueError("the gauge applies to the Barut-Girardello realization only")
    return bg_gauge(casimir_subset(spec, subset_label(K, spec.n)), k)


def bg_theorem_operators(spec: RepSpec, k: int) -> dict[tuple, OperatorExpr]:
    """One- and two-index generators from the closed formulas, in u_1..u_{n-2}."""
    n = spec.n
    m = n - 2
    nu = {i: spec.param(i) for i in range(1, n + 1)}

    def u(l):  # u_{n-1} and beyond vanish
        return OperatorExpr.x(m, l - 1) if 1 <= l <= m else OperatorExpr.zero(m)

    def du(l):
        return OperatorExpr.d(m, l - 1) if 1 <= l <= m else OperatorExpr.zero(m)

    def usum(a, b):
        out = OperatorExpr.zero(m)
        for l in range(a, b + 1):
            out = out + u(l)
        return out

    one = OperatorExpr.one(m)
    euler = OperatorExpr.zero(m)
    for l in range(1, m + 1):
        euler = euler + u(l) * du(l)

    def dd(j):
        return du(j - 2) - du(j - 1)

    def pair_const(a, b):
        s = nu[a] + nu[b]
        return one * (s * (s - 1))

    out: dict[tuple, OperatorExpr] = {}
    for i in range(1, n + 1):
        out[(i,)] = one * (nu[i] * (nu[i] - 1))
    lowered = euler - du(1) - k  # -k - d_{u1} + E
    out[(1, 2)] = (
        -((one * (k - 1) - euler) * lowered)
        + (one * k - euler) * (2 * nu[2])
        - lowered * (2 * nu[1])
        + pair_const(1, 2)
    )
    for j in range(3, n + 1):
        w = one - usum(1, j - 2)
        out[(1, j)] = (
            -(w * w * (one * (k - 1) - euler) * dd(j))
            + w * (one * k - euler) * (2 * nu[j])
            - w * dd(j) * (2 * nu[1])
            + pair_const(1, j)
        )
        v = usum(1, j - 2)
        out[(2, j)] = (
            -(v * v * (euler - du(1) + (1 - k)) * dd(j))
            + v * (one * k + du(1) - euler) * (2 * nu[j])
            + v * dd(j) * (2 * nu[2])
            + pair_const(2, j)
        )
    for i in range(3, n + 1):
        for j in range(3, i):
            v = usum(j - 1, i - 2)
            out[(j, i)] = (
                -(v * v * dd(i) * dd(j))
                + v * dd(i) * (2 * nu[j])
                - v * dd(j) * (2 * nu[i])
                + pair_const(i, j)
            )
    return out


def bg_theorem_matrices(spec: RepSpec, k: int | None = None) -> dict[tuple, Matrix]:
    """Closed-formula generators as matrices on polynomials of degree <= k in u."""
    k = spec.k if k is None else k
    if k is None:
        raise ValueError("a degree k is required")
    if spec.realization not in ("bg", "abstract"):
        raise ValueError("bg_theorem_matrices needs the bg realization")
    basis = BasisSpec(spec.n - 2, "total", k)
    return {K: matrix_on_basis(op, basis) for K, op in bg_theorem_operators(spec, k).items()}


def all_subsets(n: int) -> list[tuple[int, ...]]:
    return [c for r in range(1, n + 1) for c in combinations(range(1, n + 1), r)]
