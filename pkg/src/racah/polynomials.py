"""kappa eigenvalues, univariate Racah polynomials and Tratnik's multivariate family."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Sequence

from .linalg import format_rational, to_rational


class DivisionByZero(ZeroDivisionError):
    pass


def kappa(x, beta) -> Fraction:
    """``(x + (beta+1)/2)(x + (beta-1)/2)``."""
    x, beta = to_rational(x), to_rational(beta)
    return (x + (beta + 1) / 2) * (x + (beta - 1) / 2)


def pochhammer(a, n: int) -> Fraction:
    if n < 0:
        raise ValueError("Pochhammer length must be nonnegative")
    a = to_rational(a)
    out = Fraction(1)
    for i in range(n):
        out *= a + i
    return out


@dataclass(frozen=True)
class RacahParams:
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    delta: Fraction

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, to_rational(getattr(self, name)))

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return self.alpha, self.beta, self.gamma, self.delta

    def terminates_at(self, N: int) -> bool:
        return self.gamma == -N - 1

    def to_json_obj(self) -> dict:
        return {k: format_rational(v) for k, v in zip(("alpha", "beta", "gamma", "delta"), self.as_tuple())}


def _as_params(p) -> RacahParams:
    return p if isinstance(p, RacahParams) else RacahParams(*p)


def racah_univariate(n: int, params, x) -> Fraction:
    """``r_n(alpha, beta, gamma, delta; x)`` with the prefactor cleared into each term.

    Term ``i`` of the 4F3 series carries ``(a+i)_{n-i}`` in place of
    ``(a)_n / (a)_i`` for each lower parameter a, so the value is a
    polynomial in the parameters and in x and never divides by zero.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    a, b, g, d = _as_params(params).as_tuple()
    x = to_rational(x)
    lows = (a + 1, b + d + 1, g + 1)
    total = Fraction(0)
    for i in range(n + 1):
        up = pochhammer(-n, i) * pochhammer(n + a + b + 1, i) * pochhammer(-x, i) * pochhammer(x + g + d + 1, i)
        if up == 0:
            continue
        rest = Fraction(1)
        for lo in lows:
            rest *= pochhammer(lo + i, n - i)
        total += up * rest / factorial(i)
    return total


def racah_hypergeometric(n: int, params, x) -> Fraction:
    """The same value as the literal prefactor times the terminating 4F3.

    Raises DivisionByZero when a lower Pochhammer symbol vanishes at a
    term whose numerator does not.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    a, b, g, d = _as_params(params).as_tuple()
    x = to_rational(x)
    lows = (a + 1, b + d + 1, g + 1)
    pref = Fraction(1)
    for lo in lows:
        pref *= pochhammer(lo, n)
    series = Fraction(0)
    for i in range(n + 1):
        up = pochhammer(-n, i) * pochhammer(n + a + b + 1, i) * pochhammer(-x, i) * pochhammer(x + g + d + 1, i)
        if up == 0:
            continue
        den = factorial(i)
        for lo in lows:
            den *= pochhammer(lo, i)
        if den == 0:
            raise DivisionByZero(f"lower Pochhammer vanishes at term {i} of r_{n} with parameters {(a, b, g, d)}")
        series += up / den
    return pref * series


@dataclass(frozen=True)
class BetaLadder:
    """Ladder beta_0 < ... < beta_{n-1} and the grid size N.

    Site i carries the parameter e_i with ``C_i = kappa(0, e_i)``;
    ``e_1 = beta_0`` and ``e_{i+1} = beta_i - beta_{i-1} - 1``.
    """

    betas: tuple
    N: int

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(to_rational(b) for b in self.betas))
        if len(self.betas) < 3:
            raise ValueError("a ladder needs n >= 3 values")
        if self.N < 0:
            raise ValueError("N must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.betas)

    @classmethod
    def from_nu(cls, nus: Sequence, N: int) -> "BetaLadder":
        """bg sites: ``C_i = nu_i(nu_i-1) = kappa(0, 2 nu_i - 1)``; the positive root is taken."""
        nus = [to_rational(v) for v in nus]
        out, acc = [], Fraction(0)
        for v in nus:
            acc += v
            out.append(2 * acc - 1)
        return cls(tuple(out), N)

    @classmethod
    def from_site_params(cls, es: Sequence, N: int) -> "BetaLadder":
        es = [to_rational(e) for e in es]
        out = [es[0]]
        for e in es[1:]:
            out.append(out[-1] + 1 + e)
        return cls(tuple(out), N)

    def site_params(self) -> tuple[Fraction, ...]:
        b = self.betas
        return (b[0],) + tuple(b[i] - b[i - 1] - 1 for i in range(1, len(b)))

    def beta_of(self, A: Iterable[int]) -> Fraction:
        """``beta_A`` with ``C_A`` having eigenvalues ``kappa(j, beta_A)``."""
        A = tuple(A)
        e = self.site_params()
        return sum((e[a - 1] for a in A), Fraction(0)) + len(A) - 1

    def eigenvalues(self, A: Iterable[int], top: int | None = None) -> list[Fraction]:
        top = self.N if top is None else top
        b = self.beta_of(A)
        return [kappa(j, b) for j in range(top + 1)]

    def collisions(self, A: Iterable[int]) -> list[tuple[int, int]]:
        vals = self.eigenvalues(A)
        return [(i, j) for i in range(len(vals)) for j in range(i + 1, len(vals)) if vals[i] == vals[j]]

    def to_json_obj(self) -> dict:
        return {"betas": [format_rational(b) for b in self.betas], "N": self.N}


def abs_partial(k: Sequence[int], j: int) -> int:
    """``|k|_j``: sum of the first j entries."""
    return sum(k[:j])


def tratnik_factor_params(k: Sequence[int], s: Sequence[int], ladder: BetaLadder, j: int) -> tuple[int, RacahParams, int]:
    """Degree, parameters and argument of the j-th univariate factor (j is 1-based)."""
    b = ladder.betas
    sj = list(s) + [ladder.N]  # s_{n-1} := N
    kk = abs_partial(k, j - 1)
    s_next = sj[j]
    params = RacahParams(2 * kk + b[j] - b[0] - 1, b[j + 1] - b[j] - 1, kk - s_next - 1, kk + b[j] + s_next)
    return k[j - 1], params, -kk + sj[j - 1]


def tratnik_multivariate(k: Sequence[int], s: Sequence[int], ladder: BetaLadder) -> Fraction:
    """Tratnik's product of coupled univariate Racah polynomials.

    ``k`` are the degrees, ``s`` the grid point (cumulative labels
    0 <= s_1 <= ... <= s_{n-2} <= N).
    """
    m = ladder.n - 2
    if len(k) != m or len(s) != m:
        raise ValueError(f"k and s need {m} entries")
    out = Fraction(1)
    for j in range(1, m + 1):
        deg, params, arg = tratnik_factor_params(k, s, ladder, j)
        out *= racah_univariate(deg, params, arg)
        if out == 0:
            break
    return out


def simplex_points(m: int, N: int) -> list[tuple[int, ...]]:
    """Nondecreasing integer tuples 0 <= x_1 <= ... <= x_m <= N, lexicographic."""
    out = []

    def rec(prefix, lo):
        if len(prefix) == m:
            out.append(tuple(prefix))
            return
        for v in range(lo, N + 1):
            rec(prefix + [v], v)

    rec([], 0)
    return out


def increments(labels: Sequence[int]) -> tuple[int, ...]:
    """Cumulative labels to degree vector: ``k_1 = j_1``, ``k_i = j_i - j_{i-1}``."""
    out, prev = [], 0
    for j in labels:
        out.append(j - prev)
        prev = j
    return tuple(out)


def cumulative(k: Sequence[int]) -> tuple[int, ...]:
    out, acc = [], 0
    for v in k:
        acc += v
        out.append(acc)
    return tuple(out)
