"""Normally ordered operators in ``x_i``, ``d_i``, ``R_i`` and ``E_i``.

Every term is stored as ``x^a d^b R^r E^e`` (per variable, in that order)
with a rational coefficient:

* ``x`` exponents may be negative (Laurent coefficients),
* ``R_i`` is the reflection ``x_i -> -x_i`` and ``R_i^2 = 1``,
* ``E_i^e`` is the shift ``x_i -> x_i + e``.

Variables are indexed from 0.  Factors acting on different variables
commute, so a product factorizes into one-variable products.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Mapping, Sequence

from .linalg import Matrix, format_rational, to_rational

IDENT1 = (0, 0, 0, 0)


class OperatorError(ValueError):
    pass


class NotInvariant(OperatorError):
    pass


class NonPolynomialResult(OperatorError):
    pass


class PoleAtPoint(OperatorError):
    pass


class UnsupportedReordering(OperatorError):
    """A negative power of ``x_i`` would have to move past ``E_i``."""


def _falling(m: int, j: int) -> int:
    out = 1
    for t in range(j):
        out *= m - t
    return out


@lru_cache(maxsize=None)
def _mul1(left: tuple, right: tuple) -> tuple:
    """Product of two one-variable normal words, as ((a,b,r,e), coeff) pairs."""
    a, b, r, e = left
    c, d, s, f = right
    # (R^r E^e) x^c
    if e == 0 or c == 0:
        moved = [(c, (-1) ** (r * (c % 2)))]
    elif c < 0:
        raise UnsupportedReordering("cannot move x^%d past E^%d" % (c, e))
    else:
        moved = [(m, comb(c, m) * e ** (c - m) * (-1) ** (r * (m % 2))) for m in range(c + 1)]
    sign_d = (-1) ** (r * (d % 2))
    r_new = (r + s) % 2
    e_new = (e if s == 0 else -e) + f
    out: dict[tuple, int] = {}
    for m, cm in moved:
        if cm == 0:
            continue
        for j in range(b + 1):
            fall = _falling(m, j)
            if fall == 0:
                continue
            coeff = cm * comb(b, j) * fall * sign_d
            key = (a + m - j, b - j + d, r_new, e_new)
            out[key] = out.get(key, 0) + coeff
    return tuple((k, v) for k, v in out.items() if v != 0)


@lru_cache(maxsize=None)
def _apply1(term: tuple, m: int) -> tuple:
    """Apply a one-variable normal word to the monomial ``x^m``."""
    return tuple(
        (key[0], coeff) for key, coeff in _mul1(term, (m, 0, 0, 0)) if key[1] == 0
    )


class OperatorExpr:
    """Immutable, canonical operator expression on ``nvars`` variables."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple, Fraction] | None = None):
        self.nvars = nvars
        clean = {}
        if terms:
            for key, c in terms.items():
                if c:
                    if len(key) != nvars:
                        raise OperatorError("term arity does not match variable count")
                    clean[key] = Fraction(c)
        self.terms = clean
        self._hash = None

    # constructors ------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "OperatorExpr":
        return cls(nvars)

    @classmethod
    def scalar(cls, nvars: int, value) -> "OperatorExpr":
        return cls(nvars, {(IDENT1,) * nvars: to_rational(value)})

    @classmethod
    def one(cls, nvars: int) -> "OperatorExpr":
        return cls.scalar(nvars, 1)

    @classmethod
    def _single(cls, nvars: int, i: int, factor: tuple, coeff=1) -> "OperatorExpr":
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} outside 0..{nvars - 1}")
        key = [IDENT1] * nvars
        key[i] = factor
        return cls(nvars, {tuple(key): to_rational(coeff)})

    @classmethod
    def x(cls, nvars: int, i: int, power: int = 1) -> "OperatorExpr":
        return cls._single(nvars, i, (power, 0, 0, 0))

    @classmethod
    def d(cls, nvars: int, i: int, power: int = 1) -> "OperatorExpr":
        if power < 0:
            raise ValueError("derivative powers are nonnegative")
        return cls._single(nvars, i, (0, power, 0, 0))

    @classmethod
    def refl(cls, nvars: int, i: int) -> "OperatorExpr":
        return cls._single(nvars, i, (0, 0, 1, 0))

    @classmethod
    def shift(cls, nvars: int, i: int, step: int = 1) -> "OperatorExpr":
        return cls._single(nvars, i, (0, 0, 0, step))

    @classmethod
    def monomial(cls, exponents: Sequence[int], coeff=1) -> "OperatorExpr":
        key = tuple((int(a), 0, 0, 0) for a in exponents)
        return cls(len(key), {key: to_rational(coeff)})

    # inspection --------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_scalar(self) -> bool:
        return all(all(f == IDENT1 for f in key) for key in self.terms)

    def scalar_value(self) -> Fraction:
        if not self.is_scalar():
            raise OperatorError("expression is not a scalar")
        return next(iter(self.terms.values()), Fraction(0))

    def is_multiplication(self) -> bool:
        """True when no derivative, reflection or shift occurs."""
        return all(all(f[1:] == (0, 0, 0) for f in key) for key in self.terms)

    def __len__(self):
        return len(self.terms)

    def sorted_terms(self) -> list[tuple[tuple, Fraction]]:
        return sorted(self.terms.items(), key=lambda kv: _order_key(kv[0]))

    # arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "OperatorExpr":
        if isinstance(other, OperatorExpr):
            if other.nvars != self.nvars:
                raise OperatorError(f"variable counts differ: {self.nvars} vs {other.nvars}")
            return other
        return OperatorExpr.scalar(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return OperatorExpr(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return OperatorExpr(self.nvars, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "OperatorExpr":
        q = to_rational(c)
        if q == 0:
            return OperatorExpr(self.nvars)
        return OperatorExpr(self.nvars, {k: v * q for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, OperatorExpr):
            return op_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, p: int):
        if p < 0:
            raise ValueError("negative operator powers are not supported")
        out = OperatorExpr.one(self.nvars)
        for _ in range(p):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, OperatorExpr):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == OperatorExpr.scalar(self.nvars, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    # variable handling -------------------------------------------------
    def embed(self, nvars: int, positions: Sequence[int]) -> "OperatorExpr":
        """Place variable ``i`` of this expression at ``positions[i]``."""
        if len(positions) != self.nvars:
            raise OperatorError("one target position per variable is required")
        out = {}
        for key, c in self.terms.items():
            new = [IDENT1] * nvars
            for i, f in enumerate(key):
                new[positions[i]] = f
            out[tuple(new)] = c
        return OperatorExpr(nvars, out)

    def substitute(self, x_images: Sequence["OperatorExpr"], d_images: Sequence["OperatorExpr"]) -> "OperatorExpr":
        """Image under the algebra map sending ``x_i``, ``d_i`` to the given operators.

        Only defined for expressions without reflections, shifts or
        negative powers.
        """
        if not x_images:
            raise OperatorError("no images given")
        target = x_images[0].nvars
        out = OperatorExpr(target)
        cache_x: dict[tuple[int, int], OperatorExpr] = {}
        cache_d: dict[tuple[int, int], OperatorExpr] = {}

        def power(cache, images, i, p):
            if (i, p) not in cache:
                cache[(i, p)] = images[i] ** p
            return cache[(i, p)]

        for key, c in self.sorted_terms():
            prod = OperatorExpr.scalar(target, c)
            for i, (a, b, r, e) in enumerate(key):
                if r or e or a < 0:
                    raise OperatorError("substitution needs polynomial differential operators")
                if a:
                    prod = prod * power(cache_x, x_images, i, a)
            for i, (a, b, r, e) in enumerate(key):
                if b:
                    prod = prod * power(cache_d, d_images, i, b)
            out = out + prod
        return out

    # action on functions -----------------------------------------------
    def apply(self, poly: Mapping[tuple, Fraction]) -> dict[tuple, Fraction]:
        """Apply to a Laurent polynomial given as ``{exponents: coeff}``."""
        out: dict[tuple, Fraction] = {}
        for key, c in self.terms.items():
            for mono, pc in poly.items():
                pieces = [_apply1(f, m) for f, m in zip(key, mono)]
                if any(not p for p in pieces):
                    continue
                base = c * pc
                for combo in itertools.product(*pieces):
                    exps = tuple(p[0] for p in combo)
                    coeff = base
                    for p in combo:
                        coeff *= p[1]
                    out[exps] = out.get(exps, 0) + coeff
        return {k: v for k, v in out.items() if v}

    # serialization -----------------------------------------------------
    def to_json_obj(self) -> list[dict]:
        out = []
        for key, c in self.sorted_terms():
            out.append(
                {
                    "x": [f[0] for f in key],
                    "d": [f[1] for f in key],
                    "r": [f[2] for f in key],
                    "e": [f[3] for f in key],
                    "c": format_rational(c),
                }
            )
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, terms: Sequence[Mapping], nvars: int | None = None) -> "OperatorExpr":
        if not terms:
            if nvars is None:
                raise OperatorError("empty term list needs an explicit variable count")
            return cls(nvars)
        out: dict[tuple, Fraction] = {}
        for t in terms:
            xs, ds, rs, es = t["x"], t["d"], t["r"], t["e"]
            if not len(xs) == len(ds) == len(rs) == len(es):
                raise OperatorError("term vectors have different lengths")
            if nvars is None:
                nvars = len(xs)
            if any(v < 0 for v in ds) or any(v not in (0, 1) for v in rs):
                raise OperatorError("derivative powers must be >= 0 and reflections 0/1")
            key = tuple(zip(xs, ds, rs, es))
            out[key] = out.get(key, 0) + to_rational(t["c"])
        return cls(nvars, out)

    @classmethod
    def from_json(cls, text: str, nvars: int | None = None) -> "OperatorExpr":
        return cls.from_json_obj(json.loads(text), nvars)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for key, c in self.sorted_terms():
            factors = []
            for i, (a, b, r, e) in enumerate(key):
                if a:
                    factors.append(f"x{i}" + (f"^{a}" if a != 1 else ""))
            for i, (a, b, r, e) in enumerate(key):
                if b:
                    factors.append(f"d{i}" + (f"^{b}" if b != 1 else ""))
            for i, (a, b, r, e) in enumerate(key):
                if r:
                    factors.append(f"R{i}")
            for i, (a, b, r, e) in enumerate(key):
                if e:
                    factors.append(f"E{i}" + (f"^{e}" if e != 1 else ""))
            coeff = format_rational(c)
            parts.append(coeff if not factors else f"{coeff}*" + "*".join(factors))
        return " + ".join(parts)


def _order_key(key: tuple) -> tuple:
    return (
        tuple(f[0] for f in key),
        tuple(f[1] for f in key),
        tuple(f[2] for f in key),
        tuple(f[3] for f in key),
    )


def op_mul(a: OperatorExpr, b: OperatorExpr) -> OperatorExpr:
    if a.nvars != b.nvars:
        raise OperatorError(f"variable counts differ: {a.nvars} vs {b.nvars}")
    out: dict[tuple, Fraction] = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            pieces = []
            for fa, fb in zip(ka, kb):
                if fb == IDENT1:
                    pieces.append(((fa, 1),))
                elif fa == IDENT1:
                    pieces.append(((fb, 1),))
                else:
                    p = _mul1(fa, fb)
                    if not p:
                        break
                    pieces.append(p)
            else:
                base = ca * cb
                for combo in itertools.product(*pieces):
                    key = tuple(p[0] for p in combo)
                    coeff = base
                    for p in combo:
                        if p[1] != 1:
                            coeff *= p[1]
                    out[key] = out.get(key, 0) + coeff
    return OperatorExpr(a.nvars, out)


def op_commutator(a: OperatorExpr, b: OperatorExpr) -> OperatorExpr:
    return op_mul(a, b) - op_mul(b, a)


# rewriting on raw words ---------------------------------------------------
#
# Letters: ("x", i, +1|-1), ("d", i), ("r", i), ("e", i, +1|-1).

_RANK = {"x": 0, "d": 1, "r": 2, "e": 3}


def _letter_key(letter: tuple) -> tuple:
    return (_RANK[letter[0]], letter[1])


def _rewrite_pair(left: tuple, right: tuple):
    """Rewrite ``left*right``; returns [(coeff, [letters])] or None if in order."""
    kl, il = left[0], left[1]
    kr, ir = right[0], right[1]
    if il != ir:
        if _letter_key(left) > _letter_key(right):
            return [(1, [right, left])]
        return None
    if kl == kr:
        if kl == "x" and left[2] == -right[2]:
            return [(1, [])]
        if kl == "r":
            return [(1, [])]
        if kl == "e" and left[2] == -right[2]:
            return [(1, [])]
        return None
    if _RANK[kl] < _RANK[kr]:
        return None
    if kl == "d":  # right is x
        if right[2] == 1:
            return [(1, [right, left]), (1, [])]
        return [(1, [right, left]), (-1, [right, right])]
    if kl == "r":  # right is x or d
        return [(-1, [right, left])]
    # kl == "e"
    if kr == "x":
        if right[2] == -1:
            raise UnsupportedReordering("cannot move x^-1 past a shift")
        return [(1, [right, left]), (left[2], [left])]
    if kr == "d":
        return [(1, [right, left])]
    return [(1, [right, ("e", il, -left[2])])]


def _word_to_key(word: Sequence[tuple], nvars: int) -> tuple:
    acc = [[0, 0, 0, 0] for _ in range(nvars)]
    for letter in word:
        kind, i = letter[0], letter[1]
        if kind == "x":
            acc[i][0] += letter[2]
        elif kind == "d":
            acc[i][1] += 1
        elif kind == "r":
            acc[i][2] ^= 1
        else:
            acc[i][3] += letter[2]
    return tuple(tuple(f) for f in acc)


def normal_order(
    words: Iterable[tuple[object, Sequence[tuple]]] | Sequence[tuple],
    nvars: int,
    rng: random.Random | None = None,
) -> OperatorExpr:
    """Normal-order raw words by literal application of the rewrite rules.

    ``words`` is either one word (a sequence of letters) or an iterable of
    ``(coeff, word)`` pairs.  With ``rng`` the redex is chosen at random,
    otherwise the leftmost one is rewritten.
    """
    words = list(words)
    if not words or isinstance(words[0][0], str):
        pending = {tuple(words): Fraction(1)}
    else:
        pending = {}
        for c, w in words:
            pending[tuple(w)] = pending.get(tuple(w), 0) + to_rational(c)
    for w in pending:
        for letter in w:
            if letter[0] not in _RANK or not 0 <= letter[1] < nvars:
                raise OperatorError(f"bad letter {letter!r}")
    done: dict[tuple, Fraction] = {}
    while pending:
        word, coeff = pending.popitem()
        if coeff == 0:
            continue
        redexes = []
        for p in range(len(word) - 1):
            rw = _rewrite_pair(word[p], word[p + 1])
            if rw is not None:
                redexes.append((p, rw))
                if rng is None:
                    break
        if not redexes:
            key = _word_to_key(word, nvars)
            done[key] = done.get(key, 0) + coeff
            continue
        p, rw = rng.choice(redexes) if rng is not None else redexes[0]
        for c, middle in rw:
            new = word[:p] + tuple(middle) + word[p + 2 :]
            pending[new] = pending.get(new, 0) + coeff * c
    return OperatorExpr(nvars, done)


# bases and matrices --------------------------------------------------------

def monomials(nvars: int, degree: int, homogeneous: bool = False) -> list[tuple[int, ...]]:
    """Exponent tuples of total degree <= degree (or == degree), lex ascending."""
    out = [
        e
        for e in itertools.product(range(degree + 1), repeat=nvars)
        if (sum(e) == degree if homogeneous else sum(e) <= degree)
    ]
    return sorted(out)


@dataclass(frozen=True)
class BasisSpec:
    """Ordered finite basis: monomials (``total``/``homogeneous``) or grid points."""

    nvars: int
    kind: str = "total"
    degree: int = 0
    points: tuple = ()

    def __post_init__(self):
        if self.kind not in ("total", "homogeneous", "grid"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.kind == "grid":
            pts = tuple(sorted(set(tuple(int(v) for v in p) for p in self.points)))
            if any(len(p) != self.nvars for p in pts):
                raise ValueError("grid point arity does not match variable count")
            object.__setattr__(self, "points", pts)

    def elements(self) -> list[tuple[int, ...]]:
        if self.kind == "grid":
            return list(self.points)
        return monomials(self.nvars, self.degree, self.kind == "homogeneous")

    def __len__(self):
        return len(self.elements())


def matrix_on_basis(op: OperatorExpr, basis: BasisSpec) -> Matrix:
    """Matrix whose column j holds the coordinates of ``op`` applied to element j."""
    if op.nvars != basis.nvars:
        raise OperatorError("operator and basis have different variable counts")
    elems = basis.elements()
    index = {e: i for i, e in enumerate(elems)}
    dim = len(elems)
    cols = []
    if basis.kind == "grid":
        for j, pt in enumerate(elems):
            cols.append(_grid_column(op, pt, index, dim))
    else:
        for j, mono in enumerate(elems):
            image = op.apply({mono: Fraction(1)})
            col = [Fraction(0)] * dim
            for exps, c in image.items():
                if any(a < 0 for a in exps):
                    raise NonPolynomialResult(f"image of x^{mono} has Laurent term x^{exps}")
                if exps not in index:
                    raise NotInvariant(f"image of x^{mono} leaves the span (x^{exps})")
                col[index[exps]] += c
            cols.append(col)
    return Matrix.from_columns(cols) if dim else Matrix.zeros(0, 0)


def _grid_column(op: OperatorExpr, pt: tuple, index: dict, dim: int) -> list[Fraction]:
    # (x^a E^e delta_pt)(q) = q^a delta_pt(q + e), nonzero at q = pt - e.
    col = [Fraction(0)] * dim
    for key, c in op.terms.items():
        if any(f[1] or f[2] for f in key):
            raise OperatorError("grid bases accept only multiplication and shift operators")
        q = tuple(p - f[3] for p, f in zip(pt, key))
        val = c
        for qi, f in zip(q, key):
            if f[0]:
                if qi == 0 and f[0] < 0:
                    raise PoleAtPoint(f"pole at grid point {q}")
                val *= Fraction(qi) ** f[0]
        if val == 0:
            continue
        if q not in index:
            raise NotInvariant(f"shift from {pt} reaches {q} outside the grid")
        col[index[q]] += val
    return col


def evaluate_poly(poly: Mapping[tuple, Fraction], point: Sequence) -> Fraction:
    pt = [to_rational(v) for v in point]
    total = Fraction(0)
    for exps, c in poly.items():
        val = Fraction(c)
        for v, a in zip(pt, exps):
            if a < 0 and v == 0:
                raise PoleAtPoint(f"negative power at zero coordinate {pt}")
            if a:
                val *= v ** a
        total += val
    return total


def apply_and_evaluate(op: OperatorExpr, f, point: Sequence) -> Fraction:
    """Exact value of ``(op f)(point)`` for a Laurent polynomial ``f``.

    ``f`` may be a ``{exponents: coeff}`` mapping or a multiplication-only
    OperatorExpr.
    """
    if isinstance(f, OperatorExpr):
        if not f.is_multiplication():
            raise OperatorError("function argument must be a multiplication operator")
        poly = {tuple(fac[0] for fac in key): c for key, c in f.terms.items()}
    else:
        poly = dict(f)
    if len(point) != op.nvars:
        raise OperatorError("point arity does not match variable count")
    pt = [to_rational(v) for v in point]
    for exps in poly:
        for v, a in zip(pt, exps):
            if a < 0 and v == 0:
                raise PoleAtPoint(f"test function has a pole at {pt}")
    return evaluate_poly(op.apply(poly), pt)
