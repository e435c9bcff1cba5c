"""Exact rational matrices.

Entries are kept as an integer numerator array with one shared positive
denominator, so products run on Python ints instead of ``Fraction``
objects.  Elimination is fraction-free (Bareiss).
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Rational = Fraction


class LinalgError(ValueError):
    pass


class DimensionMismatch(LinalgError):
    pass


class NonCommuting(LinalgError):
    pass


class IncompleteSpectrum(LinalgError):
    pass


def to_rational(value) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings.  Floats are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise ValueError(f"not an exact rational: {value!r}")
        return Fraction(text)
    if isinstance(value, float):
        raise TypeError(f"floats are not exact: {value!r}")
    return Fraction(value)


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _lcm_all(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


class Matrix:
    """Immutable exact rational matrix."""

    __slots__ = ("rows", "cols", "_num", "_den", "_hash")

    def __init__(self, rows: int, cols: int, num: np.ndarray, den: int = 1):
        if num.shape != (rows, cols):
            raise DimensionMismatch(f"entry array shape {num.shape} != {(rows, cols)}")
        if den <= 0:
            raise ValueError("denominator must be positive")
        g = den
        if g != 1:
            for v in num.flat:
                g = math.gcd(g, v)
                if g == 1:
                    break
            if g != 1:
                num = num // g
                den //= g
        self.rows = rows
        self.cols = cols
        self._num = num
        self._den = den
        self._hash = None

    # construction ------------------------------------------------------
    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "Matrix":
        data = [[to_rational(v) for v in row] for row in rows]
        r = len(data)
        c = len(data[0]) if r else 0
        if any(len(row) != c for row in data):
            raise DimensionMismatch("ragged rows")
        return cls._from_fractions(r, c, [v for row in data for v in row])

    @classmethod
    def _from_fractions(cls, r: int, c: int, flat: Sequence[Fraction]) -> "Matrix":
        den = _lcm_all(v.denominator for v in flat)
        num = np.empty((r, c), dtype=object)
        for idx, v in enumerate(flat):
            num[idx // c if c else 0, idx % c if c else 0] = v.numerator * (den // v.denominator)
        return cls(r, c, num, den)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence]) -> "Matrix":
        return cls.from_rows(list(zip(*columns))) if columns else cls.zeros(0, 0)

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "Matrix":
        cols = rows if cols is None else cols
        num = np.empty((rows, cols), dtype=object)
        num.fill(0)
        return cls(rows, cols, num, 1)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls.scalar(n, 1)

    @classmethod
    def scalar(cls, n: int, value) -> "Matrix":
        q = to_rational(value)
        num = np.empty((n, n), dtype=object)
        num.fill(0)
        for i in range(n):
            num[i, i] = q.numerator
        return cls(n, n, num, q.denominator)

    @classmethod
    def diag(cls, values: Sequence) -> "Matrix":
        vals = [to_rational(v) for v in values]
        n = len(vals)
        flat = [Fraction(0)] * (n * n)
        for i, v in enumerate(vals):
            flat[i * n + i] = v
        return cls._from_fractions(n, n, flat)

    # access ------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, idx) -> Fraction:
        i, j = idx
        return Fraction(self._num[i, j], self._den)

    def entries(self) -> list[Fraction]:
        return [Fraction(v, self._den) for v in self._num.flat]

    def tolist(self) -> list[list[Fraction]]:
        return [[Fraction(v, self._den) for v in row] for row in self._num]

    def column(self, j: int) -> list[Fraction]:
        return [Fraction(v, self._den) for v in self._num[:, j]]

    def row(self, i: int) -> list[Fraction]:
        return [Fraction(v, self._den) for v in self._num[i, :]]

    def is_zero(self) -> bool:
        return not any(self._num.flat)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_diagonal(self) -> bool:
        return all(self._num[i, j] == 0 for i in range(self.rows) for j in range(self.cols) if i != j)

    # arithmetic --------------------------------------------------------
    def _check_same(self, other: "Matrix") -> None:
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} vs {other.shape}")

    def __add__(self, other):
        if not isinstance(other, Matrix):
            if other == 0:
                return self
            return self + Matrix.scalar(self.rows, other)
        self._check_same(other)
        den = self._den * other._den // math.gcd(self._den, other._den)
        num = self._num * (den // self._den) + other._num * (den // other._den)
        return Matrix(self.rows, self.cols, num, den)

    __radd__ = __add__

    def __neg__(self):
        return Matrix(self.rows, self.cols, -self._num, self._den)

    def __sub__(self, other):
        if not isinstance(other, Matrix):
            return self + (-to_rational(other))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Matrix":
        q = to_rational(c)
        return Matrix(self.rows, self.cols, self._num * q.numerator, self._den * q.denominator)

    def __mul__(self, other):
        if isinstance(other, Matrix):
            return self.matmul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __matmul__(self, other):
        return self.matmul(other)

    def matmul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        if self.cols == 0:
            return Matrix.zeros(self.rows, other.cols)
        return Matrix(self.rows, other.cols, self._num.dot(other._num), self._den * other._den)

    def transpose(self) -> "Matrix":
        return Matrix(self.cols, self.rows, self._num.T.copy(), self._den)

    @property
    def T(self) -> "Matrix":
        return self.transpose()

    def apply(self, vector: Sequence) -> list[Fraction]:
        vec = [to_rational(v) for v in vector]
        if len(vec) != self.cols:
            raise DimensionMismatch("vector length")
        return [
            sum((Fraction(self._num[i, j]) * vec[j] for j in range(self.cols) if self._num[i, j]), Fraction(0))
            / self._den
            for i in range(self.rows)
        ]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        num = self._num[np.ix_(list(rows), list(cols))]
        return Matrix(len(rows), len(cols), num.copy(), self._den)

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise DimensionMismatch("row counts differ")
        den = self._den * other._den // math.gcd(self._den, other._den)
        num = np.hstack([self._num * (den // self._den), other._num * (den // other._den)])
        return Matrix(self.rows, self.cols + other.cols, num, den)

    def vectorize(self) -> list[Fraction]:
        return self.entries()

    # comparison --------------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and self._den == other._den
            and bool(np.array_equal(self._num, other._num))
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self._den, tuple(self._num.flat)))
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(format_rational(v) for v in row) for row in self.tolist())
        return f"Matrix({self.rows}x{self.cols}: [{body}])"

    # serialization -----------------------------------------------------
    def to_json_obj(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [format_rational(v) for v in self.entries()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Matrix":
        r, c = int(obj["rows"]), int(obj["cols"])
        entries = [to_rational(v) for v in obj["entries"]]
        if len(entries) != r * c:
            raise DimensionMismatch(f"expected {r * c} entries, got {len(entries)}")
        return cls._from_fractions(r, c, entries)

    @classmethod
    def from_json(cls, text: str) -> "Matrix":
        return cls.from_json_obj(json.loads(text))


def mat_commutator(a: Matrix, b: Matrix) -> Matrix:
    """Return ``ab - ba``."""
    if not (a.is_square() and b.is_square()) or a.shape != b.shape:
        raise DimensionMismatch(f"commutator needs equal square matrices, got {a.shape}, {b.shape}")
    return a.matmul(b) - b.matmul(a)


# elimination -----------------------------------------------------------

def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        den = _lcm_all(Fraction(v).denominator for v in row) if row else 1
        out.append([int(Fraction(v) * den) for v in row])
    return out


def bareiss_echelon(rows: list[list[int]]) -> tuple[list[list[int]], list[int]]:
    """Fraction-free forward elimination.

    Works in place on integer rows; returns the echelon rows (zero rows
    dropped) and the pivot columns.
    """
    m = len(rows)
    ncols = len(rows[0]) if m else 0
    prev = 1
    r = 0
    pivots = []
    for c in range(ncols):
        if r >= m:
            break
        p = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if p is None:
            continue
        if p != r:
            rows[r], rows[p] = rows[p], rows[r]
        piv = rows[r][c]
        prow = rows[r]
        for i in range(r + 1, m):
            row = rows[i]
            f = row[c]
            rows[i] = [(piv * row[j] - f * prow[j]) // prev for j in range(ncols)]
        prev = piv
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def _normalize_vector(vec: list[Fraction]) -> list[Fraction]:
    lead = next((v for v in vec if v != 0), None)
    if lead is None or lead == 1:
        return vec
    return [v / lead for v in vec]


def _back_substitute_kernel(echelon: list[list[int]], pivots: list[int], ncols: int) -> list[list[Fraction]]:
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for r in range(len(pivots) - 1, -1, -1):
            pc = pivots[r]
            row = echelon[r]
            s = sum((row[j] * x[j] for j in range(pc + 1, ncols) if row[j] and x[j]), Fraction(0))
            x[pc] = -s / row[pc]
        basis.append(x)
    return basis


def nullspace(a: Matrix) -> list[list[Fraction]]:
    """Basis of ``{v : a v = 0}``; each vector has first nonzero entry 1."""
    if a.rows == 0:
        return [_normalize_vector([Fraction(int(i == j)) for j in range(a.cols)]) for i in range(a.cols)]
    rows = [list(r) for r in a._num.tolist()]
    echelon, pivots = bareiss_echelon(rows)
    basis = _back_substitute_kernel(echelon, pivots, a.cols)
    out = [_normalize_vector(v) for v in basis]
    # Lexicographic leading-entry order keeps output deterministic.
    out.sort(key=lambda v: next(i for i, x in enumerate(v) if x != 0))
    return out


def rank(a: Matrix) -> int:
    if a.rows == 0 or a.cols == 0:
        return 0
    rows = [list(r) for r in a._num.tolist()]
    _, pivots = bareiss_echelon(rows)
    return len(pivots)


def rank_of_vectors(vectors: Sequence[Sequence]) -> int:
    if not vectors:
        return 0
    return rank(Matrix.from_rows(vectors))


def solve(a: Matrix, b: Matrix) -> Matrix:
    """Solve ``a X = b`` for square invertible ``a``."""
    if not a.is_square() or a.rows != b.rows:
        raise DimensionMismatch("solve needs square a with matching b")
    n = a.rows
    aug = a.hstack(b)
    rows = [list(r) for r in aug._num.tolist()]
    echelon, pivots = bareiss_echelon(rows)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise LinalgError("matrix is singular")
    m = b.cols
    sol = [[Fraction(0)] * m for _ in range(n)]
    for col in range(m):
        for r in range(n - 1, -1, -1):
            row = echelon[r]
            s = Fraction(row[n + col])
            for j in range(r + 1, n):
                if row[j]:
                    s -= row[j] * sol[j][col]
            sol[r][col] = s / row[r]
    return Matrix.from_rows(sol) if n else Matrix.zeros(0, m)


def inverse(a: Matrix) -> Matrix:
    return solve(a, Matrix.identity(a.rows))


# simultaneous eigenspaces ---------------------------------------------

class EigenDecomposition:
    """Blocks of (eigenvalue tuple, basis vectors)."""

    def __init__(self, blocks: list[tuple[tuple[Fraction, ...], list[list[Fraction]]]]):
        self.blocks = blocks

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self):
        return len(self.blocks)

    @property
    def dimension(self) -> int:
        return sum(len(vs) for _, vs in self.blocks)

    def eigenvalues(self) -> list[tuple[Fraction, ...]]:
        return [lam for lam, _ in self.blocks]


def _eigen_split(op: Matrix, basis: list[list[Fraction]], lam: Fraction) -> list[list[Fraction]]:
    """Vectors of span(basis) annihilated by ``op - lam``."""
    dim = op.rows
    if not basis:
        return []
    bmat = Matrix.from_columns(basis)
    shifted = op.matmul(bmat) - bmat.scale(lam)
    coeffs = nullspace(shifted)
    out = []
    for c in coeffs:
        v = [sum((basis[t][i] * c[t] for t in range(len(basis)) if c[t]), Fraction(0)) for i in range(dim)]
        out.append(_normalize_vector(v))
    return out


def simultaneous_eigenbasis(
    ops: Sequence[Matrix],
    expected_eigenvalues: Sequence[Sequence],
    check_commuting: bool = True,
) -> EigenDecomposition:
    """Split the space into joint eigenspaces of commuting ``ops``.

    ``expected_eigenvalues[i]`` lists the candidate eigenvalues of
    ``ops[i]`` in the order the blocks should be reported.
    """
    if len(ops) != len(expected_eigenvalues):
        raise ValueError("one eigenvalue list per operator is required")
    if not ops:
        raise ValueError("no operators given")
    dim = ops[0].rows
    for op in ops:
        if op.shape != (dim, dim):
            raise DimensionMismatch("operators must be square of equal size")
    if check_commuting:
        for i in range(len(ops)):
            for j in range(i + 1, len(ops)):
                if not mat_commutator(ops[i], ops[j]).is_zero():
                    raise NonCommuting(f"operators {i} and {j} do not commute")
    lists = []
    for i, vals in enumerate(expected_eigenvalues):
        vals = [to_rational(v) for v in vals]
        if len(set(vals)) != len(vals):
            raise IncompleteSpectrum(f"coinciding expected eigenvalues for operator {i}: {vals}")
        lists.append(vals)

    start = [[Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]
    blocks: list[tuple[tuple[Fraction, ...], list[list[Fraction]]]] = []

    def recurse(level: int, basis: list[list[Fraction]], prefix: tuple):
        if level == len(ops):
            blocks.append((prefix, basis))
            return
        found = 0
        for lam in lists[level]:
            sub = _eigen_split(ops[level], basis, lam)
            if sub:
                found += len(sub)
                recurse(level + 1, sub, prefix + (lam,))
        if found != len(basis):
            raise IncompleteSpectrum(
                f"operator {level}: supplied eigenvalues cover {found} of {len(basis)} dimensions"
            )

    recurse(0, start, ())
    return EigenDecomposition(blocks)
