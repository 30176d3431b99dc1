"""Exact exterior algebra over R^n for small n.

Multivectors and covectors of grade k are stored densely over the
lexicographically ordered increasing k-subsets of {1, ..., n}.  Simple
multivectors may carry a witness factorization v1 ^ ... ^ vk, which is what
makes the mass norm computable.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

MAX_DIM = 8


class ExteriorError(ValueError):
    pass


def basis_subsets(n: int, k: int) -> list[tuple[int, ...]]:
    """Increasing k-subsets of {1..n} in lexicographic order."""
    return list(itertools.combinations(range(1, n + 1), k))


def subset_index(n: int, indices: tuple[int, ...]) -> int:
    return basis_subsets(n, len(indices)).index(tuple(indices))


def canonicalize(indices) -> tuple[tuple[int, ...], int]:
    """Sort an index tuple, returning (sorted tuple, sign).

    Repeated indices give sign 0.
    """
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return tuple(sorted(idx)), 0
    sign = 1
    # insertion sort, counting swaps
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return tuple(idx), sign


def merge_sign(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    """Merge two increasing disjoint tuples; sign of the shuffle permutation."""
    merged, sign = canonicalize(a + b)
    if sign == 0:
        return merged, 0
    return merged, sign


class _Graded:
    """Shared storage and linear structure for multivectors and covectors."""

    __slots__ = ("dimension", "grade", "coefficients", "witness", "overflowed")

    def __init__(self, dimension, grade, coefficients=None, witness=None):
        if not (1 <= dimension <= MAX_DIM):
            raise ExteriorError(f"dimension must be in [1, {MAX_DIM}], got {dimension}")
        if not (0 <= grade <= dimension):
            raise ExteriorError(f"grade must be in [0, {dimension}], got {grade}")
        size = math.comb(dimension, grade)
        if coefficients is None:
            coefficients = np.zeros(size)
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.shape != (size,):
            raise ExteriorError(
                f"expected {size} coefficients for grade {grade} in dimension {dimension}, "
                f"got shape {coefficients.shape}"
            )
        self.dimension = dimension
        self.grade = grade
        self.coefficients = coefficients
        self.witness = None if witness is None else [np.asarray(v, dtype=float) for v in witness]
        self.overflowed = False

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, dimension, grade):
        return cls(dimension, grade)

    @classmethod
    def basis(cls, dimension, indices):
        """Basis element e_{i1} ^ ... ^ e_{ik} from an arbitrary index tuple."""
        if isinstance(indices, int):
            indices = (indices,)
        for i in indices:
            if not (1 <= i <= dimension):
                raise ExteriorError(f"basis index {i} out of range 1..{dimension}")
        sorted_idx, sign = canonicalize(indices)
        out = cls(dimension, len(indices))
        if sign != 0:
            out.coefficients[subset_index(dimension, sorted_idx)] = sign
            out.witness = [np.eye(dimension)[i - 1] * (sign if a == 0 else 1)
                           for a, i in enumerate(sorted_idx)]
        return out

    @classmethod
    def from_vectors(cls, vectors):
        """Simple element v1 ^ ... ^ vk with the factorization kept as witness."""
        vectors = [np.asarray(v, dtype=float) for v in vectors]
        if not vectors:
            raise ExteriorError("from_vectors needs at least one vector")
        n = vectors[0].shape[0]
        out = cls(n, 0, np.array([1.0]))
        for v in vectors:
            out = wedge(out, cls(n, 1, v))
        out.witness = vectors
        return out

    @classmethod
    def scalar(cls, dimension, value):
        return cls(dimension, 0, np.array([float(value)]))

    # -- linear structure ---------------------------------------------------

    def _check_like(self, other):
        if self.dimension != other.dimension or self.grade != other.grade:
            raise ExteriorError(
                f"grade/dimension mismatch: ({self.dimension},{self.grade}) vs "
                f"({other.dimension},{other.grade})"
            )

    def __add__(self, other):
        self._check_like(other)
        return type(self)(self.dimension, self.grade, self.coefficients + other.coefficients)

    def __sub__(self, other):
        self._check_like(other)
        return type(self)(self.dimension, self.grade, self.coefficients - other.coefficients)

    def __neg__(self):
        out = type(self)(self.dimension, self.grade, -self.coefficients)
        if self.witness is not None:
            out.witness = [-self.witness[0]] + [v.copy() for v in self.witness[1:]]
        return out

    def __mul__(self, c):
        out = type(self)(self.dimension, self.grade, self.coefficients * float(c))
        if self.witness is not None:
            out.witness = [self.witness[0] * float(c)] + [v.copy() for v in self.witness[1:]]
        return out

    __rmul__ = __mul__

    def norm(self) -> float:
        """Euclidean norm of the coefficient array."""
        return float(np.linalg.norm(self.coefficients))

    def is_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coefficients) <= tol))

    def __repr__(self):
        name = type(self).__name__
        parts = []
        for idx, c in zip(basis_subsets(self.dimension, self.grade), self.coefficients):
            if c != 0.0:
                parts.append(f"{c:+g}*e{''.join(map(str, idx))}")
        body = " ".join(parts) if parts else "0"
        return f"{name}({self.dimension},{self.grade}: {body})"


class MultiVector(_Graded):
    """Element of Lambda_k R^n."""


class CoVector(_Graded):
    """Element of Lambda^k R^n (same canonical basis conventions)."""


def wedge(a, b):
    """Exterior product of two elements of the same kind and dimension.

    Grade overflow (j + k > n) returns the zero element of grade n with the
    ``overflowed`` flag set instead of raising.
    """
    if type(a) is not type(b):
        raise ExteriorError("wedge requires two multivectors or two covectors")
    if a.dimension != b.dimension:
        raise ExteriorError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    n = a.dimension
    if a.grade + b.grade > n:
        out = type(a).zero(n, n)
        out.overflowed = True
        return out
    out = type(a).zero(n, a.grade + b.grade)
    subs_a = basis_subsets(n, a.grade)
    subs_b = basis_subsets(n, b.grade)
    subs_out = {s: i for i, s in enumerate(basis_subsets(n, a.grade + b.grade))}
    for ia, I in enumerate(subs_a):
        ca = a.coefficients[ia]
        if ca == 0.0:
            continue
        for ib, J in enumerate(subs_b):
            cb = b.coefficients[ib]
            if cb == 0.0:
                continue
            merged, sign = merge_sign(I, J)
            if sign == 0:
                continue
            out.coefficients[subs_out[merged]] += sign * ca * cb
    if a.witness is not None and b.witness is not None:
        out.witness = [v.copy() for v in a.witness] + [v.copy() for v in b.witness]
    return out


def pair(t: MultiVector, w: CoVector) -> float:
    """Duality pairing; Kronecker delta on matching basis index sets."""
    if not isinstance(t, MultiVector) or not isinstance(w, CoVector):
        raise ExteriorError("pair expects (MultiVector, CoVector)")
    if t.dimension != w.dimension or t.grade != w.grade:
        raise ExteriorError(
            f"grade/dimension mismatch in pairing: ({t.dimension},{t.grade}) vs "
            f"({w.dimension},{w.grade})"
        )
    return float(np.dot(t.coefficients, w.coefficients))


def push_linear(A: np.ndarray, t: MultiVector) -> MultiVector:
    """Pushforward of a k-vector under a linear map, Lambda^k A.

    Coefficients of the image are k x k minors of A (Cauchy-Binet).
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ExteriorError("A must be a 2-d matrix")
    m, n = A.shape
    if n != t.dimension:
        raise ExteriorError(f"matrix has {n} columns, multivector lives in R^{t.dimension}")
    k = t.grade
    if k > min(n, m):
        raise ExteriorError(f"grade {k} exceeds min dimension {min(n, m)}")
    if k == 0:
        return MultiVector(m, 0, t.coefficients.copy())
    subs_in = basis_subsets(n, k)
    subs_out = basis_subsets(m, k)
    out = MultiVector.zero(m, k)
    for io, J in enumerate(subs_out):
        rows = [j - 1 for j in J]
        acc = 0.0
        for ii, I in enumerate(subs_in):
            c = t.coefficients[ii]
            if c == 0.0:
                continue
            cols = [i - 1 for i in I]
            acc += c * float(np.linalg.det(A[np.ix_(rows, cols)]))
        out.coefficients[io] = acc
    if t.witness is not None:
        out.witness = [A @ v for v in t.witness]
    return out


def simple_mass(t: MultiVector) -> float:
    """Mass norm sqrt(det Gram(v1..vk)) of a simple multivector.

    Requires a stored witness except in the unambiguous grades 0, 1 and n.
    """
    k = t.grade
    if t.witness is not None:
        V = np.array(t.witness)
        gram = V @ V.T
        return float(math.sqrt(max(np.linalg.det(gram), 0.0)))
    if k == 0 or k == 1 or k == t.dimension:
        return t.norm()
    raise ExteriorError("mass undefined without simple witness")
