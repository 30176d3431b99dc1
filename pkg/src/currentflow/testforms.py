"""Smooth compactly supported test forms with closed-form derivatives.

Every coefficient function is a finite sum of terms

    p(x) * (1 - s)^(-m) * exp(-1 / (1 - s)),      s = |x - c|^2 / r^2,

clamped to zero for s >= 1.  The class is closed under partial
differentiation, which is what keeps exterior derivatives and Lie
derivatives exact.  User-facing constructors only accept the m = 0 case
(polynomial times bump); the rational powers appear through derivatives.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .exterior import CoVector, basis_subsets, canonicalize, subset_index

# exp(-1/u) underflows to exactly 0.0 well before u reaches this cutoff,
# so the rational prefactors can never produce inf * 0.
_SUPPORT_CUTOFF = 1e-8


class Polynomial:
    """Multivariate polynomial as {exponent tuple: coefficient}."""

    def __init__(self, dimension: int, coeffs: dict | None = None):
        self.dimension = dimension
        self.coeffs = {}
        if coeffs:
            for expo, c in coeffs.items():
                expo = tuple(int(e) for e in expo)
                if len(expo) != dimension:
                    raise ValueError(f"exponent tuple {expo} has wrong length")
                if c != 0.0:
                    self.coeffs[expo] = self.coeffs.get(expo, 0.0) + float(c)

    @classmethod
    def constant(cls, dimension, value):
        return cls(dimension, {(0,) * dimension: value})

    def degree(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    def __add__(self, other):
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0.0) + c
        return Polynomial(self.dimension, out)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial(self.dimension, {e: c * other for e, c in self.coeffs.items()})
        out = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return Polynomial(self.dimension, out)

    __rmul__ = __mul__

    def partial(self, i: int):
        """d/dx_i, with i in 1..d."""
        out = {}
        for e, c in self.coeffs.items():
            if e[i - 1] > 0:
                de = list(e)
                de[i - 1] -= 1
                out[tuple(de)] = out.get(tuple(de), 0.0) + c * e[i - 1]
        return Polynomial(self.dimension, out)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        pts = X.reshape(-1, self.dimension)
        vals = np.zeros(pts.shape[0])
        for e, c in self.coeffs.items():
            term = np.full(pts.shape[0], c)
            for i, p in enumerate(e):
                if p:
                    term = term * pts[:, i] ** p
            vals += term
        return vals[0] if single else vals.reshape(X.shape[:-1])


@dataclass(frozen=True)
class Bump:
    """Radial profile exp(-1/(1 - |z|^2)) on the unit ball of z = (x-c)/r."""

    center: tuple
    radius: float

    def u(self, X):
        """1 - s with s = |z|^2, negative outside the support ball."""
        Z = (np.asarray(X, dtype=float) - np.asarray(self.center)) / self.radius
        return 1.0 - np.sum(Z * Z, axis=-1)


class CoefficientFn:
    """Sum of p(x) * (1-s)^(-m) * exp(-1/(1-s)) terms sharing one bump."""

    def __init__(self, bump: Bump, terms: list[tuple[Polynomial, int]]):
        self.bump = bump
        self.terms = [(p, int(m)) for p, m in terms if p.coeffs]

    @classmethod
    def poly_bump(cls, bump: Bump, poly: Polynomial):
        if poly.degree() > 3:
            raise ValueError("coefficient polynomials are capped at degree 3")
        return cls(bump, [(poly, 0)])

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        pts = X.reshape(-1, len(self.bump.center))
        u = self.bump.u(pts)
        inside = u > _SUPPORT_CUTOFF
        vals = np.zeros(pts.shape[0])
        if np.any(inside):
            ui = u[inside]
            envelope = np.exp(-1.0 / ui)
            acc = np.zeros(ui.shape)
            for p, m in self.terms:
                acc += p(pts[inside]) * ui ** (-m)
            vals[inside] = acc * envelope
        return vals[0] if single else vals.reshape(X.shape[:-1])

    def partial(self, i: int) -> "CoefficientFn":
        """Exact d/dx_i; stays in the same closed class of functions."""
        c_i = self.bump.center[i - 1]
        r = self.bump.radius
        # du/dx_i = -2 (x_i - c_i) / r^2, as a degree-1 polynomial
        d = len(self.bump.center)
        expo = [0] * d
        expo[i - 1] = 1
        du = Polynomial(d, {tuple(expo): -2.0 / r**2, (0,) * d: 2.0 * c_i / r**2})
        out: list[tuple[Polynomial, int]] = []
        for p, m in self.terms:
            # d/dx_i [p u^-m e^-1/u] = (dp) u^-m e + p (-m) u^-m-1 du e + p u^-m-2 du e
            out.append((p.partial(i), m))
            if m:
                out.append(((-m) * (p * du), m + 1))
            out.append((p * du, m + 2))
        return CoefficientFn(self.bump, out)

    def gradient(self) -> list["CoefficientFn"]:
        return [self.partial(i) for i in range(1, len(self.bump.center) + 1)]


class TestForm:
    """Compactly supported differential k-form on R^d.

    terms: list of (CoefficientFn, increasing index tuple).
    """

    def __init__(self, dimension: int, grade: int, terms):
        self.dimension = dimension
        self.grade = grade
        self.terms = []
        for fn, idx in terms:
            idx = tuple(idx)
            if len(idx) != grade or any(not 1 <= i <= dimension for i in idx):
                raise ValueError(f"bad index tuple {idx} for grade {grade} in R^{dimension}")
            sorted_idx, sign = canonicalize(idx)
            if sign == 0:
                continue
            if sign < 0:
                fn = CoefficientFn(fn.bump, [(-1.0 * p, m) for p, m in fn.terms])
            self.terms.append((fn, sorted_idx))

    # -- evaluation ----------------------------------------------------------

    def __call__(self, x) -> CoVector:
        out = CoVector.zero(self.dimension, self.grade)
        for fn, idx in self.terms:
            out.coefficients[subset_index(self.dimension, idx)] += fn(np.asarray(x, dtype=float))
        return out

    def eval_batch(self, X: np.ndarray) -> np.ndarray:
        """Coefficient matrix of shape (N, binom(d, k)) at row points of X."""
        X = np.asarray(X, dtype=float).reshape(-1, self.dimension)
        out = np.zeros((X.shape[0], math.comb(self.dimension, self.grade)))
        for fn, idx in self.terms:
            out[:, subset_index(self.dimension, idx)] += fn(X)
        return out

    # -- calculus -------------------------------------------------------------

    def exterior_derivative(self) -> "TestForm":
        """Exact exterior derivative; grade d gives the flagged zero form."""
        if self.grade == self.dimension:
            out = TestForm(self.dimension, self.dimension, [])
            out.saturated = True
            return out
        terms = []
        for fn, idx in self.terms:
            for i in range(1, self.dimension + 1):
                if i in idx:
                    continue
                terms.append((fn.partial(i), (i,) + idx))
        return TestForm(self.dimension, self.grade + 1, terms)

    # -- serialization ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "grade": self.grade,
            "terms": [
                {
                    "center": list(fn.bump.center),
                    "radius": fn.bump.radius,
                    "index": list(idx),
                    "polynomials": [
                        {"m": m, "coeffs": [[list(e), c] for e, c in p.coeffs.items()]}
                        for p, m in fn.terms
                    ],
                }
                for fn, idx in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TestForm":
        d = data["dimension"]
        terms = []
        for t in data["terms"]:
            bump = Bump(tuple(t["center"]), t["radius"])
            polys = [
                (Polynomial(d, {tuple(e): c for e, c in entry["coeffs"]}), entry["m"])
                for entry in t["polynomials"]
            ]
            terms.append((CoefficientFn(bump, polys), tuple(t["index"])))
        return cls(d, data["grade"], terms)


@dataclass
class TimeCutoff:
    """Smooth bump cutoff in time with exact derivative, supported in (0, 1)."""

    center: float
    radius: float

    def __post_init__(self):
        if not (0.0 < self.center - self.radius and self.center + self.radius < 1.0):
            raise ValueError("time cutoff support must be contained in (0, 1)")

    def __call__(self, t):
        scalar = np.isscalar(t) or np.ndim(t) == 0
        z = (np.atleast_1d(np.asarray(t, dtype=float)) - self.center) / self.radius
        u = 1.0 - z * z
        out = np.zeros_like(u)
        inside = u > _SUPPORT_CUTOFF
        out[inside] = np.exp(-1.0 / u[inside])
        return float(out[0]) if scalar else out

    def derivative(self, t):
        scalar = np.isscalar(t) or np.ndim(t) == 0
        z = (np.atleast_1d(np.asarray(t, dtype=float)) - self.center) / self.radius
        u = 1.0 - z * z
        out = np.zeros_like(u)
        inside = u > _SUPPORT_CUTOFF
        ui = u[inside]
        out[inside] = np.exp(-1.0 / ui) * (-2.0 * z[inside] / (self.radius * ui * ui))
        return float(out[0]) if scalar else out


# -- Lie derivative -------------------------------------------------------------


def lie_derivative_form(form: TestForm, b_value, b_jacobian):
    """Pointwise evaluator of the Lie derivative of ``form`` along a field.

    ``b_value(x)`` and ``b_jacobian(x)`` must accept batched points; the
    Jacobian convention is J[i, j] = d b_i / d x_j.  Matches Cartan's
    formula d(i_b w) + i_b(dw), here assembled via the Leibniz rule on
    basis covectors (the two agree identically).
    """
    if b_jacobian is None:
        raise ValueError("Lie derivative needs the field Jacobian")
    d, k = form.dimension, form.grade
    ncols = math.comb(d, k)
    # precompute index bookkeeping per term
    plans = []
    for fn, idx in form.terms:
        grads = fn.gradient()
        col = subset_index(d, idx)
        swaps = []  # (slot value m, replacement j, output column, sign)
        for a, m_idx in enumerate(idx):
            for j in range(1, d + 1):
                if j == m_idx:
                    swaps.append((m_idx, j, col, 1))
                    continue
                if j in idx:
                    continue
                new_idx = idx[:a] + (j,) + idx[a + 1:]
                sorted_idx, sign = canonicalize(new_idx)
                swaps.append((m_idx, j, subset_index(d, sorted_idx), sign))
        plans.append((fn, grads, col, swaps))

    def evaluate(X):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        pts = X.reshape(-1, d)
        B = np.asarray(b_value(pts), dtype=float).reshape(-1, d)
        J = np.asarray(b_jacobian(pts), dtype=float).reshape(-1, d, d)
        out = np.zeros((pts.shape[0], ncols))
        for fn, grads, col, swaps in plans:
            fvals = fn(pts)
            grad = np.stack([g(pts) for g in grads], axis=-1)
            out[:, col] += np.sum(grad * B, axis=-1)
            for m_idx, j, ocol, sign in swaps:
                out[:, ocol] += sign * fvals * J[:, m_idx - 1, j - 1]
        if single:
            cov = CoVector.zero(d, k)
            cov.coefficients[:] = out[0]
            return cov
        return out

    return evaluate


# -- form dictionaries --------------------------------------------------------------


def build_dictionary(dimension: int, grade: int, box, seed: int, size: int = 64,
                     radii=(0.25, 0.5, 1.0)) -> list[TestForm]:
    """Deterministic finite dictionary of test forms over a bounding box.

    Centers live on a lattice covering the box, radii cycle through
    ``radii``, basis directions cycle through the increasing k-subsets, and
    polynomial coefficients (degree <= 1) come from the seeded generator.
    The resulting metric dist(S, T) = max_w |<S - T, w>| is what the rest
    of the library means by "test-form distance".
    """
    box = np.asarray(box, dtype=float)  # shape (d, 2)
    if box.shape != (dimension, 2):
        raise ValueError(f"bounding box must have shape ({dimension}, 2)")
    rng = np.random.default_rng(seed)
    subsets = basis_subsets(dimension, grade)
    # lattice with roughly size^(1/d) nodes per axis
    per_axis = max(2, int(round(size ** (1.0 / dimension))))
    axes = [np.linspace(box[i, 0], box[i, 1], per_axis) for i in range(dimension)]
    lattice = np.array(list(itertools.product(*axes)))
    forms = []
    for i in range(size):
        center = lattice[i % len(lattice)]
        jitter = rng.uniform(-0.05, 0.05, size=dimension)
        radius = radii[i % len(radii)]
        bump = Bump(tuple(center + jitter), float(radius))
        idx = subsets[i % len(subsets)]
        coeffs = {(0,) * dimension: rng.uniform(0.5, 1.5)}
        for ax in range(dimension):
            expo = [0] * dimension
            expo[ax] = 1
            coeffs[tuple(expo)] = rng.uniform(-1.0, 1.0)
        poly = Polynomial(dimension, coeffs)
        forms.append(TestForm(dimension, grade, [(CoefficientFn.poly_bump(bump, poly), idx)]))
    return forms


def dictionary_to_json(forms: list[TestForm]) -> str:
    return json.dumps([f.to_dict() for f in forms], sort_keys=True)


def dictionary_from_json(text: str) -> list[TestForm]:
    return [TestForm.from_dict(d) for d in json.loads(text)]
