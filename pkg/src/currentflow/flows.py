"""Time-dependent vector fields, their flow maps, and flow calculus.

Admissible fields are Lipschitz in space with merely integrable time
profiles.  The integrator never steps uniformly in time: steps are taken in
equal increments of the cumulative budget

    L(t) = integral_0^t (1 + sup-norm + Lipschitz constant) dr,

which is the reparametrization that keeps integrable-but-unbounded time
profiles (such as 1/(2 sqrt(t))) tractable.  In the budget variable the
right-hand side of the ODE is bounded by 1, and fixed-step RK4 with step
doubling gives tolerance control.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import integrate as sp_integrate

_TINY_TIME = 1e-30


class FieldNotInClassL(ValueError):
    """The admissibility integral of (sup + Lip) over [0, 1] diverges."""


class JacobianUnavailable(ValueError):
    pass


# -- time modulations ----------------------------------------------------------


@dataclass(frozen=True)
class Modulation:
    """Scalar time profile a(t) with optional exact antiderivative for oracles."""

    value: callable
    antiderivative: callable | None = None
    singular_times: tuple = ()
    label: str = "custom"


def constant_modulation():
    return Modulation(lambda t: 1.0, lambda t: t, (), "constant")


def inv_sqrt_modulation():
    """a(t) = 1/(2 sqrt(t)): integrable on [0,1], unbounded at t = 0."""
    return Modulation(
        lambda t: 0.5 / math.sqrt(max(t, _TINY_TIME)),
        lambda t: math.sqrt(max(t, 0.0)),
        (0.0,),
        "inv_sqrt",
    )


def inv_t_modulation():
    """a(t) = 1/t: NOT integrable at 0; used to exercise the class-(L) gate."""
    return Modulation(lambda t: 1.0 / max(t, _TINY_TIME), None, (0.0,), "inv_t")


# -- fields ---------------------------------------------------------------------


class TimeDependentField:
    """b(t, x) with per-time Lipschitz and sup-norm profiles over a box.

    ``evaluator(t, X)`` must broadcast over leading axes of X (shape
    (..., d)).  The sup profile is measured over the scenario bounding box,
    not all of R^d.  Construction verifies the admissibility integral
    (finite integral of sup + Lip over [0, 1]) by adaptive quadrature.
    """

    def __init__(self, dimension, evaluator, lip_profile, sup_profile, bounding_box,
                 family="custom", singular_times=(), breakpoints=(), jacobian=None,
                 smooth_mask=None, params=None, check_admissible=True,
                 budget_antiderivative=None):
        self.dimension = dimension
        self._evaluator = evaluator
        self.lip_profile = lip_profile
        self.sup_profile = sup_profile
        self.bounding_box = np.asarray(bounding_box, dtype=float)
        if self.bounding_box.shape != (dimension, 2):
            raise ValueError(f"bounding box must have shape ({dimension}, 2)")
        self.family = family
        self.singular_times = tuple(singular_times)
        self.breakpoints = tuple(sorted(set(singular_times) | set(breakpoints)))
        self._jacobian = jacobian
        self._smooth_mask = smooth_mask
        self.params = params or {}
        self.budget_antiderivative = budget_antiderivative
        if check_admissible:
            self.budget_total = self._admissibility_check()

    def __call__(self, t, X):
        return self._evaluator(t, np.asarray(X, dtype=float))

    def jacobian(self, t, X):
        """Spatial Jacobian J[..., i, j] = d b_i / d x_j, if the family has one."""
        if self._jacobian is None:
            raise JacobianUnavailable(f"field family '{self.family}' has no Jacobian")
        return self._jacobian(t, np.asarray(X, dtype=float))

    def has_jacobian(self):
        return self._jacobian is not None

    def smooth_mask(self, X):
        """True where the field is smooth on a neighborhood of the point."""
        X = np.asarray(X, dtype=float)
        if self._smooth_mask is None:
            if self._jacobian is None:
                return np.zeros(X.shape[:-1], dtype=bool)
            return np.ones(X.shape[:-1], dtype=bool)
        return self._smooth_mask(X)

    def profile_integral(self, a, b):
        """Integral of (1 + sup + Lip) from a to b, exact when a closed-form
        antiderivative is available, adaptive quadrature otherwise."""
        if a == b:
            return 0.0
        if self.budget_antiderivative is not None:
            return self.budget_antiderivative(b) - self.budget_antiderivative(a)
        lo, hi = (a, b) if a < b else (b, a)
        fn = lambda t: 1.0 + self.sup_profile(t) + self.lip_profile(t)
        pts = [p for p in self.breakpoints if lo < p < hi] or None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            val, err = sp_integrate.quad(fn, lo, hi, points=pts, limit=300)
        if not np.isfinite(val) or err > max(1e-7, 1e-6 * abs(val)):
            raise FieldNotInClassL(
                "field not in class (L): profile integral diverges on "
                f"[{lo}, {hi}] (value {val}, error estimate {err})"
            )
        return val if a < b else -val

    def lip_integral(self, a, b):
        if a == b:
            return 0.0
        lo, hi = (a, b) if a < b else (b, a)
        pts = [p for p in self.breakpoints if lo < p < hi] or None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            val, _ = sp_integrate.quad(self.lip_profile, lo, hi, points=pts, limit=300)
        return val

    def sup_integral(self, a, b):
        if a == b:
            return 0.0
        lo, hi = (a, b) if a < b else (b, a)
        pts = [p for p in self.breakpoints if lo < p < hi] or None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            val, _ = sp_integrate.quad(self.sup_profile, lo, hi, points=pts, limit=300)
        return val

    def _admissibility_check(self):
        total = self.profile_integral(0.0, 1.0)
        if self.budget_antiderivative is None and self.singular_times:
            # the profile may be clamped near its singular times, which can
            # make a divergent integral look finite; test tail convergence
            for s in self.singular_times:
                tails = [self.profile_integral(s + delta, min(s + 0.1, 1.0))
                         for delta in (1e-6, 1e-9, 1e-12)]
                if abs(tails[2] - tails[1]) > 1e-4 * (1.0 + abs(tails[2])):
                    raise FieldNotInClassL(
                        "field not in class (L): profile integral diverges "
                        f"near t = {s}"
                    )
        return total


def _box_radius(box):
    box = np.asarray(box, dtype=float)
    corners = np.abs(box)
    return float(np.linalg.norm(corners.max(axis=1)))


def zero_field(dimension, bounding_box):
    z = lambda t, X: np.zeros_like(X)
    return TimeDependentField(
        dimension, z, lambda t: 0.0, lambda t: 0.0, bounding_box,
        family="zero",
        jacobian=lambda t, X: np.zeros(X.shape[:-1] + (dimension, dimension)),
        params={},
        budget_antiderivative=lambda t: t,
    )


def constant_field(c, bounding_box):
    c = np.asarray(c, dtype=float)
    d = c.shape[0]
    nrm = float(np.linalg.norm(c))
    return TimeDependentField(
        d, lambda t, X: np.broadcast_to(c, X.shape).copy(),
        lambda t: 0.0, lambda t: nrm, bounding_box,
        family="constant",
        jacobian=lambda t, X: np.zeros(X.shape[:-1] + (d, d)),
        params={"c": c.tolist()},
        budget_antiderivative=lambda t: (1.0 + nrm) * t,
    )


def linear_field(A, bounding_box, modulation: Modulation | None = None):
    """b(t, x) = a(t) A x, with a = 1 when no modulation is given."""
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    mod = modulation or constant_modulation()
    opnorm = float(np.linalg.norm(A, 2))
    R = _box_radius(bounding_box)

    def ev(t, X):
        return mod.value(t) * (X @ A.T)

    def jac(t, X):
        return np.broadcast_to(mod.value(t) * A, X.shape[:-1] + (d, d)).copy()

    return TimeDependentField(
        d, ev,
        lambda t: abs(mod.value(t)) * opnorm,
        lambda t: abs(mod.value(t)) * opnorm * R,
        bounding_box, family="linear",
        singular_times=mod.singular_times,
        jacobian=jac,
        params={"A": A.tolist(), "modulation": mod.label},
        budget_antiderivative=(
            None if mod.antiderivative is None
            else lambda t: t + opnorm * (1.0 + R) * mod.antiderivative(t)
        ),
    )


def shear_field(bounding_box):
    """The non-uniqueness example field on R^2: (y, 0) for y >= 0, else 0."""
    box = np.asarray(bounding_box, dtype=float)
    ymax = max(box[1, 1], 0.0)

    def ev(t, X):
        out = np.zeros_like(X)
        out[..., 0] = np.maximum(X[..., 1], 0.0)
        return out

    def jac(t, X):
        J = np.zeros(X.shape[:-1] + (2, 2))
        J[..., 0, 1] = (X[..., 1] > 0.0).astype(float)
        return J

    return TimeDependentField(
        2, ev, lambda t: 1.0, lambda t: ymax, bounding_box,
        family="shear",
        jacobian=jac,
        smooth_mask=lambda X: np.abs(X[..., 1]) > 1e-12,
        params={},
        budget_antiderivative=lambda t: (2.0 + ymax) * t,
    )


def time_modulated_field(v, lip_v, sup_v, modulation: Modulation, bounding_box,
                         jacobian_v=None):
    """b(t, x) = a(t) v(x) for a static spatial field v."""
    box = np.asarray(bounding_box, dtype=float)
    d = box.shape[0]
    jac = None
    if jacobian_v is not None:
        jac = lambda t, X: modulation.value(t) * jacobian_v(X)
    return TimeDependentField(
        d, lambda t, X: modulation.value(t) * v(X),
        lambda t: abs(modulation.value(t)) * lip_v,
        lambda t: abs(modulation.value(t)) * sup_v,
        bounding_box, family="time_modulated",
        singular_times=modulation.singular_times,
        jacobian=jac,
        params={"modulation": modulation.label},
        budget_antiderivative=(
            None if modulation.antiderivative is None
            else lambda t: t + (lip_v + sup_v) * modulation.antiderivative(t)
        ),
    )


def gridded_field(base: TimeDependentField, n_cells: int):
    """Piecewise-constant-in-time sampling of a base field at cell midpoints."""
    edges = np.linspace(0.0, 1.0, n_cells + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])

    def cell(t):
        return int(np.clip(np.searchsorted(edges, t, side="right") - 1, 0, n_cells - 1))

    g_cells = np.array([base.lip_profile(m) + base.sup_profile(m) for m in mids])
    g_cum = np.concatenate([[0.0], np.cumsum(g_cells) / n_cells])

    def budget_anti(t):
        i = cell(t)
        return t + g_cum[i] + g_cells[i] * (t - edges[i])

    f = TimeDependentField(
        base.dimension,
        lambda t, X: base(mids[cell(t)], X),
        lambda t: base.lip_profile(mids[cell(t)]),
        lambda t: base.sup_profile(mids[cell(t)]),
        base.bounding_box, family="gridded",
        breakpoints=tuple(edges[1:-1]),
        params={"n_cells": n_cells, "base": base.family},
        budget_antiderivative=budget_anti,
    )
    f.time_cell_midpoints = mids
    return f


def mollify(base: TimeDependentField, eps: float, nodes_per_axis: int = 16):
    """Space-time mollification b * (phi_eps psi_eps) by tensor Gauss-Legendre.

    The base field is extended by zero outside t in [0, 1].  Quadrature
    weights are normalized to unit mass, so constants are reproduced
    exactly.  Profiles are inherited as convolution upper bounds.
    """
    if eps <= 0.0:
        raise ValueError("mollification width must be positive")
    d = base.dimension
    gl_x, gl_w = np.polynomial.legendre.leggauss(nodes_per_axis)

    def bump1(z):
        u = 1.0 - z * z
        out = np.zeros_like(u)
        ok = u > 1e-8
        out[ok] = np.exp(-1.0 / u[ok])
        return out

    # time nodes on (-eps, eps)
    t_nodes = eps * gl_x
    t_weights = gl_w * bump1(gl_x)
    t_weights = t_weights / t_weights.sum()

    # spatial tensor nodes on the cube, masked by the radial bump
    axes = np.meshgrid(*([gl_x] * d), indexing="ij")
    pts = np.stack([a.ravel() for a in axes], axis=-1)  # (Q, d) in [-1,1]^d
    wts = np.ones(pts.shape[0])
    for a in np.meshgrid(*([gl_w] * d), indexing="ij"):
        wts = wts * a.ravel()
    radial = bump1(np.minimum(np.linalg.norm(pts, axis=-1), 1.0 + 1e-9))
    wts = wts * radial
    keep = wts > 0.0
    x_nodes = eps * pts[keep]
    x_weights = wts[keep] / wts[keep].sum()

    def ev(t, X):
        X = np.asarray(X, dtype=float)
        shifted = X[..., None, :] - x_nodes  # (..., Q, d)
        out = np.zeros_like(X)
        for sigma, wt in zip(t_nodes, t_weights):
            te = t - sigma
            if te < 0.0 or te > 1.0:
                continue  # zero extension in time
            vals = base(te, shifted)  # (..., Q, d)
            out += wt * np.einsum("...qd,q->...d", vals, x_weights)
        return out

    def conv_profile(profile):
        def prof(t):
            acc = 0.0
            for sigma, wt in zip(t_nodes, t_weights):
                te = t - sigma
                if 0.0 <= te <= 1.0:
                    acc += wt * profile(te)
            return acc
        return prof

    lip_eps = conv_profile(base.lip_profile)
    sup_base = conv_profile(base.sup_profile)
    # mollification samples b up to eps outside the box; |b| grows at most
    # by Lip * eps there
    sup_eps = lambda t: sup_base(t) + eps * lip_eps(t)

    # the discrete time quadrature jumps whenever a node crosses the domain
    # boundary (zero extension) or a discontinuity of the base field
    breaks = set()
    for sigma in t_nodes:
        for p in (0.0, 1.0) + tuple(base.breakpoints):
            q = p + sigma
            if 0.0 < q < 1.0:
                breaks.add(float(q))
    return TimeDependentField(
        d, ev, lip_eps, sup_eps, base.bounding_box,
        family="mollified",
        breakpoints=tuple(sorted(breaks)),
        params={"eps": eps, "base": base.family},
    )


# -- flow maps -------------------------------------------------------------------


@dataclass
class DirectionalDerivative:
    vector: np.ndarray
    error_estimate: float
    converged: bool


@dataclass
class QuotientDiagnostics:
    """Difference-quotient record: extrapolated limit plus convergence data."""

    limit: np.ndarray
    steps: np.ndarray
    deviations: np.ndarray
    observed_order: float
    converged: bool


class FlowMap:
    """Evaluator of the two-parameter flow of an admissible field.

    All evaluation is pure after construction; batches of initial points
    share the budget-step schedule, so they may be integrated together.
    """

    MAX_SUBSTEPS = 1 << 17

    def __init__(self, field: TimeDependentField, tolerance: float = 1e-8):
        self.field = field
        self.tolerance = float(tolerance)
        self.budget_total = field.profile_integral(0.0, 1.0)  # raises if not (L)
        # fields with an integrable singularity in time are integrated in the
        # budget variable; everywhere-bounded profiles are integrated in time
        self._budget_mode = bool(field.singular_times)
        if self._budget_mode and field.budget_antiderivative is None:
            raise ValueError(
                "fields with singular time profiles need a closed-form "
                "budget antiderivative for accurate reparametrization"
            )

    # -- core integrator ---------------------------------------------------------

    def _eval_time(self, t):
        for s in self.field.singular_times:
            if abs(t - s) < _TINY_TIME:
                return s + _TINY_TIME
        return t

    def _time_of_budget(self, lam):
        """Invert the budget map Lambda(t) = int_0^t (1 + sup + Lip)."""
        F = self.field.budget_antiderivative
        lam = min(max(lam, F(0.0)), F(1.0))
        if lam == F(0.0):
            return 0.0
        if lam == F(1.0):
            return 1.0
        from scipy.optimize import brentq
        return brentq(lambda t: F(t) - lam, 0.0, 1.0, xtol=1e-15, rtol=8.9e-16)

    def _rhs_budget(self, t, X):
        tc = self._eval_time(t)
        g = 1.0 + self.field.lip_profile(tc) + self.field.sup_profile(tc)
        return self.field(tc, X) / g

    def _run_budget(self, lam0, increments, X, base_steps):
        """RK4 in the budget variable.

        The time at every stage node comes from exact inversion of the
        budget map, so the time coordinate carries no integration error and
        the right-hand side stays smooth in the budget variable even at
        integrable profile singularities.
        """
        Xc = np.array(X, dtype=float)
        recorded = []
        lam = lam0
        for inc, nsub in zip(increments, base_steps):
            if nsub == 0:
                recorded.append(Xc.copy())
                continue
            h = inc / nsub
            nodes = lam + h * 0.5 * np.arange(2 * nsub + 1)
            t_nodes = [self._time_of_budget(l) for l in nodes]
            for j in range(nsub):
                t0, tm, t1 = t_nodes[2 * j], t_nodes[2 * j + 1], t_nodes[2 * j + 2]
                k1 = self._rhs_budget(t0, Xc)
                k2 = self._rhs_budget(tm, Xc + 0.5 * h * k1)
                k3 = self._rhs_budget(tm, Xc + 0.5 * h * k2)
                k4 = self._rhs_budget(t1, Xc + h * k3)
                Xc = Xc + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            lam = lam + inc
            recorded.append(Xc.copy())
        return recorded

    def _run_time(self, s, seq, X, base_steps):
        """RK4 directly in time between consecutive entries of seq.

        Stage times are nudged strictly inside each segment so that fields
        with jump discontinuities at segment boundaries (gridded families)
        are always sampled from the correct side.
        """
        Xc = np.array(X, dtype=float)
        recorded = []
        t = seq[0]
        for a, b, nsub in zip(seq[:-1], seq[1:], base_steps):
            if nsub == 0:
                recorded.append(Xc.copy())
                continue
            h = (b - a) / nsub
            nudge = 1e-13 * max(1.0, abs(a), abs(b))
            lo, hi = (a + nudge, b - nudge) if a < b else (b + nudge, a - nudge)
            for j in range(nsub):
                t0 = a + j * h
                tm = min(max(t0 + 0.5 * h, lo), hi)
                t1 = min(max(t0 + h, lo), hi)
                ts = min(max(t0, lo), hi)
                k1 = self.field(ts, Xc)
                k2 = self.field(tm, Xc + 0.5 * h * k1)
                k3 = self.field(tm, Xc + 0.5 * h * k2)
                k4 = self.field(t1, Xc + h * k3)
                Xc = Xc + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            recorded.append(Xc.copy())
        return recorded

    def _refined_sequence(self, seq):
        """Insert field breakpoints between consecutive times; remember targets."""
        refined = [seq[0]]
        record_at = []
        ascending = seq[-1] >= seq[0]
        for a, b in zip(seq[:-1], seq[1:]):
            lo, hi = (a, b) if a < b else (b, a)
            inner = [p for p in self.field.breakpoints if lo < p < hi]
            inner.sort(reverse=not ascending)
            refined.extend(inner)
            refined.append(b)
            record_at.append(len(refined) - 2)  # index into segments
        return refined, record_at

    def flow_path(self, s, times, X, tolerance=None):
        """Integrate from time s through a monotone sequence of times.

        Returns an array of shape (len(times),) + X.shape with the flow of
        every row of X recorded at each requested time.  The step schedule
        depends only on the times, so all rows of X share it.
        """
        tol = self.tolerance if tolerance is None else float(tolerance)
        times = [float(t) for t in times]
        X = np.asarray(X, dtype=float)
        seq = [float(s)] + times
        diffs = np.diff(seq)
        if not (np.all(diffs >= 0.0) or np.all(diffs <= 0.0)):
            raise ValueError("times must be monotone starting from s")
        seq, record_at = self._refined_sequence(seq)

        if self._budget_mode:
            F = self.field.budget_antiderivative
            lam_nodes = [F(t) for t in seq]
            increments = list(np.diff(lam_nodes))
            h0 = 0.05
        else:
            increments = list(np.diff(seq))
            h0 = 0.02
        total = sum(abs(i) for i in increments)
        if total == 0.0:
            return np.broadcast_to(X, (len(times),) + X.shape).copy()

        steps = [0 if inc == 0.0 else max(2, int(math.ceil(abs(inc) / h0)))
                 for inc in increments]
        prev = None
        while True:
            if self._budget_mode:
                rec = self._run_budget(lam_nodes[0], increments, X, steps)
            else:
                rec = self._run_time(s, seq, X, steps)
            if prev is not None:
                delta = max(float(np.max(np.abs(r - p))) for r, p in zip(rec, prev))
                if delta <= tol:
                    break
            if sum(steps) * 2 > self.MAX_SUBSTEPS:
                break  # accept the finest affordable resolution
            prev = rec
            steps = [0 if n == 0 else 2 * n for n in steps]

        out = np.empty((len(times),) + X.shape)
        for i, seg in enumerate(record_at):
            out[i] = rec[seg]
        return out

    # -- public flow operations ----------------------------------------------------

    def flow(self, s, t, x, tolerance=None):
        """Phi_t^s(x); x may be a single point or a batch (..., d)."""
        x = np.asarray(x, dtype=float)
        if t == s:
            return x.copy()
        return self.flow_path(s, [t], x, tolerance=tolerance)[0]

    def flow_inverse(self, t, y):
        """(Phi_t^0)^{-1}(y) = Phi_0^t(y)."""
        return self.flow(t, 0.0, y)

    def psi(self, t, x):
        """Space-time graph map Psi(t, x) = (t, Phi_t^0(x))."""
        x = np.asarray(x, dtype=float)
        return np.concatenate([[t], self.flow(0.0, t, x)])

    def psi_inverse(self, s, y):
        y = np.asarray(y, dtype=float)
        return np.concatenate([[s], self.flow(s, 0.0, y)])

    def flow_directional_derivative(self, s, t, x, v, h_levels=(1e-3, 5e-4, 2.5e-4)):
        """d Phi_t^s(x)[v] by central differences with Richardson extrapolation."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        probes = np.array([x + h * v for h in h_levels] + [x - h * v for h in h_levels])
        pushed = self.flow(s, t, probes)
        m = len(h_levels)
        D = [(pushed[i] - pushed[m + i]) / (2.0 * h_levels[i]) for i in range(m)]
        r1 = (4.0 * D[1] - D[0]) / 3.0
        r2 = (4.0 * D[2] - D[1]) / 3.0
        extrap = (16.0 * r2 - r1) / 15.0
        err = float(np.max(np.abs(r2 - r1)))
        d01 = float(np.max(np.abs(D[1] - D[0])))
        d12 = float(np.max(np.abs(D[2] - D[1])))
        noise = 64.0 * self.tolerance / min(h_levels)
        if d12 <= max(noise, 1e-12):
            converged = True
        else:
            ratio = d01 / d12
            converged = 1.5 < ratio < 16.0
        return DirectionalDerivative(extrap, err, converged)

    def dpsi_time_direction(self, t, x):
        """D Psi(t,x)[(1,0)] = (1, b_t(Phi_t^0(x))), evaluated analytically."""
        y = self.flow(0.0, t, np.asarray(x, dtype=float))
        tc = self._eval_time(t)
        return np.concatenate([[1.0], np.atleast_1d(self.field(tc, y))])

    def dpsi_inverse_flow_direction(self, t, x, steps=None):
        """Difference quotients of Psi^{-1} along (1, b_t): the a.e. limit is (1, 0).

        Reports the quotient at the smallest step together with the observed
        convergence order of the deviation from (1, 0).
        """
        x = np.asarray(x, dtype=float)
        if steps is None:
            steps = np.array([0.04 / 2**i for i in range(6)])
        steps = np.asarray([h for h in steps if t + h <= 1.0], dtype=float)
        if steps.size < 3:
            raise ValueError("need at least three admissible step sizes")
        y = self.flow(0.0, t, x)
        tc = self._eval_time(t)
        drift = self.field(tc, y)
        quotients = []
        deviations = []
        for h in steps:
            back = self.flow(t + h, 0.0, y + h * drift, tolerance=self.tolerance / 10.0)
            q = np.concatenate([[1.0], (back - x) / h])
            quotients.append(q)
            deviations.append(float(np.linalg.norm(q - np.eye(1 + x.shape[0])[0])))
        deviations = np.array(deviations)
        floor = 1e-10
        if np.all(deviations <= floor):
            order = np.inf
            converged = True
        else:
            mask = deviations > floor
            if mask.sum() >= 2:
                order = float(np.polyfit(np.log(steps[mask]), np.log(deviations[mask]), 1)[0])
            else:
                order = np.inf
            converged = order >= 0.4 or deviations[-1] <= 10.0 * floor
        return QuotientDiagnostics(quotients[-1], steps, deviations, order, converged)

    def gronwall_bound(self, s, t1, t2, x, y):
        """exp(int_s^t1 Lip) |x - y| + int_t1^t2 sup-norm; requires t1 <= t2."""
        if t1 > t2:
            raise ValueError("gronwall_bound requires t1 <= t2")
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        lip = abs(self.field.lip_integral(s, t1))
        sup = self.field.sup_integral(t1, t2)
        return math.exp(lip) * float(np.linalg.norm(x - y)) + sup


def lebesgue_time_sampler(field: TimeDependentField, n: int):
    """Sample times avoiding the field family's declared singular set.

    The avoided set (for instance {0} for the 1/(2 sqrt(t)) profile) is
    Lebesgue-null; away from it every time is a Lebesgue point of the
    profiles for the built-in families.
    """
    if field.family == "gridded":
        mids = field.time_cell_midpoints
        return np.array([mids[i % len(mids)] for i in range(n)])
    if field.singular_times:
        lo = 1e-3
        return np.linspace(lo, 1.0, n)
    return (np.arange(n) + 0.5) / n
