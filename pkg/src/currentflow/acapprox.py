"""One-dimensional maximal functions and Lipschitz approximation of AC functions.

The pipeline mirrors the classical restriction argument: given an absolutely
continuous f with upper gradient g, the uncentered maximal function Mg is
computed exactly for piecewise-constant g, the sublevel set E_j = {Mg <= j}
is closed, f restricted to E_j is j-Lipschitz, and linear interpolation
across the complementary gaps produces a j-Lipschitz global approximant f_j.

Everything lives on a bounded grid window; g is treated as extended by zero
outside it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
from numba import njit


@dataclass(frozen=True)
class Sampled1D:
    """Function samples on a strictly increasing grid.

    ``values[i]`` is the node value for piecewise-linear data (f) or the
    constant on cell [grid[i], grid[i+1]) for piecewise-constant data (g);
    in the latter convention the last entry is unused by integrals.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "grid", np.asarray(self.grid, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.grid.ndim != 1 or self.grid.size < 2:
            raise ValueError("grid must be one-dimensional with at least two nodes")
        if np.any(np.diff(self.grid) <= 0.0):
            raise ValueError("grid must be strictly increasing")
        if self.values.shape != self.grid.shape:
            raise ValueError("values must match grid shape")

    def cell_integral(self):
        """Per-cell integrals under the piecewise-constant convention."""
        return self.values[:-1] * np.diff(self.grid)

    def integral(self):
        return float(self.cell_integral().sum())

    def interp(self, t):
        return np.interp(t, self.grid, self.values)


def sampled_to_csv(s: Sampled1D, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "value"])
        for t, v in zip(s.grid, s.values):
            w.writerow([repr(float(t)), repr(float(v))])


def sampled_from_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    return Sampled1D(data[:, 0], data[:, 1])


# -- maximal function --------------------------------------------------------------
#
# Mg at a node is the best average of g over grid-aligned intervals
# containing the node.  Any interval straddling the node averages the two
# one-sided intervals it contains, so the maximum splits into a backward and
# a forward one-sided scan.  Each one-sided scan maximizes a chord slope of
# the prefix-integral polyline, and the maximizing left endpoint always lies
# on the lower convex hull of the prefix points, which is what the
# O(N log N) scan prunes with.


@njit(cache=True)
def _left_chord_max(t, S):
    n = t.shape[0]
    out = np.full(n, -np.inf)
    hull = np.empty(n, dtype=np.int64)
    hn = 0
    for i in range(n):
        if hn > 0:
            lo, hi = 0, hn - 1
            while lo < hi:
                mid = (lo + hi) // 2
                a, b = hull[mid], hull[mid + 1]
                sa = (S[i] - S[a]) / (t[i] - t[a])
                sb = (S[i] - S[b]) / (t[i] - t[b])
                if sb >= sa:
                    lo = mid + 1
                else:
                    hi = mid
            a = hull[lo]
            out[i] = (S[i] - S[a]) / (t[i] - t[a])
        # maintain the lower hull of prefix points (keep left turns)
        while hn >= 2:
            p, q = hull[hn - 2], hull[hn - 1]
            if (t[q] - t[p]) * (S[i] - S[p]) - (S[q] - S[p]) * (t[i] - t[p]) <= 0.0:
                hn -= 1
            else:
                break
        hull[hn] = i
        hn += 1
    return out


@njit(cache=True)
def _chord_max_reference(t, S):
    n = t.shape[0]
    out = np.full(n, -np.inf)
    for i in range(n):
        best = -np.inf
        for j in range(n):
            if j == i:
                continue
            # the chord slope covers both one-sided averages at once
            s = (S[i] - S[j]) / (t[i] - t[j])
            if s > best:
                best = s
        out[i] = best
    return out


def _prefix(g: Sampled1D):
    if np.any(g.values < 0.0):
        raise ValueError("maximal function requires nonnegative samples")
    return np.concatenate([[0.0], np.cumsum(g.cell_integral())])


def maximal_function(g: Sampled1D) -> Sampled1D:
    """Uncentered maximal function of piecewise-constant g at the grid nodes.

    O(N log N) convex-hull scan over prefix-integral chords.
    """
    t = g.grid
    S = _prefix(g)
    left = _left_chord_max(t, S)
    right = _left_chord_max(-t[::-1], -S[::-1])[::-1]
    return Sampled1D(t, np.maximum(left, right))


def maximal_function_reference(g: Sampled1D) -> Sampled1D:
    """Direct O(N^2) evaluation over all grid-aligned intervals."""
    t = g.grid
    S = _prefix(g)
    return Sampled1D(t, _chord_max_reference(t, S))


def weak_one_one_constant(g: Sampled1D, Mg: Sampled1D | None = None) -> float:
    """Empirical weak (1,1) constant sup_l l*|{Mg > l}| / ||g||_1.

    Mg is read as piecewise linear between nodes; superlevel measures use
    exact crossing points.
    """
    if Mg is None:
        Mg = maximal_function(g)
    norm = g.integral()
    if norm == 0.0:
        return 0.0
    levels = np.unique(Mg.values)
    levels = levels[levels > 0.0] * (1.0 - 1e-12)
    if levels.size == 0:
        return 0.0
    if levels.size > 4096:
        # subsample the candidate levels; the sup is still attained within
        # the sampled quantiles up to the grid's own discretization
        levels = np.quantile(levels, np.linspace(0.0, 1.0, 4096))
    meas = superlevel_measure(Mg, levels)
    return float(np.max(levels * meas / norm))


def superlevel_measure(Mg: Sampled1D, lam) -> float:
    """Measure of {Mg > lam} for the piecewise-linear interpolant of Mg.

    ``lam`` may be a vector of levels.
    """
    t, v = Mg.grid, Mg.values
    lam = np.asarray(lam, dtype=float)
    L = lam.reshape(-1, 1)
    a, b = v[:-1], v[1:]
    dt = np.diff(t)
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    frac = np.clip((hi - L) / np.where(hi > lo, hi - lo, 1.0), 0.0, 1.0)
    frac = np.where(lo > L, 1.0, frac)
    frac = np.where(hi <= L, 0.0, frac)
    total = frac @ dt
    return float(total[0]) if lam.ndim == 0 else total


# -- closed sublevel sets -----------------------------------------------------------


@dataclass(frozen=True)
class ClosedSet1D:
    """Finite union of disjoint closed intervals inside a window."""

    intervals: np.ndarray  # (m, 2)
    window: tuple

    def __post_init__(self):
        iv = np.asarray(self.intervals, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "intervals", iv)
        if iv.size and (np.any(iv[:, 0] > iv[:, 1]) or np.any(np.diff(iv.ravel()) < 0)):
            raise ValueError("intervals must be sorted and disjoint")

    @property
    def empty(self):
        return self.intervals.size == 0

    def measure(self):
        if self.empty:
            return 0.0
        return float(np.sum(self.intervals[:, 1] - self.intervals[:, 0]))

    def complement_gaps(self):
        """Open gaps (r, s) of the complement inside the window."""
        gaps = []
        lo, hi = self.window
        prev = lo
        for a, b in self.intervals:
            if a > prev:
                gaps.append((prev, a))
            prev = b
        if prev < hi:
            gaps.append((prev, hi))
        return gaps

    def complement_measure(self):
        return float(sum(b - a for a, b in self.complement_gaps()))

    def contains(self, t, tol=0.0):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (t >= a - tol) & (t <= b + tol)
        return out


def sublevel_closed(Mg: Sampled1D, lam: float) -> ClosedSet1D:
    """Closed set {Mg <= lam}, with crossings located by linear interpolation.

    Boundary points belong to the set (it is closed).  An empty result is
    returned as an empty interval list.
    """
    if lam <= 0.0:
        raise ValueError("level must be positive")
    t, v = Mg.grid, Mg.values
    pieces = []
    cur = None
    for i in range(t.size - 1):
        a, b = v[i], v[i + 1]
        ta, tb = t[i], t[i + 1]
        if a <= lam and b <= lam:
            lo, hi = ta, tb
        elif a <= lam < b:
            lo, hi = ta, ta + (tb - ta) * (lam - a) / (b - a)
        elif b <= lam < a:
            lo, hi = ta + (tb - ta) * (lam - a) / (b - a), tb
        else:
            lo = hi = None
        if lo is None:
            if cur is not None:
                pieces.append(cur)
                cur = None
            continue
        if cur is not None and cur[1] >= lo:
            cur = (cur[0], hi)
        else:
            if cur is not None:
                pieces.append(cur)
            cur = (lo, hi)
    if cur is not None:
        pieces.append(cur)
    return ClosedSet1D(np.array(pieces).reshape(-1, 2), (float(t[0]), float(t[-1])))


# -- Lipschitz interpolation --------------------------------------------------------


def interpolate_L(f: Sampled1D, E: ClosedSet1D) -> Sampled1D:
    """Keep f on E, interpolate linearly across the complementary gaps.

    Window endpoints are clamped into E, so every gap is interior and has
    two anchor values.  The output grid is the input grid refined by the
    gap endpoints.
    """
    if E.empty:
        raise ValueError("cannot interpolate against an empty set")
    lo, hi = E.window
    iv = E.intervals.copy()
    # clamp: the window boundary always anchors the interpolation
    if iv[0, 0] > lo:
        iv = np.vstack([[lo, lo], iv])
    if iv[-1, 1] < hi:
        iv = np.vstack([iv, [hi, hi]])
    E = ClosedSet1D(iv, E.window)

    nodes = np.unique(np.concatenate([f.grid, iv.ravel()]))
    fvals = f.interp(nodes)
    out = fvals.copy()
    for r, s in E.complement_gaps():
        fr, fs = f.interp(r), f.interp(s)
        inside = (nodes > r) & (nodes < s)
        out[inside] = fr + (fs - fr) * (nodes[inside] - r) / (s - r)
    return Sampled1D(nodes, out)


@dataclass
class ApproximationReport:
    level: float
    complement_measure: float
    weak_constant: float
    sup_error: float
    max_gap_mass: float
    l1_derivative_error: float

    def to_dict(self):
        return {
            "j": self.level,
            "complement_measure": self.complement_measure,
            "weak_constant": self.weak_constant,
            "sup_error": self.sup_error,
            "max_gap_mass": self.max_gap_mass,
            "l1_derivative_error": self.l1_derivative_error,
        }


def _check_upper_gradient(f: Sampled1D, g: Sampled1D, tol=1e-10):
    if not np.array_equal(f.grid, g.grid):
        raise ValueError("f and g must share a grid")
    df = np.abs(np.diff(f.values))
    if np.any(df > g.cell_integral() + tol):
        raise ValueError("g is not an upper gradient of f on the grid")


def approximate_ac(f: Sampled1D, g: Sampled1D, j: float):
    """Lipschitz approximant f_j = L(f, {Mg <= j}) with its guarantees.

    Returns (f_j, E_j, report).  The reported constant is the empirical
    weak (1,1) constant of Mg, which bounds |E_j^c| <= C ||g||_1 / j.
    """
    if j <= 0:
        raise ValueError("approximation level must be positive")
    _check_upper_gradient(f, g)
    Mg = maximal_function(g)
    E = sublevel_closed(Mg, float(j))
    if E.empty:
        raise ValueError(f"sublevel set {{Mg <= {j}}} is empty on this window")
    fj = interpolate_L(f, E)

    sup_err = float(np.max(np.abs(fj.interp(f.grid) - f.values)))
    S = np.concatenate([[0.0], np.cumsum(g.cell_integral())])
    gap_mass = 0.0
    for r, s in E.complement_gaps():
        gap_mass = max(gap_mass, float(np.interp(s, f.grid, S) - np.interp(r, f.grid, S)))
    l1 = _l1_slope_error(f, fj)
    report = ApproximationReport(
        level=float(j),
        complement_measure=E.complement_measure(),
        weak_constant=weak_one_one_constant(g, Mg),
        sup_error=sup_err,
        max_gap_mass=gap_mass,
        l1_derivative_error=l1,
    )
    return fj, E, report


def _l1_slope_error(f: Sampled1D, fj: Sampled1D) -> float:
    """Integral of |f_j' - f'| over the window, cell by cell."""
    nodes = np.unique(np.concatenate([f.grid, fj.grid]))
    vf = f.interp(nodes)
    vj = fj.interp(nodes)
    dt = np.diff(nodes)
    return float(np.sum(np.abs(np.diff(vj) / dt - np.diff(vf) / dt) * dt))


@dataclass
class ACLipFunction:
    """f(t, x), absolutely continuous in t uniformly in x, Lipschitz in x.

    The upper gradient g and spatial Lipschitz constant are supplied by the
    caller and spot-checked on random quadruples at construction.
    """

    evaluator: object  # callable (t, x) -> float or vector
    upper_gradient: Sampled1D
    lip_x: float
    x_domain: tuple
    rng_seed: int = 7

    def __post_init__(self):
        rng = np.random.default_rng(self.rng_seed)
        t = self.upper_gradient.grid
        S = np.concatenate([[0.0], np.cumsum(self.upper_gradient.cell_integral())])
        lo, hi = self.x_domain
        for _ in range(32):
            t1, t2 = np.sort(rng.uniform(t[0], t[-1], 2))
            x1, x2 = rng.uniform(lo, hi, 2)
            lhs = np.max(np.abs(np.atleast_1d(
                self.evaluator(t1, x1)) - np.atleast_1d(self.evaluator(t2, x2))))
            gint = np.interp(t2, t, S) - np.interp(t1, t, S)
            rhs = self.lip_x * abs(x2 - x1) + gint + 1e-8
            if lhs > rhs:
                raise ValueError(
                    "declared upper gradient and Lipschitz constant do not "
                    f"dominate the increments: {lhs} > {rhs}"
                )

    def line(self, x) -> Sampled1D:
        t = self.upper_gradient.grid
        vals = np.array([float(np.atleast_1d(self.evaluator(ti, x))[0]) for ti in t])
        return Sampled1D(t, vals)


def approximate_ac_lip(f: ACLipFunction, j: float, probe_points):
    """Shared-sublevel Lipschitz approximation of an AC_t Lip_x function.

    One E_j is built from the single upper gradient; every probe line is
    interpolated against it, which preserves the spatial Lipschitz constant.
    Returns (lines, E_j, report) where lines maps probe x to f_j(., x).
    """
    if j <= 0:
        raise ValueError("approximation level must be positive")
    g = f.upper_gradient
    Mg = maximal_function(g)
    E = sublevel_closed(Mg, float(j))
    if E.empty:
        raise ValueError(f"sublevel set {{Mg <= {j}}} is empty on this window")
    lines = {}
    sup_err = 0.0
    for x in probe_points:
        fx = f.line(x)
        _check_upper_gradient(fx, g, tol=1e-8)
        fj = interpolate_L(fx, E)
        lines[float(x)] = fj
        sup_err = max(sup_err, float(np.max(np.abs(fj.interp(fx.grid) - fx.values))))

    # Lip_x(f_j) <= Lip_x(f), checked pairwise on the probe lines
    xs = sorted(lines)
    lip_ok = True
    worst = 0.0
    for a, b in zip(xs[:-1], xs[1:]):
        gap = abs(b - a)
        if gap == 0.0:
            continue
        diff = float(np.max(np.abs(lines[b].values - lines[a].interp(lines[b].grid))))
        worst = max(worst, diff / gap)
        if diff > f.lip_x * gap + 1e-8:
            lip_ok = False
    report = {
        "j": float(j),
        "complement_measure": E.complement_measure(),
        "sup_error": sup_err,
        "weak_constant": weak_one_one_constant(g, Mg),
        "lip_x_observed": worst,
        "lip_x_declared": f.lip_x,
        "lip_x_preserved": lip_ok,
    }
    return lines, E, report


def report_to_json(reports, path):
    payload = [r.to_dict() if hasattr(r, "to_dict") else r for r in reports]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
