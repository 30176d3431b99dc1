"""Transport of currents along flows: the solver, residuals, and the
finite-mass non-uniqueness example.

The solver realizes T_t = (Phi_t^0)_* T0.  Dirac atoms are pushed by moving
the point and applying the derivative of the flow (finite differences with
Richardson extrapolation) to the witness vectors; simplicial currents are
pushed by moving vertices, with one level of mesh refinement when the flow
distorts edges by more than 2x.

Weak residuals come in two flavours: the normal-current form, which
materializes the boundary and wedges the field atomwise,

    | int <T_t, w> psi'(t) + (<b ^ dT_t, w> + <b ^ T_t, dw>) psi(t) dt |,

and the smooth-field form, which moves the Lie derivative onto the test
form and therefore works for Dirac currents whose boundaries have
unbounded mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import simpson

from . import currents as cu
from . import exterior as ex
from . import flows as fl
from . import testforms as tf

_H_LEVELS = (1e-3, 5e-4, 2.5e-4)


class TransportError(ValueError):
    pass


@dataclass
class Trajectory:
    """Currents sampled on a time grid with their uniform mass bound."""

    times: np.ndarray
    currents: list
    mass_bound: float
    flagged: bool = False


@dataclass
class ResidualReport:
    grid_size: int
    dictionary_size: int
    residuals: list
    max_residual: float
    step: float

    def to_dict(self):
        return {
            "grid_size": self.grid_size,
            "dictionary_size": self.dictionary_size,
            "residuals": list(map(float, self.residuals)),
            "max_residual": float(self.max_residual),
            "step": float(self.step),
        }


@dataclass
class RefinementStudy:
    reports: list
    slope: float
    noise_floor: float
    converged: bool  # already at quadrature noise on the coarsest grid

    def to_dict(self):
        return {
            "reports": [r.to_dict() for r in self.reports],
            "slope": float(self.slope),
            "noise_floor": self.noise_floor,
            "converged": self.converged,
        }


# -- pushforward -------------------------------------------------------------------


def _dirac_probe_points(x, witnesses):
    pts = [x]
    for v in witnesses:
        for h in _H_LEVELS:
            pts.append(x + h * v)
            pts.append(x - h * v)
    return np.array(pts)


def _dirac_from_probes(pushed, dimension, grade, weight, tolerance):
    """Assemble the pushed Dirac atom from flowed probe points.

    ``pushed`` rows: [image point, then (+h, -h) pairs per witness per h
    level].  Central differences share the integrator schedule, so the
    dominant integration error cancels in the quotients.
    """
    y = pushed[0]
    if grade == 0:
        return cu.DiracCurrent(y, ex.MultiVector.scalar(dimension, 1.0), weight), True
    vecs = []
    converged = True
    noise = 64.0 * tolerance / min(_H_LEVELS)
    row = 1
    for _ in range((pushed.shape[0] - 1) // 6):
        D = []
        for h in _H_LEVELS:
            D.append((pushed[row] - pushed[row + 1]) / (2.0 * h))
            row += 2
        r1 = (4.0 * D[1] - D[0]) / 3.0
        r2 = (4.0 * D[2] - D[1]) / 3.0
        vecs.append((16.0 * r2 - r1) / 15.0)
        d01 = float(np.max(np.abs(D[1] - D[0])))
        d12 = float(np.max(np.abs(D[2] - D[1])))
        if d12 > max(noise, 1e-12) and not (1.5 < d01 / d12 < 16.0):
            converged = False
    out = cu.DiracCurrent(y, ex.MultiVector.from_vectors(vecs), weight)
    out.flagged = not converged
    return out, converged


def _refine_simplicial(T: cu.SimplicialCurrent) -> cu.SimplicialCurrent:
    """One uniform refinement level (segments split in 2, triangles in 4)."""
    verts = [v for v in T.vertices]
    midpoint = {}

    def mid(i, j):
        key = (min(i, j), max(i, j))
        if key not in midpoint:
            verts.append(0.5 * (T.vertices[i] + T.vertices[j]))
            midpoint[key] = len(verts) - 1
        return midpoint[key]

    simplices, mults = [], []
    for s, m in zip(T.simplices, T.multiplicities):
        if len(s) == 1:
            simplices.append(s)
            mults.append(m)
        elif len(s) == 2:
            a, b = s
            c = mid(a, b)
            simplices += [(a, c), (c, b)]
            mults += [m, m]
        else:
            a, b, c = s
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            simplices += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
            mults += [m, m, m, m]
    return cu.SimplicialCurrent(np.array(verts), simplices, mults, grade=T.grade)


def _max_edge_distortion(T: cu.SimplicialCurrent, pushed_vertices):
    worst = 0.0
    for s in T.simplices:
        for a in range(len(s)):
            for b in range(a + 1, len(s)):
                orig = np.linalg.norm(T.vertices[s[a]] - T.vertices[s[b]])
                if orig == 0.0:
                    continue
                new = np.linalg.norm(pushed_vertices[s[a]] - pushed_vertices[s[b]])
                worst = max(worst, new / orig)
    return worst


def pushforward_path(flow: fl.FlowMap, times, T, s=0.0):
    """Push T through Phi_{t}^{s} for every t in a monotone time list.

    One batched integration serves all probe points and all times.
    """
    if isinstance(T, cu.DiracCurrent):
        witnesses = T.vector.witness or []
        probes = _dirac_probe_points(T.point, witnesses)
        pushed = flow.flow_path(s, times, probes)
        out = []
        for i in range(len(times)):
            cur, _ = _dirac_from_probes(pushed[i], T.dimension, T.grade,
                                        T.weight, flow.tolerance)
            out.append(cur)
        return out
    if isinstance(T, cu.SimplicialCurrent):
        pushed = flow.flow_path(s, times, T.vertices)
        if max(_max_edge_distortion(T, pushed[i]) for i in range(len(times))) > 2.0:
            T = _refine_simplicial(T)
            pushed = flow.flow_path(s, times, T.vertices)
        return [
            cu.SimplicialCurrent(pushed[i], T.simplices, T.multiplicities, grade=T.grade)
            for i in range(len(times))
        ]
    raise TransportError(f"cannot push {type(T).__name__}")


def pushforward(flow: fl.FlowMap, t, T, s=0.0):
    """(Phi_t^s)_* T."""
    if t == s:
        return T
    return pushforward_path(flow, [t], T, s=s)[0]


def solve_gte(field, T0, grid, tolerance=1e-8, flow=None):
    """T_t = (Phi_t^0)_* T0 on the given time grid, with the mass bound
    mass(T_t) <= exp(k int_0^t Lip) * mass(T0) * (1 + 1e-6) asserted."""
    if flow is None:
        field_obj = field
        flow = fl.FlowMap(field, tolerance)
    else:
        field_obj = flow.field
    times = np.asarray(grid, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) <= 0) or times[0] < 0 or times[-1] > 1:
        raise TransportError("time grid must be increasing inside [0, 1]")
    currents = pushforward_path(flow, list(times), T0, s=0.0)
    m0 = T0.mass()
    k = T0.grade
    masses = []
    for t, T in zip(times, currents):
        m = T.mass()
        bound = math.exp(k * abs(field_obj.lip_integral(0.0, float(t)))) * m0 * (1.0 + 1e-6)
        if m > bound + 1e-12:
            raise TransportError(
                f"mass bound violated at t={t}: mass {m} > exp(k*intLip)*mass(T0) = {bound}"
            )
        masses.append(m)
    traj = Trajectory(times, currents, max(masses, default=0.0))
    traj.flagged = any(getattr(T, "flagged", False) for T in currents)
    return traj


# -- weak residuals -----------------------------------------------------------------


def _wedge1_table(d, k):
    """Index table for wedging a 1-vector onto k-vector coefficients.

    Entries (i, out_col, in_col, sign): (b ^ tau)[out] += sign * b_i * tau[in].
    """
    table = []
    for out_col, K in enumerate(ex.basis_subsets(d, k + 1)):
        for pos, i in enumerate(K):
            rest = K[:pos] + K[pos + 1:]
            table.append((i, out_col, ex.subset_index(d, rest), (-1) ** pos))
    return table


def _wedge1_batch(B, C, d, k):
    """Row-wise b ^ tau for B (N, d) 1-vectors and C (N, C(d,k)) k-vectors."""
    out = np.zeros((B.shape[0], math.comb(d, k + 1)))
    for i, ocol, icol, sign in _wedge1_table(d, k):
        out[:, ocol] += sign * B[:, i - 1] * C[:, icol]
    return out


def _atom_arrays(T, subdivisions):
    atoms = T.atomize(subdivisions)
    if not atoms:
        d = T.dimension
        return np.zeros((0, d)), np.zeros((0, math.comb(d, T.grade)))
    P = np.stack([a.point for a in atoms])
    C = np.stack([a.vector.coefficients * a.weight for a in atoms])
    return P, C


def residual_dictionary(traj: Trajectory, field, dictionary, psi: tf.TimeCutoff,
                        subdivisions=8):
    """Weak-formulation residuals of a trajectory for every dictionary form.

    Normal-current version: the boundary is materialized, so trajectory
    currents must be simplicial (or grade 0, where the boundary term is
    absent).  Time integration is composite Simpson on the trajectory grid.
    """
    times = traj.times
    k = traj.currents[0].grade
    d = traj.currents[0].dimension
    for T in traj.currents:
        if k >= 1 and not isinstance(T, cu.SimplicialCurrent):
            raise TransportError(
                "boundary of a Dirac k-current (k >= 1) has unbounded mass and "
                "cannot be materialized; use smooth_weak_residual instead"
            )
    psi_v = np.array([psi(t) for t in times])
    dpsi_v = np.array([psi.derivative(t) for t in times])
    active = (psi_v != 0.0) | (dpsi_v != 0.0)

    # gather atom data per active node
    node_data = []
    for i, t in enumerate(times):
        if not active[i]:
            node_data.append(None)
            continue
        T = traj.currents[i]
        P, C = _atom_arrays(T, subdivisions)
        B = field(float(t), P) if P.size else np.zeros_like(P)
        WC = _wedge1_batch(B, C, d, k)  # b ^ T coefficients, grade k+1
        if k >= 1:
            bd = cu.boundary(T)
            PB, CB = _atom_arrays(bd, subdivisions)
            BB = field(float(t), PB) if PB.size else np.zeros_like(PB)
            WB = _wedge1_batch(BB, CB, d, k - 1)  # b ^ dT, grade k
        else:
            PB = np.zeros((0, d))
            WB = np.zeros((0, math.comb(d, k)))
        node_data.append((P, C, WC, PB, WB))

    residuals = []
    for form in dictionary:
        dform = form.exterior_derivative()
        integrand = np.zeros(times.size)
        for i in range(times.size):
            if node_data[i] is None:
                continue
            P, C, WC, PB, WB = node_data[i]
            val = 0.0
            if dpsi_v[i] != 0.0 and P.size:
                val += dpsi_v[i] * float(np.sum(C * form.eval_batch(P)))
            if psi_v[i] != 0.0:
                if PB.size:
                    val += psi_v[i] * float(np.sum(WB * form.eval_batch(PB)))
                if P.size and k + 1 <= d:
                    val += psi_v[i] * float(np.sum(WC * dform.eval_batch(P)))
            integrand[i] = val
        residuals.append(abs(float(simpson(integrand, x=times))))
    return residuals


def weak_residual(traj: Trajectory, field, form: tf.TestForm, psi: tf.TimeCutoff,
                  subdivisions=8):
    return residual_dictionary(traj, field, [form], psi, subdivisions)[0]


def smooth_residual_dictionary(traj: Trajectory, field, dictionary,
                               psi: tf.TimeCutoff, subdivisions=8):
    """Residuals with the Lie derivative moved onto the test forms.

    Requires the field to be smooth on a neighborhood of every trajectory
    support point (Jacobian available there); valid for finite-mass
    currents whose boundaries are not materializable.
    """
    times = traj.times
    d = traj.currents[0].dimension
    psi_v = np.array([psi(t) for t in times])
    dpsi_v = np.array([psi.derivative(t) for t in times])
    active = (psi_v != 0.0) | (dpsi_v != 0.0)

    node_data = []
    for i, t in enumerate(times):
        if not active[i]:
            node_data.append(None)
            continue
        P, C = _atom_arrays(traj.currents[i], subdivisions)
        if P.size and not np.all(field.smooth_mask(P)):
            raise TransportError(
                f"trajectory support at t={t} leaves the region where the "
                "field is smooth"
            )
        node_data.append((float(t), P, C))

    residuals = []
    t_holder = [0.0]
    b_val = lambda X: field(t_holder[0], X)
    b_jac = lambda X: field.jacobian(t_holder[0], X)
    for form in dictionary:
        lie = tf.lie_derivative_form(form, b_val, b_jac)
        integrand = np.zeros(times.size)
        for i in range(times.size):
            if node_data[i] is None:
                continue
            t, P, C = node_data[i]
            if not P.size:
                continue
            t_holder[0] = t
            val = 0.0
            if dpsi_v[i] != 0.0:
                val += dpsi_v[i] * float(np.sum(C * form.eval_batch(P)))
            if psi_v[i] != 0.0:
                val += psi_v[i] * float(np.sum(C * lie(P)))
            integrand[i] = val
        residuals.append(abs(float(simpson(integrand, x=times))))
    return residuals


def smooth_weak_residual(traj: Trajectory, field, form: tf.TestForm,
                         psi: tf.TimeCutoff, subdivisions=8):
    return smooth_residual_dictionary(traj, field, [form], psi, subdivisions)[0]


def refinement_study(field, T0, dictionary, psi=None, grids=(16, 32, 64, 128),
                     tolerance=1e-8, subdivisions=8, smooth=False,
                     noise_floor=1e-13):
    """Residuals of solve_gte output across time-grid refinements.

    The slope is a least-squares fit of log(max residual) against log(grid
    size); residuals below the quadrature noise floor are clipped before
    fitting, and a study whose coarsest residual is already at the floor is
    reported as converged.
    """
    if psi is None:
        psi = tf.TimeCutoff(0.5, 0.4)
    flow = fl.FlowMap(field, tolerance)
    reports = []
    residual_fn = smooth_residual_dictionary if smooth else residual_dictionary
    for n in grids:
        grid = np.linspace(0.0, 1.0, int(n) + 1)
        traj = solve_gte(field, T0, grid, tolerance=tolerance, flow=flow)
        res = residual_fn(traj, field, dictionary, psi, subdivisions)
        reports.append(ResidualReport(
            grid_size=int(n),
            dictionary_size=len(dictionary),
            residuals=res,
            max_residual=max(res),
            step=1.0 / float(n),
        ))
    vals = np.array([max(r.max_residual, noise_floor) for r in reports])
    ns = np.array([float(r.grid_size) for r in reports])
    slope = float(-np.polyfit(np.log(ns), np.log(vals), 1)[0])
    converged = bool(vals[0] <= 1e-6)
    return RefinementStudy(reports, slope, noise_floor, converged)


# -- space-time currents -------------------------------------------------------------


class SpaceTimeCurrent:
    """(k+1)-current in R^{1+d} stored as time slices with a drift.

    Every slice atom (x, tau, w) at time t contributes the space-time atom
    oriented by (1, drift(t, x)) ^ (0, tau) with a time-quadrature weight:
    the graph structure that space-time pushforwards act on.
    """

    def __init__(self, times, slices, drift=None):
        self.times = np.asarray(times, dtype=float)
        self.slices = list(slices)
        if self.times.size != len(self.slices):
            raise TransportError("one slice per time required")
        self.drift = drift
        self.spatial_dimension = self.slices[0].dimension
        self.dimension = 1 + self.spatial_dimension
        self.grade = self.slices[0].grade + 1
        self.mass_bound = max(s.mass() for s in self.slices)

    def atoms(self, subdivisions=1):
        """Space-time atoms with trapezoidal weights in time."""
        tw = np.zeros(self.times.size)
        dt = np.diff(self.times)
        tw[:-1] += 0.5 * dt
        tw[1:] += 0.5 * dt
        d = self.spatial_dimension
        out = []
        for t, w_t, S in zip(self.times, tw, self.slices):
            for a in S.atomize(subdivisions):
                b = (np.zeros(d) if self.drift is None
                     else np.asarray(self.drift(float(t), a.point), dtype=float))
                vecs = [np.concatenate([[1.0], b])]
                for v in (a.vector.witness or []):
                    vecs.append(np.concatenate([[0.0], v]))
                tau = ex.MultiVector.from_vectors(vecs)
                out.append(cu.Atom(np.concatenate([[t], a.point]), tau, a.weight * w_t))
        return out

    def as_atomic(self, subdivisions=1):
        return cu.AtomicCurrent(self.dimension, self.grade, self.atoms(subdivisions))


def spacetime_cylinder(T0, grid):
    """The product current [0,1] x T0 as a simplicial current in R^{1+d}.

    Orientation is e_0 ^ tau: time first.  Boundary restricted to the
    interior (0,1) x R^d equals minus the cylinder over the boundary of T0.
    """
    times = np.asarray(grid, dtype=float)
    if not isinstance(T0, cu.SimplicialCurrent):
        raise TransportError("cylinder construction needs a simplicial base")
    d = T0.dimension
    n_t = times.size
    nv = T0.vertices.shape[0]
    verts = np.zeros((n_t * nv, 1 + d))
    for i, t in enumerate(times):
        verts[i * nv:(i + 1) * nv, 0] = t
        verts[i * nv:(i + 1) * nv, 1:] = T0.vertices
    vid = lambda i, a: i * nv + a
    simplices, mults = [], []
    for s, m in zip(T0.simplices, T0.multiplicities):
        for i in range(n_t - 1):
            if T0.grade == 0:
                a = s[0]
                simplices.append((vid(i, a), vid(i + 1, a)))
                mults.append(m)
            elif T0.grade == 1:
                a, b = s
                # split the sheet cell into two triangles oriented e0 ^ (b-a)
                simplices.append((vid(i, a), vid(i + 1, a), vid(i, b)))
                simplices.append((vid(i + 1, a), vid(i + 1, b), vid(i, b)))
                mults += [m, m]
            else:
                raise TransportError("cylinders implemented over grades 0 and 1")
    return cu.SimplicialCurrent(verts, simplices, mults,
                                grade=T0.grade + 1 if simplices else None)


# -- Lipschitz-approximation pushforward ----------------------------------------------


def _push_spacetime_atoms(map_eval, atoms, h=1e-4):
    """Push space-time atoms under F(t, x) = (t, f(t, x)).

    ``map_eval(t, x)`` returns the spatial image; the derivative of F along
    a space-time witness (dt, v) is (dt, (f(t + h dt, x + h v) - f(t - ...))
    / 2h), by central differences on the map itself.
    """
    out = []
    for a in atoms:
        t, x = a.point[0], a.point[1:]
        y = np.atleast_1d(map_eval(t, x))
        vecs = []
        for w in a.vector.witness:
            dt, v = w[0], w[1:]
            hp = min(h, (1.0 - t) / max(dt, 1e-9)) if dt > 0 else h
            hm = min(h, t / max(dt, 1e-9)) if dt > 0 else h
            fp = np.atleast_1d(map_eval(t + hp * dt, x + hp * v))
            fm = np.atleast_1d(map_eval(t - hm * dt, x - hm * v))
            vecs.append(np.concatenate([[dt], (fp - fm) / (hp + hm)]))
        tau = ex.MultiVector.from_vectors(vecs)
        out.append(cu.Atom(np.concatenate([[t], y]), tau, a.weight))
    return out


def approx_pushforward_sequence(f, T: SpaceTimeCurrent, j_list, dictionary,
                                subdivisions=1):
    """(f_j)_* T for the Lipschitz approximants f_j of an AC_t Lip_x map.

    Returns (pushed_currents, direct, distances): ``direct`` is f_* T via
    directional derivatives of f itself, and distances are measured in the
    dictionary metric.  Convergence is certified on the finite dictionary
    only.
    """
    from . import acapprox as ac

    atoms = T.atoms(subdivisions)
    probe_x = sorted({float(a.point[1]) for a in atoms})
    if T.spatial_dimension != 1:
        raise TransportError("approximation pushforwards support 1-d space")

    direct_atoms = _push_spacetime_atoms(
        lambda t, x: f.evaluator(t, x), atoms)
    direct = cu.AtomicCurrent(T.dimension, T.grade, direct_atoms)

    pushed, distances = [], []
    # neighboring probe lines provide the spatial derivative of f_j
    dx = 1e-4
    all_probes = sorted(set(probe_x) | {x + dx for x in probe_x} | {x - dx for x in probe_x})
    for j in j_list:
        lines, E, report = ac.approximate_ac_lip(f, j, all_probes)

        def fj_eval(t, x, lines=lines):
            key = min(lines, key=lambda q: abs(q - x))
            line = lines[key]
            base = float(line.interp(t))
            if abs(key - x) < 1e-12:
                return base
            # first-order spatial correction between probe lines
            lo = max(q for q in lines if q <= x + 1e-12)
            hi = min(q for q in lines if q >= x - 1e-12)
            if hi == lo:
                return float(lines[lo].interp(t))
            wl = (hi - x) / (hi - lo)
            return wl * float(lines[lo].interp(t)) + (1 - wl) * float(lines[hi].interp(t))

        atoms_j = _push_spacetime_atoms(fj_eval, atoms)
        Tj = cu.AtomicCurrent(T.dimension, T.grade, atoms_j)
        pushed.append(Tj)
        distances.append(cu.distance(Tj, direct, dictionary))
    return pushed, direct, distances


# -- the finite-mass non-uniqueness example -------------------------------------------


def nonuniqueness_demo(dict_seed=11, dict_size=64, grid_size=256, tolerance=1e-10,
                       eps_list=(0.1, 0.05, 0.025, 0.0125)):
    """Two solution families of the transport equation under the planar
    shear field b(x, y) = (max(y, 0), 0) that agree at t = 0 and split apart
    immediately after.

    T^{1,eps} starts at e2 delta_{(0,-eps)} and never moves (the field
    vanishes there); T^{2,eps} starts at e2 delta_{(0,eps)} and becomes
    (e2 + t e1) delta_{(t eps, eps)}.  As eps -> 0 both start from
    e2 delta_0, yet the limits differ for t > 0 and the mass of the
    difference at t = 1 is exactly 1.
    """
    box = np.array([[-2.0, 2.0], [-2.0, 2.0]])
    field = fl.shear_field(box)
    flow = fl.FlowMap(field, tolerance)
    psi = tf.TimeCutoff(0.5, 0.4)
    dictionary = tf.build_dictionary(2, 1, box, seed=dict_seed, size=dict_size)
    grid = np.linspace(0.0, 1.0, grid_size + 1)
    e2 = ex.MultiVector.basis(2, 2)

    families = {}
    for eps in eps_list:
        T1_0 = cu.DiracCurrent(np.array([0.0, -eps]), e2)
        T2_0 = cu.DiracCurrent(np.array([0.0, eps]), e2)
        traj1 = solve_gte(field, T1_0, grid, tolerance=tolerance, flow=flow)
        traj2 = solve_gte(field, T2_0, grid, tolerance=tolerance, flow=flow)
        res1 = max(smooth_residual_dictionary(traj1, field, dictionary, psi))
        res2 = max(smooth_residual_dictionary(traj2, field, dictionary, psi))
        families[eps] = (traj1, traj2, res1, res2)

    # limit families, known in closed form
    def limit1(t):
        return cu.DiracCurrent(np.array([0.0, 0.0]), e2)

    def limit2(t):
        return cu.DiracCurrent(np.array([0.0, 0.0]),
                               ex.MultiVector.from_vectors([[float(t), 1.0]]))

    check_times = [0.0, 0.25, 0.5, 0.75, 1.0]
    conv1, conv2 = {}, {}
    for eps, (traj1, traj2, _, _) in families.items():
        idx = [int(round(t * grid_size)) for t in check_times]
        conv1[eps] = max(cu.distance(traj1.currents[i], limit1(traj1.times[i]), dictionary)
                         for i in idx)
        conv2[eps] = max(cu.distance(traj2.currents[i], limit2(traj2.times[i]), dictionary)
                         for i in idx)

    t0_distance = cu.distance(limit1(0.0), limit2(0.0), dictionary)
    diff = cu.combine_atoms([limit2(1.0), limit1(1.0)], [1.0, -1.0])
    mass_difference = diff.mass()
    t_half_distance = cu.distance(limit1(0.5), limit2(0.5), dictionary)

    verdict = {
        "field": "planar shear (y, 0) for y >= 0, else 0",
        "epsilons": list(eps_list),
        "residual_family_1": {str(e): float(families[e][2]) for e in eps_list},
        "residual_family_2": {str(e): float(families[e][3]) for e in eps_list},
        "limit_convergence_1": {str(e): float(conv1[e]) for e in eps_list},
        "limit_convergence_2": {str(e): float(conv2[e]) for e in eps_list},
        "distance_of_limits_at_t0": float(t0_distance),
        "distance_of_limits_at_t_half": float(t_half_distance),
        "mass_of_difference_at_t1": float(mass_difference),
        "same_initial_current": bool(t0_distance <= 1e-12),
        "distinct_for_positive_time": bool(t_half_distance > 1e-6),
        "dictionary": {"seed": dict_seed, "size": dict_size},
        "grid_size": grid_size,
    }
    return verdict
