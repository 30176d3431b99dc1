"""Transport of currents: pushforward oracles, weak residuals, space-time
constructions and the non-uniqueness demonstration."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import expm

from currentflow import currents as cu
from currentflow import flows as fl
from currentflow import testforms as tf
from currentflow.exterior import MultiVector
from currentflow.transport import (
    SpaceTimeCurrent,
    Trajectory,
    TransportError,
    nonuniqueness_demo,
    pushforward,
    refinement_study,
    residual_dictionary,
    smooth_residual_dictionary,
    solve_gte,
    spacetime_cylinder,
)

BOX = np.array([[-2.0, 2.0], [-2.0, 2.0]])


def poly_form(d, k, center, radius, coeffs_by_idx):
    bump = tf.Bump(tuple(center), radius)
    terms = [(tf.CoefficientFn.poly_bump(bump, tf.Polynomial(d, coeffs)), idx)
             for idx, coeffs in coeffs_by_idx.items()]
    return tf.TestForm(d, k, terms)


def test_pushforward_translation():
    c = np.array([0.3, -0.1])
    flow = fl.FlowMap(fl.constant_field(c, BOX))
    T = cu.SimplicialCurrent([[0.0, 0.0], [0.4, 0.5]], [[0, 1]], [1.0])
    out = pushforward(flow, 1.0, T)
    assert np.allclose(out.vertices, T.vertices + c, atol=1e-10)
    assert np.isclose(out.mass(), T.mass())


def test_pushforward_dirac_shear_closed_form():
    # e2 delta_(0, eps) becomes (e2 + t e1) delta_(t eps, eps)
    eps = 0.5
    flow = fl.FlowMap(fl.shear_field(BOX), tolerance=1e-10)
    T0 = cu.DiracCurrent([0.0, eps], MultiVector.basis(2, 2))
    for t in (0.25, 1.0):
        Tt = pushforward(flow, t, T0)
        assert not Tt.flagged
        assert np.allclose(Tt.point, [t * eps, eps], atol=1e-9)
        assert np.allclose(Tt.vector.coefficients, [t, 1.0], atol=1e-6)


def test_pushforward_dirac_linear_oracle():
    A = np.array([[0.2, -0.8], [0.5, 0.1]])
    flow = fl.FlowMap(fl.linear_field(A, BOX), tolerance=1e-10)
    w = np.array([0.6, -0.2])
    T0 = cu.DiracCurrent([0.3, 0.4], MultiVector.from_vectors([w]))
    Tt = pushforward(flow, 1.0, T0)
    M = expm(A)
    assert np.allclose(Tt.point, M @ [0.3, 0.4], atol=1e-8)
    assert np.allclose(Tt.vector.witness[0], M @ w, atol=1e-6)


def test_pushforward_functorial():
    A = np.array([[0.1, 0.7], [-0.4, 0.2]])
    flow = fl.FlowMap(fl.linear_field(A, BOX, fl.inv_sqrt_modulation()), tolerance=1e-9)
    T0 = cu.SimplicialCurrent([[0.2, 0.1], [0.5, 0.6], [0.1, 0.5]],
                              [[0, 1, 2]], [1.0])
    half = pushforward(flow, 0.5, T0)
    two_leg = pushforward(flow, 1.0, half, s=0.5)
    one_leg = pushforward(flow, 1.0, T0)
    assert np.allclose(two_leg.vertices, one_leg.vertices, atol=1e-7)


def test_boundary_commutes_with_pushforward():
    A = np.array([[0.3, -0.5], [0.6, 0.1]])
    flow = fl.FlowMap(fl.linear_field(A, BOX), tolerance=1e-10)
    T0 = cu.SimplicialCurrent([[0.1, 0.0], [0.6, 0.3]], [[0, 1]], [2.0])
    lhs = cu.boundary(pushforward(flow, 1.0, T0))
    rhs = pushforward(flow, 1.0, cu.boundary(T0))
    form = poly_form(2, 0, [0.2, 0.2], 2.0, {(): {(1, 1): 1.0, (1, 0): 0.3}})
    assert abs(cu.evaluate(lhs, form) - cu.evaluate(rhs, form)) < 1e-8


def test_solve_gte_mass_and_grid_validation():
    A = np.array([[0.0, -1.0], [1.0, 0.0]])  # rotation: isometry
    field = fl.linear_field(A, BOX)
    T0 = cu.SimplicialCurrent([[0.2, 0.0], [0.6, 0.1]], [[0, 1]], [1.0])
    traj = solve_gte(field, T0, np.linspace(0.0, 1.0, 33))
    assert len(traj.currents) == 33
    assert traj.mass_bound <= T0.mass() * np.exp(1.0) * (1 + 1e-6)
    with pytest.raises(TransportError):
        solve_gte(field, T0, [0.5, 0.25, 1.0])


def test_frozen_trajectory_residual_oracle():
    # A trajectory that ignores the field has residual |int psi| * c . grad f
    c = np.array([0.7, -0.3])
    field = fl.constant_field(c, BOX)
    x = np.array([0.1, 0.2])
    T0 = cu.DiracCurrent(x, MultiVector.scalar(2, 1.0))
    times = np.linspace(0.0, 1.0, 257)
    frozen = Trajectory(times, [T0] * times.size, T0.mass())
    psi = tf.TimeCutoff(0.5, 0.4)
    form = poly_form(2, 0, [0.0, 0.0], 1.5, {(): {(2, 0): 1.0, (0, 1): 0.4}})
    res = residual_dictionary(frozen, field, [form], psi)[0]

    fn = form.terms[0][0]
    h = 1e-6
    grad = np.array([
        (fn(x + [h, 0.0]) - fn(x - [h, 0.0])) / (2 * h),
        (fn(x + [0.0, h]) - fn(x - [0.0, h])) / (2 * h),
    ])
    psi_int = quad(psi, 0.1, 0.9, limit=200)[0]
    oracle = abs(psi_int * float(c @ grad))
    assert oracle > 1e-3  # the test form was chosen to make this visible
    assert abs(res - oracle) < 1e-6


def test_residual_refinement_decays():
    A = np.array([[0.0, -1.0], [1.0, 0.0]])
    field = fl.linear_field(A, BOX)
    T0 = cu.SimplicialCurrent([[0.2, 0.1], [0.6, 0.4]], [[0, 1]], [1.0])
    dictionary = [poly_form(2, 1, [0.2, 0.3], 0.8,
                            {(1,): {(1, 0): 1.0}, (2,): {(0, 1): 0.5}})]
    study = refinement_study(field, T0, dictionary, grids=(16, 32, 64),
                             subdivisions=16)
    finals = [r.max_residual for r in study.reports]
    assert finals[-1] < finals[0]
    assert study.slope > 1.5
    assert finals[-1] < 1e-5


def test_smooth_residual_for_dirac_line():
    field = fl.shear_field(BOX)
    T0 = cu.DiracCurrent([0.0, 0.8], MultiVector.basis(2, 2))
    dictionary = tf.build_dictionary(2, 1, BOX, seed=3, size=4)
    study = refinement_study(field, T0, dictionary, grids=(16, 64), smooth=True)
    finals = [r.max_residual for r in study.reports]
    assert finals[-1] < max(finals[0], 1e-6)


def test_smooth_residual_rejects_kink_support():
    field = fl.shear_field(BOX)
    T0 = cu.DiracCurrent([0.0, 0.0], MultiVector.basis(2, 2))  # on the kink
    traj = solve_gte(field, T0, np.linspace(0.0, 1.0, 17))
    dictionary = tf.build_dictionary(2, 1, BOX, seed=3, size=2)
    with pytest.raises(TransportError):
        smooth_residual_dictionary(traj, field, dictionary, tf.TimeCutoff(0.5, 0.4))


def test_dirac_residual_requires_smooth_form():
    field = fl.shear_field(BOX)
    T0 = cu.DiracCurrent([0.0, 0.8], MultiVector.basis(2, 2))
    traj = solve_gte(field, T0, np.linspace(0.0, 1.0, 17))
    dictionary = tf.build_dictionary(2, 1, BOX, seed=3, size=2)
    with pytest.raises(TransportError):
        residual_dictionary(traj, field, dictionary, tf.TimeCutoff(0.5, 0.4))


def test_cylinder_boundary_is_time_slices():
    # base: single point in R^1; cylinder over it is a time segment
    T0 = cu.SimplicialCurrent(np.array([[0.4]]), [[0]], [1.0], grade=0)
    cyl = spacetime_cylinder(T0, np.linspace(0.0, 1.0, 9))
    bd = cu.boundary(cyl)
    form = poly_form(2, 0, [0.5, 0.4], 2.0, {(): {(1, 1): 1.0, (0, 0): 0.3}})
    fn = form.terms[0][0]
    oracle = fn(np.array([1.0, 0.4])) - fn(np.array([0.0, 0.4]))
    assert abs(cu.evaluate(bd, form) - oracle) < 1e-12


def test_cylinder_interior_boundary_over_segment():
    # cylinder over a 1-simplex: interior boundary matches the cylinders of
    # the endpoint currents (Stokes on the sheet)
    T0 = cu.SimplicialCurrent(np.array([[0.0], [1.0]]), [[0, 1]], [1.0])
    grid = np.linspace(0.0, 1.0, 5)
    cyl = spacetime_cylinder(T0, grid)
    bd = cu.boundary(cyl)
    eta = poly_form(2, 1, [0.5, 0.5], 0.3,
                    {(1,): {(1, 0): 1.0}, (2,): {(0, 1): -0.4}})
    # eta is supported strictly inside (0,1) x (0,1): only the side walls
    # of the sheet can contribute
    side = cu.SimplicialCurrent(
        np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
        [[0, 1], [2, 3]], [-1.0, 1.0])
    assert abs(cu.evaluate(bd, eta, 16) - cu.evaluate(side, eta, 16)) < 1e-10


def test_spacetime_current_atoms():
    T0 = cu.DiracCurrent([0.3], MultiVector.scalar(1, 1.0))
    times = np.linspace(0.0, 1.0, 11)
    st = SpaceTimeCurrent(times, [T0] * 11, drift=lambda t, x: np.zeros(1))
    atoms = st.atoms()
    assert np.isclose(sum(a.weight for a in atoms), 1.0)  # total time length
    assert st.grade == 1 and st.dimension == 2


def test_approx_pushforward_converges():
    from currentflow.acapprox import ACLipFunction, Sampled1D
    from currentflow.transport import approx_pushforward_sequence

    tgrid = np.unique(np.linspace(0.0, 1.0, 4001) ** 2)
    M = np.sqrt(tgrid)
    # f(t, x) = x * exp(-sqrt(t)): AC in t with upper gradient ~ 1/(2 sqrt t)
    gc = 1.2 * np.abs(np.diff(1.0 - np.exp(-M))) / np.diff(tgrid)
    g = Sampled1D(tgrid, np.concatenate([gc, [gc[-1]]]))
    f = ACLipFunction(
        evaluator=lambda t, x: x * np.exp(-np.sqrt(t)),
        upper_gradient=g,
        lip_x=1.0,
        x_domain=(0.5, 1.5),
    )
    T0 = cu.DiracCurrent([1.0], MultiVector.scalar(1, 1.0))
    times = np.linspace(0.01, 1.0, 21)
    st = SpaceTimeCurrent(times, [T0] * times.size)
    dictionary = tf.build_dictionary(2, 1, np.array([[0.0, 1.0], [0.0, 1.5]]),
                                     seed=5, size=16)
    _, _, dists = approx_pushforward_sequence(f, st, (4, 8, 16, 32), dictionary)
    assert dists[-1] < 1e-4
    assert dists[-1] < dists[0]


def test_nonuniqueness_demo_small():
    verdict = nonuniqueness_demo(dict_seed=2, dict_size=8, grid_size=64,
                                 tolerance=1e-9, eps_list=(0.1, 0.05))
    assert verdict["same_initial_current"]
    assert verdict["distinct_for_positive_time"]
    assert abs(verdict["mass_of_difference_at_t1"] - 1.0) < 1e-9
    assert verdict["distance_of_limits_at_t0"] <= 1e-12
    # the eps-families converge to their limits as eps shrinks
    c2 = verdict["limit_convergence_2"]
    assert c2["0.05"] < c2["0.1"]
    for eps in ("0.1", "0.05"):
        assert verdict["residual_family_1"][eps] < 1e-8
        assert verdict["residual_family_2"][eps] < 1e-3  # coarse 64-cell grid
