import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import solve_ivp

from pluriflow import engine


def test_zero_field_reaches_horizon():
    traj = engine.integrate(lambda y: np.zeros_like(y), np.array([1.0, 2.0]), 5.0)
    assert traj.terminal_event == engine.HORIZON
    assert traj.final_time == 5.0
    assert_allclose(traj.final_state, [1.0, 2.0])


def test_times_strictly_increasing_and_single_terminal():
    traj = engine.integrate(lambda y: -y, np.array([1.0]), 3.0)
    assert np.all(np.diff(traj.times) > 0)
    assert len(traj.events) == 1


def test_blowup_detection_quadratic():
    traj = engine.integrate(lambda y: y * y, np.array([1.0]), 10.0)
    assert traj.terminal_event == engine.BLOWUP
    assert abs(traj.blowup.t_est - 1.0) < 1e-3
    assert abs(traj.blowup.exponent - 1.0) < 0.05


def test_fixed_point_detection_linear_decay():
    cfg = engine.IntegratorConfig(fixedpoint_norm=1e-8)
    traj = engine.integrate(lambda y: -y, np.array([1.0]), 100.0, cfg)
    assert traj.terminal_event == engine.FIXED_POINT
    assert abs(traj.final_state[0]) < 1e-7


def test_fixed_point_idempotent():
    cfg = engine.IntegratorConfig(fixedpoint_norm=1e-8)
    traj = engine.integrate(lambda y: -y, np.array([1.0]), 100.0, cfg)
    again = engine.integrate(lambda y: -y, traj.final_state, 100.0, cfg)
    assert again.terminal_event == engine.FIXED_POINT
    assert again.final_time == 0.0


def test_step_underflow_on_derivative_singularity():
    # y' = -1/(2y) reaches y = 0 at t = 1 with unbounded slope
    def f(y):
        return np.array([-0.5 / y[0]])

    traj = engine.integrate(f, np.array([1.0]), 2.0)
    assert traj.terminal_event == engine.STEP_UNDERFLOW
    assert abs(traj.final_time - 1.0) < 1e-3


def test_max_steps_raises():
    cfg = engine.IntegratorConfig(max_steps=5)
    with pytest.raises(RuntimeError):
        engine.integrate(lambda y: np.sin(y) + 1.2, np.array([0.0]), 1e6, cfg)


def test_convergence_order_is_five():
    errs = []
    hs = np.array([0.2, 0.1, 0.05, 0.025])
    for h in hs:
        cfg = engine.IntegratorConfig(fixed_step=float(h))
        traj = engine.integrate(lambda y: -y, np.array([1.0]), 1.0, cfg)
        errs.append(abs(traj.final_state[0] - np.exp(-1.0)))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert abs(slope - 5.0) < 0.2


def test_dense_output_accuracy_and_times():
    samples = np.linspace(0.0, 4.0, 17)
    cfg = engine.IntegratorConfig(rel_tol=1e-8, abs_tol=1e-10, sample_times=samples)
    traj = engine.integrate(lambda y: -y, np.array([1.0]), 4.0, cfg)
    assert_allclose(traj.times, samples)
    assert max(abs(traj.states[i, 0] - np.exp(-t)) for i, t in enumerate(samples)) < 1e-8


def test_against_scipy_oracle():
    def f(y):
        return np.array([y[1], -np.sin(y[0]) - 0.1 * y[1]])

    y0 = np.array([1.2, 0.0])
    cfg = engine.IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13)
    traj = engine.integrate(f, y0, 20.0, cfg)
    ref = solve_ivp(lambda t, y: f(y), (0, 20.0), y0, rtol=1e-12, atol=1e-13, dense_output=True)
    assert np.abs(traj.final_state - ref.sol(20.0)).max() < 1e-8


def test_normalize_projection_radial_and_tangential():
    x = np.array([3.0, 4.0])
    assert_allclose(engine.normalize_projection(2.0 * x, x), 0.0, atol=1e-15)
    tang = np.array([-4.0, 3.0])
    assert_allclose(engine.normalize_projection(tang, x), tang)
    with pytest.raises(ValueError):
        engine.normalize_projection(x, np.zeros(2))


def test_norm_conservation_drift():
    # rotation field plus a deliberate radial component that projection removes
    def f(y):
        raw = np.array([-y[1] + 0.5 * y[0], y[0] + 0.5 * y[1]])
        return engine.normalize_projection(raw, y)

    cfg = engine.IntegratorConfig(conserve_norm=1.0, max_step=0.05)
    traj = engine.integrate(f, np.array([1.0, 0.0]), 300.0, cfg)
    assert traj.n_accepted >= 5000
    assert abs(np.linalg.norm(traj.final_state) - 1.0) < 1e-12


def test_invalid_config_rejected():
    with pytest.raises(ValueError):
        engine.IntegratorConfig(rel_tol=0.0)


def test_blowup_fit_on_square_root_profile():
    # |y| = (T - t)^(-1/2): the exponent the bracket flows produce
    ts = np.linspace(0.0, 0.49995, 400)
    norms = (0.5 - ts) ** -0.5
    fit = engine.estimate_blowup_time(ts, norms)
    assert abs(fit.t_est - 0.5) < 1e-6
    assert abs(fit.exponent - 0.5) < 1e-3
