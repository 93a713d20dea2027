"""Adaptive ODE infrastructure shared by all flows.

Dormand-Prince 5(4) embedded pair with PI step-size control, quartic dense
output, and terminal-event detection (horizon, fixed point, blow-up, step
underflow).  The engine is dimension-agnostic: clients encode their state as
a flat real vector and own the decoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "BlowupFit",
    "integrate",
    "normalize_projection",
    "estimate_blowup_time",
    "HORIZON",
    "FIXED_POINT",
    "BLOWUP",
    "STEP_UNDERFLOW",
]

HORIZON = "HORIZON"
FIXED_POINT = "FIXED_POINT"
BLOWUP = "BLOWUP"
STEP_UNDERFLOW = "STEP_UNDERFLOW"

# Dormand-Prince 5(4) tableau (FSAL, 7 stages).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# Quartic dense-output polynomial coefficients (Shampine's interpolant).
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_BETA = 0.04  # PI stabilization exponent
_EXPO = 0.2 - 0.75 * _BETA


@dataclass
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 1_000_000
    max_step: float = np.inf
    first_step: float | None = None
    fixed_step: float | None = None  # disables adaptivity when set
    blowup_norm: float = 1e12
    fixedpoint_norm: float = 0.0  # 0 disables fixed-point detection
    fixedpoint_sustain: int = 10
    sample_times: np.ndarray | None = None
    conserve_norm: float | None = None  # renormalize |y| to this value each accepted step

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class BlowupFit:
    t_est: float
    exponent: float
    fit_residual: float


@dataclass
class Trajectory:
    """Time-stamped states plus integration metadata; exactly one terminal event."""

    times: np.ndarray
    states: np.ndarray
    events: list = field(default_factory=list)
    n_accepted: int = 0
    n_rejected: int = 0
    blowup: BlowupFit | None = None
    step_times: np.ndarray | None = None  # accepted step times (diagnostics)
    step_norms: np.ndarray | None = None

    @property
    def terminal_event(self) -> str:
        return self.events[-1][1]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])


def normalize_projection(f: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Remove the radial component of f at x so the Euclidean norm is conserved."""
    nx2 = float(np.dot(x, x))
    if nx2 == 0.0:
        raise ValueError("cannot project at the zero state")
    return f - (np.dot(f, x) / nx2) * x


def _rms(v):
    return float(np.sqrt(np.mean(v * v)))


def _initial_step(field_fn, x0, f0, rel_tol, abs_tol, max_step, horizon):
    scale = abs_tol + rel_tol * np.abs(x0)
    d0, d1 = _rms(x0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = x0 + h0 * f0
    f1 = field_fn(y1)
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step, horizon)


def integrate(field_fn, x0, horizon: float, config: IntegratorConfig | None = None) -> Trajectory:
    """Integrate y' = field_fn(y) from t=0 to the horizon or a terminal event."""
    cfg = config or IntegratorConfig()
    y = np.array(x0, dtype=float)
    n = y.size
    t = 0.0
    f = field_fn(y)

    samples = None
    s_ptr = 0
    if cfg.sample_times is not None:
        samples = np.sort(np.asarray(cfg.sample_times, dtype=float))

    rec_t, rec_y = [], []

    def record(tt, yy):
        rec_t.append(tt)
        rec_y.append(np.array(yy))

    if samples is None:
        record(t, y)
    else:
        while s_ptr < samples.size and samples[s_ptr] <= t:
            record(samples[s_ptr], y)
            s_ptr += 1

    step_t, step_n = [t], [float(np.linalg.norm(y))]
    events = []
    n_acc = n_rej = 0
    fp_count = 0

    # immediate fixed point (idempotent re-integration from a terminal state)
    if cfg.fixedpoint_norm > 0 and np.linalg.norm(f) < cfg.fixedpoint_norm:
        events.append((t, FIXED_POINT))
        return _finish(rec_t, rec_y, t, y, events, n_acc, n_rej, step_t, step_n, None)

    if cfg.fixed_step is not None:
        h = float(cfg.fixed_step)
    elif cfg.first_step is not None:
        h = float(cfg.first_step)
    else:
        h = _initial_step(field_fn, y, f, cfg.rel_tol, cfg.abs_tol, cfg.max_step, horizon)

    facold = 1e-4
    rejected_last = False
    k = np.empty((7, n))
    blow = None

    while t < horizon:
        if n_acc + n_rej >= cfg.max_steps:
            raise RuntimeError(f"max_steps={cfg.max_steps} exceeded at t={t:g}")
        h = min(h, cfg.max_step, horizon - t)
        final_step = h >= horizon - t
        if h < 16 * np.finfo(float).eps * max(abs(t), 1.0):
            events.append((t, STEP_UNDERFLOW))
            break

        k[0] = f
        for s in range(1, 7):
            k[s] = field_fn(y + h * (k[:s].T @ _A[s]))
        y1 = y + h * (k.T @ _B)
        # FSAL: stage 7 is the field at the proposed end point
        k[6] = field_fn(y1)

        if cfg.fixed_step is None:
            scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y1))
            err = _rms(h * (k.T @ _E) / scale)
        else:
            err = 0.0

        if err > 1.0:
            n_rej += 1
            h *= max(_MIN_FACTOR, _SAFETY * err**-0.2)
            rejected_last = True
            continue

        # accepted
        n_acc += 1
        t_old, y_old, h_old = t, y, h
        k_old = k.copy()
        t = horizon if final_step else t_old + h_old
        y = y1
        f = k[6]
        if cfg.conserve_norm is not None:
            ny = np.linalg.norm(y)
            if ny > 0:
                y = y * (cfg.conserve_norm / ny)
            f = field_fn(y)

        if cfg.fixed_step is None:
            if err == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = min(_MAX_FACTOR, _SAFETY * err**-_EXPO * facold**_BETA)
            if rejected_last:
                factor = min(factor, 1.0)
            h = h_old * max(_MIN_FACTOR, factor)
            facold = max(err, 1e-4)
            rejected_last = False

        ny = float(np.linalg.norm(y))
        step_t.append(t)
        step_n.append(ny)

        if samples is None:
            record(t, y)
        else:
            while s_ptr < samples.size and samples[s_ptr] <= t + 1e-14 * max(1.0, abs(t)):
                th = (samples[s_ptr] - t_old) / h_old
                q = k_old.T @ _P
                p = np.array([th, th**2, th**3, th**4])
                record(samples[s_ptr], y_old + h_old * (q @ p))
                s_ptr += 1

        if ny > cfg.blowup_norm:
            events.append((t, BLOWUP))
            blow = estimate_blowup_time(np.array(step_t), np.array(step_n))
            break

        if cfg.fixedpoint_norm > 0:
            if np.linalg.norm(f) < cfg.fixedpoint_norm:
                fp_count += 1
            else:
                fp_count = 0
            if fp_count >= cfg.fixedpoint_sustain:
                events.append((t, FIXED_POINT))
                break
    else:
        events.append((t, HORIZON))

    return _finish(rec_t, rec_y, t, y, events, n_acc, n_rej, step_t, step_n, blow)


def _finish(rec_t, rec_y, t, y, events, n_acc, n_rej, step_t, step_n, blow):
    if not rec_t or abs(rec_t[-1] - t) > 1e-14 * max(1.0, abs(t)):
        rec_t.append(t)
        rec_y.append(np.array(y))
    return Trajectory(
        times=np.array(rec_t),
        states=np.array(rec_y),
        events=events,
        n_accepted=n_acc,
        n_rejected=n_rej,
        blowup=blow,
        step_times=np.array(step_t),
        step_norms=np.array(step_n),
    )


def estimate_blowup_time(times: np.ndarray, norms: np.ndarray) -> BlowupFit:
    """Fit |state| ~ C (T - t)^(-p) over the last decade of growth and report T.

    The exponent and T are found by profile least squares: for each candidate
    T the model is linear in log(T - t), and T minimizes the fit residual.
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    mask = norms >= norms[-1] / 10.0
    if mask.sum() < 4:
        mask = np.zeros_like(mask)
        mask[-min(4, len(norms)) :] = True
    ts, ns = times[mask], norms[mask]
    t_end = times[-1]
    logn = np.log(ns)

    # first-guess distance to blow-up from the terminal logarithmic slope
    q = (logn[-1] - logn[-2]) / max(ts[-1] - ts[-2], np.finfo(float).tiny)
    u0 = max(1.0 / max(q, np.finfo(float).tiny), 1e3 * np.finfo(float).eps * max(abs(t_end), 1.0))

    def resid(log_u):
        u = np.exp(log_u)
        x = np.log(u + (t_end - ts))
        a = np.vstack([np.ones_like(x), -x]).T
        coef, *_ = np.linalg.lstsq(a, logn, rcond=None)
        return _rms(a @ coef - logn), coef[1]

    grid = np.log(u0) + np.linspace(-14, 7, 64)
    vals = [resid(g)[0] for g in grid]
    g0 = grid[int(np.argmin(vals))]
    res = minimize_scalar(lambda g: resid(g)[0], bracket=(g0 - 1.0, g0, g0 + 1.0))
    g_best = float(res.x) if res.success else g0
    r_best, p_best = resid(g_best)
    return BlowupFit(t_est=t_end + float(np.exp(g_best)), exponent=float(p_best), fit_residual=r_best)
