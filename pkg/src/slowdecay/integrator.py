"""Time integration: exact linear propagation per mode plus Strang kicks.

Each mode of the linear part solves w'' + w' + mu*w = 0 exactly through the
2x2 matrix exponential of [[0, 1], [-mu, -1]].  With D = 1 - 4*mu and
omega = sqrt(|D|)/2 the entries are

    m11 = E_c + E_s/2,   m12 = E_s,   m21 = -mu*E_s,   m22 = E_c - E_s/2,

where E_c = exp(-h/2)*cosh(omega*h) and E_s = exp(-h/2)*sinh(omega*h)/omega
for D > 0, the cos/sin analogues for D < 0, and a power series in D/4 around
the double root at mu = 1/4.  Both characteristic roots have nonpositive real
part, so the propagator is evaluated from decaying exponentials only and is
stable for arbitrarily large steps and eigenvalues.

A full step of size h is the Strang composition: half linear step, velocity
kick b -= h * grad F(u), half linear step (global order 2).  A classical RK4
scheme on the full right-hand side is kept for short-horizon cross checks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .spectral import Basis, Nonlinearity, Problem, State, gradient_fn

#: width of the series branch around the double root D = 1 - 4*mu = 0
_DOUBLE_ROOT_BAND = 1e-8


class Sampling(enum.Enum):
    LINEAR = "linear"
    LOG = "log"


class Scheme(enum.Enum):
    STRANG_EXACT_LINEAR = "strang"
    RK4_REFERENCE = "rk4"


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float
    dt: float = 0.05
    sampling: Sampling = Sampling.LOG
    sample_count: int = 400
    scheme: Scheme = Scheme.STRANG_EXACT_LINEAR

    def __post_init__(self) -> None:
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.dt > self.t_end:
            raise ValueError(f"dt = {self.dt} exceeds t_end = {self.t_end}")
        if self.sample_count < 2:
            raise ValueError(f"sample_count must be >= 2, got {self.sample_count}")


class IntegrationDivergedError(RuntimeError):
    """Non-finite state encountered; ``t_last`` is the last valid sample time."""

    def __init__(self, t_last: float):
        super().__init__(f"integration diverged after t = {t_last:g}")
        self.t_last = t_last


def sample_times(config: IntegratorConfig) -> np.ndarray:
    """Sampling schedule on [0, t_end]; LOG is geometric in 1 + t."""
    n = config.sample_count
    if config.sampling is Sampling.LINEAR:
        times = np.linspace(0.0, config.t_end, n)
    else:
        times = np.power(1.0 + config.t_end, np.arange(n) / (n - 1)) - 1.0
        times[0] = 0.0
        times[-1] = config.t_end
    return np.unique(times)


def _propagator(mu: np.ndarray, h: float):
    """Entries (m11, m12, m21, m22) of the exact flow of w'' + w' + mu*w = 0."""
    mu = np.asarray(mu, dtype=float)
    d = 1.0 - 4.0 * mu
    ec = np.empty_like(mu)
    es = np.empty_like(mu)

    real = d > _DOUBLE_ROOT_BAND
    if np.any(real):
        sq = np.sqrt(d[real])
        ep = np.exp((-1.0 + sq) * (h / 2.0))
        em = np.exp((-1.0 - sq) * (h / 2.0))
        ec[real] = (ep + em) / 2.0
        es[real] = (ep - em) / sq

    osc = d < -_DOUBLE_ROOT_BAND
    if np.any(osc):
        w = np.sqrt(-d[osc]) / 2.0
        damp = math.exp(-h / 2.0)
        ec[osc] = damp * np.cos(w * h)
        es[osc] = damp * np.sin(w * h) / w

    near = ~(real | osc)
    if np.any(near):
        # series in q = D/4 = omega^2 (signed), accurate through q^2
        q = d[near] / 4.0
        h2 = h * h
        damp = math.exp(-h / 2.0)
        ec[near] = damp * (1.0 + q * h2 / 2.0 + q * q * h2 * h2 / 24.0)
        es[near] = damp * h * (1.0 + q * h2 / 6.0 + q * q * h2 * h2 / 120.0)

    return ec + es / 2.0, es, -mu * es, ec - es / 2.0


def linear_half_step(basis: Basis, state: State, h: float) -> State:
    """Advance the linear flow (grad F frozen to zero) exactly by time h."""
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    m11, m12, m21, m22 = _propagator(basis.eigenvalues, h)
    a, b = state.a, state.b
    return State(state.t + h, m11 * a + m12 * b, m21 * a + m22 * b)


def step(basis: Basis, nonlin: Nonlinearity, state: State, dt: float) -> State:
    """One Strang step: linear dt/2, kick b -= dt*grad F(u), linear dt/2."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    grad = gradient_fn(basis, nonlin)
    m11, m12, m21, m22 = _propagator(basis.eigenvalues, dt / 2.0)
    a, b = state.a, state.b
    a, b = m11 * a + m12 * b, m21 * a + m22 * b
    b = b - dt * grad(a)
    a, b = m11 * a + m12 * b, m21 * a + m22 * b
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise IntegrationDivergedError(state.t)
    return State(state.t + dt, a, b)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled trajectory: times plus coefficient arrays of shape (S, N)."""

    problem: Problem
    config: IntegratorConfig
    times: np.ndarray
    coeff_u: np.ndarray
    coeff_v: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> State:
        return State(float(self.times[i]), self.coeff_u[i], self.coeff_v[i])

    def states(self):
        return [self.state(i) for i in range(len(self.times))]


def _advance_strang(grad, mu: np.ndarray, a, b, n_steps: int, h: float):
    m11, m12, m21, m22 = _propagator(mu, h / 2.0)
    for _ in range(n_steps):
        a, b = m11 * a + m12 * b, m21 * a + m22 * b
        b = b - h * grad(a)
        a, b = m11 * a + m12 * b, m21 * a + m22 * b
    return a, b


def _advance_strang_scalar(p: float, mu0: float, a: float, b: float,
                           n_steps: int, h: float):
    # single-mode fast path: all nonlinearity kinds reduce to |a|^p * a
    e11, e12, e21, e22 = (float(m[0]) for m in _propagator(np.array([mu0]), h / 2.0))
    for _ in range(n_steps):
        a, b = e11 * a + e12 * b, e21 * a + e22 * b
        b -= h * abs(a) ** p * a
        a, b = e11 * a + e12 * b, e21 * a + e22 * b
    return a, b


def _advance_rk4(grad, mu: np.ndarray, a, b, n_steps: int, h: float):
    def rhs(a, b):
        return b, -b - mu * a - grad(a)

    for _ in range(n_steps):
        k1a, k1b = rhs(a, b)
        k2a, k2b = rhs(a + 0.5 * h * k1a, b + 0.5 * h * k1b)
        k3a, k3b = rhs(a + 0.5 * h * k2a, b + 0.5 * h * k2b)
        k4a, k4b = rhs(a + h * k3a, b + h * k3b)
        a = a + (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        b = b + (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
    return a, b


def run(problem: Problem, config: IntegratorConfig, *observers) -> Trajectory:
    """Integrate from the initial data to t_end, sampling on the schedule.

    Sample times are hit exactly: each inter-sample interval is subdivided
    into equal steps of size at most dt.  Observers are called with the
    State at every sample.  Deterministic for fixed inputs; raises
    IntegrationDivergedError on non-finite state.
    """
    basis, nonlin = problem.basis, problem.nonlinearity
    times = sample_times(config)
    n_samples = len(times)
    n_modes = basis.n_modes

    scalar_fast = (
        config.scheme is Scheme.STRANG_EXACT_LINEAR and n_modes == 1
    )
    grad = None if scalar_fast else gradient_fn(basis, nonlin)

    coeff_u = np.empty((n_samples, n_modes))
    coeff_v = np.empty((n_samples, n_modes))
    a = problem.u0.astype(float).copy()
    b = problem.u1.astype(float).copy()

    def emit(i: int) -> None:
        coeff_u[i] = a
        coeff_v[i] = b
        if observers:
            state = State(float(times[i]), a.copy(), b.copy())
            for obs in observers:
                obs(state)

    emit(0)
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n_samples):
            delta = float(times[i] - times[i - 1])
            n_steps = max(1, int(math.ceil(delta / config.dt - 1e-12)))
            h = delta / n_steps
            try:
                if scalar_fast:
                    a0, b0 = _advance_strang_scalar(
                        nonlin.p, float(basis.eigenvalues[0]),
                        float(a[0]), float(b[0]), n_steps, h,
                    )
                    a, b = np.array([a0]), np.array([b0])
                elif config.scheme is Scheme.STRANG_EXACT_LINEAR:
                    a, b = _advance_strang(grad, basis.eigenvalues, a, b, n_steps, h)
                else:
                    a, b = _advance_rk4(grad, basis.eigenvalues, a, b, n_steps, h)
            except OverflowError:
                raise IntegrationDivergedError(float(times[i - 1])) from None
            if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
                raise IntegrationDivergedError(float(times[i - 1]))
            emit(i)

    coeff_u.setflags(write=False)
    coeff_v.setflags(write=False)
    return Trajectory(problem, config, times, coeff_u, coeff_v)
