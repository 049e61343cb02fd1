"""Energy and quotient functionals tracked along trajectories.

With v = u' and the Euclidean coefficient norms, the sampled quantities are

    E0     = (|v|^2 + |A^{1/2}u|^2) / 2
    F0     = E0 + F(u)                      (nonincreasing: F0' = -|v|^2)
    E_big  = |v|^2 + |A^{1/2}u|^2 + 2 F(u)  (= 2 F0)
    E_hat  = |v|^2 + |u|^2 + |A^{1/2}u|^2 + F(u)
    E_tilde= |v|^2 + |u|^2/2 + |A^{1/2}u|^2 + 2 F(u) + <v, u>
    E_eps  = E_big + eps * E_big^beta * <v, u>,   beta = p/(p+2)
    G      = (|v|^2 + |A^{1/2}u|^2) / (2 |u|^{2p+2})
    G_hat  = G + delta * <v, Qu> / |u|^{2p+2}
    Q_p    = <Au, u> / |u|^{2p+2}

Quotient fields carry NaN when u = 0 (the degenerate-input contract).
E_tilde and E_hat satisfy E_hat/8 <= E_tilde <= 2*E_hat, E_tilde is
nonincreasing, and E_hat stays below 16 times its initial value.

Sampled monotonicity is only exact up to the splitting error, so monotone
checks allow 10*dt^3 per step, accounted as 10*dt^2 per unit time (actual
step sizes never exceed dt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .integrator import Trajectory
from .spectral import Basis, Nonlinearity, State, potential_F

#: CSV column order (and EnergySample field order up to the trailing extras)
CSV_COLUMNS = (
    "t", "norm_u", "norm_Pu", "norm_Qu", "norm_v", "norm_A12u", "F_pot",
    "E0", "F0", "E_tilde", "E_hat_basic", "E_big", "E_hat_eps",
    "G", "G_hat", "Q_p",
)

#: per-step monotonicity allowance, as a multiple of dt^3
MONOTONE_TOL_FACTOR = 10.0


@dataclass(frozen=True)
class EnergySample:
    t: float
    norm_u: float
    norm_Pu: float
    norm_Qu: float
    norm_v: float
    norm_A12u: float
    F_pot: float
    E0: float
    F0: float
    E_tilde: float
    E_hat_basic: float
    E_big: float
    E_hat_eps: float
    G: float
    G_hat: float
    Q_p: float
    vu: float  # <u', u>; not serialized


assert tuple(f.name for f in fields(EnergySample))[: len(CSV_COLUMNS)] == CSV_COLUMNS


def max_delta(nu: float) -> float:
    """Largest admissible mixing weight delta = nu/(2*nu + 1) (1/2 at nu = inf)."""
    return 0.5 if math.isinf(nu) else nu / (2.0 * nu + 1.0)


def _check_delta(basis: Basis, delta: float) -> float:
    cap = max_delta(basis.nu)
    if not (0.0 < delta <= cap * (1.0 + 1e-12)):
        raise ValueError(f"delta must lie in (0, {cap:.6g}], got {delta}")
    return float(delta)


def sample_energies(
    basis: Basis,
    nonlin: Nonlinearity,
    state: State,
    eps: float,
    delta: float,
) -> EnergySample:
    """Evaluate every tracked functional at one state."""
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    delta = _check_delta(basis, delta)
    a, b = state.a, state.b
    mask = basis.kernel_mask
    p = nonlin.p

    u2 = float(a @ a)
    v2 = float(b @ b)
    a12u2 = float((basis.eigenvalues * a) @ a)
    pu2 = float(a[mask] @ a[mask])
    qu2 = float(a[~mask] @ a[~mask])
    f_pot = potential_F(basis, nonlin, a)
    vu = float(b @ a)

    e0 = 0.5 * (v2 + a12u2)
    f0 = e0 + f_pot
    e_big = v2 + a12u2 + 2.0 * f_pot
    e_hat = v2 + u2 + a12u2 + f_pot
    e_tilde = v2 + 0.5 * u2 + a12u2 + 2.0 * f_pot + vu
    beta = p / (p + 2.0)
    e_eps = e_big + eps * e_big**beta * vu

    if u2 == 0.0:
        g = g_hat = q_p = math.nan
    else:
        denom = u2 ** (p + 1.0)
        g = 0.5 * (v2 + a12u2) / denom
        vqu = float(b[~mask] @ a[~mask])
        g_hat = g + delta * vqu / denom
        q_p = a12u2 / denom

    return EnergySample(
        t=state.t,
        norm_u=math.sqrt(u2), norm_Pu=math.sqrt(pu2), norm_Qu=math.sqrt(qu2),
        norm_v=math.sqrt(v2), norm_A12u=math.sqrt(a12u2),
        F_pot=f_pot, E0=e0, F0=f0, E_tilde=e_tilde, E_hat_basic=e_hat,
        E_big=e_big, E_hat_eps=e_eps, G=g, G_hat=g_hat, Q_p=q_p, vu=vu,
    )


def energy_series(traj: Trajectory, eps: float, delta: float) -> list[EnergySample]:
    basis, nonlin = traj.problem.basis, traj.problem.nonlinearity
    return [
        sample_energies(basis, nonlin, traj.state(i), eps, delta)
        for i in range(len(traj))
    ]


def segment_tolerances(times: np.ndarray, dt: float) -> np.ndarray:
    """Monotonicity allowance per inter-sample interval (10*dt^3 per step)."""
    return MONOTONE_TOL_FACTOR * dt * dt * np.diff(np.asarray(times, dtype=float))


@dataclass(frozen=True)
class EpsilonSelection:
    eps: float
    beta: float
    valid: bool
    scan_grid: tuple[float, ...]


def _epsilon_arrays(traj: Trajectory):
    basis, nonlin = traj.problem.basis, traj.problem.nonlinearity
    beta = nonlin.p / (nonlin.p + 2.0)
    mu = basis.eigenvalues
    v2 = np.einsum("ij,ij->i", traj.coeff_v, traj.coeff_v)
    a12u2 = np.einsum("ij,ij->i", traj.coeff_u * mu, traj.coeff_u)
    f_pot = np.array([
        potential_F(basis, nonlin, traj.coeff_u[i]) for i in range(len(traj))
    ])
    e_big = v2 + a12u2 + 2.0 * f_pot
    vu = np.einsum("ij,ij->i", traj.coeff_v, traj.coeff_u)
    tols = segment_tolerances(traj.times, traj.config.dt)
    return e_big, e_big**beta * vu, tols, beta


def epsilon_conditions(traj: Trajectory, eps: float) -> tuple[bool, bool]:
    """(sandwich, monotone) state of E_eps for a given eps at every sample."""
    e_big, perturb, tols, _ = _epsilon_arrays(traj)
    e_eps = e_big + eps * perturb
    sandwich = bool(np.all(e_eps >= 0.5 * e_big) and np.all(e_eps <= 2.0 * e_big))
    monotone = bool(np.all(np.diff(e_eps) <= tols))
    return sandwich, monotone


def select_epsilon(traj: Trajectory) -> EpsilonSelection:
    """Largest eps in {2^-1, ..., 2^-20} keeping E_eps sandwiched and monotone.

    Conditions, checked at every sample: E_big/2 <= E_eps <= 2*E_big, and
    E_eps nonincreasing within the splitting tolerance.  Returns eps = 0
    with valid=False when no grid value qualifies.
    """
    e_big, perturb, tols, beta = _epsilon_arrays(traj)
    tested: list[float] = []
    for k in range(1, 21):
        eps = 2.0**-k
        tested.append(eps)
        e_eps = e_big + eps * perturb
        sandwich = np.all(e_eps >= 0.5 * e_big) and np.all(e_eps <= 2.0 * e_big)
        monotone = np.all(np.diff(e_eps) <= tols)
        if sandwich and monotone:
            return EpsilonSelection(eps, beta, True, tuple(tested))
    return EpsilonSelection(0.0, beta, False, tuple(tested))


@dataclass(frozen=True)
class BasicBoundReport:
    ok: bool
    max_ratio: float          # max E_hat(t) / E_hat(0)
    ratio_bound: float        # 16
    worst_ratio_time: float
    tilde_monotone_ok: bool
    f0_monotone_ok: bool
    sandwich_ok: bool         # E_hat/8 <= E_tilde <= 2*E_hat
    n_samples: int

    def as_text(self) -> str:
        return "\n".join(f"{k}={v}" for k, v in vars(self).items())


def check_basic_bound(traj: Trajectory) -> BasicBoundReport:
    """Verify the a-priori 16x bound, energy monotonicity and the sandwich."""
    samples = energy_series(traj, eps=0.0, delta=max_delta(traj.problem.basis.nu))
    e_hat = np.array([s.E_hat_basic for s in samples])
    e_tilde = np.array([s.E_tilde for s in samples])
    f0 = np.array([s.F0 for s in samples])
    tols = segment_tolerances(traj.times, traj.config.dt)

    if e_hat[0] == 0.0:
        max_ratio = 0.0 if np.all(e_hat == 0.0) else math.inf
        worst_t = float(traj.times[0])
    else:
        ratios = e_hat / e_hat[0]
        i = int(np.argmax(ratios))
        max_ratio = float(ratios[i])
        worst_t = float(traj.times[i])

    slack = 1e-12
    tilde_ok = bool(np.all(np.diff(e_tilde) <= tols))
    f0_ok = bool(np.all(np.diff(f0) <= tols))
    sandwich_ok = bool(
        np.all(e_tilde >= e_hat / 8.0 * (1.0 - slack))
        and np.all(e_tilde <= 2.0 * e_hat * (1.0 + slack))
    )
    ratio_ok = max_ratio <= 16.0 * (1.0 + slack)
    return BasicBoundReport(
        ok=ratio_ok and tilde_ok and f0_ok and sandwich_ok,
        max_ratio=max_ratio,
        ratio_bound=16.0,
        worst_ratio_time=worst_t,
        tilde_monotone_ok=tilde_ok,
        f0_monotone_ok=f0_ok,
        sandwich_ok=sandwich_ok,
        n_samples=len(samples),
    )


def norm_energy_ratio(samples: list[EnergySample], p: float) -> tuple[float, float]:
    """Calibrate |u|^{p+2} <= c1 * E_big at t = 0 and report the worst excess.

    Returns (c1, max_excess) with max_excess = max_t ratio(t)/c1.  Meaningful
    for runs started from rest at kernel data, where the shape of F relative
    to |u|^{p+2} drifts only by the (small) range component.
    """
    first = samples[0]
    if first.E_big == 0.0:
        return 0.0, 0.0
    c1 = first.norm_u ** (p + 2.0) / first.E_big
    if c1 == 0.0:
        return 0.0, 0.0
    worst = 0.0
    for s in samples:
        if s.E_big > 0.0:
            worst = max(worst, s.norm_u ** (p + 2.0) / s.E_big / c1)
    return c1, worst
