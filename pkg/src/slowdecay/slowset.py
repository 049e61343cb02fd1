"""Explicit certificate for membership in the open set of slow initial data.

For initial data (u0, u1) with u0 != 0, the certificate constants are

    nu      smallest nonzero eigenvalue of A (coercivity on the range)
    delta   mixing weight, at most nu/(2*nu + 1)   (hence <= 1, <= sqrt(nu)/2)
    sigma0  4 * sqrt(|u1|^2 + |u0|^2 + |A^{1/2}u0|^2 + F(u0))
    sigma1  (|u1|^2/2 + |A^{1/2}u0|^2/2 + delta*|<u1, Qu0>|) / |u0|^{2p+2}
            + 128 R^2 / delta^2

where R bounds |grad F(u)| <= R*(|u|^{p+1} + |A^{1/2}u|^{1+alpha}) on the
ball |u|_{D(A^{1/2})} <= rho.  Membership requires the three smallness
conditions

    sigma0 < rho,    2 sigma0^alpha R < delta/4,
    4 (p+1) sigma0^p sqrt(sigma1) < delta/32,

which define an open set containing all small kernel data at rest.  Along a
certified trajectory u never vanishes, G stays below 2*sigma1, G_hat obeys
the exponential-plus-constant envelope

    G_hat(t) <= (G_hat(0) - 128 R^2/delta^2) exp(-delta t/32) + 128 R^2/delta^2,

and y = |u|^2 dominates the closed-form solution of y' = -4 sqrt(sigma1) y^{1+p/2}:

    y(t) >= (y0^{-p/2} + 2 p sqrt(sigma1) t)^{-2/p}.

The projection nonlinearities satisfy the gradient bound with R = 1 exactly;
for local powers R is estimated by randomized sampling on the rho-ball with
a 1.5x safety factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energies import EnergySample, max_delta
from .spectral import (
    Basis,
    Nonlinearity,
    NonlinearityKind,
    gradient_fn,
    graph_norm,
    potential_F,
)


@dataclass(frozen=True)
class SlowCertificate:
    nu: float
    delta: float
    rho: float
    R: float
    alpha: float
    p: float
    sigma0: float
    sigma1: float
    cond1_margin: float  # rho - sigma0
    cond2_margin: float  # delta/4 - 2 sigma0^alpha R
    cond3_margin: float  # delta/32 - 4 (p+1) sigma0^p sqrt(sigma1)
    member: bool
    y0: float            # |u0|^2
    envelope_rate: float  # 2 p sqrt(sigma1)

    def margins(self) -> tuple[float, float, float]:
        return (self.cond1_margin, self.cond2_margin, self.cond3_margin)

    def relative_margins(self) -> tuple[float, float, float]:
        """Margins normalized by each condition's right-hand side."""
        return (
            self.cond1_margin / self.rho,
            self.cond2_margin / (self.delta / 4.0),
            self.cond3_margin / (self.delta / 32.0),
        )

    def member_with_margin(self, fraction: float) -> bool:
        return all(m >= fraction for m in self.relative_margins())

    def as_text(self) -> str:
        return "\n".join(f"{k}={v}" for k, v in vars(self).items())


def compute_certificate(
    basis: Basis,
    nonlin: Nonlinearity,
    u0: np.ndarray,
    u1: np.ndarray,
    rho: float,
    R: float,
    alpha: float,
    delta: float | None = None,
) -> SlowCertificate:
    """Evaluate the explicit constants and smallness conditions for (u0, u1).

    ``delta`` defaults to the maximal admissible value nu/(2*nu + 1); it may
    only be overridden downward.  Raises for u0 = 0, where the constants are
    undefined.
    """
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    u0sq = float(u0 @ u0)
    if u0sq == 0.0:
        raise ValueError("certificate requires u0 != 0")
    for name, val in (("rho", rho), ("R", R), ("alpha", alpha)):
        if not (val > 0 and math.isfinite(val)):
            raise ValueError(f"{name} must be positive, got {val}")

    nu = basis.nu
    cap = max_delta(nu)
    if delta is None:
        delta = cap
    elif not (0.0 < delta <= cap * (1.0 + 1e-12)):
        raise ValueError(f"delta must lie in (0, {cap:.6g}], got {delta}")

    p = nonlin.p
    mu = basis.eigenvalues
    mask = basis.kernel_mask
    u1sq = float(u1 @ u1)
    a12sq = float((mu * u0) @ u0)
    f0 = potential_F(basis, nonlin, u0)
    vqu = float(u1[~mask] @ u0[~mask])

    sigma0 = 4.0 * math.sqrt(u1sq + u0sq + a12sq + f0)
    sigma1 = (
        (0.5 * u1sq + 0.5 * a12sq + delta * abs(vqu)) / u0sq ** (p + 1.0)
        + 128.0 * R * R / (delta * delta)
    )

    m1 = rho - sigma0
    m2 = delta / 4.0 - 2.0 * sigma0**alpha * R
    m3 = delta / 32.0 - 4.0 * (p + 1.0) * sigma0**p * math.sqrt(sigma1)
    return SlowCertificate(
        nu=nu, delta=float(delta), rho=float(rho), R=float(R),
        alpha=float(alpha), p=p, sigma0=sigma0, sigma1=sigma1,
        cond1_margin=m1, cond2_margin=m2, cond3_margin=m3,
        member=bool(m1 > 0 and m2 > 0 and m3 > 0),
        y0=u0sq, envelope_rate=2.0 * p * math.sqrt(sigma1),
    )


def estimate_R(
    basis: Basis,
    nonlin: Nonlinearity,
    rho: float,
    alpha: float,
    n_samples: int,
    seed: int = 0,
) -> float:
    """Gradient-bound constant R on the ball |u|_{D(A^{1/2})} <= rho.

    Projection nonlinearities satisfy the bound with R = 1 exactly.  For
    local powers, R is 1.5x the largest sampled ratio
    |grad F(u)| / (|u|^{p+1} + |A^{1/2}u|^{1+alpha}) over pure-kernel probes
    plus ``n_samples`` seeded random states.
    """
    if nonlin.kind is not NonlinearityKind.LOCAL_POWER:
        return 1.0
    if n_samples < 100:
        raise ValueError(f"n_samples must be >= 100, got {n_samples}")
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")

    grad = gradient_fn(basis, nonlin)
    mu = basis.eigenvalues
    p = nonlin.p

    def ratio(a: np.ndarray) -> float:
        usq = float(a @ a)
        a12 = math.sqrt(float((mu * a) @ a))
        denom = usq ** ((p + 1.0) / 2.0) + a12 ** (1.0 + alpha)
        g = grad(a)
        return math.sqrt(float(g @ g)) / denom

    probes = []
    for k in basis.kernel_indices:
        e = np.zeros(basis.n_modes)
        e[k] = 1.0
        for r in (0.1, 0.25, 0.5, 0.75, 1.0):
            probes.append(r * rho * e / graph_norm(basis, e))

    rng = np.random.default_rng(seed)
    for _ in range(n_samples):
        g = rng.standard_normal(basis.n_modes)
        r = rho * rng.uniform(0.05, 1.0)
        probes.append(g * (r / graph_norm(basis, g)))

    return 1.5 * max(ratio(a) for a in probes)


def lower_envelope(cert: SlowCertificate, t):
    """Closed-form lower bound for |u(t)|^2 along certified trajectories."""
    if not cert.member:
        raise ValueError("lower envelope requires a member certificate")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    p = cert.p
    # algebraically (y0^{-p/2} + rate*t)^{-2/p}, arranged to be exact at t = 0
    out = cert.y0 * (1.0 + cert.y0 ** (p / 2.0) * cert.envelope_rate * t) ** (-2.0 / p)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CertifiedRunReport:
    ok: bool
    u_nonzero_ok: bool
    g_ceiling_ok: bool       # G <= 2*sigma1
    g_sandwich_ok: bool      # G/2 <= G_hat <= 2*G
    envelope_ok: bool        # |u|^2 >= lower envelope
    ghat_bound_ok: bool      # exponential-plus-constant envelope on G_hat
    worst_g_gap: float       # min over samples of 2*sigma1 - G
    worst_envelope_gap: float  # min of |u|^2 - envelope
    worst_ghat_gap: float    # min of bound - G_hat
    n_samples: int

    def as_text(self) -> str:
        return "\n".join(f"{k}={v}" for k, v in vars(self).items())


def check_certified_run(
    cert: SlowCertificate,
    samples: list[EnergySample],
    tol: float = 1e-8,
) -> CertifiedRunReport:
    """Verify the certified-trajectory conclusions on a sampled run."""
    if not cert.member:
        raise ValueError("certified-run check requires a member certificate")
    t = np.array([s.t for s in samples])
    norm_u = np.array([s.norm_u for s in samples])
    g = np.array([s.G for s in samples])
    g_hat = np.array([s.G_hat for s in samples])

    u_nonzero = bool(np.all(norm_u > 0.0))
    finite = np.isfinite(g) & np.isfinite(g_hat)
    if not (u_nonzero and np.all(finite)):
        return CertifiedRunReport(
            ok=False, u_nonzero_ok=u_nonzero, g_ceiling_ok=False,
            g_sandwich_ok=False, envelope_ok=False, ghat_bound_ok=False,
            worst_g_gap=math.nan, worst_envelope_gap=math.nan,
            worst_ghat_gap=math.nan, n_samples=len(samples),
        )

    g_gap = float(np.min(2.0 * cert.sigma1 - g))
    g_ok = g_gap >= -tol
    sandwich_ok = bool(
        np.all(g_hat >= 0.5 * g - tol) and np.all(g_hat <= 2.0 * g + tol)
    )

    env = lower_envelope(cert, t)
    env_gap = float(np.min(norm_u**2 - env * (1.0 - 1e-12)))
    env_ok = env_gap >= 0.0

    floor = 128.0 * cert.R**2 / cert.delta**2
    bound = (g_hat[0] - floor) * np.exp(-cert.delta * t / 32.0) + floor
    ghat_gap = float(np.min(bound - g_hat))
    ghat_ok = ghat_gap >= -tol

    return CertifiedRunReport(
        ok=u_nonzero and g_ok and sandwich_ok and env_ok and ghat_ok,
        u_nonzero_ok=u_nonzero,
        g_ceiling_ok=g_ok,
        g_sandwich_ok=sandwich_ok,
        envelope_ok=env_ok,
        ghat_bound_ok=ghat_ok,
        worst_g_gap=g_gap,
        worst_envelope_gap=env_gap,
        worst_ghat_gap=ghat_gap,
        n_samples=len(samples),
    )
