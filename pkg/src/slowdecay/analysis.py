"""Decay-rate estimation and verification of the polynomial bounds.

Exponents are fitted by ordinary least squares of log(value) against
log(1 + t), which is exact on power laws in 1 + t.  A run is classified Slow
when the fitted exponent of |u| matches the target -1/p within 10% with
r^2 >= 0.99; Fast classification (steeper than twice the target) is a
heuristic for exponential decay, whose log-log slope diverges.

The scalar oracle integrates v'' + v' + |v|^p v = 0 (the single-mode case)
and carries the dominant-balance prediction v_pred = (v0^{-p} + p t)^{-1/p},
the exact solution of the first-order reduction v' = -|v|^p v.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .energies import EnergySample
from .integrator import IntegratorConfig, Sampling, run
from .slowset import SlowCertificate, lower_envelope
from .spectral import BasisKind, build_basis, make_problem, norm_power


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class SlopeFit:
    exponent: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    n_points: int

    def as_text(self) -> str:
        return "\n".join(
            f"{k}={v}" for k, v in vars(self).items()
        )


def fit_slope_xy(
    times: np.ndarray, values: np.ndarray, t_min: float, t_max: float
) -> SlopeFit:
    """Least-squares slope of log(value) vs log(1 + t) on [t_min, t_max]."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = (t >= t_min) & (t <= t_max) & np.isfinite(v) & (v > 0)
    n = int(np.count_nonzero(keep))
    if n < 5:
        raise FitError(
            f"need >= 5 finite positive samples in [{t_min:g}, {t_max:g}], got {n}"
        )
    x = np.log1p(t[keep])
    y = np.log(v[keep])
    xbar, ybar = x.mean(), y.mean()
    dx, dy = x - xbar, y - ybar
    var = float(dx @ dx)
    if var == 0.0:
        raise FitError("degenerate window: all sample times coincide")
    slope = float(dx @ dy) / var
    intercept = ybar - slope * xbar
    ss_res = float(np.sum((y - (intercept + slope * x)) ** 2))
    ss_tot = float(dy @ dy)
    # variance at rounding level means a perfect (constant) fit
    degenerate = ss_tot <= n * (1e-15 * max(1.0, abs(ybar))) ** 2
    r2 = 1.0 if degenerate else 1.0 - ss_res / ss_tot
    return SlopeFit(slope, intercept, r2, (float(t_min), float(t_max)), n)


def fit_slope(series, column: str, t_min: float, t_max: float) -> SlopeFit:
    """Fit a column of an energy-sample list or of a parsed CSV mapping."""
    if isinstance(series, dict):
        times, values = series["t"], series[column]
    else:
        times = np.array([s.t for s in series])
        values = np.array([getattr(s, column) for s in series])
    return fit_slope_xy(times, values, t_min, t_max)


@dataclass(frozen=True)
class UpperBoundReport:
    m1: float                 # sup (|v|^2 + |A^{1/2}u|^2 + F(u)) * (1+t)^{1+2/p}
    m2: float                 # sup |u| * (1+t)^{1/p}
    t_at_m1: float
    t_at_m2: float
    m1_attained_early: bool   # sup reached in the first half of the log range
    m2_attained_early: bool
    m2_plateau_ratio: float   # final compensated value / m2 (near 1 => plateau)
    ok: bool

    def as_text(self) -> str:
        return "\n".join(f"{k}={v}" for k, v in vars(self).items())


def verify_upper(series: list[EnergySample], p: float) -> UpperBoundReport:
    """Bound the compensated energy and norm, flagging late-time growth."""
    t = np.array([s.t for s in series])
    lhs1 = np.array([s.norm_v**2 + s.norm_A12u**2 + s.F_pot for s in series])
    lhs2 = np.array([s.norm_u for s in series])
    w1 = lhs1 * (1.0 + t) ** (1.0 + 2.0 / p)
    w2 = lhs2 * (1.0 + t) ** (1.0 / p)

    i1, i2 = int(np.argmax(w1)), int(np.argmax(w2))
    half_log = 0.5 * math.log1p(float(t[-1]))
    early1 = math.log1p(float(t[i1])) <= half_log
    early2 = math.log1p(float(t[i2])) <= half_log
    m2 = float(w2[i2])
    plateau = float(w2[-1]) / m2 if m2 > 0 else math.nan
    return UpperBoundReport(
        m1=float(w1[i1]), m2=m2,
        t_at_m1=float(t[i1]), t_at_m2=float(t[i2]),
        m1_attained_early=early1, m2_attained_early=early2,
        m2_plateau_ratio=plateau,
        ok=early1 and early2,
    )


@dataclass(frozen=True, eq=False)
class OracleSeries:
    p: float
    v0: float
    v1: float
    dt: float
    times: np.ndarray
    v: np.ndarray
    v_prime: np.ndarray
    v_pred: np.ndarray

    def ratio(self) -> np.ndarray:
        return self.v / self.v_pred


def ode_oracle(
    p: float,
    v0: float,
    v1: float = 0.0,
    dt: float = 0.05,
    t_end: float = 1e5,
    sample_count: int = 400,
    sampling: Sampling = Sampling.LOG,
) -> OracleSeries:
    """Integrate v'' + v' + |v|^p v = 0 with the standard splitting scheme."""
    basis = build_basis(BasisKind.SCALAR, 1)
    problem = make_problem(basis, norm_power(p), np.array([v0]), np.array([v1]))
    config = IntegratorConfig(
        t_end=t_end, dt=dt, sampling=sampling, sample_count=sample_count
    )
    traj = run(problem, config)
    t = traj.times
    if v0 > 0:
        v_pred = (v0**-p + p * t) ** (-1.0 / p)
    else:
        v_pred = np.full_like(t, math.nan)
    return OracleSeries(
        p=p, v0=v0, v1=v1, dt=dt,
        times=t, v=traj.coeff_u[:, 0].copy(), v_prime=traj.coeff_v[:, 0].copy(),
        v_pred=v_pred,
    )


class Classification(enum.Enum):
    SLOW = "slow"
    FAST = "fast"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class DecayVerdict:
    classification: Classification
    fitted_norm_exponent: float
    target: float             # -1/p
    upper_bound_M1: float
    lower_envelope_ok: bool | None
    r_squared: float
    window: tuple[float, float]

    def as_text(self) -> str:
        items = dict(vars(self))
        items["classification"] = self.classification.value
        return "\n".join(f"{k}={v}" for k, v in items.items())


def classify(
    series: list[EnergySample],
    p: float,
    certificate: SlowCertificate | None = None,
) -> DecayVerdict:
    """Classify the decay of |u| from the last decade of the run."""
    t_end = series[-1].t
    if 1.0 + t_end < 100.0 * (1.0 + series[0].t):
        raise ValueError("classification needs a trajectory covering >= 2 decades")
    target = -1.0 / p
    window = (t_end / 10.0, t_end)
    upper = verify_upper(series, p)

    envelope_ok: bool | None = None
    if certificate is not None and certificate.member:
        t = np.array([s.t for s in series])
        u2 = np.array([s.norm_u**2 for s in series])
        envelope_ok = bool(np.all(u2 >= lower_envelope(certificate, t) * (1 - 1e-12)))

    try:
        fit = fit_slope(series, "norm_u", *window)
    except FitError:
        return DecayVerdict(
            Classification.INCONCLUSIVE, math.nan, target, upper.m1,
            envelope_ok, math.nan, window,
        )

    if abs(fit.exponent - target) <= 0.1 * abs(target) and fit.r_squared >= 0.99:
        verdict = Classification.SLOW
    elif fit.exponent <= 2.0 * target:
        verdict = Classification.FAST
    else:
        verdict = Classification.INCONCLUSIVE
    return DecayVerdict(
        verdict, fit.exponent, target, upper.m1, envelope_ok,
        fit.r_squared, window,
    )


@dataclass(frozen=True)
class RangeDecayReport:
    pointwise_ok: bool        # nu |Qu|^2 <= |A^{1/2}u|^2 at every sample
    slope_Pu: float
    slope_Qu: float
    gap_ok: bool | None       # slope_Qu <= slope_Pu - 0.4 (None: not fittable)
    ok: bool

    def as_text(self) -> str:
        return "\n".join(f"{k}={v}" for k, v in vars(self).items())


def verify_range_decay(
    series: list[EnergySample],
    p: float,
    nu: float,
    window: tuple[float, float] | None = None,
) -> RangeDecayReport:
    """Check that the range component sits under |A^{1/2}u| and decays faster.

    The pointwise inequality is a spectral identity (up to round-off).  The
    slope gap is evaluated on the last decade by default and reported as
    None when either component has no fittable signal there.
    """
    qu = np.array([s.norm_Qu for s in series])
    a12 = np.array([s.norm_A12u for s in series])
    pointwise = bool(np.all(nu * qu**2 <= a12**2 * (1.0 + 1e-10) + 1e-300))

    if window is None:
        t_end = series[-1].t
        window = (t_end / 10.0, t_end)
    slope_pu = slope_qu = math.nan
    gap_ok: bool | None = None
    try:
        slope_pu = fit_slope(series, "norm_Pu", *window).exponent
        slope_qu = fit_slope(series, "norm_Qu", *window).exponent
        gap_ok = slope_qu <= slope_pu - 0.4
    except FitError:
        pass
    return RangeDecayReport(
        pointwise_ok=pointwise,
        slope_Pu=slope_pu,
        slope_Qu=slope_qu,
        gap_ok=gap_ok,
        ok=pointwise and gap_ok is not False,
    )
