"""Run configuration: flat key=value files, datum descriptors, resolution.

A config is a text file of ``key = value`` lines with '#' comments.  Initial
data are descriptor strings over basis coefficients:

    zero                    the zero vector
    const:<v>               the constant function with value v (bases whose
                            first mode is the constant function)
    mode:<k>:<amp>          amp times eigenfunction k
    sum:<term>+<term>+...   superposition of the above

"auto" entries resolve deterministically: alpha = p, delta to its maximal
admissible value, R = 1 for projection nonlinearities (sampled bound for
local powers), rho to 1.01 * sigma0, and eps by the post-run scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import slowset
from .energies import max_delta
from .integrator import IntegratorConfig, Sampling, Scheme
from .spectral import (
    Basis,
    BasisKind,
    Nonlinearity,
    NonlinearityKind,
    Problem,
    build_basis,
    local_power,
    make_problem,
    norm_power,
    potential_F,
    rank_one,
)

#: problem presets: (basis kind, nonlinearity kind)
PRESETS: dict[str, tuple[BasisKind, NonlinearityKind]] = {
    "neumann1d": (BasisKind.NEUMANN_1D, NonlinearityKind.LOCAL_POWER),
    "dirichlet1d": (BasisKind.DIRICHLET_SHIFTED_1D, NonlinearityKind.LOCAL_POWER),
    "nonlocal_norm": (BasisKind.NEUMANN_1D, NonlinearityKind.NORM_POWER),
    "nonlocal_rank1": (BasisKind.NEUMANN_1D, NonlinearityKind.RANK_ONE),
    "scalar_ode": (BasisKind.SCALAR, NonlinearityKind.NORM_POWER),
}

#: sample count used when estimating R for local nonlinearities
R_ESTIMATE_SAMPLES = 256


class ConfigError(ValueError):
    def __init__(self, line: int | None, message: str):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    problem: str
    p: float
    u0_spec: str
    u1_spec: str = "zero"
    phi_spec: str = "sum:mode:0:1+mode:1:1"
    n_modes: int = 16
    n_grid: int | None = None      # None = auto (4 * n_modes)
    dt: float = 0.05
    t_end: float = 1000.0
    sampling: str = "log"
    sample_count: int = 400
    scheme: str = "strang"
    eps: float | None = None       # None = auto (post-run scan)
    delta: float | None = None     # None = auto (maximal admissible)
    R: float | None = None         # None = auto (1 or sampled bound)
    alpha: float | None = None     # None = auto (= p)
    rho: float | None = None       # None = auto (1.01 * sigma0)
    seed: int = 0
    out_path: str | None = None


def _parse_float(text: str, line: int, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(line, f"{key} must be a number, got {text!r}") from None


def _parse_int(text: str, line: int, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(line, f"{key} must be an integer, got {text!r}") from None


def _parse_auto_float(text: str, line: int, key: str) -> float | None:
    if text == "auto":
        return None
    return _parse_float(text, line, key)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a key=value config; errors carry line numbers."""
    values: dict[str, tuple[int, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(lineno, f"expected key = value, got {raw.strip()!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key in values:
            raise ConfigError(lineno, f"duplicate key {key!r}")
        values[key] = (lineno, val)

    known = set(RunConfig.__dataclass_fields__)
    for key, (lineno, _) in values.items():
        if key not in known:
            raise ConfigError(lineno, f"unknown key {key!r}")
    for req in ("problem", "p", "u0_spec"):
        if req not in values:
            raise ConfigError(None, f"missing required key {req!r}")

    def get(key: str) -> tuple[int, str] | None:
        return values.get(key)

    kw: dict[str, object] = {}

    line, val = values["problem"]
    if val not in PRESETS:
        raise ConfigError(line, f"problem must be one of {sorted(PRESETS)}, got {val!r}")
    kw["problem"] = val

    line, val = values["p"]
    p = _parse_float(val, line, "p")
    if not (p > 0 and math.isfinite(p)):
        raise ConfigError(line, f"p must be > 0, got {val}")
    kw["p"] = p

    kw["u0_spec"] = values["u0_spec"][1]
    for key in ("u1_spec", "phi_spec", "out_path"):
        if (item := get(key)) is not None:
            kw[key] = item[1]

    if (item := get("n_modes")) is not None:
        n = _parse_int(item[1], item[0], "n_modes")
        if n < 1:
            raise ConfigError(item[0], f"n_modes must be >= 1, got {n}")
        kw["n_modes"] = n
    if (item := get("n_grid")) is not None:
        if item[1] != "auto":
            m = _parse_int(item[1], item[0], "n_grid")
            if m < 1:
                raise ConfigError(item[0], f"n_grid must be >= 1, got {m}")
            kw["n_grid"] = m
    if (item := get("dt")) is not None:
        dt = _parse_float(item[1], item[0], "dt")
        if not (dt > 0 and math.isfinite(dt)):
            raise ConfigError(item[0], f"dt must be > 0, got {item[1]}")
        kw["dt"] = dt
    if (item := get("t_end")) is not None:
        t_end = _parse_float(item[1], item[0], "t_end")
        if not (t_end > 0 and math.isfinite(t_end)):
            raise ConfigError(item[0], f"t_end must be > 0, got {item[1]}")
        kw["t_end"] = t_end
    if (item := get("sampling")) is not None:
        if item[1] not in ("linear", "log"):
            raise ConfigError(item[0], f"sampling must be linear or log, got {item[1]!r}")
        kw["sampling"] = item[1]
    if (item := get("sample_count")) is not None:
        n = _parse_int(item[1], item[0], "sample_count")
        if n < 2:
            raise ConfigError(item[0], f"sample_count must be >= 2, got {n}")
        kw["sample_count"] = n
    if (item := get("scheme")) is not None:
        if item[1] not in ("strang", "rk4"):
            raise ConfigError(item[0], f"scheme must be strang or rk4, got {item[1]!r}")
        kw["scheme"] = item[1]
    if (item := get("seed")) is not None:
        kw["seed"] = _parse_int(item[1], item[0], "seed")

    if (item := get("eps")) is not None:
        eps = _parse_auto_float(item[1], item[0], "eps")
        if eps is not None and eps < 0:
            raise ConfigError(item[0], f"eps must be >= 0, got {eps}")
        kw["eps"] = eps
    for key, lower in (("delta", 0.0), ("R", 0.0), ("alpha", 0.0), ("rho", 0.0)):
        if (item := get(key)) is not None:
            v = _parse_auto_float(item[1], item[0], key)
            if v is not None and not v > lower:
                raise ConfigError(item[0], f"{key} must be > {lower:g}, got {v}")
            kw[key] = v

    cfg = RunConfig(**kw)  # type: ignore[arg-type]
    if cfg.dt > cfg.t_end:
        raise ConfigError(None, f"dt = {cfg.dt:g} exceeds t_end = {cfg.t_end:g}")
    return cfg


def parse_datum(spec: str, basis: Basis) -> np.ndarray:
    """Turn a datum descriptor into a coefficient vector."""
    spec = spec.strip()
    if spec.startswith("sum:"):
        total = np.zeros(basis.n_modes)
        for term in spec[len("sum:"):].split("+"):
            total = total + parse_datum(term, basis)
        return total
    if spec == "zero":
        return np.zeros(basis.n_modes)
    if spec.startswith("const:"):
        if basis.kind not in (BasisKind.NEUMANN_1D, BasisKind.SCALAR):
            raise ConfigError(
                None,
                f"const datum is not representable in a {basis.kind.value} basis",
            )
        value = float(spec[len("const:"):])
        out = np.zeros(basis.n_modes)
        out[0] = value
        return out
    if spec.startswith("mode:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(None, f"expected mode:<k>:<amp>, got {spec!r}")
        k = int(parts[1])
        amp = float(parts[2])
        if not 0 <= k < basis.n_modes:
            raise ConfigError(None, f"mode index {k} out of range [0, {basis.n_modes})")
        out = np.zeros(basis.n_modes)
        out[k] = amp
        return out
    raise ConfigError(None, f"unrecognized datum spec {spec!r}")


def scale_datum_spec(spec: str, factor: float) -> str:
    """Rescale every amplitude of a datum descriptor (used by sweeps)."""
    spec = spec.strip()
    if spec.startswith("sum:"):
        terms = [scale_datum_spec(t, factor) for t in spec[len("sum:"):].split("+")]
        return "sum:" + "+".join(terms)
    if spec == "zero":
        return spec
    if spec.startswith("const:"):
        return "const:" + format(float(spec[len("const:"):]) * factor, ".17g")
    if spec.startswith("mode:"):
        _, k, amp = spec.split(":")
        return f"mode:{k}:" + format(float(amp) * factor, ".17g")
    raise ConfigError(None, f"unrecognized datum spec {spec!r}")


@dataclass(frozen=True)
class ResolvedRun:
    """A config with every 'auto' replaced by its concrete value.

    ``eps`` stays None for post-run selection; everything else is numeric.
    """

    config: RunConfig
    problem: Problem
    integrator: IntegratorConfig
    eps: float | None
    delta: float
    R: float
    alpha: float
    rho: float
    certificate: slowset.SlowCertificate | None


def _build_nonlinearity(cfg: RunConfig, basis: Basis) -> Nonlinearity:
    kind = PRESETS[cfg.problem][1]
    if kind is NonlinearityKind.LOCAL_POWER:
        return local_power(cfg.p)
    if kind is NonlinearityKind.NORM_POWER:
        return norm_power(cfg.p)
    phi = parse_datum(cfg.phi_spec, basis)
    return rank_one(cfg.p, phi)


def resolve(cfg: RunConfig) -> ResolvedRun:
    """Build the problem and resolve every parameter except post-run eps."""
    basis_kind, nonlin_kind = PRESETS[cfg.problem]
    n_modes = 1 if basis_kind is BasisKind.SCALAR else cfg.n_modes
    basis = build_basis(basis_kind, n_modes, cfg.n_grid)
    nonlin = _build_nonlinearity(cfg, basis)
    u0 = parse_datum(cfg.u0_spec, basis)
    u1 = parse_datum(cfg.u1_spec, basis)
    problem = make_problem(basis, nonlin, u0, u1)

    integ = IntegratorConfig(
        t_end=cfg.t_end,
        dt=cfg.dt,
        sampling=Sampling.LINEAR if cfg.sampling == "linear" else Sampling.LOG,
        sample_count=cfg.sample_count,
        scheme=Scheme.STRANG_EXACT_LINEAR if cfg.scheme == "strang"
        else Scheme.RK4_REFERENCE,
    )

    alpha = cfg.p if cfg.alpha is None else cfg.alpha
    delta = max_delta(basis.nu) if cfg.delta is None else cfg.delta

    u0sq = float(u0 @ u0)
    if cfg.rho is not None:
        rho = cfg.rho
    elif u0sq > 0.0:
        sigma0 = 4.0 * math.sqrt(
            float(u1 @ u1) + u0sq
            + float((basis.eigenvalues * u0) @ u0)
            + potential_F(basis, nonlin, u0)
        )
        rho = 1.01 * sigma0
    else:
        rho = 1.0

    if cfg.R is not None:
        big_r = cfg.R
    elif nonlin_kind is not NonlinearityKind.LOCAL_POWER:
        big_r = 1.0
    else:
        big_r = slowset.estimate_R(
            basis, nonlin, rho, alpha, R_ESTIMATE_SAMPLES, seed=cfg.seed
        )

    cert = None
    if u0sq > 0.0:
        cert = slowset.compute_certificate(
            basis, nonlin, u0, u1, rho=rho, R=big_r, alpha=alpha, delta=delta
        )

    return ResolvedRun(
        config=cfg, problem=problem, integrator=integ,
        eps=cfg.eps, delta=delta, R=big_r, alpha=alpha, rho=rho,
        certificate=cert,
    )


def with_scaled_data(cfg: RunConfig, factor: float) -> RunConfig:
    """Config with both initial data scaled by a common amplitude factor."""
    return replace(
        cfg,
        u0_spec=scale_datum_spec(cfg.u0_spec, factor),
        u1_spec=scale_datum_spec(cfg.u1_spec, factor),
    )
