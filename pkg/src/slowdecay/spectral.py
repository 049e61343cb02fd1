"""Eigenbasis representation of the damped evolution u'' + u' + Au + grad F(u) = 0.

The linear operator A is diagonal in an orthonormal eigenbasis, so a state is a
pair of coefficient vectors (a, b) for (u, u').  Norms and inner products are
plain Euclidean sums by Parseval.  Modes with eigenvalue zero span the kernel
of A; the coercivity constant nu is the smallest nonzero eigenvalue.

Built-in spectra on the unit interval:

* Neumann Laplacian: eigenvalues (k*pi)^2 with eigenfunctions
  1, sqrt(2)*cos(k*pi*x); the kernel is the constant mode.
* Shifted Dirichlet Laplacian (-Laplace - lambda_1): eigenvalues
  ((k+1)^2 - 1)*pi^2 with eigenfunctions sqrt(2)*sin((k+1)*pi*x); the kernel
  is the first Dirichlet eigenfunction.

Local power nonlinearities |u|^p u are evaluated pointwise on an oversampled
midpoint grid and projected back by quadrature.  The M-point midpoint rule
integrates cosine polynomials of degree < 2M exactly, so with M >= 2N the
coefficient/grid transform pair is an isometry, and for p = 2 the cubic
product is dealiased exactly when M >= 2N.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

SQRT2 = math.sqrt(2.0)


class BasisKind(enum.Enum):
    NEUMANN_1D = "neumann1d"
    DIRICHLET_SHIFTED_1D = "dirichlet_shifted1d"
    CUSTOM_SPECTRUM = "custom_spectrum"
    SCALAR = "scalar"


class NonlinearityKind(enum.Enum):
    LOCAL_POWER = "local_power"
    NORM_POWER = "norm_power"
    RANK_ONE = "rank_one"


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.asarray(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Basis:
    """Truncated eigenbasis of A with optional collocation machinery.

    ``eigenvalues`` are nonnegative and nondecreasing (kernel modes first).
    ``eval_matrix`` has shape (n_grid, n_modes) with entries e_k(x_j);
    ``proj_matrix`` is its quadrature left-inverse, so
    ``proj_matrix @ eval_matrix == I`` up to round-off.
    """

    kind: BasisKind
    n_modes: int
    eigenvalues: np.ndarray
    n_grid: int
    grid: np.ndarray | None
    eval_matrix: np.ndarray | None
    proj_matrix: np.ndarray | None

    @cached_property
    def kernel_mask(self) -> np.ndarray:
        mask = self.eigenvalues == 0.0
        mask.setflags(write=False)
        return mask

    @property
    def kernel_indices(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.nonzero(self.kernel_mask)[0])

    @cached_property
    def nu(self) -> float:
        """Smallest nonzero eigenvalue; +inf when the spectrum is all kernel."""
        nonzero = self.eigenvalues[~self.kernel_mask]
        return float(nonzero.min()) if nonzero.size else math.inf

    def to_grid(self, a: np.ndarray) -> np.ndarray:
        if self.eval_matrix is None:
            raise ValueError(f"basis kind {self.kind.value} has no collocation grid")
        return self.eval_matrix @ a

    def to_coeffs(self, values: np.ndarray) -> np.ndarray:
        if self.proj_matrix is None:
            raise ValueError(f"basis kind {self.kind.value} has no collocation grid")
        return self.proj_matrix @ values


def build_basis(
    kind: BasisKind,
    n_modes: int,
    n_grid: int | None = None,
    eigenvalues: np.ndarray | None = None,
) -> Basis:
    """Assemble a basis for one of the preset spectra.

    ``n_grid`` defaults to 4*n_modes for the interval presets and must be at
    least 2*n_modes there (aliasing guard).  ``eigenvalues`` is required for
    CUSTOM_SPECTRUM and ignored otherwise.
    """
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")

    if kind in (BasisKind.NEUMANN_1D, BasisKind.DIRICHLET_SHIFTED_1D):
        m = 4 * n_modes if n_grid is None else int(n_grid)
        if m < 2 * n_modes:
            raise ValueError(
                f"n_grid must be >= 2*n_modes = {2 * n_modes} (aliasing risk), got {m}"
            )
        x = (np.arange(m) + 0.5) / m
        k = np.arange(n_modes)
        if kind is BasisKind.NEUMANN_1D:
            mu = (k * math.pi) ** 2
            ev = SQRT2 * np.cos(np.outer(x, k) * math.pi)
            ev[:, 0] = 1.0
        else:
            mu = ((k + 1.0) ** 2 - 1.0) * math.pi**2
            ev = SQRT2 * np.sin(np.outer(x, k + 1.0) * math.pi)
        return Basis(kind, n_modes, _frozen(mu), m, _frozen(x), _frozen(ev),
                     _frozen(ev.T / m))

    if kind is BasisKind.SCALAR:
        if n_modes != 1:
            raise ValueError("scalar basis has exactly one mode")
        one = np.ones((1, 1))
        return Basis(kind, 1, _frozen([0.0]), 1, _frozen([0.5]), _frozen(one),
                     _frozen(one))

    if kind is BasisKind.CUSTOM_SPECTRUM:
        if eigenvalues is None:
            raise ValueError("custom spectrum requires explicit eigenvalues")
        mu = np.asarray(eigenvalues, dtype=float)
        if mu.shape != (n_modes,):
            raise ValueError(f"expected {n_modes} eigenvalues, got shape {mu.shape}")
        if not np.all(np.isfinite(mu)) or np.any(mu < 0):
            raise ValueError("eigenvalues must be finite and nonnegative")
        if np.any(np.diff(mu) < 0):
            raise ValueError("eigenvalues must be nondecreasing (kernel first)")
        return Basis(kind, n_modes, _frozen(mu), 0, None, None, None)

    raise ValueError(f"unknown basis kind: {kind!r}")


@dataclass(frozen=True, eq=False)
class State:
    """Time plus coefficient vectors of u and u' in the eigenbasis."""

    t: float
    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True, eq=False)
class Nonlinearity:
    """Gradient nonlinearity grad F with potential F >= 0, F(0) = 0.

    * LOCAL_POWER:  grad F(u) = |u(x)|^p u(x),     F(u) = int |u|^{p+2}/(p+2)
    * NORM_POWER:   grad F(u) = |u|^p u,           F(u) = |u|^{p+2}/(p+2)
    * RANK_ONE:     grad F(u) = |s|^p s phi with s = <u, phi> and |phi| = 1,
                    F(u) = |s|^{p+2}/(p+2)
    """

    kind: NonlinearityKind
    p: float
    phi: np.ndarray | None = None


def _check_p(p: float) -> float:
    p = float(p)
    if not (p > 0 and math.isfinite(p)):
        raise ValueError(f"p must be > 0, got {p}")
    return p


def local_power(p: float) -> Nonlinearity:
    return Nonlinearity(NonlinearityKind.LOCAL_POWER, _check_p(p))


def norm_power(p: float) -> Nonlinearity:
    return Nonlinearity(NonlinearityKind.NORM_POWER, _check_p(p))


def rank_one(p: float, phi: np.ndarray) -> Nonlinearity:
    """Rank-one projection nonlinearity; phi is normalized at construction."""
    phi = np.asarray(phi, dtype=float)
    nrm = math.sqrt(float(phi @ phi))
    if not (nrm > 0 and np.all(np.isfinite(phi))):
        raise ValueError("phi must be finite and nonzero")
    return Nonlinearity(NonlinearityKind.RANK_ONE, _check_p(p), _frozen(phi / nrm))


def validate_for_basis(nonlin: Nonlinearity, basis: Basis) -> None:
    """Check basis-dependent constraints of a nonlinearity."""
    if nonlin.kind is NonlinearityKind.LOCAL_POWER and basis.eval_matrix is None:
        raise ValueError("local power nonlinearity needs a collocation grid")
    if nonlin.kind is NonlinearityKind.RANK_ONE:
        if nonlin.phi is None or nonlin.phi.shape != (basis.n_modes,):
            raise ValueError("phi must have one coefficient per mode")
        # discrete non-orthogonality: phi must see every kernel direction
        for k in basis.kernel_indices:
            if nonlin.phi[k] == 0.0:
                raise ValueError(
                    f"phi is orthogonal to kernel mode {k}; "
                    "rank-one nonlinearity requires a nonzero kernel component"
                )


def gradient_fn(basis: Basis, nonlin: Nonlinearity):
    """Build a fast coefficients -> grad F(u) closure for repeated stepping."""
    p = nonlin.p
    if nonlin.kind is NonlinearityKind.LOCAL_POWER:
        ev, proj = basis.eval_matrix, basis.proj_matrix
        if ev is None:
            raise ValueError("local power nonlinearity needs a collocation grid")

        def grad(a: np.ndarray) -> np.ndarray:
            g = ev @ a
            return proj @ (np.abs(g) ** p * g)

    elif nonlin.kind is NonlinearityKind.NORM_POWER:

        def grad(a: np.ndarray) -> np.ndarray:
            return (a @ a) ** (p / 2.0) * a

    else:
        phi = nonlin.phi

        def grad(a: np.ndarray) -> np.ndarray:
            s = float(a @ phi)
            return (abs(s) ** p * s) * phi

    return grad


def grad_F(basis: Basis, nonlin: Nonlinearity, a: np.ndarray) -> np.ndarray:
    """Coefficients of grad F(u) for coefficient vector a."""
    a = np.asarray(a, dtype=float)
    if a.shape != (basis.n_modes,):
        raise ValueError(f"expected {basis.n_modes} coefficients, got {a.shape}")
    return gradient_fn(basis, nonlin)(a)


def potential_F(basis: Basis, nonlin: Nonlinearity, a: np.ndarray) -> float:
    """Potential F(u) >= 0 with F(0) = 0."""
    a = np.asarray(a, dtype=float)
    if a.shape != (basis.n_modes,):
        raise ValueError(f"expected {basis.n_modes} coefficients, got {a.shape}")
    p = nonlin.p
    if nonlin.kind is NonlinearityKind.LOCAL_POWER:
        g = basis.to_grid(a)
        return float(np.mean(np.abs(g) ** (p + 2.0))) / (p + 2.0)
    if nonlin.kind is NonlinearityKind.NORM_POWER:
        return float(a @ a) ** ((p + 2.0) / 2.0) / (p + 2.0)
    s = float(a @ nonlin.phi)
    return abs(s) ** (p + 2.0) / (p + 2.0)


def apply_A(basis: Basis, a: np.ndarray) -> np.ndarray:
    """Apply the diagonal operator A to a coefficient vector."""
    a = np.asarray(a, dtype=float)
    if a.shape != (basis.n_modes,):
        raise ValueError(f"expected {basis.n_modes} coefficients, got {a.shape}")
    return basis.eigenvalues * a


@dataclass(frozen=True)
class StateNorms:
    norm_u: float
    norm_v: float
    norm_A12u: float
    norm_Pu: float
    norm_Qu: float


def norms(basis: Basis, state: State) -> StateNorms:
    """All tracked norms of a state; P/Q are the kernel/range projections."""
    a, b = state.a, state.b
    mask = basis.kernel_mask
    return StateNorms(
        norm_u=math.sqrt(float(a @ a)),
        norm_v=math.sqrt(float(b @ b)),
        norm_A12u=math.sqrt(float((basis.eigenvalues * a) @ a)),
        norm_Pu=math.sqrt(float(a[mask] @ a[mask])),
        norm_Qu=math.sqrt(float(a[~mask] @ a[~mask])),
    )


def graph_norm(basis: Basis, a: np.ndarray) -> float:
    """Norm of D(A^{1/2}): sqrt(|u|^2 + |A^{1/2}u|^2)."""
    return math.sqrt(float(a @ a) + float((basis.eigenvalues * a) @ a))


@dataclass(frozen=True, eq=False)
class Problem:
    """Assembled evolution problem: basis, nonlinearity and initial data."""

    basis: Basis
    nonlinearity: Nonlinearity
    u0: np.ndarray
    u1: np.ndarray

    @property
    def p(self) -> float:
        return self.nonlinearity.p


def make_problem(
    basis: Basis, nonlin: Nonlinearity, u0: np.ndarray, u1: np.ndarray
) -> Problem:
    validate_for_basis(nonlin, basis)
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    for name, vec in (("u0", u0), ("u1", u1)):
        if vec.shape != (basis.n_modes,):
            raise ValueError(f"{name} must have {basis.n_modes} coefficients")
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"{name} must be finite")
    return Problem(basis, nonlin, _frozen(u0), _frozen(u1))
