"""Heat kernels on the algebra and the Cartan, the averaged kernel, the
skew-weighted V function, and finite-difference verification of the radial
heat identity, the small-time boundary behavior, and the scaled log-kernel
PDE.

Sign conventions: the stored coordinate form is positive definite, so the
fundamental solutions here carry decaying Gaussians and the Cartan heat
residual is  dV/dt - (1/2) Laplacian V  in orthonormal coordinates.  (With
the negative-definite form on a compact algebra the same equation reads with
a plus sign; the two bookkeepings agree term by term.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .closedform import as_cartan, check_regular, orbital_integral_parts, weyl_sum
from .errors import ConfigurationError, ResolutionError
from .groups import CompactGroupSpec, mc_orbital_integral
from .rootsys import (
    RootSystem,
    discriminant_at,
    from_orthonormal,
    pi_pi_norm_cached,
    to_orthonormal,
    weyl_matrices,
)


@dataclass(frozen=True)
class HeatKernelParams:
    spec: CompactGroupSpec
    x1: Tuple[complex, ...]
    t: float

    def __post_init__(self):
        if self.t <= 0:
            raise ConfigurationError("t must be positive")


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned grid in orthonormal Cartan coordinates."""

    dims: int
    extent: Tuple[Tuple[float, float], ...]
    h_step: float
    t_step: float

    def __post_init__(self):
        if self.h_step <= 0 or self.t_step <= 0:
            raise ConfigurationError("grid steps must be positive")
        if len(self.extent) != self.dims:
            raise ConfigurationError("extent must have one (lo, hi) pair per axis")

    @property
    def cfl_satisfied(self) -> bool:
        # recorded for explicit scans; residual checks do not time-step
        return self.t_step <= self.h_step**2 / 2

    def axes(self, h_step: Optional[float] = None) -> List[np.ndarray]:
        step = h_step if h_step is not None else self.h_step
        out = []
        for lo, hi in self.extent:
            n = int(round((hi - lo) / step))
            out.append(lo + step * np.arange(n + 1))
        return out


def _dim_algebra(rs: RootSystem, spec: Optional[CompactGroupSpec]) -> int:
    d = rs.dim_algebra
    if spec is not None and spec.dim_algebra != d:
        raise ConfigurationError(
            f"group {spec} has algebra dimension {spec.dim_algebra}, "
            f"root system {rs} implies {d}"
        )
    return d


def heat_kernel(params: HeatKernelParams, x2) -> float:
    """Gaussian fundamental solution on the algebra, evaluated at Cartan points."""
    rs = params.spec.root_system()
    v1 = as_cartan(rs, params.x1).real
    v2 = as_cartan(rs, x2).real
    d = params.spec.dim_algebra
    gram = np.array([[float(x) for x in row] for row in rs.form_gram])
    diff = v1 - v2
    q = float(diff @ gram @ diff)
    return (2 * math.pi * params.t) ** (-d / 2) * math.exp(-q / (2 * params.t))


def averaged_kernel_closed(
    rs: RootSystem, spec: Optional[CompactGroupSpec], h1, h2, t: float
) -> float:
    """Group average of the heat kernel over the first argument's orbit,
    via the closed-form orbital integral.

    The Gaussian prefactor exponent cancels against the dominant Weyl-sum
    exponent before exponentiation (the combined exponent is the nearest
    Weyl image's squared distance), so small t does not overflow.
    """
    d = _dim_algebra(rs, spec)
    v1 = as_cartan(rs, h1).real
    v2 = as_cartan(rs, h2).real
    gram = np.array([[float(x) for x in row] for row in rs.form_gram])
    q = float(v1 @ gram @ v1 + v2 @ gram @ v2)
    m, mant = orbital_integral_parts(rs, v1, v2, t)
    return (2 * math.pi * t) ** (-d / 2) * math.exp(m - q / (2 * t)) * mant.real


def averaged_kernel_mc(
    rs: RootSystem, spec: CompactGroupSpec, h1, h2, t: float, n: int, seed: int
) -> Tuple[float, float]:
    """Monte Carlo counterpart of ``averaged_kernel_closed``; returns (mean, stderr)."""
    d = _dim_algebra(rs, spec)
    v1 = as_cartan(rs, h1).real
    v2 = as_cartan(rs, h2).real
    q = float(v1 @ v1 + v2 @ v2)
    pref = (2 * math.pi * t) ** (-d / 2) * math.exp(-q / (2 * t))
    est = mc_orbital_integral(spec, v1, v2, t, n, seed)
    return pref * est.mean.real, pref * est.stderr


def v_function(rs: RootSystem, spec: Optional[CompactGroupSpec], h1, h2, t: float) -> float:
    """Discriminant-weighted averaged kernel; solves the Cartan heat equation."""
    d = _dim_algebra(rs, spec)
    pi1 = discriminant_at(rs, as_cartan(rs, h1).real).real
    pi2 = discriminant_at(rs, as_cartan(rs, h2).real).real
    ktil = averaged_kernel_closed(rs, spec, h1, h2, t)
    return (2 * math.pi) ** ((d - rs.rank) / 2) * pi1 * pi2 * ktil


def v_weyl_sum(rs: RootSystem, h1, h2, t: float) -> float:
    """Explicit form of the V function: a signed sum of Cartan heat kernels
    centered at the Weyl images of h1."""
    v1 = as_cartan(rs, h1).real
    v2 = as_cartan(rs, h2).real
    stack, _ = weyl_matrices(rs)
    gram = np.array([[float(x) for x in row] for row in rs.form_gram])
    diffs = stack @ v1 - v2[None, :]
    expo = -0.5 / t * np.einsum("wi,ij,wj->w", diffs, gram, diffs)
    m, s = weyl_sum(rs, expo.astype(complex))
    c = pi_pi_norm_cached(rs) / rs.weyl_order
    n = rs.rank
    return c * (2 * math.pi * t) ** (-n / 2) * math.exp(m) * s.real


# ---------------------------------------------------------------------------
# finite-difference residual checks

@dataclass(frozen=True)
class ResidualReport:
    op: str
    steps: Tuple[float, float]
    max_residual: float
    field_scale: float
    halving_ratio: Optional[float]

    @property
    def normalized_max(self) -> float:
        return self.max_residual / self.field_scale

    def to_json(self) -> dict:
        return {
            "op": self.op,
            "steps": list(self.steps),
            "max_residual": self.max_residual,
            "halving_ratio": self.halving_ratio,
        }


def _interior_mesh(axes: List[np.ndarray]) -> List[np.ndarray]:
    grids = np.meshgrid(*axes, indexing="ij")
    return grids


def _check_grid_regular(rs: RootSystem, points: np.ndarray, min_gap: float = 1e-6):
    roots = np.array([[float(x) for x in r] for r in rs.positive_roots])
    vals = points @ roots.T
    closest = float(np.min(np.abs(vals)))
    if closest < min_gap:
        raise ConfigurationError(
            f"grid touches a root hyperplane (min |root(h)| = {closest:.2e})"
        )


def _field_on_grid(
    rs: RootSystem, fn: Callable[[np.ndarray, float], float],
    axes: List[np.ndarray], times: Sequence[float],
) -> np.ndarray:
    mesh = _interior_mesh(axes)
    shape = mesh[0].shape
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    ambient = np.array([from_orthonormal(rs, u) for u in pts])
    _check_grid_regular(rs, ambient)
    out = np.empty((len(times),) + shape)
    for it, t in enumerate(times):
        vals = np.array([fn(a, t) for a in ambient])
        out[it] = vals.reshape(shape)
    return out


def _heat_residual_once(
    rs: RootSystem, fn, grid: GridSpec, t0: float, h_step: float, t_step: float
) -> Tuple[float, float]:
    axes = grid.axes(h_step)
    times = (t0 - t_step, t0, t0 + t_step)
    f = _field_on_grid(rs, fn, axes, times)
    center = f[1]
    dt = (f[2] - f[0]) / (2 * t_step)
    lap = np.zeros_like(center)
    n = grid.dims
    core = tuple(slice(1, -1) for _ in range(n))
    for ax in range(n):
        up = tuple(slice(2, None) if a == ax else slice(1, -1) for a in range(n))
        dn = tuple(slice(0, -2) if a == ax else slice(1, -1) for a in range(n))
        lap[core] += (center[up] - 2 * center[core] + center[dn]) / h_step**2
    resid = dt[core] - 0.5 * lap[core]
    return float(np.max(np.abs(resid))), float(np.max(np.abs(center)))


def radial_heat_residual(
    rs: RootSystem,
    spec: Optional[CompactGroupSpec],
    h1_fixed,
    grid: GridSpec,
    t0: float,
    include_discriminant_factor: bool = True,
) -> ResidualReport:
    """Central-difference residual of the Cartan heat equation for the V
    function (or, as a control, for the bare averaged kernel, which must fail).
    """
    if t0 <= grid.t_step:
        raise ConfigurationError("t0 must exceed the time step")
    check_regular(rs, h1_fixed, label="h1")
    if include_discriminant_factor:
        fn = lambda a, t: v_function(rs, spec, h1_fixed, a, t)
        op = "radial_heat_residual"
    else:
        fn = lambda a, t: averaged_kernel_closed(rs, spec, h1_fixed, a, t)
        op = "radial_heat_residual_no_discriminant"
    coarse, scale = _heat_residual_once(rs, fn, grid, t0, grid.h_step, grid.t_step)
    fine, _ = _heat_residual_once(rs, fn, grid, t0, grid.h_step / 2, grid.t_step / 2)
    ratio = coarse / fine if fine > 0 else math.inf
    return ResidualReport(
        op=op,
        steps=(grid.h_step, grid.t_step),
        max_residual=fine,
        field_scale=scale,
        halving_ratio=ratio,
    )


# ---------------------------------------------------------------------------
# boundary behavior as t -> 0

@dataclass(frozen=True)
class SmoothBump:
    """Standard compactly supported bump in orthonormal coordinates:
    exp(-1/(1 - |(u-c)/radius|^2)) inside the unit ball of the scaled shift."""

    center: Tuple[float, ...]
    radius: float

    def __call__(self, u: np.ndarray) -> float:
        r2 = float(np.sum(((np.asarray(u) - np.asarray(self.center)) / self.radius) ** 2))
        if r2 >= 1.0:
            return 0.0
        return math.exp(-1.0 / (1.0 - r2))

    @property
    def support(self) -> Tuple[Tuple[float, float], ...]:
        return tuple((c - self.radius, c + self.radius) for c in self.center)


@dataclass(frozen=True)
class BoundaryReport:
    t_values: Tuple[float, ...]
    quadrature: Tuple[float, ...]
    target: float
    rel_errors: Tuple[float, ...]

    def to_json(self) -> dict:
        return {
            "t_values": list(self.t_values),
            "quadrature": list(self.quadrature),
            "target": self.target,
            "rel_errors": list(self.rel_errors),
        }


def _trapezoid_nd(fn: Callable[[np.ndarray], float], box, levels_start=5, tol=1e-7, max_level=14):
    """Tensor-product trapezoid, refined until successive estimates settle."""
    prev = None
    for level in range(levels_start, max_level + 1):
        axes = [np.linspace(lo, hi, 2**level + 1) for lo, hi in box]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        vals = np.array([fn(p) for p in pts]).reshape(mesh[0].shape)
        total = vals
        for ax in range(len(box)):
            lo, hi = box[ax]
            dx = (hi - lo) / 2**level
            total = np.trapezoid(total, dx=dx, axis=0) if total.ndim > 1 else np.trapezoid(total, dx=dx)
        total = float(total)
        if prev is not None and abs(total - prev) < tol * max(1.0, abs(total)):
            return total
        prev = total
    raise ResolutionError("quadrature did not converge within the refinement budget")


def boundary_delta_check(
    rs: RootSystem,
    spec: Optional[CompactGroupSpec],
    h1,
    test_fn,
    t_sequence: Sequence[float],
) -> BoundaryReport:
    """Integrate V against a test function for shrinking t; the limit is the
    signed sum of test values at the Weyl images of h1, scaled by the
    normalization constant."""
    v1 = as_cartan(rs, h1).real
    check_regular(rs, v1, label="h1")
    box = test_fn.support
    if len(box) != rs.rank:
        raise ConfigurationError("test function support must match the rank")
    stack, signs = weyl_matrices(rs)
    onb_images = [to_orthonormal(rs, w @ v1) for w in stack]
    c = pi_pi_norm_cached(rs) / rs.weyl_order
    target = c * float(sum(s * test_fn(u) for s, u in zip(signs, onb_images)))

    values = []
    rels = []
    for t in t_sequence:
        if t <= 0:
            raise ConfigurationError("t values must be positive")

        def integrand(u):
            tv = test_fn(u)
            if tv == 0.0:
                return 0.0
            return tv * v_function(rs, spec, v1, from_orthonormal(rs, u), t)

        val = _trapezoid_nd(integrand, box)
        values.append(val)
        denom = abs(target) if target != 0 else 1.0
        rels.append(abs(val - target) / denom)
    return BoundaryReport(
        t_values=tuple(t_sequence),
        quadrature=tuple(values),
        target=target,
        rel_errors=tuple(rels),
    )


# ---------------------------------------------------------------------------
# scaled log-kernel PDE

@dataclass(frozen=True)
class CmResidualReport:
    steps: Tuple[float, float]
    max_residual: float
    halving_ratio: float
    substitution_gap: float
    dropped_term_max: float

    def to_json(self) -> dict:
        return {
            "op": "cm_pde_residual",
            "steps": list(self.steps),
            "max_residual": self.max_residual,
            "halving_ratio": self.halving_ratio,
            "substitution_gap": self.substitution_gap,
            "dropped_term_max": self.dropped_term_max,
        }


def _fd_grad_lap(field: np.ndarray, h_step: float, dims: int):
    core = tuple(slice(1, -1) for _ in range(dims))
    grads = []
    lap = np.zeros_like(field[core])
    for ax in range(dims):
        up = tuple(slice(2, None) if a == ax else slice(1, -1) for a in range(dims))
        dn = tuple(slice(0, -2) if a == ax else slice(1, -1) for a in range(dims))
        grads.append((field[up] - field[dn]) / (2 * h_step))
        lap += (field[up] - 2 * field[core] + field[dn]) / h_step**2
    return np.stack(grads), lap


def _cm_residuals_once(
    rs, spec, h1, grid: GridSpec, t0, n_scaling, h_step, t_step
):
    axes = grid.axes(h_step)
    times = (t0 - t_step, t0, t0 + t_step)
    root_n = math.sqrt(n_scaling)
    v1 = as_cartan(rs, h1).real

    # W(h2) = (1/N^2) log Ktilde(sqrt(N) h1, sqrt(N) h2; t); log|Pi| enters
    # the identity through the same stencils, so both fields are tabulated
    def w_field(a, t):
        val = averaged_kernel_closed(rs, spec, root_n * v1, root_n * np.asarray(a), t)
        return math.log(val) / n_scaling**2

    def logpi_field(a, _t):
        return math.log(abs(discriminant_at(rs, np.asarray(a)).real))

    w = _field_on_grid(rs, w_field, axes, times)
    logpi = _field_on_grid(rs, logpi_field, axes, times[1:2])[0]

    dims = grid.dims
    core = tuple(slice(1, -1) for _ in range(dims))
    dwdt = (w[2] - w[0])[core] / (2 * t_step)
    grad_w, lap_w = _fd_grad_lap(w[1], h_step, dims)
    grad_p, lap_p = _fd_grad_lap(logpi, h_step, dims)
    n = float(n_scaling)

    grad_w2 = np.sum(grad_w**2, axis=0)
    grad_p2 = np.sum(grad_p**2, axis=0)
    cross = np.sum(grad_w * grad_p, axis=0)

    r22 = (
        2 * dwdt
        - n * grad_w2
        - lap_w / n
        - 2 * cross / n
        - (lap_p + grad_p2) / n**3
    )

    s = w[1] + logpi / n**2
    dsdt = dwdt + 0.0  # log Pi is time independent
    grad_s, lap_s = _fd_grad_lap(s, h_step, dims)
    r23_full = 2 * dsdt - n * np.sum(grad_s**2, axis=0) - lap_s / n

    dropped = np.max(np.abs(lap_w / n))
    gap = float(np.max(np.abs(r22 - r23_full)))
    return float(np.max(np.abs(r22))), gap, float(dropped)


def cm_pde_residual(
    rs: RootSystem,
    spec: Optional[CompactGroupSpec],
    h1,
    h2_grid: GridSpec,
    t0: float,
    n_scaling: float = 1.0,
) -> CmResidualReport:
    """Residual of the exact PDE for the scaled log of the averaged kernel,
    with spatial derivatives in the second argument.

    Also reports the residual after the substitution S = W + N^{-2} log Pi
    (whose full, unapproximated identity is 2 dS/dt = N |grad S|^2 + N^{-1}
    Lap S): the two residuals agree identically on the stencil values, and
    the Laplacian-of-W term that the hydrodynamic approximation drops is
    measured rather than assumed small.
    """
    if n_scaling < 1:
        raise ConfigurationError("n_scaling must be >= 1")
    if t0 <= h2_grid.t_step:
        raise ConfigurationError("t0 must exceed the time step")
    check_regular(rs, h1, label="h1")
    coarse, gap_c, dropped = _cm_residuals_once(
        rs, spec, h1, h2_grid, t0, n_scaling, h2_grid.h_step, h2_grid.t_step
    )
    fine, gap_f, _ = _cm_residuals_once(
        rs, spec, h1, h2_grid, t0, n_scaling, h2_grid.h_step / 2, h2_grid.t_step / 2
    )
    return CmResidualReport(
        steps=(h2_grid.h_step, h2_grid.t_step),
        max_residual=fine,
        halving_ratio=coarse / fine if fine > 0 else math.inf,
        substitution_gap=max(gap_c, gap_f),
        dropped_term_max=dropped,
    )


def heat_mass_rank1(spec: CompactGroupSpec, t: float, radius_sigmas: float = 12.0) -> float:
    """Total mass of the algebra heat kernel by radial reduction to one
    dimension: the Gaussian depends only on the invariant distance."""
    d = spec.dim_algebra
    sphere = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    rmax = radius_sigmas * math.sqrt(t)

    def radial(r):
        return (
            (2 * math.pi * t) ** (-d / 2)
            * math.exp(-r**2 / (2 * t))
            * sphere
            * r ** (d - 1)
        )

    return _trapezoid_nd(lambda p: radial(p[0]), ((0.0, rmax),))
