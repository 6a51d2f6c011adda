"""Steepest-descent ingredients, verified numerically: critical points of the
orbit functional, the Hessian determinant identity, and the small-time
leading-order form of the orbital integral.

Critical points of X -> <X, H2> on the adjoint orbit of H1 are exactly the
commuting points ([X, H2] = 0), so the search minimizes the squared bracket
norm F(X) = <[X,H2],[X,H2]> by Riemannian descent with the retraction
X -> Ad_{exp(xi)} X.  Every zero of F is a minimum with a positive-measure
basin, so random restarts reach saddle values, not just extrema.  Descent
is only linearly convergent (slowly so when a root pairing is small), so
once inside a basin the search switches to Newton steps on the criticality
equation, solving [[xi, X], H2] = -[X, H2] in algebra coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .closedform import as_cartan, check_regular
from .errors import ConfigurationError, NumericalFailureError
from .groups import CompactGroupSpec, _TRACE_CONST, _stream, embed_cartan, haar_batch
from .rootsys import RootSystem, discriminant_at, pi_pi_norm_cached, weyl_matrices


@dataclass(frozen=True)
class CriticalPoint:
    group_orbit_point: np.ndarray  # point on the orbit, not the group element itself
    value: float
    matched_weyl: Optional[int]  # index into the Weyl element list
    matched_sign: Optional[int]
    residual_gradient_norm: float


@dataclass(frozen=True)
class CriticalSearchResult:
    points: List[CriticalPoint]
    expected_count: int
    n_unconverged: int
    complete_cover: bool
    n_spurious: int


def _b_inner(spec: CompactGroupSpec, x: np.ndarray, y: np.ndarray) -> float:
    return float((_TRACE_CONST[spec.family] * np.trace(x @ y)).real)


def _expm_skew(m: np.ndarray) -> np.ndarray:
    """exp of an anti-Hermitian matrix via the Hermitian eigendecomposition."""
    w, v = np.linalg.eigh(1j * m)
    return (v * np.exp(-1j * w)) @ v.conj().T


def _comm(a, b):
    return a @ b - b @ a


def _reunitarize(g: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(g)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def _newton_factor(basis, x, h2m, spec):
    """exp(xi) with xi the minimal-norm solution of [[xi, X], H2] = -[X, H2]."""
    dim = len(basis)
    c = _comm(x, h2m)
    lhs = np.empty((dim, dim))
    rhs = np.empty(dim)
    cols = [_comm(_comm(b, x), h2m) for b in basis]
    for i, bi in enumerate(basis):
        rhs[i] = -_b_inner(spec, bi, c)
        for j in range(dim):
            lhs[i, j] = _b_inner(spec, bi, cols[j])
    coeffs, *_ = np.linalg.lstsq(lhs, rhs, rcond=1e-12)
    xi = sum(cc * b for cc, b in zip(coeffs, basis))
    return _expm_skew(xi)


def find_critical_points(
    spec: CompactGroupSpec,
    h1,
    h2,
    n_starts: int,
    seed: int,
    grad_tol: float = 1e-8,
    cluster_tol: float = 1e-6,
    max_iter: int = 400,
) -> CriticalSearchResult:
    """Locate the critical values of the orbit functional from Haar-random starts.

    Converged points are clustered by value and matched against the closed-form
    critical values <w(h1), h2>.
    """
    rs = spec.root_system()
    check_regular(rs, h1, label="h1")
    check_regular(rs, h2, label="h2")
    stack, signs = weyl_matrices(rs)
    n_w = stack.shape[0]
    if n_starts < 20 * n_w:
        raise ConfigurationError(f"need at least 20*|W| = {20 * n_w} starts")
    v1 = as_cartan(rs, h1).real
    v2 = as_cartan(rs, h2).real
    gram = np.array([[float(x) for x in row] for row in rs.form_gram])
    closed_values = (stack @ v1) @ (gram @ v2)

    h1m = embed_cartan(spec, v1)
    h2m = embed_cartan(spec, v2)
    basis = full_algebra_basis(spec)
    scale2 = _b_inner(spec, h1m, h1m) * _b_inner(spec, h2m, h2m)
    newton_at = 1e-3 * scale2

    converged = []
    n_unconverged = 0
    for s in range(n_starts):
        g = haar_batch(spec, 1, _stream(seed, s))[0]
        ok = False
        f_best = math.inf
        last_improved = 0
        for it in range(max_iter):
            if it % 32 == 31:
                g = _reunitarize(g)  # conjugation drift would lift F's floor
            x = g @ h1m @ g.conj().T
            c = _comm(x, h2m)
            f = _b_inner(spec, c, c)
            if f < grad_tol**2:
                ok = True
                break
            if f < 0.5 * f_best:
                f_best, last_improved = f, it
            elif it - last_improved > 60:
                break  # stagnated above tolerance; ill-conditioned start
            if f < newton_at:
                gn = _newton_factor(basis, x, h2m, spec) @ g
                xn = gn @ h1m @ gn.conj().T
                cn = _comm(xn, h2m)
                fn = _b_inner(spec, cn, cn)
                if fn < f:
                    g = gn
                    continue
            grad = 2.0 * _comm(x, _comm(h2m, c))
            gnorm2 = _b_inner(spec, grad, grad)
            eta = f / gnorm2  # scale-free first guess
            for _ in range(40):
                gn = _expm_skew(-eta * grad) @ g
                xn = gn @ h1m @ gn.conj().T
                cn = _comm(xn, h2m)
                fn = _b_inner(spec, cn, cn)
                if fn < f - 0.25 * eta * gnorm2:
                    break
                eta *= 0.5
            else:
                break
            g = gn
        if not ok:
            n_unconverged += 1
            continue
        value = _b_inner(spec, x, h2m)
        resid = math.sqrt(max(f, 0.0))
        converged.append((value, resid, x))

    clusters: List[List] = []
    for value, resid, x in sorted(converged, key=lambda p: p[0]):
        if clusters and abs(value - clusters[-1][0][0]) < cluster_tol:
            clusters[-1].append((value, resid, x))
        else:
            clusters.append([(value, resid, x)])

    points = []
    n_spurious = 0
    for members in clusters:
        value, resid, x = min(members, key=lambda p: p[1])
        gaps = np.abs(closed_values - value)
        idx = int(np.argmin(gaps))
        if gaps[idx] < cluster_tol:
            matched, sgn = idx, int(signs[idx])
        else:
            matched, sgn = None, None
            n_spurious += 1
        points.append(
            CriticalPoint(
                group_orbit_point=x,
                value=value,
                matched_weyl=matched,
                matched_sign=sgn,
                residual_gradient_norm=resid,
            )
        )
    matched_ids = {p.matched_weyl for p in points if p.matched_weyl is not None}
    distinct_closed = len({round(v / cluster_tol) for v in closed_values})
    return CriticalSearchResult(
        points=points,
        expected_count=distinct_closed,
        n_unconverged=n_unconverged,
        complete_cover=(len(matched_ids) == distinct_closed == len(points)),
        n_spurious=n_spurious,
    )


# ---------------------------------------------------------------------------
# tangent-space bases

def _spanning_set(spec: CompactGroupSpec) -> List[np.ndarray]:
    d = spec.size
    out = []
    if spec.family == "su":
        for j in range(d):
            for k in range(j + 1, d):
                m = np.zeros((d, d), dtype=complex)
                m[j, k], m[k, j] = 1, -1
                out.append(m)
                m = np.zeros((d, d), dtype=complex)
                m[j, k] = m[k, j] = 1j
                out.append(m)
        for j in range(d - 1):
            m = np.zeros((d, d), dtype=complex)
            m[j, j], m[j + 1, j + 1] = 1j, -1j
            out.append(m)
    elif spec.family == "so":
        for j in range(d):
            for k in range(j + 1, d):
                m = np.zeros((d, d), dtype=complex)
                m[j, k], m[k, j] = 1, -1
                out.append(m)
    else:
        half = d // 2

        def quartet(a_block, b_block):
            m = np.zeros((d, d), dtype=complex)
            m[:half, :half] = a_block
            m[half:, half:] = a_block.conj()
            m[:half, half:] = b_block
            m[half:, :half] = -b_block.conj()
            return m

        for j in range(half):
            a = np.zeros((half, half), dtype=complex)
            a[j, j] = 1j
            out.append(quartet(a, np.zeros((half, half))))
            for coeff in (1.0, 1j):
                b = np.zeros((half, half), dtype=complex)
                b[j, j] = coeff
                out.append(quartet(np.zeros((half, half)), b))
        for j in range(half):
            for k in range(j + 1, half):
                a = np.zeros((half, half), dtype=complex)
                a[j, k], a[k, j] = 1, -1
                out.append(quartet(a, np.zeros((half, half))))
                a = np.zeros((half, half), dtype=complex)
                a[j, k] = a[k, j] = 1j
                out.append(quartet(a, np.zeros((half, half))))
                for coeff in (1.0, 1j):
                    b = np.zeros((half, half), dtype=complex)
                    b[j, k] = b[k, j] = coeff
                    out.append(quartet(np.zeros((half, half)), b))
    return out


def full_algebra_basis(spec: CompactGroupSpec) -> List[np.ndarray]:
    """Orthonormal basis of the algebra for the invariant pairing, with the
    Cartan directions first."""
    rs = spec.root_system()
    cartan = []
    for i in range(rs.rank):
        u = np.zeros(rs.ambient_dim)
        if rs.sum_zero:
            u[i], u[i + 1] = 1.0, -1.0
        else:
            u[i] = 1.0
        cartan.append(embed_cartan(spec, u - u.mean() if rs.sum_zero else u))
    basis: List[np.ndarray] = []
    for m in cartan + _spanning_set(spec):
        v = m.astype(complex)
        for b in basis:
            v = v - _b_inner(spec, b, v) * b
        norm2 = _b_inner(spec, v, v)
        if norm2 > 1e-18:
            basis.append(v / math.sqrt(norm2))
    assert len(basis) == spec.dim_algebra
    return basis


def tangent_basis(spec: CompactGroupSpec) -> List[np.ndarray]:
    """Orthonormal basis of the complement of the Cartan inside the algebra:
    the tangent directions of a generic orbit at its Cartan points."""
    return full_algebra_basis(spec)[spec.root_system().rank:]


@dataclass(frozen=True)
class HessianCheck:
    sqrt_det: float
    predicted: float
    rel_error: float
    eigenvalues: np.ndarray


def hessian_determinant_check(
    spec: CompactGroupSpec,
    cp: CriticalPoint,
    h1,
    h2,
    step: float = 1e-4,
) -> HessianCheck:
    """Finite-difference Hessian of the orbit functional at a matched critical
    point, compared against sign(w) * Pi(h1) * Pi(h2).

    The eigenvalues of -H arrive in equal-valued pairs, one 2x2 real block per
    positive root; the square root across a pair is the signed pair value, and
    the product over pairs reproduces the discriminant identity.
    """
    if cp.matched_weyl is None:
        raise ConfigurationError("critical point is not matched to a Weyl element")
    rs = spec.root_system()
    stack, signs = weyl_matrices(rs)
    v1 = as_cartan(rs, h1).real
    v2 = as_cartan(rs, h2).real
    w_h1 = stack[cp.matched_weyl] @ v1
    x_star = embed_cartan(spec, w_h1)
    h2m = embed_cartan(spec, v2)
    basis = tangent_basis(spec)
    dim = len(basis)

    def phi(coeffs: Sequence[float]) -> float:
        xi = sum(c * b for c, b in zip(coeffs, basis))
        e = _expm_skew(xi)
        return _b_inner(spec, e @ x_star @ e.conj().T, h2m)

    hess = np.zeros((dim, dim))
    f0 = phi([0.0] * dim)
    for i in range(dim):
        ei = np.zeros(dim)
        ei[i] = step
        hess[i, i] = (phi(ei) - 2 * f0 + phi(-ei)) / step**2
        for j in range(i + 1, dim):
            ej = np.zeros(dim)
            ej[j] = step
            hess[i, j] = hess[j, i] = (
                phi(ei + ej) - phi(ei - ej) - phi(-ei + ej) + phi(-ei - ej)
            ) / (4 * step**2)

    eig = np.linalg.eigvalsh(-hess)
    if np.min(np.abs(eig)) == 0 or np.max(np.abs(eig)) / np.min(np.abs(eig)) > 1e10:
        raise NumericalFailureError("Hessian is ill-conditioned")
    order = np.argsort(eig)
    eig_sorted = eig[order]
    sqrt_det = 1.0
    for k in range(dim // 2):
        pair = eig_sorted[2 * k : 2 * k + 2]
        sqrt_det *= 0.5 * (pair[0] + pair[1])
    predicted = signs[cp.matched_weyl] * float(
        (discriminant_at(rs, v1) * discriminant_at(rs, v2)).real
    )
    rel = abs(sqrt_det - predicted) / abs(predicted)
    return HessianCheck(
        sqrt_det=sqrt_det, predicted=predicted, rel_error=rel, eigenvalues=eig_sorted
    )


def stationary_phase_estimate(rs: RootSystem, h1, h2, t: float) -> complex:
    """Leading-order steepest-descent form of the Haar average of
    e^{-<Ad_g h1, h2>/t}, assembled from the critical data: critical values
    <w(h1), h2>, the Hessian determinant identity, and the orbit dimension.

    The correction terms vanish identically, so this equals the closed form
    of the integral at (h1, -h2) for every t.
    """
    if t <= 0:
        raise ConfigurationError("t must be positive")
    v1 = as_cartan(rs, h1)
    v2 = as_cartan(rs, h2)
    pi1 = check_regular(rs, v1, label="h1")
    check_regular(rs, v2, label="h2")
    stack, signs = weyl_matrices(rs)
    gram = np.array([[float(x) for x in row] for row in rs.form_gram])
    crit = (stack @ v1) @ (gram @ v2)
    half_codim = (rs.dim_algebra - rs.rank) // 2
    m = float(np.max((-crit / t).real))
    terms = signs * np.exp(-crit / t - m)
    s = complex(math.fsum(terms.real), math.fsum(terms.imag))
    c = pi_pi_norm_cached(rs) / rs.weyl_order
    pi_minus_h2 = discriminant_at(rs, -v2)
    return c * t**half_codim * np.exp(m) * s / (pi1 * pi_minus_h2)


def saddle_report(spec: CompactGroupSpec, result: CriticalSearchResult, checks) -> dict:
    return {
        "critical_values": [p.value for p in result.points],
        "matched_weyl_signs": [p.matched_sign for p in result.points],
        "hessian_rel_errors": [c.rel_error for c in checks],
    }
