"""Closed-form evaluators: the Weyl-sum orbital integral, the unitary
determinant form, Weyl and Kirillov characters, and coadjoint orbit volumes.

All exponential sums factor out the largest real-part exponent before
accumulation and are summed with exact compensated summation, largest
magnitude first, because the alternating Weyl sum cancels catastrophically
near degenerate inputs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, DegenerateInputError
from .rootsys import (
    RootSystem,
    _dot,
    _gram_solve,
    coroot,
    discriminant_at,
    dual_pairing,
    pi_pi_norm_cached,
    weyl_matrices,
)

DEFAULT_REGULARITY_TOL = 1e-8


@dataclass(frozen=True)
class CartanPoint:
    """Point of the (complexified) Cartan in the ambient coordinate convention."""

    coords: Tuple[complex, ...]

    @classmethod
    def of(cls, rs: RootSystem, coords: Sequence[complex]) -> "CartanPoint":
        return cls(tuple(complex(c) for c in as_cartan(rs, coords)))


def as_cartan(rs: RootSystem, h) -> np.ndarray:
    """Validate and coerce coordinates for the given root system."""
    if isinstance(h, CartanPoint):
        h = h.coords
    v = np.asarray(h, dtype=complex)
    if v.shape != (rs.ambient_dim,):
        raise ValueError(
            f"expected {rs.ambient_dim} coordinates for {rs.family}{rs.rank}, got shape {v.shape}"
        )
    if rs.sum_zero:
        scale = max(1.0, float(np.max(np.abs(v))))
        if abs(v.sum()) > 1e-12 * scale:
            raise ValueError(
                f"{rs.family}{rs.rank} coordinates must sum to zero (got sum {v.sum():.3e})"
            )
    return v


def check_regular(rs: RootSystem, h, tol: float = DEFAULT_REGULARITY_TOL, label: str = "h") -> complex:
    """Return the discriminant value, or raise naming the closest root hyperplane."""
    v = as_cartan(rs, h)
    scale = float(np.max(np.abs(v))) if v.size else 0.0
    threshold = tol * scale**rs.num_positive_roots
    pi_val = discriminant_at(rs, v)
    if abs(pi_val) <= threshold or pi_val == 0:
        vals = [
            (abs(complex(sum(float(r) * x for r, x in zip(root, v)))), root)
            for root in rs.positive_roots
        ]
        worst = min(vals)[1]
        raise DegenerateInputError(
            f"{label} is degenerate: root {tuple(int(x) for x in worst)} nearly vanishes",
            root=worst,
        )
    return pi_val


def _compensated_complex_sum(terms: np.ndarray) -> complex:
    order = np.argsort(-np.abs(terms.real))
    t = terms[order]
    return complex(math.fsum(t.real), math.fsum(t.imag))


def weyl_sum(rs: RootSystem, exponents: np.ndarray) -> Tuple[float, complex]:
    """Signed sum over the Weyl group of e^{exponent_w}.

    Returns (m, s) with the total equal to e^m * s, where m is the largest
    real part among the exponents.
    """
    _, signs = weyl_matrices(rs)
    m = float(np.max(exponents.real))
    terms = signs * np.exp(exponents - m)
    return m, _compensated_complex_sum(terms)


def _pairing_exponents(rs: RootSystem, h1: np.ndarray, h2: np.ndarray) -> np.ndarray:
    """<w(h1), h2> for every Weyl element, using the invariant form."""
    stack, _ = weyl_matrices(rs)
    gram = np.array([[float(x) for x in row] for row in rs.form_gram])
    return (stack @ h1) @ (gram @ h2)


def orbital_integral_parts(
    rs: RootSystem,
    h1,
    h2,
    t: float = 1.0,
    regularity_tol: float = DEFAULT_REGULARITY_TOL,
) -> Tuple[float, complex]:
    """Closed form of the Haar average of e^{<Ad_g h1, h2>/t}, split as
    (exponent, mantissa) with the value equal to e^exponent * mantissa.

    The mantissa is t^r * C * sum_w eps(w) e^{<w(h1),h2>/t - exponent}
    / (Pi(h1) Pi(h2)) with C the bracket norm of the discriminant divided by
    the Weyl order; the split lets small-t callers cancel the exponent
    against Gaussian prefactors before exponentiating.
    """
    if t <= 0:
        raise ConfigurationError("t must be positive")
    v1 = as_cartan(rs, h1)
    v2 = as_cartan(rs, h2)
    pi1 = check_regular(rs, v1, regularity_tol, "h1")
    pi2 = check_regular(rs, v2, regularity_tol, "h2")
    c = pi_pi_norm_cached(rs) / rs.weyl_order
    m, s = weyl_sum(rs, _pairing_exponents(rs, v1, v2) / t)
    return m, t**rs.num_positive_roots * c * s / (pi1 * pi2)


def orbital_integral_closed(
    rs: RootSystem,
    h1,
    h2,
    t: float = 1.0,
    regularity_tol: float = DEFAULT_REGULARITY_TOL,
) -> complex:
    """Closed form of the Haar average of e^{<Ad_g h1, h2>/t}."""
    m, mant = orbital_integral_parts(rs, h1, h2, t, regularity_tol)
    return cmath.exp(m) * mant


def hc_rhs(rs: RootSystem, h1, h2, regularity_tol: float = DEFAULT_REGULARITY_TOL) -> complex:
    """Weyl-sum closed form of the orbital integral at t = 1."""
    return orbital_integral_closed(rs, h1, h2, 1.0, regularity_tol)


def hciz(a: Sequence[float], b: Sequence[float], gap_tol: float = 1e-8) -> float:
    """Unitary-group orbital integral as a determinant over a Vandermonde ratio.

    Both eigenvalue vectors must be strictly increasing; confluent
    (coincident-eigenvalue) limits are out of scope.  The determinant is
    evaluated after factoring the maximal exponent out of each row.
    """
    av = np.asarray(a, dtype=float)
    bv = np.asarray(b, dtype=float)
    if av.ndim != 1 or av.shape != bv.shape:
        raise ValueError("eigenvalue vectors must be 1-d and of equal length")
    n = av.size
    for name, v in (("a", av), ("b", bv)):
        gaps = np.diff(v)
        if n > 1 and (gaps <= gap_tol).any():
            raise DegenerateInputError(
                f"coincident eigenvalues in {name}: entries must increase with gaps > {gap_tol}"
            )
    if n == 1:
        return float(math.exp(av[0] * bv[0]))
    expo = np.outer(av, bv)
    row_max = expo.max(axis=1)
    det = float(np.linalg.det(np.exp(expo - row_max[:, None])))
    vand_a = math.prod(av[j] - av[i] for i in range(n) for j in range(i + 1, n))
    vand_b = math.prod(bv[j] - bv[i] for i in range(n) for j in range(i + 1, n))
    pref = math.prod(math.factorial(p) for p in range(1, n))
    return pref * math.exp(float(row_max.sum())) * det / (vand_a * vand_b)


# ---------------------------------------------------------------------------
# weights and characters

@dataclass(frozen=True)
class Weight:
    """Linear functional on the Cartan, stored as exact rational coefficients."""

    coords: Tuple[Fraction, ...]
    dominant_integral: bool

    def as_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.coords])


def fundamental_weights(rs: RootSystem) -> Tuple[Weight, ...]:
    """Solve <w_i, coroot_j> = delta_ij exactly (sum-zero representative for A, G2)."""
    n = rs.ambient_dim
    coroots = [coroot(rs, a) for a in rs.simple_roots]
    rows = [list(cv) for cv in coroots]
    if rs.sum_zero:
        rows.append([Fraction(1)] * n)
    out = []
    for i in range(rs.rank):
        rhs = [Fraction(1) if j == i else Fraction(0) for j in range(rs.rank)]
        if rs.sum_zero:
            rhs.append(Fraction(0))
        sol = _solve_exact(rows, rhs)
        out.append(Weight(coords=tuple(sol), dominant_integral=True))
    return tuple(out)


def _solve_exact(rows, rhs):
    """Solve a full-column-rank rational system by elimination."""
    m, n = len(rows), len(rows[0])
    aug = [list(r) + [rhs[i]] for i, r in enumerate(rows)]
    piv_cols = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, m) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        pv = aug[r][col]
        aug[r] = [x / pv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        piv_cols.append(col)
        r += 1
        if r == n:
            break
    assert r == n, "system is rank deficient"
    sol = [Fraction(0)] * n
    for i, col in enumerate(piv_cols):
        sol[col] = aug[i][n]
    return sol


def weight_from_labels(rs: RootSystem, labels: Sequence[int]) -> Weight:
    """Dominant integral weight with the given nonnegative integer labels."""
    if len(labels) != rs.rank:
        raise ValueError(f"expected {rs.rank} labels")
    if any(int(m) != m or m < 0 for m in labels):
        raise ValueError("labels must be nonnegative integers")
    funds = fundamental_weights(rs)
    coords = [Fraction(0)] * rs.ambient_dim
    for m, w in zip(labels, funds):
        for i, x in enumerate(w.coords):
            coords[i] += int(m) * x
    return Weight(coords=tuple(coords), dominant_integral=True)


def rho_weight(rs: RootSystem) -> Weight:
    """Half-sum of the positive roots."""
    coords = [Fraction(0)] * rs.ambient_dim
    for root in rs.positive_roots:
        for i, x in enumerate(root):
            coords[i] += Fraction(x, 2)
    return Weight(coords=tuple(coords), dominant_integral=True)


def _check_dominant_integral(rs: RootSystem, lam: Weight):
    if not lam.dominant_integral:
        raise ValueError("weight must be flagged dominant integral")
    for a in rs.simple_roots:
        pairing = _dot(lam.coords, coroot(rs, a))
        if pairing.denominator != 1 or pairing < 0:
            raise ValueError(f"weight is not dominant integral: pairing {pairing} with a simple coroot")


def _weyl_denominator(rs: RootSystem, h: np.ndarray, tol: float) -> Tuple[float, complex]:
    """prod over positive roots of (e^{a(h)/2} - e^{-a(h)/2}), factored.

    Returns (m, p) with the product equal to e^m * p; each factor is written
    e^{|Re a(h)|/2} (sign-matched difference) so nothing overflows.
    """
    m = 0.0
    prod = 1.0 + 0.0j
    smallest = (math.inf, None)
    for root in rs.positive_roots:
        z = complex(sum(float(r) * x for r, x in zip(root, h)))
        half = z / 2.0
        if half.real >= 0:
            m += half.real
            factor = cmath.exp(1j * half.imag) - cmath.exp(-half - half.real)
        else:
            m += -half.real
            factor = cmath.exp(half - (-half.real)) - cmath.exp(-1j * half.imag)
        prod *= factor
        mag = abs(factor) * math.exp(min(m, 0.0))
        if abs(factor) < smallest[0]:
            smallest = (abs(factor), root)
    if abs(prod) <= tol:
        root = smallest[1]
        raise DegenerateInputError(
            f"h is singular for the character denominator: root {tuple(int(x) for x in root)}",
            root=root,
        )
    return m, prod


def weyl_character(
    rs: RootSystem,
    lam: Weight,
    h,
    denom_tol: float = 1e-12,
) -> complex:
    """Ratio of the signed Weyl sum over lambda + rho to the root-factor product."""
    _check_dominant_integral(rs, lam)
    v = as_cartan(rs, h)
    lam_rho = lam.as_array() + rho_weight(rs).as_array()
    stack, _ = weyl_matrices(rs)
    # weights pair with points by functional application; Weyl matrices are
    # form-orthogonal so acting on the coefficient vector is the dual action
    exponents = (stack @ lam_rho) @ v
    m_num, s_num = weyl_sum(rs, exponents)
    m_den, p_den = _weyl_denominator(rs, v, denom_tol)
    return cmath.exp(m_num - m_den) * s_num / p_den


def weyl_dimension(rs: RootSystem, lam: Weight) -> int:
    """Exact dimension: the h -> 0 limit of the character along a regular ray."""
    _check_dominant_integral(rs, lam)
    rho = rho_weight(rs)
    lam_rho = tuple(a + b for a, b in zip(lam.coords, rho.coords))
    num = Fraction(1)
    den = Fraction(1)
    for root in rs.positive_roots:
        num *= dual_pairing(rs, lam_rho, root)
        den *= dual_pairing(rs, rho.coords, root)
    val = num / den
    assert val.denominator == 1
    return int(val)


def coadjoint_volume(rs: RootSystem, h1, regularity_tol: float = DEFAULT_REGULARITY_TOL) -> float:
    """Volume of the orbit through the form-dual of h1 under its canonical measure.

    Requires h1 in the fundamental chamber (discriminant real and positive).
    """
    v = as_cartan(rs, h1)
    pi1 = check_regular(rs, v, regularity_tol, "h1")
    if abs(pi1.imag) > 1e-10 * abs(pi1) or pi1.real <= 0:
        raise DegenerateInputError(
            "h1 must lie in the fundamental chamber (discriminant real and positive); "
            f"got {pi1:.6g}"
        )
    return rs.weyl_order * pi1.real / pi_pi_norm_cached(rs)


def weight_dual_vector(rs: RootSystem, lam: Weight) -> np.ndarray:
    """Cartan vector pairing (under the form) like the functional lambda + rho."""
    rho = rho_weight(rs)
    lam_rho = tuple(a + b for a, b in zip(lam.coords, rho.coords))
    dual = _gram_solve(rs.form_gram, lam_rho)
    return np.array([float(x) for x in dual])


def kirillov_character(
    rs: RootSystem,
    lam: Weight,
    h,
    denom_tol: float = 1e-12,
) -> complex:
    """Character via the orbit route: discriminant prefactor times orbit volume
    times the closed-form orbital integral against the shifted-weight vector.

    Must agree with ``weyl_character``; the two sides share no intermediate
    values beyond the root data.
    """
    _check_dominant_integral(rs, lam)
    v = as_cartan(rs, h)
    h1 = weight_dual_vector(rs, lam)
    pi_h = check_regular(rs, v, label="h")
    m_den, p_den = _weyl_denominator(rs, v, denom_tol)
    vol = coadjoint_volume(rs, h1)
    integral = hc_rhs(rs, h1, v)
    return pi_h * cmath.exp(-m_den) / p_den * vol * integral


def result_record(formula: str, inputs: dict, value: complex) -> dict:
    """JSON record for a closed-form evaluation."""
    assert formula in ("eq1", "eq2", "eq31", "eq32")
    return {
        "inputs": inputs,
        "value": {"re": float(np.real(value)), "im": float(np.imag(value))},
        "method": "closed_form",
        "formula": formula,
    }
