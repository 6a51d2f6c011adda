"""Exact root-system data, Weyl groups, the discriminant, and the polynomial bracket.

Root data are stored as exact rationals in a fixed ambient coordinate system:

  A_n   sum-zero subspace of R^{n+1}, positive roots e_i - e_j (i < j)
  B_n   R^n, positive roots e_i +- e_j (i < j) and e_i
  C_n   R^n, positive roots e_i +- e_j (i < j) and 2 e_i
  D_n   R^n, positive roots e_i +- e_j (i < j)
  G2    sum-zero subspace of R^3, all root entries integral

The invariant form defaults to the identity Gram matrix on the ambient
coordinates; every identity downstream is covariant under rescaling it.
Roots are linear functionals: alpha(h) is the plain dot product of the
stored coefficient vector with the coordinate vector, independent of the
form.  The orthonormal coordinates used by the bracket come from
Gram-Schmidt (with respect to the form) on e_i - e_{i+1} in index order
for the sum-zero families and on the standard basis otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, ResourceError

Vector = Tuple[Fraction, ...]
Matrix = Tuple[Vector, ...]

FAMILIES = ("A", "B", "C", "D", "G2")

_WEYL_ORDER = {
    "A": lambda n: math.factorial(n + 1),
    "B": lambda n: 2**n * math.factorial(n),
    "C": lambda n: 2**n * math.factorial(n),
    "D": lambda n: 2 ** (n - 1) * math.factorial(n),
    "G2": lambda n: 12,
}


@dataclass(frozen=True, eq=False)
class RootSystem:
    family: str
    rank: int
    ambient_dim: int
    simple_roots: Tuple[Vector, ...]
    positive_roots: Tuple[Vector, ...]
    form_gram: Matrix

    @property
    def num_positive_roots(self) -> int:
        return len(self.positive_roots)

    @property
    def weyl_order(self) -> int:
        return _WEYL_ORDER[self.family](self.rank)

    @property
    def dim_algebra(self) -> int:
        """Dimension of the compact Lie algebra this Cartan sits in."""
        return 2 * self.num_positive_roots + self.rank

    @property
    def sum_zero(self) -> bool:
        return self.family in ("A", "G2")

    def __repr__(self):
        return f"RootSystem({self.family}{self.rank})"


@dataclass(frozen=True)
class WeylElement:
    matrix: Matrix
    sign: int
    word_length: int

    def as_array(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.matrix])

    def apply(self, h: Sequence[Fraction]) -> Vector:
        return tuple(
            sum(r * x for r, x in zip(row, h)) for row in self.matrix
        )


@dataclass
class SparsePolynomial:
    """Polynomial over the orthonormal Cartan coordinates, keyed by exponent vector."""

    nvars: int
    coeffs: Dict[Tuple[int, ...], complex]

    def degree(self) -> int:
        return max((sum(b) for b in self.coeffs), default=0)


def _frac_vec(entries: Iterable) -> Vector:
    return tuple(Fraction(x) for x in entries)


def _identity_gram(dim: int) -> Matrix:
    return tuple(
        tuple(Fraction(1) if i == j else Fraction(0) for j in range(dim))
        for i in range(dim)
    )


def _e(i: int, dim: int, value=1) -> List[Fraction]:
    v = [Fraction(0)] * dim
    v[i] = Fraction(value)
    return v


def build_root_system(family: str, rank: int) -> RootSystem:
    """Construct exact root data for one classical family (or G2) at the given rank."""
    if family not in FAMILIES:
        raise ConfigurationError(f"unsupported family {family!r}; expected one of {FAMILIES}")
    if family == "A":
        if rank < 1:
            raise ConfigurationError("A family requires rank >= 1")
        dim = rank + 1
        simple = []
        for i in range(rank):
            v = _e(i, dim)
            v[i + 1] = Fraction(-1)
            simple.append(tuple(v))
        positive = []
        for i in range(dim):
            for j in range(i + 1, dim):
                v = _e(i, dim)
                v[j] = Fraction(-1)
                positive.append(tuple(v))
    elif family in ("B", "C", "D"):
        min_rank = 3 if family == "D" else 2
        if rank < min_rank:
            reason = "D_2 is not simple" if family == "D" else "rank >= 2 required"
            raise ConfigurationError(f"{family} family requires rank >= {min_rank} ({reason})")
        dim = rank
        simple = []
        for i in range(rank - 1):
            v = _e(i, dim)
            v[i + 1] = Fraction(-1)
            simple.append(tuple(v))
        if family == "B":
            simple.append(tuple(_e(rank - 1, dim)))
        elif family == "C":
            simple.append(tuple(_e(rank - 1, dim, 2)))
        else:
            v = _e(rank - 2, dim)
            v[rank - 1] = Fraction(1)
            simple.append(tuple(v))
        positive = []
        for i in range(rank):
            for j in range(i + 1, rank):
                for sj in (-1, 1):
                    v = _e(i, dim)
                    v[j] = Fraction(sj)
                    positive.append(tuple(v))
        if family == "B":
            positive.extend(tuple(_e(i, dim)) for i in range(rank))
        elif family == "C":
            positive.extend(tuple(_e(i, dim, 2)) for i in range(rank))
    else:  # G2
        if rank != 2:
            raise ConfigurationError("G2 has rank fixed at 2")
        dim = 3
        a1 = _frac_vec((1, -1, 0))
        a2 = _frac_vec((-2, 1, 1))
        simple = [a1, a2]

        def add(u, v):
            return tuple(x + y for x, y in zip(u, v))

        positive = [
            a1,
            a2,
            add(a1, a2),                    # (-1, 0, 1)
            add(add(a1, a1), a2),           # (0, -1, 1)
            add(add(add(a1, a1), a1), a2),  # (1, -2, 1)
            add(add(add(add(a1, a1), a1), a2), a2),  # (-1, -1, 2)
        ]

    return RootSystem(
        family=family,
        rank=rank,
        ambient_dim=dim,
        simple_roots=tuple(simple),
        positive_roots=tuple(positive),
        form_gram=_identity_gram(dim),
    )


def with_scaled_form(rs: RootSystem, scale) -> RootSystem:
    """Return a copy of the root system with the invariant form multiplied by ``scale``."""
    c = Fraction(scale)
    if c <= 0:
        raise ConfigurationError("form scale must be positive")
    gram = tuple(tuple(c * x for x in row) for row in rs.form_gram)
    return replace(rs, form_gram=gram)


# ---------------------------------------------------------------------------
# exact linear algebra helpers

def _dot(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    if len(x) != len(y):
        raise ValueError("dimension mismatch")
    return sum(a * b for a, b in zip(x, y))


def _gram_solve(gram: Matrix, rhs: Sequence[Fraction]) -> Vector:
    """Solve G x = rhs exactly by Gaussian elimination (G symmetric positive definite)."""
    n = len(rhs)
    aug = [list(row) + [rhs[i]] for i, row in enumerate(gram)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(aug[r][n] for r in range(n))


def coroot(rs: RootSystem, root: Sequence[Fraction]) -> Vector:
    """Coroot vector: 2 G^{-1} a / (a^T G^{-1} a) for the root functional a."""
    ginv_a = _gram_solve(rs.form_gram, tuple(root))
    norm = _dot(root, ginv_a)
    return tuple(2 * x / norm for x in ginv_a)


def dual_pairing(rs: RootSystem, a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    """Inner product of two linear functionals induced by the invariant form."""
    return _dot(a, _gram_solve(rs.form_gram, tuple(b)))


def reflection_matrix(rs: RootSystem, root: Sequence[Fraction]) -> Matrix:
    """Exact matrix of the reflection s_a(h) = h - a(h) a^vee on ambient coordinates."""
    dim = rs.ambient_dim
    cv = coroot(rs, root)
    rows = []
    for i in range(dim):
        row = []
        for j in range(dim):
            entry = (Fraction(1) if i == j else Fraction(0)) - cv[i] * root[j]
            row.append(entry)
        rows.append(tuple(row))
    return tuple(rows)


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    bt = list(zip(*b))
    return tuple(
        tuple(sum(a[i][k] * bt[j][k] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def generate_weyl_group(rs: RootSystem, max_elements: int = 10**7) -> List[WeylElement]:
    """Breadth-first closure of the simple reflections, identity first.

    Deduplication is by the exact rational matrix, so no floating-point
    collisions are possible.  Word length is the BFS depth, which for a
    Coxeter group equals the reduced word length; the sign alternates with it.
    """
    gens = [reflection_matrix(rs, a) for a in rs.simple_roots]
    ident = _identity_gram(rs.ambient_dim)
    seen = {ident: 0}
    order = [ident]
    frontier = [ident]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                prod = _mat_mul(g, m)
                if prod not in seen:
                    seen[prod] = seen[m] + 1
                    order.append(prod)
                    nxt.append(prod)
                    if len(order) > max_elements:
                        raise ResourceError(
                            f"Weyl closure exceeded {max_elements} elements"
                        )
        frontier = nxt
    return [
        WeylElement(matrix=m, sign=(-1) ** seen[m], word_length=seen[m])
        for m in order
    ]


# ---------------------------------------------------------------------------
# orthonormal coordinates and the discriminant

def orthonormal_basis(rs: RootSystem) -> np.ndarray:
    """Rows are an orthonormal basis (for the form) of the Cartan coordinate space.

    Sum-zero families use Gram-Schmidt on e_i - e_{i+1} in index order; the
    full-dimensional families use the standard basis.  Shape (rank, ambient_dim).
    """
    dim = rs.ambient_dim
    if rs.sum_zero:
        span = []
        for i in range(dim - 1):
            v = [0.0] * dim
            v[i], v[i + 1] = 1.0, -1.0
            span.append(v)
    else:
        span = [[1.0 if j == i else 0.0 for j in range(dim)] for i in range(dim)]
    gram = np.array([[float(x) for x in row] for row in rs.form_gram])
    basis: List[np.ndarray] = []
    for v in span:
        u = np.array(v)
        for b in basis:
            u = u - (b @ gram @ u) * b
        norm = math.sqrt(u @ gram @ u)
        basis.append(u / norm)
    out = np.array(basis)
    assert out.shape == (rs.rank, dim)
    return out


def to_orthonormal(rs: RootSystem, h: np.ndarray) -> np.ndarray:
    """Coordinates of an ambient Cartan vector in the orthonormal basis."""
    onb = orthonormal_basis(rs)
    gram = np.array([[float(x) for x in row] for row in rs.form_gram])
    return onb @ gram @ np.asarray(h)


def from_orthonormal(rs: RootSystem, u: np.ndarray) -> np.ndarray:
    """Ambient Cartan vector with the given orthonormal coordinates."""
    return orthonormal_basis(rs).T @ np.asarray(u)


def _poly_mul_linear(p: Dict[Tuple[int, ...], complex], lin: np.ndarray) -> Dict:
    out: Dict[Tuple[int, ...], complex] = {}
    for mono, c in p.items():
        for k, lam in enumerate(lin):
            if lam == 0.0:
                continue
            m2 = list(mono)
            m2[k] += 1
            m2 = tuple(m2)
            out[m2] = out.get(m2, 0.0) + c * lam
    return out


def discriminant(rs: RootSystem) -> SparsePolynomial:
    """Product of the positive-root linear forms in orthonormal coordinates.

    Coefficients are floats: the change to orthonormal coordinates is
    irrational for the sum-zero families.  Monomials whose coefficient
    collapses below 1e-13 of the largest are cancellation residue and are
    dropped, keeping the no-zero-coefficient invariant.
    """
    onb = orthonormal_basis(rs)
    poly: Dict[Tuple[int, ...], complex] = {(0,) * rs.rank: 1.0}
    for root in rs.positive_roots:
        rvec = np.array([float(x) for x in root])
        lin = onb @ rvec  # functional coefficients in orthonormal coordinates
        poly = _poly_mul_linear(poly, lin)
    cutoff = 1e-13 * max(abs(c) for c in poly.values())
    poly = {m: c for m, c in poly.items() if abs(c) > cutoff}
    return SparsePolynomial(nvars=rs.rank, coeffs=poly)


def eval_poly(p: SparsePolynomial, h: Sequence[complex]) -> complex:
    """Evaluate sum_beta c_beta h^beta at a point in orthonormal coordinates."""
    if len(h) != p.nvars:
        raise ValueError(f"expected {p.nvars} coordinates, got {len(h)}")
    total = 0.0 + 0.0j
    for mono, c in p.coeffs.items():
        term = c
        for hk, bk in zip(h, mono):
            if bk:
                term *= hk**bk
        total += term
    return total


def bracket(p: SparsePolynomial, q: SparsePolynomial) -> complex:
    """Pair two polynomials: apply p as a constant-coefficient operator to q at 0.

    In orthonormal coordinates this is sum_beta c_beta(p) c_beta(q) beta!,
    symmetric in its arguments.
    """
    if p.nvars != q.nvars:
        raise ValueError("polynomials live over different coordinate systems")
    small, large = (p.coeffs, q.coeffs) if len(p.coeffs) < len(q.coeffs) else (q.coeffs, p.coeffs)
    total = 0.0 + 0.0j
    for mono, c in small.items():
        c2 = large.get(mono)
        if c2 is None:
            continue
        fact = 1
        for b in mono:
            fact *= math.factorial(b)
        total += c * c2 * fact
    return total


def pi_pi_norm(rs: RootSystem) -> float:
    """Bracket of the discriminant with itself; strictly positive."""
    pi = discriminant(rs)
    val = bracket(pi, pi)
    assert abs(val.imag) <= 1e-9 * abs(val.real)
    assert val.real > 0
    return val.real


def discriminant_at(rs: RootSystem, h: Sequence[complex]) -> complex:
    """Discriminant value at ambient coordinates, via the product of root forms."""
    hv = np.asarray(h)
    total = 1.0 + 0.0j
    for root in rs.positive_roots:
        total *= complex(sum(float(r) * x for r, x in zip(root, hv)))
    return total


def discriminant_at_exact(rs: RootSystem, h: Sequence[Fraction]) -> Fraction:
    """Exact rational discriminant value at rational ambient coordinates."""
    total = Fraction(1)
    for root in rs.positive_roots:
        total *= _dot(root, _frac_vec(h))
    return total


def root_system_to_json(rs: RootSystem) -> dict:
    """Exportable root data; all root entries are integers in these conventions."""

    def as_ints(vecs):
        out = []
        for v in vecs:
            assert all(x.denominator == 1 for x in v)
            out.append([int(x) for x in v])
        return out

    return {
        "family": rs.family,
        "rank": rs.rank,
        "simple_roots": as_ints(rs.simple_roots),
        "positive_roots": as_ints(rs.positive_roots),
        "weyl_order": rs.weyl_order,
    }


# float caches, keyed by the value-identity of the root system
_WEYL_FLOAT_CACHE: Dict[tuple, Tuple[np.ndarray, np.ndarray]] = {}
_PIPI_CACHE: Dict[tuple, float] = {}


def _cache_key(rs: RootSystem) -> tuple:
    return (rs.family, rs.rank, rs.form_gram)


def weyl_matrices(rs: RootSystem) -> Tuple[np.ndarray, np.ndarray]:
    """Float stack of all Weyl matrices (|W|, dim, dim) plus the sign vector."""
    key = _cache_key(rs)
    if key not in _WEYL_FLOAT_CACHE:
        elems = generate_weyl_group(rs)
        stack = np.stack([w.as_array() for w in elems])
        signs = np.array([w.sign for w in elems], dtype=float)
        _WEYL_FLOAT_CACHE[key] = (stack, signs)
    return _WEYL_FLOAT_CACHE[key]


def pi_pi_norm_cached(rs: RootSystem) -> float:
    key = _cache_key(rs)
    if key not in _PIPI_CACHE:
        _PIPI_CACHE[key] = pi_pi_norm(rs)
    return _PIPI_CACHE[key]
