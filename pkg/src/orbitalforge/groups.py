"""Matrix realizations of SU(N), SO(N), USp(2N): Haar sampling, Cartan
embeddings, the rescaled trace form, and Monte Carlo orbital integrals.

The Monte Carlo estimator partitions the sample index space into fixed-size
blocks; block k draws from a counter-based Philox stream spawned from
(seed, k), and block results merge in index order by exact weighted
combination.  The estimate is therefore bit-identical for a given
(seed, n) regardless of how many worker threads execute the blocks.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .closedform import as_cartan
from .errors import ConfigurationError
from .rootsys import RootSystem, build_root_system

GROUP_FAMILIES = ("su", "so", "usp")

PARTITION_SIZE = 1 << 16

# trace-form constants fixed so that pairing(embed(h), embed(h')) equals the
# coordinate inner product for each family
_TRACE_CONST = {"su": -1.0, "so": -0.5, "usp": -0.5}


@dataclass(frozen=True)
class CompactGroupSpec:
    family: str
    size: int

    @property
    def rank(self) -> int:
        if self.family == "su":
            return self.size - 1
        if self.family == "so":
            return self.size // 2
        return self.size // 2

    @property
    def dim_algebra(self) -> int:
        if self.family == "su":
            return self.size**2 - 1
        if self.family == "so":
            return self.size * (self.size - 1) // 2
        n = self.size // 2
        return n * (2 * n + 1)

    @property
    def is_complex(self) -> bool:
        return self.family in ("su", "usp")

    def root_system(self) -> RootSystem:
        return _root_system_for(self)

    def __repr__(self):
        return f"{self.family.upper()}({self.size})"


def group_spec(family: str, size: int) -> CompactGroupSpec:
    family = family.lower()
    if family not in GROUP_FAMILIES:
        raise ConfigurationError(f"unsupported group family {family!r}")
    if family == "su" and size < 2:
        raise ConfigurationError("SU(N) requires N >= 2")
    if family == "so" and size < 3:
        raise ConfigurationError("SO(N) requires N >= 3")
    if family == "usp":
        if size % 2 or size < 2:
            raise ConfigurationError("USp(2n) requires even size >= 2")
    return CompactGroupSpec(family=family, size=size)


_RS_CACHE: dict = {}


def _root_system_for(spec: CompactGroupSpec) -> RootSystem:
    key = (spec.family, spec.size)
    if key not in _RS_CACHE:
        if spec.family == "su":
            rs = build_root_system("A", spec.size - 1)
        elif spec.family == "so":
            n = spec.size // 2
            rs = build_root_system("B" if spec.size % 2 else "D", n)
        else:
            rs = build_root_system("C", spec.size // 2)
        _RS_CACHE[key] = rs
    return _RS_CACHE[key]


@dataclass(frozen=True)
class GroupElement:
    matrix: np.ndarray

    def check(self, spec: CompactGroupSpec):
        g = self.matrix
        d = g.shape[0]
        assert np.max(np.abs(g.conj().T @ g - np.eye(d))) < 1e-12
        assert abs(np.linalg.det(g) - 1.0) < 1e-10
        if spec.family == "usp":
            j = symplectic_form(d // 2)
            assert np.max(np.abs(g.T @ j @ g - j)) < 1e-10


def symplectic_form(n: int) -> np.ndarray:
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = np.eye(n)
    j[n:, :n] = -np.eye(n)
    return j


@dataclass(frozen=True)
class IntegralEstimate:
    mean: complex
    stderr: float
    n_samples: int
    seed: int
    elapsed: float

    def to_json(self, spec: CompactGroupSpec, h1, h2, t: float) -> dict:
        return {
            "spec": {"family": spec.family, "size": spec.size},
            "h1": [repr_coord(c) for c in np.asarray(h1, dtype=complex)],
            "h2": [repr_coord(c) for c in np.asarray(h2, dtype=complex)],
            "t": t,
            "n": self.n_samples,
            "seed": self.seed,
            "mean_re": float(self.mean.real),
            "mean_im": float(self.mean.imag),
            "stderr": self.stderr,
        }


def repr_coord(c: complex):
    return float(c.real) if c.imag == 0 else [float(c.real), float(c.imag)]


# ---------------------------------------------------------------------------
# Haar sampling

def _stream(seed: int, partition: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(partition),))
    return np.random.Generator(np.random.Philox(ss))


def _haar_unitary_batch(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))
    q, r = np.linalg.qr(z)
    diag = np.einsum("bii->bi", r)
    q = q * (diag / np.abs(diag))[:, None, :]
    return q


def _haar_su_batch(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    q = _haar_unitary_batch(n, d, rng)
    det = np.linalg.det(q)
    # dividing one column by the (unit-modulus) determinant lands in SU(d)
    # and commutes with left translation, so the result is Haar
    q[:, :, -1] /= det[:, None]
    return q


def _haar_so_batch(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, d, d))
    q, r = np.linalg.qr(z)
    diag = np.einsum("bii->bi", r)
    signs = np.where(diag >= 0, 1.0, -1.0)
    q = q * signs[:, None, :]
    det = np.linalg.det(q)
    q[:, :, -1] *= np.where(det > 0, 1.0, -1.0)[:, None]
    return q


def _haar_usp_batch(n: int, half: int, rng: np.random.Generator) -> np.ndarray:
    """Quaternionic Gram-Schmidt on Gaussian columns.

    The quaternionic span of a column u is the complex span of {u, u#} with
    u# = conj-swap(u); orthonormalizing n quaternion columns with positive
    real norms is the quaternion QR of a quaternion Ginibre matrix, whose Q
    factor is Haar on USp(2n).  The partner columns are filled in at the end,
    which enforces the symplectic structure by construction.
    """
    d = 2 * half
    v = rng.standard_normal((n, d, half)) + 1j * rng.standard_normal((n, d, half))
    cols = np.empty((n, d, d), dtype=complex)

    def partner(u):
        # u# = -J conj(u) for J = [[0, I], [-I, 0]]
        return np.concatenate([-u[:, half:].conj(), u[:, :half].conj()], axis=1)

    for j in range(half):
        w = v[:, :, j]
        for k in range(j):
            for basis in (cols[:, :, k], cols[:, :, half + k]):
                w = w - basis * np.einsum("bi,bi->b", basis.conj(), w)[:, None]
        w = w / np.linalg.norm(w, axis=1)[:, None]
        cols[:, :, j] = w
        cols[:, :, half + j] = partner(w)
    return cols


def haar_batch(spec: CompactGroupSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    if spec.family == "su":
        return _haar_su_batch(n, spec.size, rng)
    if spec.family == "so":
        return _haar_so_batch(n, spec.size, rng)
    return _haar_usp_batch(n, spec.size // 2, rng)


def haar_sample(spec: CompactGroupSpec, rng: np.random.Generator) -> GroupElement:
    """One Haar-distributed element from the given stream."""
    return GroupElement(matrix=haar_batch(spec, 1, rng)[0])


# ---------------------------------------------------------------------------
# Cartan embedding and the invariant pairing

def embed_cartan(spec: CompactGroupSpec, h) -> np.ndarray:
    """Matrix realization of a Cartan coordinate vector; linear in the
    coordinates, so complex coordinates continue analytically."""
    rs = spec.root_system()
    v = as_cartan(rs, h)
    d = spec.size
    if spec.family == "su":
        return 1j * np.diag(v)
    if spec.family == "usp":
        half = d // 2
        return 1j * np.diag(np.concatenate([v, -v]))
    n = len(v)
    out = np.zeros((d, d), dtype=complex)
    for k in range(n):
        out[2 * k, 2 * k + 1] = v[k]
        out[2 * k + 1, 2 * k] = -v[k]
    return out


def pairing(spec: CompactGroupSpec, x: np.ndarray, y: np.ndarray) -> complex:
    """Rescaled trace form; matches the coordinate form on embedded Cartans."""
    if x.shape != y.shape:
        raise ValueError("dimension mismatch")
    return _TRACE_CONST[spec.family] * complex(np.trace(x @ y))


# ---------------------------------------------------------------------------
# Monte Carlo orbital integral

def _partition_sums(
    spec: CompactGroupSpec, h1m: np.ndarray, h2m: np.ndarray, inv_t: float,
    count: int, seed: int, k: int,
) -> Tuple[int, complex, float, float]:
    rng = _stream(seed, k)
    g = haar_batch(spec, count, rng)
    conj = np.einsum("bij,jk,blk->bil", g, h1m, g.conj())
    vals = _TRACE_CONST[spec.family] * np.einsum("bij,ji->b", conj, h2m)
    w = np.exp(inv_t * vals)
    return count, complex(np.sum(w)), float(np.sum(w.real**2)), float(np.sum(w.imag**2))


def mc_orbital_integral(
    spec: CompactGroupSpec,
    h1,
    h2,
    t: float,
    n: int,
    seed: int,
    threads: Optional[int] = None,
) -> IntegralEstimate:
    """Sample mean and standard error of e^{<Ad_g h1, h2>/t} over n Haar draws.

    Deterministic for fixed (seed, n), independent of thread count.
    """
    if n < 1000:
        raise ConfigurationError("need at least 10^3 samples")
    if t <= 0:
        raise ConfigurationError("t must be positive")
    rs = spec.root_system()
    h1m = embed_cartan(spec, h1)
    h2m = embed_cartan(spec, h2)
    inv_t = 1.0 / t

    counts = []
    left = n
    k = 0
    while left > 0:
        c = min(PARTITION_SIZE, left)
        counts.append((k, c))
        left -= c
        k += 1

    start = time.perf_counter()
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(
                pool.map(
                    lambda kc: _partition_sums(spec, h1m, h2m, inv_t, kc[1], seed, kc[0]),
                    counts,
                )
            )
    else:
        partials = [
            _partition_sums(spec, h1m, h2m, inv_t, c, seed, k) for k, c in counts
        ]
    total = 0
    s = 0.0 + 0.0j
    sq_re = 0.0
    sq_im = 0.0
    for cnt, ps, pre, pim in partials:
        total += cnt
        s += ps
        sq_re += pre
        sq_im += pim
    mean = s / total
    var_re = max(0.0, (sq_re - total * mean.real**2) / (total - 1))
    var_im = max(0.0, (sq_im - total * mean.imag**2) / (total - 1))
    stderr = float(np.sqrt((var_re + var_im) / total))
    return IntegralEstimate(
        mean=mean,
        stderr=stderr,
        n_samples=total,
        seed=int(seed),
        elapsed=time.perf_counter() - start,
    )
