"""Runner layer shared by the CLI and the HTTP service.

Each runner takes a validated config model, executes the corresponding
verification, and returns a self-describing report dict.  Reports embed the
fully resolved config (defaults included) and the package version; the
timestamp is the only field that varies between identical runs.
"""

from __future__ import annotations

import datetime
import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from . import __version__
from .closedform import (
    hc_rhs,
    hciz,
    kirillov_character,
    coadjoint_volume,
    orbital_integral_closed,
    weight_from_labels,
    weyl_character,
    weyl_dimension,
)
from .errors import ConfigurationError
from .groups import group_spec, mc_orbital_integral
from .heatflow import (
    GridSpec,
    SmoothBump,
    boundary_delta_check,
    cm_pde_residual,
    radial_heat_residual,
    v_function,
    v_weyl_sum,
)
from .rootsys import build_root_system, root_system_to_json, to_orthonormal
from .saddle import find_critical_points, hessian_determinant_check, stationary_phase_estimate

EXIT_PASS = 0
EXIT_TOLERANCE = 1
EXIT_DEGENERATE = 2
EXIT_NUMERICAL = 3
EXIT_USAGE = 64

_FAMILY_TO_GROUP = {"a": "su", "b": "so", "c": "usp", "d": "so"}


def family_rank_to_spec(family: str, rank: int):
    """Matrix group realizing the given root system family at this rank."""
    family = family.lower()
    if family == "a":
        return group_spec("su", rank + 1)
    if family == "b":
        return group_spec("so", 2 * rank + 1)
    if family == "c":
        return group_spec("usp", 2 * rank)
    if family == "d":
        return group_spec("so", 2 * rank)
    if family == "g2":
        return None  # no matrix model wired up; closed forms only
    raise ConfigurationError(f"unknown family {family!r}")


def build_rs(family: str, rank: int):
    family = family.lower()
    name = "G2" if family == "g2" else family.upper()
    return build_root_system(name, rank)


def project_sum_zero(rs, coords: List[float]) -> Tuple[List[float], Optional[str]]:
    """Ambient CLI coordinates; sum-zero families are projected with a warning
    when the input misses the constraint by more than 1e-9."""
    v = np.asarray(coords, dtype=float)
    warning = None
    if rs.sum_zero:
        s = float(v.sum())
        if abs(s) > 1e-9:
            warning = f"input sum {s:.3e} projected to the sum-zero subspace"
        v = v - v.mean()
    return [float(x) for x in v], warning


def _report(command: str, config: BaseModel, result: dict, status: str, exit_code: int) -> dict:
    return {
        "schema": "report_v1",
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "command": command,
        "config": config.model_dump(),
        "result": result,
        "status": status,
        "exit_code": exit_code,
    }


# ---------------------------------------------------------------------------
# verify-hc

class VerifyHcConfig(BaseModel):
    group: str
    size: int
    h1: List[float]
    h2: List[float]
    t: float = 1.0
    samples: int = 10**6
    seed: int = 0
    tolerance: float = 0.01
    threads: Optional[int] = None


def run_verify_hc(cfg: VerifyHcConfig) -> dict:
    spec = group_spec(cfg.group, cfg.size)
    rs = spec.root_system()
    h1, w1 = project_sum_zero(rs, cfg.h1)
    h2, w2 = project_sum_zero(rs, cfg.h2)
    closed = orbital_integral_closed(rs, h1, h2, cfg.t)
    est = mc_orbital_integral(spec, h1, h2, cfg.t, cfg.samples, cfg.seed, threads=cfg.threads)
    z = (est.mean.real - closed.real) / est.stderr if est.stderr > 0 else 0.0
    rel = abs(est.mean.real - closed.real) / abs(closed.real)
    ok = abs(z) <= 3.0 and rel <= cfg.tolerance
    result = {
        "estimate": est.to_json(spec, h1, h2, cfg.t),
        "closed_form": {"re": closed.real, "im": closed.imag, "formula": "eq1"},
        "z_score": z,
        "relative_gap": rel,
        "warnings": [w for w in (w1, w2) if w],
    }
    return _report(
        "verify-hc", cfg, result, "pass" if ok else "fail",
        EXIT_PASS if ok else EXIT_TOLERANCE,
    )


# ---------------------------------------------------------------------------
# hciz

class HcizConfig(BaseModel):
    a: List[float]
    b: List[float]
    compare: str = "weylsum"  # weylsum | none
    tolerance: float = 1e-10


def run_hciz(cfg: HcizConfig) -> dict:
    value = hciz(cfg.a, cfg.b)
    result = {"value": value, "formula": "eq2", "n": len(cfg.a)}
    ok = True
    if cfg.compare == "weylsum" and len(cfg.a) >= 2:
        av = np.asarray(cfg.a, dtype=float)
        bv = np.asarray(cfg.b, dtype=float)
        rs = build_root_system("A", len(cfg.a) - 1)
        # centering both spectra multiplies the integral by e^{N abar bbar}
        shift = math.exp(len(cfg.a) * av.mean() * bv.mean())
        ws = shift * hc_rhs(rs, av - av.mean(), bv - bv.mean()).real
        rel = abs(value - ws) / abs(ws)
        result["weyl_sum_value"] = ws
        result["relative_gap"] = rel
        ok = rel <= cfg.tolerance
    return _report(
        "hciz", cfg, result, "pass" if ok else "fail",
        EXIT_PASS if ok else EXIT_TOLERANCE,
    )


# ---------------------------------------------------------------------------
# character

class CharacterConfig(BaseModel):
    family: str
    rank: int
    weight: List[int]
    theta: Optional[float] = None
    h: Optional[List[float]] = None
    compare: str = "kirillov"  # kirillov | none
    tolerance: float = 1e-10


def run_character(cfg: CharacterConfig) -> dict:
    rs = build_rs(cfg.family, cfg.rank)
    lam = weight_from_labels(rs, cfg.weight)
    if cfg.h is not None:
        h, _ = project_sum_zero(rs, cfg.h)
        hv = np.asarray(h, dtype=complex)
    elif cfg.theta is not None:
        if rs.rank != 1:
            raise ConfigurationError("--theta shorthand only applies at rank 1")
        hv = 1j * cfg.theta * np.array([1.0, -1.0])
    else:
        raise ConfigurationError("provide either coordinates or theta")
    chi = weyl_character(rs, lam, hv)
    result = {
        "weyl_character": {"re": chi.real, "im": chi.imag, "formula": "eq31"},
        "dimension": weyl_dimension(rs, lam),
    }
    ok = True
    if cfg.compare == "kirillov":
        kir = kirillov_character(rs, lam, hv)
        rel = abs(kir - chi) / abs(chi)
        result["kirillov_character"] = {"re": kir.real, "im": kir.imag, "formula": "eq30"}
        result["relative_gap"] = rel
        ok = rel <= cfg.tolerance
    return _report(
        "character", cfg, result, "pass" if ok else "fail",
        EXIT_PASS if ok else EXIT_TOLERANCE,
    )


# ---------------------------------------------------------------------------
# volume

class VolumeConfig(BaseModel):
    family: str
    rank: int
    h1: List[float]
    tolerance: float = 1e-12


def run_volume(cfg: VolumeConfig) -> dict:
    rs = build_rs(cfg.family, cfg.rank)
    h1, warn = project_sum_zero(rs, cfg.h1)
    vol = coadjoint_volume(rs, h1)
    # homogeneity self-check: scaling the point by 2 scales the volume by 2^r
    vol2 = coadjoint_volume(rs, [2 * x for x in h1])
    rel = abs(vol2 - 2**rs.num_positive_roots * vol) / abs(vol2)
    ok = rel <= cfg.tolerance
    result = {
        "value": vol,
        "formula": "eq32",
        "homogeneity_gap": rel,
        "warnings": [w for w in (warn,) if w],
    }
    return _report(
        "volume", cfg, result, "pass" if ok else "fail",
        EXIT_PASS if ok else EXIT_TOLERANCE,
    )


# ---------------------------------------------------------------------------
# saddle

class SaddleConfig(BaseModel):
    group: str
    size: int
    h1: List[float]
    h2: List[float]
    starts: Optional[int] = None
    seed: int = 0
    step: float = 1e-4
    tolerance: float = 1e-4


def run_saddle(cfg: SaddleConfig) -> dict:
    spec = group_spec(cfg.group, cfg.size)
    rs = spec.root_system()
    h1, _ = project_sum_zero(rs, cfg.h1)
    h2, _ = project_sum_zero(rs, cfg.h2)
    n_starts = cfg.starts if cfg.starts is not None else 20 * rs.weyl_order
    search = find_critical_points(spec, h1, h2, n_starts, cfg.seed)
    checks = []
    signs_ok = True
    for p in search.points:
        if p.matched_weyl is None:
            continue
        chk = hessian_determinant_check(spec, p, h1, h2, step=cfg.step)
        checks.append(chk)
        if math.copysign(1.0, chk.sqrt_det) != p.matched_sign:
            signs_ok = False
    max_rel = max((c.rel_error for c in checks), default=math.inf)
    ok = (
        search.complete_cover
        and search.n_spurious == 0
        and signs_ok
        and max_rel < cfg.tolerance
    )
    result = {
        "critical_values": [p.value for p in search.points],
        "matched_weyl_signs": [p.matched_sign for p in search.points],
        "hessian_rel_errors": [c.rel_error for c in checks],
        "expected_count": search.expected_count,
        "complete_cover": search.complete_cover,
        "n_unconverged": search.n_unconverged,
        "n_spurious": search.n_spurious,
    }
    return _report(
        "saddle", cfg, result, "pass" if ok else "fail",
        EXIT_PASS if ok else EXIT_TOLERANCE,
    )


# ---------------------------------------------------------------------------
# heatflow

class HeatflowConfig(BaseModel):
    check: str  # radial | boundary | cm | exactness
    family: str
    rank: int
    t: float = 1.0
    steps: List[float] = Field(default_factory=lambda: [1e-2, 5e-3])
    h1: Optional[List[float]] = None
    extent: Optional[List[List[float]]] = None
    n_scaling: float = 1.0
    seed: int = 0
    samples: int = 200
    ratio_window: List[float] = Field(default_factory=lambda: [3.5, 4.5])
    tolerance: float = 1e-3


def _default_h1(rs) -> List[float]:
    # half-sum of positive roots: always regular and inside the chamber
    v = np.zeros(rs.ambient_dim)
    for root in rs.positive_roots:
        v += np.array([float(x) for x in root]) / 2.0
    return [float(x) for x in v]


def run_heatflow(cfg: HeatflowConfig) -> dict:
    rs = build_rs(cfg.family, cfg.rank)
    spec = family_rank_to_spec(cfg.family, cfg.rank)
    h1 = cfg.h1 if cfg.h1 is not None else _default_h1(rs)
    h1, _ = project_sum_zero(rs, h1)
    if cfg.extent is not None:
        extent = tuple((float(lo), float(hi)) for lo, hi in cfg.extent)
    else:
        if rs.rank != 1:
            raise ConfigurationError("provide a grid extent for rank > 1")
        extent = ((0.4, 0.9),)

    if cfg.check == "radial":
        step = float(cfg.steps[0])
        grid = GridSpec(dims=rs.rank, extent=extent, h_step=step, t_step=step)
        rep = radial_heat_residual(rs, spec, h1, grid, cfg.t)
        lo, hi = cfg.ratio_window
        ok = lo <= rep.halving_ratio <= hi
        result = rep.to_json()
    elif cfg.check == "cm":
        step = float(cfg.steps[0])
        grid = GridSpec(dims=rs.rank, extent=extent, h_step=step, t_step=step)
        rep = cm_pde_residual(rs, spec, h1, grid, cfg.t, cfg.n_scaling)
        lo, hi = cfg.ratio_window
        ok = lo <= rep.halving_ratio <= hi and rep.substitution_gap <= 1e-10
        result = rep.to_json()
    elif cfg.check == "boundary":
        u1 = to_orthonormal(rs, np.asarray(h1, dtype=float))
        bump = SmoothBump(center=tuple(float(x) for x in u1), radius=2.0)
        rep = boundary_delta_check(rs, spec, h1, bump, [1e-1, 1e-2, 1e-3])
        ok = rep.rel_errors[-1] <= cfg.tolerance
        result = rep.to_json()
    elif cfg.check == "exactness":
        rng = np.random.default_rng(cfg.seed)
        roots = np.array([[float(x) for x in r] for r in rs.positive_roots])
        worst = 0.0
        tried = 0
        while tried < cfg.samples:
            h2 = rng.uniform(-1.5, 1.5, rs.ambient_dim)
            if rs.sum_zero:
                h2 = h2 - h2.mean()
            if np.min(np.abs(roots @ h2)) < 0.3:
                continue
            tried += 1
            tt = rng.uniform(0.2, 3.0)
            va = v_function(rs, spec, h1, h2, tt)
            vb = v_weyl_sum(rs, h1, h2, tt)
            worst = max(worst, abs(va - vb) / max(abs(vb), 1e-300))
        ok = worst <= cfg.tolerance
        result = {"op": "v_exactness", "points": cfg.samples, "worst_rel": worst}
    else:
        raise ConfigurationError(f"unknown heatflow check {cfg.check!r}")

    return _report(
        "heatflow", cfg, result, "pass" if ok else "fail",
        EXIT_PASS if ok else EXIT_TOLERANCE,
    )


# ---------------------------------------------------------------------------

class RootSystemQuery(BaseModel):
    family: str
    rank: int


def run_root_system(cfg: RootSystemQuery) -> dict:
    rs = build_rs(cfg.family, cfg.rank)
    return root_system_to_json(rs)
