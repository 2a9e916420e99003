"""Collins formula in cylindrical coordinates.

A field is split into angular harmonics

    psi_s(r) = (1/2pi) int dtheta exp(i s theta) psi(r e^{i theta}),
    psi(r e^{i theta}) = sum_s psi_s(r) exp(-i s theta),

and each harmonic is carried through the ABCD system by a generalised Hankel
transform with kernel ``J_s(-r r'/B)`` and measure ``d(r^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

from .core import (SINGULAR_TOL, ABCDMatrix, AnalyticBeam, ComplexField, GridSpec,
                   KernelVariant, _frozen, evaluate_beam, field_norm_sq, rel_l2, rel_linf,
                   sample_beam, sampling_diagnostics)
from .entangled import propagate
from .errors import DomainError, EFresnelError, SingularB
from .radon import IdentityReport

MAX_ORDER = 64
MAX_ARG = 1e4
SERIES_LIMIT = 12.0


# ---------------------------------------------------------------- Bessel


def _series(s: int, x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    term = half**s / math.factorial(s)
    total = term.copy()
    q = half * half
    for k in range(1, 80):
        term = -term * q / (k * (k + s))
        total += term
    return total


def _miller(s: int, x: np.ndarray) -> np.ndarray:
    top = max(s, float(np.max(x)))
    start = int(top + 30 + 6 * top ** (1 / 3))
    start += start % 2
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-300)
    result = np.zeros_like(x)
    norm = np.zeros_like(x)
    for k in range(start, 0, -1):
        # j_cur holds J_k up to scale; step down to J_{k-1}
        j_prev = (2.0 * k / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        order = k - 1
        if order == s:
            result = j_cur.copy()
        if order > 0 and order % 2 == 0:
            norm += 2.0 * j_cur
        big = np.abs(j_cur) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            j_cur *= scale
            j_next *= scale
            result *= scale
            norm *= scale
    norm += j_cur
    return result / norm


def bessel_j(s: int, x):
    """Bessel function of the first kind of integer order.

    Power series for ``|x| < 12``, normalised downward recurrence otherwise.
    Accepts arrays for ``x``.
    """
    if int(s) != s:
        raise DomainError(f"order must be an integer, got {s!r}")
    s = int(s)
    x = np.asarray(x, dtype=float)
    if abs(s) > MAX_ORDER:
        raise DomainError(f"|s| = {abs(s)} exceeds {MAX_ORDER}")
    if np.any(~np.isfinite(x)) or (x.size and np.max(np.abs(x)) > MAX_ARG):
        raise DomainError(f"|x| must not exceed {MAX_ARG:g}")
    sign = (-1) ** s if s < 0 else 1
    n = abs(s)
    ax = np.abs(x)
    out = np.empty_like(ax)
    small = ax < SERIES_LIMIT
    if np.any(small):
        out[small] = _series(n, ax[small])
    if np.any(~small):
        out[~small] = _miller(n, ax[~small])
    if n % 2:
        out = np.where(x < 0, -out, out)
    out = sign * out
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------- angular modes


@dataclass(frozen=True, eq=False)
class RadialModes:
    """Profiles ``profiles[k]`` for ``s = s_values[k]`` on midpoint radii ``r``."""

    s_values: np.ndarray
    r: np.ndarray
    profiles: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s_values, dtype=int)
        r = np.asarray(self.r, dtype=float)
        p = np.asarray(self.profiles, dtype=complex)
        if r.size < 16:
            raise ValueError("need at least 16 radii")
        if np.any(r <= 0):
            raise ValueError("radii must be positive")
        if p.shape != (s.size, r.size):
            raise ValueError(f"profiles shape {p.shape} != ({s.size}, {r.size})")
        if not np.all(np.isfinite(p)):
            raise ValueError("profiles must be finite")
        object.__setattr__(self, "s_values", _frozen(s))
        object.__setattr__(self, "r", _frozen(r))
        object.__setattr__(self, "profiles", _frozen(p))

    @property
    def h_r(self) -> float:
        return float(self.r[1] - self.r[0])

    @property
    def R(self) -> float:
        return float(self.r[-1] + 0.5 * self.h_r)

    def profile(self, s: int) -> np.ndarray:
        idx = np.nonzero(self.s_values == s)[0]
        if idx.size == 0:
            raise KeyError(s)
        return self.profiles[idx[0]]

    def energies(self) -> np.ndarray:
        """``2 pi int |psi_s|^2 r dr`` per mode."""
        return 2 * np.pi * np.sum(np.abs(self.profiles) ** 2 * self.r, axis=1) * self.h_r


def radial_grid(n_r: int, R: float) -> np.ndarray:
    h = R / n_r
    return (np.arange(n_r) + 0.5) * h


def _cubic_sample(f: ComplexField, px, py):
    spec = f.spec
    coords = [spec.fractional_index(px), spec.fractional_index(py)]
    re = map_coordinates(f.samples.real, coords, order=3, mode="grid-constant")
    im = map_coordinates(f.samples.imag, coords, order=3, mode="grid-constant")
    return re + 1j * im


def _linear_sample(f: ComplexField, px, py):
    spec = f.spec
    n = spec.n
    pad = np.zeros((n + 2, n + 2), dtype=complex)
    pad[1:-1, 1:-1] = f.samples
    fx = spec.fractional_index(px) + 1
    fy = spec.fractional_index(py) + 1
    i = np.clip(np.floor(fx).astype(int), 0, n)
    j = np.clip(np.floor(fy).astype(int), 0, n)
    tx = np.clip(fx - i, 0, 1)
    ty = np.clip(fy - j, 0, 1)
    val = (pad[i, j] * (1 - tx) * (1 - ty) + pad[i + 1, j] * tx * (1 - ty)
           + pad[i, j + 1] * (1 - tx) * ty + pad[i + 1, j + 1] * tx * ty)
    ok = (fx >= 0) & (fx <= n + 1) & (fy >= 0) & (fy <= n + 1)
    return np.where(ok, val, 0)


def angular_decompose(f, s_max: int, n_r: int = 128, R: float | None = None,
                      order: int = 3) -> RadialModes:
    """Angular harmonics ``-s_max..s_max`` of a sampled field or an analytic beam.

    Sampled fields are interpolated at the polar nodes with a cubic spline
    (``order=3``) or bilinearly (``order=1``); beams are evaluated exactly.
    """
    if s_max < 0:
        raise ValueError("s_max must be non-negative")
    if isinstance(f, ComplexField):
        R = f.spec.L if R is None else R
        if R > f.spec.L:
            raise ValueError(f"R = {R} exceeds the field half-extent {f.spec.L}")
        if order == 3:
            sampler = lambda px, py: _cubic_sample(f, px, py)  # noqa: E731
        elif order == 1:
            sampler = lambda px, py: _linear_sample(f, px, py)  # noqa: E731
        else:
            raise ValueError("order must be 1 or 3")
    else:
        if R is None:
            raise ValueError("R is required for analytic beams")
        sampler = lambda px, py: evaluate_beam(f, px, py)  # noqa: E731
    r = radial_grid(n_r, R)
    n_theta = 4 * s_max + 16
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    vals = sampler(r[:, None] * np.cos(theta), r[:, None] * np.sin(theta))
    s_values = np.arange(-s_max, s_max + 1)
    harm = np.exp(1j * np.outer(theta, s_values))      # [theta, s]
    profiles = (vals @ harm).T / n_theta
    return RadialModes(s_values, r, profiles)


def angular_reconstruct(modes: RadialModes, spec: GridSpec) -> ComplexField:
    """Resum ``psi_s(r) exp(-i s theta)`` on a Cartesian grid (linear in r)."""
    x1, x2 = spec.mesh()
    rho = np.hypot(x1, x2)
    theta = np.arctan2(x2, x1)
    r = modes.r
    r_ext = np.concatenate(([0.0], r, [modes.R]))
    out = np.zeros(spec.n * spec.n, dtype=complex)
    for s, prof in zip(modes.s_values, modes.profiles):
        if s == 0:
            at_zero = (9 * prof[0] - prof[1]) / 8
        else:
            at_zero = 0.0
        ext = np.concatenate(([at_zero], prof, [0.0]))
        radial = (np.interp(rho.ravel(), r_ext, ext.real, right=0.0)
                  + 1j * np.interp(rho.ravel(), r_ext, ext.imag, right=0.0))
        out += radial * np.exp(-1j * s * theta.ravel())
    return ComplexField(spec, out.reshape(spec.n, spec.n))


def collins_radial(psi_s, s: int, m: ABCDMatrix, r, rp) -> np.ndarray:
    """Generalised Hankel transform of one angular harmonic.

    ``phi_s(r') = (i^s / 2iB) sum_r exp[(i/2B)(A r^2 + D r'^2)] J_s(-r r'/B) psi_s(r) 2 r h_r``
    on uniform midpoint radii ``r``.
    """
    if abs(m.b) < SINGULAR_TOL:
        raise SingularB(f"|B| = {abs(m.b):.3g} < {SINGULAR_TOL:g}")
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    h_r = r[1] - r[0]
    psi_s = np.asarray(psi_s, dtype=complex)
    bess = bessel_j(s, -np.outer(rp, r) / m.b)
    chirp = np.exp(0.5j * (m.a * r * r)[None, :] / m.b + 0.5j * (m.d * rp * rp)[:, None] / m.b)
    weights = psi_s * 2 * r * h_r
    return (1j**s / (2j * m.b)) * ((chirp * bess) @ weights)


@dataclass(frozen=True)
class HankelConfig:
    field_spec: GridSpec = GridSpec(128, 8.0)
    n_r: int = 128
    s_max: int = 4
    tolerance: float = 2e-3
    energy_threshold: float = 1e-6
    order: int = 3


def verify_hankel_consistency(beam: AnalyticBeam, m: ABCDMatrix,
                              cfg: HankelConfig) -> IdentityReport:
    """Compare angular harmonics of the 2D propagation with the per-mode Hankel transform."""
    spec = cfg.field_spec
    report = IdentityReport("hankel", cfg.tolerance, grids={
        "field": f"n={spec.n} L={spec.L!r}", "radial": f"n_r={cfg.n_r} R={spec.L!r}",
        "s_max": str(cfg.s_max)})
    if abs(m.b) < SINGULAR_TOL:
        report.reason = f"SingularB: |B| = {abs(m.b):.3g} < {SINGULAR_TOL:g}"
        report.warnings.append(report.reason)
        return report
    try:
        report.warnings += [str(w) for w in sampling_diagnostics(m, spec, spec)]
        psi = sample_beam(beam, spec)
        out = propagate(psi, m, KernelVariant.SPATIAL, spec)
        path1 = angular_decompose(out, cfg.s_max, cfg.n_r, spec.L, order=cfg.order)
        modes_in = angular_decompose(beam, cfg.s_max, cfg.n_r, spec.L)
    except EFresnelError as exc:
        report.reason = f"{type(exc).__name__}: {exc}"
        return report

    energies = path1.energies()
    total = float(np.sum(energies))
    report.extras["field_norm_sq_out"] = field_norm_sq(out)
    report.extras["mode_energy_total"] = total
    worst_l2 = 0.0
    worst_linf = 0.0
    passed = True
    lhs_sq = rhs_sq = 0.0
    for k, s in enumerate(path1.s_values):
        active = bool(energies[k] > cfg.energy_threshold * total)
        row = {"s": int(s), "energy": float(energies[k]), "active": active, "rel_l2": math.nan}
        if active:
            ref = path1.profiles[k]
            got = collins_radial(modes_in.profiles[k], int(s), m, path1.r, path1.r)
            row["rel_l2"] = rel_l2(got, ref)
            worst_l2 = max(worst_l2, row["rel_l2"])
            worst_linf = max(worst_linf, rel_linf(got, ref))
            passed &= row["rel_l2"] <= cfg.tolerance
            lhs_sq += float(np.sum(np.abs(ref) ** 2 * path1.r) * path1.h_r)
            rhs_sq += float(np.sum(np.abs(got) ** 2 * path1.r) * path1.h_r)
        report.modes.append(row)
    report.extras["active_modes"] = sum(1 for row in report.modes if row["active"])
    report.lhs_norm = math.sqrt(2 * np.pi * lhs_sq)
    report.rhs_norm = math.sqrt(2 * np.pi * rhs_sq)
    report.rel_l2_error = worst_l2
    report.rel_linf_error = worst_linf
    report.passed = passed
    return report
