"""Strip (generalised Radon) transforms of the entangled Wigner table.

A strip with real parameters (p, q) integrates W over the set

    eta1 = p s1 + q g2,   eta2 = p s2 - q g1,

i.e. ``(p, q) = (D, B)`` in position space and ``(A, C)`` in frequency space.
Both delta constraints are resolved for gamma, which contributes the
Jacobian ``1/q^2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import map_coordinates, spline_filter1d

from .core import (SINGULAR_TOL, ABCDMatrix, AnalyticBeam, AngularMode, ComplexField,
                   Gaussian, GridSpec, KernelVariant, RealField, rel_l2, rel_linf,
                   sample_beam, sampling_diagnostics, truncation_diagnostics)
from .entangled import propagate, to_xi_rep
from .errors import DegenerateStrip, EFresnelError, ExcessiveExtrapolation, SingularB, SingularC
from .wigner import DEFAULT_AXIS_CAP, WignerTable, sample_wigner, wigner

EXTRAPOLATION_LIMIT = 0.2
EDGE_RELEVANCE = 1e-6


class StripMode(enum.Enum):
    SPATIAL = "spatial"
    FREQUENCY = "frequency"


@dataclass(frozen=True)
class StripParams:
    mode: StripMode
    p: float
    q: float

    def __post_init__(self):
        object.__setattr__(self, "mode", StripMode(self.mode))
        if not abs(self.q) >= SINGULAR_TOL:
            raise DegenerateStrip(f"|q| = {abs(self.q):.3g} < {SINGULAR_TOL:g}")

    @classmethod
    def spatial(cls, m: ABCDMatrix) -> "StripParams":
        return cls(StripMode.SPATIAL, m.d, m.b)

    @classmethod
    def frequency(cls, m: ABCDMatrix) -> "StripParams":
        return cls(StripMode.FREQUENCY, m.a, m.c)


@dataclass
class RadonStats:
    """Book-keeping from :func:`radon_from_table`."""

    constraint_points: int = 0
    outside: int = 0
    relevant_outside: int = 0

    @property
    def outside_fraction(self) -> float:
        return self.outside / self.constraint_points if self.constraint_points else 0.0

    @property
    def relevant_fraction(self) -> float:
        return self.relevant_outside / self.constraint_points if self.constraint_points else 0.0


def _strip_gamma(strip: StripParams, s1, s2, e1, e2):
    g2 = (e1 - strip.p * s1) / strip.q
    g1 = (strip.p * s2 - e2) / strip.q
    return g1, g2


def radon_from_table(w: WignerTable, strip: StripParams, out_spec: GridSpec,
                     interpolation: str = "cubic", stats: RadonStats | None = None,
                     extrapolation_limit: float = EXTRAPOLATION_LIMIT) -> RealField:
    """``pi * int delta delta W d2sigma d2gamma`` on the ``out_spec`` lattice.

    Sigma runs over the table lattice, so only gamma is interpolated:
    ``"linear"`` reproduces :func:`sample_wigner` exactly, ``"cubic"`` uses a
    cubic B-spline in the two gamma axes.  Constraint points outside the
    gamma lattice contribute zero.  They count towards the extrapolation
    limit only when the table slice has not decayed at its gamma edge
    (edge value above ``1e-6`` of the table peak).
    """
    if interpolation not in ("linear", "cubic"):
        raise ValueError(f"unknown interpolation {interpolation!r}")
    stats = RadonStats() if stats is None else stats
    gs = w.gamma_spec
    values = w.values
    if interpolation == "cubic":
        coeffs = spline_filter1d(values, order=3, axis=2, mode="grid-constant")
        coeffs = spline_filter1d(coeffs, order=3, axis=3, mode="grid-constant")
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    edge = np.maximum.reduce([np.abs(values[:, :, 0, :]).max(axis=2),
                              np.abs(values[:, :, -1, :]).max(axis=2),
                              np.abs(values[:, :, :, 0]).max(axis=2),
                              np.abs(values[:, :, :, -1]).max(axis=2)])
    live_edge = edge > EDGE_RELEVANCE * peak

    e1, e2 = out_spec.mesh()
    s = w.sigma_spec.points
    acc = np.zeros_like(e1)
    for a, s1 in enumerate(s):
        for b, s2 in enumerate(s):
            g1, g2 = _strip_gamma(strip, s1, s2, e1, e2)
            f1 = gs.fractional_index(g1)
            f2 = gs.fractional_index(g2)
            inside = (f1 >= 0) & (f1 <= gs.n - 1) & (f2 >= 0) & (f2 <= gs.n - 1)
            n_out = int(inside.size - np.count_nonzero(inside))
            stats.constraint_points += inside.size
            stats.outside += n_out
            if live_edge[a, b]:
                stats.relevant_outside += n_out
            if interpolation == "cubic":
                vals = map_coordinates(coeffs[a, b], [f1, f2], order=3, mode="grid-constant",
                                       prefilter=False)
            else:
                vals = _bilinear(values[a, b], f1, f2)
            acc += np.where(inside, vals, 0.0)
    if stats.relevant_fraction > extrapolation_limit:
        raise ExcessiveExtrapolation(
            f"{100 * stats.relevant_fraction:.1f}% of strip constraint points leave a gamma "
            f"table that has not decayed at its edge; enlarge the gamma grid to about "
            f"{(abs(strip.p) * w.sigma_spec.L + out_spec.L) / abs(strip.q):.3g}")
    acc *= np.pi / strip.q**2 * w.sigma_spec.h**2
    return RealField(out_spec, acc)


def _bilinear(slab, f1, f2):
    n = slab.shape[0]
    i = np.clip(np.floor(f1).astype(int), 0, n - 2)
    j = np.clip(np.floor(f2).astype(int), 0, n - 2)
    t = np.clip(f1 - i, 0.0, 1.0)
    u = np.clip(f2 - j, 0.0, 1.0)
    return (slab[i, j] * (1 - t) * (1 - u) + slab[i + 1, j] * t * (1 - u)
            + slab[i, j + 1] * (1 - t) * u + slab[i + 1, j + 1] * t * u)


def radon_from_table_pointwise(w: WignerTable, strip: StripParams, eta: complex) -> float:
    """Single strip value built from :func:`sample_wigner` calls (reference path)."""
    total = 0.0
    for s1 in w.sigma_spec.points:
        for s2 in w.sigma_spec.points:
            g1, g2 = _strip_gamma(strip, s1, s2, eta.real, eta.imag)
            val, _ = sample_wigner(w, complex(s1, s2), complex(g1, g2))
            total += val
    return total * np.pi / strip.q**2 * w.sigma_spec.h**2


def _strip_amplitude(f: ComplexField, p: float, q: float, out_spec: GridSpec) -> np.ndarray:
    """``(1/2 q pi) sum psi(s) exp{(i/2q)(p|s|^2 - 2 e.s)} h^2``."""
    x = f.spec.points
    y = out_spec.points
    chirp = np.exp(0.5j * p * x * x / q)
    E = np.exp(-1j * np.outer(y, x) / q)
    g = E @ (f.samples * np.outer(chirp, chirp)) @ E.T
    return g * (f.spec.h**2 / (2 * abs(q) * np.pi))


def radon_direct_spatial(f: ComplexField, D: float, B: float, out_spec: GridSpec) -> RealField:
    """Strip transform of W(psi) evaluated from psi without building the table.

    The reduced double integral over (s', s'') factorises into ``|g(eta)|^2``.
    """
    if abs(B) < SINGULAR_TOL:
        raise SingularB(f"|B| = {abs(B):.3g} < {SINGULAR_TOL:g}")
    return RealField(out_spec, np.abs(_strip_amplitude(f, D, B, out_spec)) ** 2)


def radon_direct_frequency(f: ComplexField, A: float, C: float, out_spec: GridSpec) -> RealField:
    """Frequency-strip counterpart of :func:`radon_direct_spatial`.

    ``f`` is the position-representation field whose table is being
    projected; the reduced integral runs over psi(s'), psi*(s'').
    """
    if abs(C) < SINGULAR_TOL:
        raise SingularC(f"|C| = {abs(C):.3g} < {SINGULAR_TOL:g}")
    return RealField(out_spec, np.abs(_strip_amplitude(f, A, C, out_spec)) ** 2)


def radon_direct_literal(f: ComplexField, p: float, q: float, out_spec: GridSpec) -> RealField:
    """Unfactorised double sum over (s', s''); O(n^6), for small smoke grids only."""
    s = f.spec.complex_mesh().ravel()
    psi = f.samples.ravel()
    h4 = f.spec.h**4
    phase_p = p * np.abs(s) ** 2
    out = np.empty(out_spec.n * out_spec.n)
    for idx, e in enumerate(out_spec.complex_mesh().ravel()):
        lin = 2 * (e.real * s.real + e.imag * s.imag)
        expo = (phase_p[:, None] - phase_p[None, :]) - (lin[:, None] - lin[None, :])
        terms = psi[:, None] * np.conj(psi)[None, :] * np.exp(0.5j * expo / q)
        out[idx] = np.sum(terms).real
    out *= h4 / (4 * q * q * np.pi**2)
    return RealField(out_spec, out.reshape(out_spec.n, out_spec.n))


# ---------------------------------------------------------------- identity checks


@dataclass
class IdentityReport:
    check: str
    tolerance: float
    lhs_norm: float = math.nan
    rhs_norm: float = math.nan
    rel_l2_error: float = math.nan
    rel_linf_error: float = math.nan
    grids: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    passed: bool = False
    reason: str | None = None
    extras: dict = field(default_factory=dict)
    modes: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def verdict_line(self) -> str:
        return (f"VERDICT {self.verdict} rel_l2={self.rel_l2_error:.6e} "
                f"rel_linf={self.rel_linf_error:.6e}")

    def to_text(self) -> str:
        lines = [f"check: {self.check}", f"tolerance: {self.tolerance:.6e}"]
        for key in ("lhs_norm", "rhs_norm", "rel_l2_error", "rel_linf_error"):
            lines.append(f"{key}: {getattr(self, key):.12e}")
        for key, val in self.grids.items():
            lines.append(f"grid.{key}: {val}")
        for key, val in self.extras.items():
            lines.append(f"{key}: {val:.12e}" if isinstance(val, float) else f"{key}: {val}")
        for row in self.modes:
            lines.append("mode: s={s} energy={energy:.6e} active={active} rel_l2={rel_l2:.6e}"
                         .format(**row))
        for warn in self.warnings:
            lines.append(f"warning: {warn}")
        if self.reason:
            lines.append(f"reason: {self.reason}")
        lines.append(f"verdict: {self.verdict}")
        lines.append(self.verdict_line())
        return "\n".join(lines) + "\n"


def _beam_scales(beam: AnalyticBeam):
    """(max width, min width, max |s|, max |centre|) over the beam's components."""
    if isinstance(beam, Gaussian):
        return beam.width, beam.width, 0, abs(beam.center)
    if isinstance(beam, AngularMode):
        return beam.width, beam.width, abs(beam.s), 0.0
    parts = [_beam_scales(b) for _, b in beam.terms]
    return (max(p[0] for p in parts), min(p[1] for p in parts),
            max(p[2] for p in parts), max(p[3] for p in parts))


@dataclass(frozen=True)
class VerifyConfig:
    """Grids and tolerance for the strip identities.

    ``field_spec`` carries the input beam for the Wigner table and must share
    its spacing with ``sigma_spec``; ``lhs_spec`` carries it for the direct
    propagation.
    """

    sigma_spec: GridSpec
    gamma_spec: GridSpec
    field_spec: GridSpec
    lhs_spec: GridSpec
    out_spec: GridSpec
    tolerance: float = 5e-3
    interpolation: str = "cubic"
    max_axis: int = DEFAULT_AXIS_CAP
    override_size_cap: bool = False

    @classmethod
    def for_beam(cls, beam: AnalyticBeam, m: ABCDMatrix, mode="spatial", n: int = 32,
                 n_out: int = 48, tolerance: float = 5e-3, **kw) -> "VerifyConfig":
        """Grids sized from the beam's widths and the strip parameters."""
        w_max, w_min, s_max, c_max = _beam_scales(beam)
        reach = 4.0 + 0.5 * s_max
        L_sigma = reach * w_max + c_max
        L_gamma = reach / w_min + c_max / w_min**2
        p, q = (m.d, m.b) if StripMode(mode) is StripMode.SPATIAL else (m.a, m.c)
        L_out = max(reach * math.hypot(p * w_max, q / w_min) + abs(p) * c_max, 1.0)
        sigma = GridSpec(n, L_sigma)
        return cls(sigma_spec=sigma, gamma_spec=GridSpec(n, L_gamma),
                   field_spec=GridSpec(2 * n, 2 * L_sigma),
                   lhs_spec=GridSpec(128, 2 * L_sigma), out_spec=GridSpec(n_out, L_out),
                   tolerance=tolerance, **kw)

    def grid_metadata(self) -> dict:
        return {name: f"n={spec.n} L={spec.L!r}" for name, spec in (
            ("sigma", self.sigma_spec), ("gamma", self.gamma_spec), ("field", self.field_spec),
            ("lhs", self.lhs_spec), ("out", self.out_spec))}


def _l2(values, spec):
    return float(np.sqrt(np.sum(np.asarray(values).ravel() ** 2)) * spec.h)


def _fill(report, lhs, rhs, spec):
    report.lhs_norm = _l2(lhs, spec)
    report.rhs_norm = _l2(rhs, spec)
    report.rel_l2_error = rel_l2(rhs, lhs)
    report.rel_linf_error = rel_linf(rhs, lhs)
    report.extras["lhs_mass"] = float(np.sum(lhs) * spec.h**2)
    report.extras["rhs_mass"] = float(np.sum(rhs) * spec.h**2)
    report.passed = report.rel_l2_error <= report.tolerance


def _rhs(beam, strip, cfg, report):
    psi = sample_beam(beam, cfg.field_spec)
    table = wigner(psi, cfg.sigma_spec, cfg.gamma_spec, max_axis=cfg.max_axis,
                   override_size_cap=cfg.override_size_cap)
    stats = RadonStats()
    rhs = radon_from_table(table, strip, cfg.out_spec, cfg.interpolation, stats)
    report.extras["wigner_imag_residue"] = table.max_imag_residue
    report.extras["gamma_outside_fraction"] = stats.outside_fraction
    report.extras["gamma_outside_relevant_fraction"] = stats.relevant_fraction
    return rhs.values


def verify_identity_spatial(beam: AnalyticBeam, m: ABCDMatrix, cfg: VerifyConfig) -> IdentityReport:
    """Compare ``|propagate(psi, [D,-B,-C,A])|^2`` with the (D, B) strip of W(psi).

    The report also carries ``rel_l2_conjugate_input``: the same comparison
    with ``conj(psi)`` propagated.  The two coincide for beams whose angular
    coefficients are real (Gaussians, single modes); for other beams only the
    conjugate-input form agrees with the strip.
    """
    report = IdentityReport("spatial", cfg.tolerance, grids=cfg.grid_metadata())
    if abs(m.b) < SINGULAR_TOL:
        report.reason = f"SingularB: |B| = {abs(m.b):.3g} < {SINGULAR_TOL:g}"
        report.warnings += [report.reason, "DegenerateStrip: spatial strip has q = B ~ 0"]
        return report
    try:
        strip = StripParams.spatial(m)
        psi = sample_beam(beam, cfg.lhs_spec)
        report.warnings += [str(x) for x in sampling_diagnostics(
            m, cfg.lhs_spec, cfg.out_spec, KernelVariant.SPATIAL_SWAPPED)]
        report.warnings += [str(x) for x in truncation_diagnostics(psi)]
        lhs = propagate(psi, m, KernelVariant.SPATIAL_SWAPPED, cfg.out_spec).intensity()
        rhs = _rhs(beam, strip, cfg, report)
        lhs_conj = propagate(psi.conj(), m, KernelVariant.SPATIAL_SWAPPED, cfg.out_spec).intensity()
        report.extras["rel_l2_conjugate_input"] = rel_l2(rhs, lhs_conj)
    except EFresnelError as exc:
        report.reason = f"{type(exc).__name__}: {exc}"
        return report
    _fill(report, lhs, rhs, cfg.out_spec)
    return report


def verify_identity_frequency(beam: AnalyticBeam, m: ABCDMatrix,
                              cfg: VerifyConfig) -> IdentityReport:
    """Compare ``|propagate(j, frequency kernel)|^2`` with the (A, C) strip of W(psi).

    ``j = to_xi_rep(psi)``.  ``rel_l2_position_input`` records the same
    comparison with psi itself fed to the frequency kernel.
    """
    report = IdentityReport("frequency", cfg.tolerance, grids=cfg.grid_metadata())
    if abs(m.c) < SINGULAR_TOL:
        report.reason = f"SingularC: |C| = {abs(m.c):.3g} < {SINGULAR_TOL:g}"
        report.warnings += [report.reason, "DegenerateStrip: frequency strip has q = C ~ 0"]
        return report
    try:
        strip = StripParams.frequency(m)
        psi = sample_beam(beam, cfg.lhs_spec)
        j = to_xi_rep(psi)
        report.warnings += [str(x) for x in sampling_diagnostics(
            m, cfg.lhs_spec, cfg.out_spec, KernelVariant.FREQUENCY)]
        report.warnings += [str(x) for x in truncation_diagnostics(j)]
        lhs = propagate(j, m, KernelVariant.FREQUENCY, cfg.out_spec).intensity()
        rhs = _rhs(beam, strip, cfg, report)
        lhs_pos = propagate(psi, m, KernelVariant.FREQUENCY, cfg.out_spec).intensity()
        report.extras["rel_l2_position_input"] = rel_l2(rhs, lhs_pos)
    except EFresnelError as exc:
        report.reason = f"{type(exc).__name__}: {exc}"
        return report
    _fill(report, lhs, rhs, cfg.out_spec)
    return report


def gaussian_strip_closed_form(p: float, q: float, out_spec: GridSpec) -> np.ndarray:
    """Strip transform of W for psi = exp(-|eta|^2/2): ``exp(-|e|^2/s)/s``, ``s = p^2 + q^2``."""
    e1, e2 = out_spec.mesh()
    s = p * p + q * q
    return np.exp(-(e1 * e1 + e2 * e2) / s) / s
