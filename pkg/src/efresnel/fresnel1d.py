"""One-dimensional Fresnel transform and Wigner function.

This is the plain real-line version of the transforms in :mod:`efresnel.entangled`
and fixes the sign and normalisation conventions the 2D code must reproduce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SINGULAR_TOL, ABCDMatrix, GridSpec, _frozen
from .errors import ImaginaryResidue, SingularB


@dataclass(frozen=True, eq=False)
class RealLine1D:
    spec: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.spec.n,):
            raise ValueError(f"expected {self.spec.n} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", _frozen(s))

    @classmethod
    def from_function(cls, func, spec: GridSpec) -> "RealLine1D":
        return cls(spec, func(spec.points))

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.spec.h)


def _check_b(m: ABCDMatrix):
    if abs(m.b) < SINGULAR_TOL:
        raise SingularB(f"|B| = {abs(m.b):.3g} < {SINGULAR_TOL:g}")


def kernel_1d(m: ABCDMatrix, x, xp):
    """Fresnel kernel from input ``xp`` to output ``x`` (principal square root)."""
    _check_b(m)
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    pref = 1.0 / np.sqrt(2j * np.pi * m.b)
    out = pref * np.exp(1j / (2 * m.b) * (m.a * xp * xp - 2 * xp * x + m.d * x * x))
    return out[()] if out.ndim == 0 else out


def propagate_1d(f: RealLine1D, m: ABCDMatrix, out_spec: GridSpec) -> RealLine1D:
    x_in = f.spec.points
    K = kernel_1d(m, out_spec.points[:, None], x_in[None, :])
    return RealLine1D(out_spec, K @ f.samples * f.spec.h)


def _interp_zero(samples, spec: GridSpec, pts):
    """Linear interpolation with the field taken as zero beyond ``[-L, L]``."""
    x = spec.points
    xs = np.concatenate(([-spec.L], x, [spec.L]))
    re = np.interp(pts, xs, np.concatenate(([0.0], samples.real, [0.0])), left=0.0, right=0.0)
    im = np.interp(pts, xs, np.concatenate(([0.0], samples.imag, [0.0])), left=0.0, right=0.0)
    return re + 1j * im


def wigner_1d(f: RealLine1D, nu_spec: GridSpec, residue_tol: float = 1e-8) -> np.ndarray:
    """Wigner function ``W[nu_index, x_index]`` on ``nu_spec`` x ``f.spec``.

    The lag ``u`` runs over multiples of the field spacing on ``[-2L, 2L]``;
    half-lattice values of the field are linearly interpolated.
    """
    x = f.spec.points
    h = f.spec.h
    k = np.arange(-f.spec.n, f.spec.n + 1)
    u = k * h
    plus = _interp_zero(f.samples, f.spec, x[None, :] + u[:, None] / 2)
    minus = _interp_zero(f.samples, f.spec, x[None, :] - u[:, None] / 2)
    prod = np.conj(plus) * minus  # [u, x]
    E = np.exp(1j * np.outer(nu_spec.points, u))
    W = (E @ prod) * h / (2 * np.pi)
    peak = np.max(np.abs(W.real))
    resid = np.max(np.abs(W.imag))
    if resid > residue_tol * max(peak, np.finfo(float).tiny):
        raise ImaginaryResidue(f"max |Im W| = {resid:.3g} vs max |Re W| = {peak:.3g}")
    return W.real
