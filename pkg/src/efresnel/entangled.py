"""Entangled (complex-plane) Fresnel kernels and propagators.

Three kernels are provided, all of the form

    (1 / 2 i q pi) exp{ (i / 2q) [p_in |eta|^2 - 2 Re(eta conj(eta')) + p_out |eta'|^2] }

with (p_in, p_out, q) = (A, D, B) for the spatial kernel, (D, A, -B) for the
kernel of the ``[D, -B, -C, A]`` system and (A, D, C) for the frequency kernel.
Propagation is direct midpoint quadrature over the input lattice.  Because the
exponent separates over the two real axes the four-fold sum is evaluated as two
matrix products; ``method="direct"`` keeps the literal sum for cross-checks.
"""

from __future__ import annotations

import numpy as np

from .core import (SINGULAR_TOL, ABCDMatrix, ComplexField, GridSpec, KernelVariant,
                   Representation, kernel_roles)
from .errors import SingularB, SingularC

__all__ = [
    "KernelVariant", "Representation", "kernel_spatial", "kernel_swapped",
    "kernel_frequency", "propagate", "overlap_eta_xi", "to_xi_rep", "from_xi_rep",
]


def _check(q, variant):
    if abs(q) < SINGULAR_TOL:
        if variant is KernelVariant.FREQUENCY:
            raise SingularC(f"|C| = {abs(q):.3g} < {SINGULAR_TOL:g}")
        raise SingularB(f"|B| = {abs(q):.3g} < {SINGULAR_TOL:g}")


def _kernel(p_in, p_out, q, out_pt, in_pt):
    out_pt = np.asarray(out_pt, dtype=complex)
    in_pt = np.asarray(in_pt, dtype=complex)
    cross = (in_pt * np.conj(out_pt) + np.conj(in_pt) * out_pt).real
    phase = p_in * np.abs(in_pt) ** 2 - cross + p_out * np.abs(out_pt) ** 2
    val = np.exp(0.5j * phase / q) / (2j * q * np.pi)
    return val[()] if val.ndim == 0 else val


def kernel_spatial(m: ABCDMatrix, eta_p, eta):
    """Kernel taking ``eta`` (input) to ``eta_p`` (output) through ``m``."""
    _check(m.b, KernelVariant.SPATIAL)
    return _kernel(m.a, m.d, m.b, eta_p, eta)


def kernel_swapped(m: ABCDMatrix, eta_p, eta):
    """Spatial kernel of the ``[D, -B, -C, A]`` system."""
    _check(m.b, KernelVariant.SPATIAL_SWAPPED)
    return _kernel(m.d, m.a, -m.b, eta_p, eta)


def kernel_frequency(m: ABCDMatrix, xi_p, xi):
    _check(m.c, KernelVariant.FREQUENCY)
    return _kernel(m.a, m.d, m.c, xi_p, xi)


def propagate(f: ComplexField, m: ABCDMatrix, variant=KernelVariant.SPATIAL,
              out_spec: GridSpec | None = None, method: str = "separable") -> ComplexField:
    """Integrate ``kernel(eta', eta) f(eta) d2eta`` onto ``out_spec``."""
    variant = KernelVariant(variant)
    out_spec = f.spec if out_spec is None else out_spec
    p_in, p_out, q = kernel_roles(m, variant)
    _check(q, variant)
    x = f.spec.points
    y = out_spec.points
    h2 = f.spec.h ** 2
    if method == "separable":
        chirp_in = np.exp(0.5j * p_in * x * x / q)
        chirp_out = np.exp(0.5j * p_out * y * y / q)
        E = np.exp(-1j * np.outer(y, x) / q)
        g = f.samples * np.outer(chirp_in, chirp_in)
        out = (E @ g @ E.T) * np.outer(chirp_out, chirp_out)
        out *= h2 / (2j * q * np.pi)
    elif method == "direct":
        eta = f.spec.complex_mesh().ravel()
        vals = f.samples.ravel()
        out = np.empty(out_spec.n * out_spec.n, dtype=complex)
        targets = out_spec.complex_mesh().ravel()
        for start in range(0, targets.size, 64):
            chunk = targets[start:start + 64]
            K = _kernel(p_in, p_out, q, chunk[:, None], eta[None, :])
            out[start:start + 64] = K @ vals * h2
        out = out.reshape(out_spec.n, out_spec.n)
    else:
        raise ValueError(f"unknown method {method!r}")
    return ComplexField(out_spec, out, f.representation)


def overlap_eta_xi(eta, xi):
    """Overlap between the eta and xi representations, modulus exactly 1/2."""
    eta = np.asarray(eta, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    val = 0.5 * np.exp(0.5 * (xi * np.conj(eta) - np.conj(xi) * eta))
    return val[()] if val.ndim == 0 else val


def to_xi_rep(f: ComplexField, out_spec: GridSpec | None = None) -> ComplexField:
    """Symplectic Fourier transform ``j(gamma)`` of a position-space field.

    ``j(g) = (1/2pi) sum psi(s) exp[(s conj(g) - conj(s) g)/2] h^2``, the
    inverse of :func:`from_xi_rep`.
    """
    out_spec = f.spec if out_spec is None else out_spec
    s = f.spec.points
    g = out_spec.points
    # (s conj(g) - conj(s) g)/2 = i (s2 g1 - s1 g2)
    E_pos = np.exp(1j * np.outer(g, s))
    E_neg = np.exp(-1j * np.outer(g, s))
    out = E_pos @ f.samples.T @ E_neg.T
    out *= f.spec.h ** 2 / (2 * np.pi)
    return ComplexField(out_spec, out, Representation.XI)


def from_xi_rep(f: ComplexField, out_spec: GridSpec | None = None) -> ComplexField:
    """``psi(s) = int d2z/(2pi) j(-z) exp[(conj(z) s - z conj(s))/2]``.

    The input lattice must be symmetric about the origin (always true for
    cell-centred grids), so ``j(-z)`` is an index reversal.
    """
    out_spec = f.spec if out_spec is None else out_spec
    z = f.spec.points
    s = out_spec.points
    j_neg = f.samples[::-1, ::-1]
    # (conj(z) s - z conj(s))/2 = i (z1 s2 - z2 s1)
    E_pos = np.exp(1j * np.outer(s, z))
    E_neg = np.exp(-1j * np.outer(s, z))
    # out[s1, s2] = sum_{z1,z2} j_neg[z1,z2] e^{-i z2 s1} e^{i z1 s2}
    out = E_neg @ j_neg.T @ E_pos.T
    out *= f.spec.h ** 2 / (2 * np.pi)
    return ComplexField(out_spec, out, Representation.ETA)
