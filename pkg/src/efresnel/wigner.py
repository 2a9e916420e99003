"""Entangled Wigner transform on a product of two square lattices.

The relative coordinate is summed over multiples of the field lattice
spacing.  When the sigma lattice is a sub-lattice of the field lattice the
field is read off exactly; otherwise it is bilinearly interpolated, with zero
beyond the field grid.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import ComplexField, GridSpec, RealField, _frozen, field_norm_sq, worker_count
from .errors import ImaginaryResidue, SizeCapExceeded

DEFAULT_AXIS_CAP = 48
RESIDUE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class WignerTable:
    """Real table ``values[s1, s2, g1, g2]``."""

    sigma_spec: GridSpec
    gamma_spec: GridSpec
    values: np.ndarray
    max_imag_residue: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        shape = (self.sigma_spec.n,) * 2 + (self.gamma_spec.n,) * 2
        if v.shape != shape:
            raise ValueError(f"table shape {v.shape} does not match grids {shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("table values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    def total(self) -> float:
        """Integral of W over both planes."""
        return float(np.sum(self.values.ravel()) * self.sigma_spec.h**2 * self.gamma_spec.h**2)


def _interp_matrix(spec: GridSpec, pts: np.ndarray) -> np.ndarray:
    """Dense linear-interpolation operator from lattice values to ``pts``.

    Returns shape ``pts.shape + (n,)``.  Between the outer cell centres and
    the grid boundary the weight ramps linearly to zero at +-L.
    """
    n = spec.n
    fi = spec.fractional_index(pts)
    M = np.zeros(pts.shape + (n,))
    core = (fi >= 0) & (fi <= n - 1)
    lo = np.clip(np.floor(fi).astype(int), 0, n - 2)
    t = fi - lo
    idx = np.nonzero(core)
    M[idx + (lo[idx],)] = 1 - t[idx]
    M[idx + (lo[idx] + 1,)] += t[idx]
    left = (fi > -0.5) & (fi < 0)
    idx = np.nonzero(left)
    M[idx + (0,)] = 1 + 2 * fi[idx]
    right = (fi > n - 1) & (fi < n - 0.5)
    idx = np.nonzero(right)
    M[idx + (n - 1,)] = 1 - 2 * (fi[idx] - (n - 1))
    return M


def _check_cap(sigma_spec, gamma_spec, max_axis, override):
    if override:
        return
    for name, spec in (("sigma", sigma_spec), ("gamma", gamma_spec)):
        if spec.n > max_axis:
            raise SizeCapExceeded(
                f"{name} grid has {spec.n} points per axis, cap is {max_axis}; "
                "pass override_size_cap=True to allow it")


def _autocorrelation_transform(f: ComplexField, centre_spec: GridSpec, freq_spec: GridSpec):
    """``T[c1,c2,w1,w2] = (h^2/pi^3) sum_k F(c+kh) conj(F(c-kh)) exp(2ih(k2 w1 - k1 w2))``."""
    h = f.spec.h
    K = f.spec.n // 2 + 1
    k = np.arange(-K, K + 1)
    c = centre_spec.points
    plus = _interp_matrix(f.spec, c[:, None] + k[None, :] * h)    # [c, k, n]
    minus = _interp_matrix(f.spec, c[:, None] - k[None, :] * h)
    w = freq_spec.points
    E_a = np.exp(-2j * h * np.outer(w, k))   # [w2, k1]
    E_b = np.exp(2j * h * np.outer(w, k))    # [w1, k2]
    samples = f.samples
    nc, nw = centre_spec.n, freq_spec.n
    out = np.empty((nc, nc, nw, nw))
    resid = np.zeros(nc)

    def row(a):
        strip_p = plus[a] @ samples                 # [k1, n2]
        strip_m = minus[a] @ samples
        P = (strip_p[None] @ plus.transpose(0, 2, 1)) \
            * np.conj(strip_m[None] @ minus.transpose(0, 2, 1))   # [c2, k1, k2]
        M = E_a[None] @ P @ E_b.T[None]             # [c2, w2, w1]
        M = M.transpose(0, 2, 1) * (h * h / np.pi**3)
        out[a] = M.real
        resid[a] = np.max(np.abs(M.imag))

    workers = min(worker_count(), nc)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(row, range(nc)))
    else:
        for a in range(nc):
            row(a)
    return out, float(resid.max())


def _finish(values, resid, sigma_spec, gamma_spec, residue_tol):
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    if resid > residue_tol * max(peak, np.finfo(float).tiny) and resid > 0:
        raise ImaginaryResidue(
            f"max |Im W| = {resid:.3g} exceeds {residue_tol:g} x peak {peak:.3g}")
    return WignerTable(sigma_spec, gamma_spec, values, resid)


def wigner(f: ComplexField, sigma_spec: GridSpec, gamma_spec: GridSpec, *,
           max_axis: int = DEFAULT_AXIS_CAP, override_size_cap: bool = False,
           residue_tol: float = RESIDUE_TOL) -> WignerTable:
    """Entangled Wigner transform of a position-space field.

    ``W(s, g) = int d2e/pi^3 psi(s+e) conj(psi(s-e)) exp(e conj(g) - conj(e) g)``
    """
    _check_cap(sigma_spec, gamma_spec, max_axis, override_size_cap)
    values, resid = _autocorrelation_transform(f, sigma_spec, gamma_spec)
    return _finish(values, resid, sigma_spec, gamma_spec, residue_tol)


def wigner_from_xi(j: ComplexField, sigma_spec: GridSpec, gamma_spec: GridSpec, *,
                   max_axis: int = DEFAULT_AXIS_CAP, override_size_cap: bool = False,
                   residue_tol: float = RESIDUE_TOL) -> WignerTable:
    """The same table computed from the xi-representation ``j``.

    ``W(s, g) = int d2z/pi^3 j(g-z) conj(j(g+z)) exp(conj(z) s - z conj(s))``;
    after z -> -z this has the form of the position-space transform with the
    roles of sigma and gamma exchanged.
    """
    _check_cap(sigma_spec, gamma_spec, max_axis, override_size_cap)
    values, resid = _autocorrelation_transform(j, gamma_spec, sigma_spec)
    return _finish(np.ascontiguousarray(values.transpose(2, 3, 0, 1)), resid,
                   sigma_spec, gamma_spec, residue_tol)


def marginal_sigma(w: WignerTable) -> RealField:
    """Integral over gamma; equals ``|psi(sigma)|^2 / pi``."""
    return RealField(w.sigma_spec, w.values.sum(axis=(2, 3)) * w.gamma_spec.h**2)


def marginal_gamma(w: WignerTable) -> RealField:
    """Integral over sigma; equals ``|j(gamma)|^2 / pi``."""
    return RealField(w.gamma_spec, w.values.sum(axis=(0, 1)) * w.sigma_spec.h**2)


def _cell_weights(spec: GridSpec, x):
    """Lower index and weight for linear interpolation; None outside the lattice hull."""
    fi = float(spec.fractional_index(x))
    if fi < 0 or fi > spec.n - 1:
        return None
    lo = min(int(np.floor(fi)), spec.n - 2)
    return lo, fi - lo


def sample_wigner(w: WignerTable, sigma: complex, gamma: complex):
    """Quadrilinear interpolation at one phase-space point.

    Returns ``(value, out_of_domain)``; points outside the lattice hull give
    ``(0.0, True)``.
    """
    coords = ((w.sigma_spec, sigma.real), (w.sigma_spec, sigma.imag),
              (w.gamma_spec, gamma.real), (w.gamma_spec, gamma.imag))
    cells = [_cell_weights(spec, x) for spec, x in coords]
    if any(c is None for c in cells):
        return 0.0, True
    (i, ti), (j, tj), (k, tk), (m, tm) = cells
    block = w.values[i:i + 2, j:j + 2, k:k + 2, m:m + 2]
    for t in (ti, tj, tk, tm):
        block = block[0] * (1 - t) + block[1] * t
    return float(block), False


def double_marginal_check(w: WignerTable, source: ComplexField) -> float:
    """Relative deviation of the table total from ``field_norm_sq / pi``."""
    target = field_norm_sq(source) / np.pi
    return abs(w.total() - target) / target
