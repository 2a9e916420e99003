"""Shared domain types: ray-transfer matrices, grids, sampled fields, beams.

Complex transverse coordinates are written eta = eta1 + i*eta2 and the area
element is d2eta = d(eta1) d(eta2).  Grids are cell centred, so the point
x = 0 is never sampled exactly and every cell carries the same midpoint weight.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidMatrix, InvalidParams

UNIMODULAR_TOL = 1e-12
SINGULAR_TOL = 1e-9
NEAR_SINGULAR_TOL = 1e-6


@dataclass(frozen=True)
class ABCDMatrix:
    """Real unimodular ray-transfer matrix ``[[a, b], [c, d]]``."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in "abcd":
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise InvalidMatrix(f"entry {name} is not finite")
            object.__setattr__(self, name, v)
        det = self.a * self.d - self.b * self.c
        if abs(det - 1.0) > UNIMODULAR_TOL:
            raise InvalidMatrix(f"AD - BC = {det!r}, expected 1 within {UNIMODULAR_TOL}")

    @classmethod
    def identity(cls) -> "ABCDMatrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def free(cls, b: float) -> "ABCDMatrix":
        return cls(1.0, b, 0.0, 1.0)

    @classmethod
    def lens(cls, c: float) -> "ABCDMatrix":
        return cls(1.0, 0.0, c, 1.0)

    @classmethod
    def from_array(cls, arr) -> "ABCDMatrix":
        arr = np.asarray(arr, dtype=float).reshape(2, 2)
        return cls(arr[0, 0], arr[0, 1], arr[1, 0], arr[1, 1])

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def swapped(self) -> "ABCDMatrix":
        """The ``[D, -B, -C, A]`` system (the inverse matrix)."""
        return ABCDMatrix(self.d, -self.b, -self.c, self.a)

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)


@dataclass(frozen=True)
class SqueezeParams:
    """Complex pair (k, t) with k k* - t t* = 1."""

    k: complex
    t: complex

    def __post_init__(self):
        k, t = complex(self.k), complex(self.t)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "t", t)
        resid = (k * k.conjugate() - t * t.conjugate()).real - 1.0
        if not np.isfinite(resid) or abs(resid) > UNIMODULAR_TOL:
            raise InvalidParams(f"|k|^2 - |t|^2 - 1 = {resid!r}")


def params_from_abcd(m: ABCDMatrix) -> SqueezeParams:
    if not isinstance(m, ABCDMatrix):
        raise InvalidMatrix("expected an ABCDMatrix")
    k = 0.5 * complex(m.a + m.d, -(m.b - m.c))
    t = 0.5 * complex(m.a - m.d, m.b + m.c)
    return SqueezeParams(k, t)


def abcd_from_params(p: SqueezeParams) -> ABCDMatrix:
    if not isinstance(p, SqueezeParams):
        raise InvalidParams("expected SqueezeParams")
    s, d = p.k + p.t, p.k - p.t
    try:
        return ABCDMatrix(s.real, -d.imag, s.imag, d.real)
    except InvalidMatrix as exc:
        raise InvalidParams(str(exc)) from exc


def compose(m1: ABCDMatrix, m2: ABCDMatrix) -> ABCDMatrix:
    """Matrix product ``m1 @ m2``: the system ``m2`` followed by ``m1``."""
    a = m1.a * m2.a + m1.b * m2.c
    b = m1.a * m2.b + m1.b * m2.d
    c = m1.c * m2.a + m1.d * m2.c
    d = m1.c * m2.b + m1.d * m2.d
    return ABCDMatrix(a, b, c, d)


@dataclass(frozen=True)
class GridSpec:
    """``n`` cell-centred samples per axis on ``[-half_extent, half_extent]``."""

    n: int
    half_extent: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n <= 0 or self.n % 2:
            raise ValueError(f"n must be a positive even integer, got {self.n!r}")
        if not (np.isfinite(self.half_extent) and self.half_extent > 0):
            raise ValueError(f"half_extent must be positive, got {self.half_extent!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "half_extent", float(self.half_extent))

    @property
    def L(self) -> float:
        return self.half_extent

    @property
    def h(self) -> float:
        return 2.0 * self.half_extent / self.n

    @property
    def points(self) -> np.ndarray:
        return -self.half_extent + (np.arange(self.n) + 0.5) * self.h

    def mesh(self):
        """Return (eta1, eta2) arrays indexed ``[i, j]``."""
        x = self.points
        return np.meshgrid(x, x, indexing="ij")

    def complex_mesh(self) -> np.ndarray:
        x1, x2 = self.mesh()
        return x1 + 1j * x2

    def fractional_index(self, x):
        return (np.asarray(x, dtype=float) + self.half_extent) / self.h - 0.5


class Representation(enum.Enum):
    ETA = "eta"
    XI = "xi"


class KernelVariant(enum.Enum):
    SPATIAL = "spatial"
    SPATIAL_SWAPPED = "swapped"
    FREQUENCY = "frequency"


def _frozen(arr) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Samples of a function of one complex variable on a square lattice.

    ``samples[i, j]`` is the value at ``x_i + 1j * x_j``.
    """

    spec: GridSpec
    samples: np.ndarray
    representation: Representation = Representation.ETA

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.spec.n, self.spec.n):
            raise ValueError(f"samples shape {s.shape} does not match grid n={self.spec.n}")
        if not np.all(np.isfinite(s)):
            raise ValueError("field samples must be finite")
        object.__setattr__(self, "samples", _frozen(s))

    def with_samples(self, samples, representation=None) -> "ComplexField":
        rep = self.representation if representation is None else representation
        return ComplexField(self.spec, samples, rep)

    def conj(self) -> "ComplexField":
        return self.with_samples(np.conj(self.samples))

    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2


@dataclass(frozen=True, eq=False)
class RealField:
    """Real values on a square lattice, e.g. an intensity or a marginal."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.spec.n, self.spec.n):
            raise ValueError(f"values shape {v.shape} does not match grid n={self.spec.n}")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    def mass(self) -> float:
        return float(np.sum(self.values.ravel()) * self.spec.h**2)


# ---------------------------------------------------------------- beams


@dataclass(frozen=True)
class Gaussian:
    center: complex = 0j
    width: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("Gaussian width must be positive")
        object.__setattr__(self, "center", complex(self.center))


@dataclass(frozen=True)
class AngularMode:
    """``(|eta|/w)^|s| exp(i s arg eta) exp(-|eta|^2 / 2w^2)``."""

    s: int
    width: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("AngularMode width must be positive")
        if int(self.s) != self.s:
            raise ValueError("AngularMode s must be an integer")
        object.__setattr__(self, "s", int(self.s))


@dataclass(frozen=True)
class Superposition:
    terms: tuple

    def __post_init__(self):
        terms = tuple((complex(c), b) for c, b in self.terms)
        if not terms:
            raise ValueError("Superposition needs at least one term")
        object.__setattr__(self, "terms", terms)


AnalyticBeam = Union[Gaussian, AngularMode, Superposition]


def evaluate_beam(beam: AnalyticBeam, eta1, eta2) -> np.ndarray:
    """Evaluate ``beam`` at the points ``eta1 + 1j*eta2`` (broadcasting)."""
    eta1 = np.asarray(eta1, dtype=float)
    eta2 = np.asarray(eta2, dtype=float)
    if isinstance(beam, Gaussian):
        d1 = eta1 - beam.center.real
        d2 = eta2 - beam.center.imag
        return np.exp(-(d1 * d1 + d2 * d2) / (2 * beam.width**2)).astype(complex)
    if isinstance(beam, AngularMode):
        r2 = eta1 * eta1 + eta2 * eta2
        r = np.sqrt(r2)
        out = (r / beam.width) ** abs(beam.s) * np.exp(-r2 / (2 * beam.width**2))
        return out * np.exp(1j * beam.s * np.arctan2(eta2, eta1))
    if isinstance(beam, Superposition):
        total = np.zeros(np.broadcast(eta1, eta2).shape, dtype=complex)
        for coeff, sub in beam.terms:
            total = total + coeff * evaluate_beam(sub, eta1, eta2)
        return total
    raise TypeError(f"not an analytic beam: {beam!r}")


def sample_beam(beam: AnalyticBeam, spec: GridSpec) -> ComplexField:
    x1, x2 = spec.mesh()
    return ComplexField(spec, evaluate_beam(beam, x1, x2))


def field_norm_sq(f: ComplexField) -> float:
    """Midpoint-rule value of the integral of ``|f|^2`` over the grid square."""
    return float(np.sum(np.abs(f.samples).ravel() ** 2) * f.spec.h**2)


# ---------------------------------------------------------------- diagnostics


class WarningCode(enum.Enum):
    CHIRP_UNDERSAMPLED = "ChirpUndersampled"
    TRUNCATION_LOSS = "TruncationLoss"
    NEAR_SINGULAR_B = "NearSingularB"
    NEAR_SINGULAR_C = "NearSingularC"


@dataclass(frozen=True)
class SamplingWarning:
    code: WarningCode
    message: str
    worst_cell_phase: float = 0.0

    def __str__(self):
        return f"{self.code.value}: {self.message}"


def kernel_roles(m: ABCDMatrix, variant: KernelVariant):
    """(input quadratic coefficient, output quadratic coefficient, divisor)."""
    variant = KernelVariant(variant)
    if variant is KernelVariant.SPATIAL:
        return m.a, m.d, m.b
    if variant is KernelVariant.SPATIAL_SWAPPED:
        return m.d, m.a, -m.b
    return m.a, m.d, m.c


def sampling_diagnostics(m: ABCDMatrix, in_spec: GridSpec, out_spec: GridSpec,
                         variant=KernelVariant.SPATIAL) -> list:
    """Check the kernel chirp against the input and output lattices.

    The phase of the kernel changes between neighbouring input cells by at
    most ``(|p_in| L_in + L_out) h_in / |q|``; above pi the quadrature aliases.
    """
    variant = KernelVariant(variant)
    p_in, p_out, q = kernel_roles(m, variant)
    code = (WarningCode.NEAR_SINGULAR_C if variant is KernelVariant.FREQUENCY
            else WarningCode.NEAR_SINGULAR_B)
    label = "C" if variant is KernelVariant.FREQUENCY else "B"
    if abs(q) < NEAR_SINGULAR_TOL:
        return [SamplingWarning(code, f"|{label}| = {abs(q):.3g} is below {NEAR_SINGULAR_TOL:g}",
                                float("inf"))]
    warnings = []
    step_in = (abs(p_in) * in_spec.L + out_spec.L) * in_spec.h / abs(q)
    step_out = (abs(p_out) * out_spec.L + in_spec.L) * out_spec.h / abs(q)
    for side, step in (("input", step_in), ("output", step_out)):
        if step > np.pi:
            warnings.append(SamplingWarning(
                WarningCode.CHIRP_UNDERSAMPLED,
                f"kernel phase step {step:.3f} rad between adjacent {side} cells exceeds pi",
                float(step)))
    return warnings


def truncation_diagnostics(f: ComplexField, rel_tol: float = 1e-6) -> list:
    """Warn when the field has not decayed at the edge of its grid."""
    a = np.abs(f.samples)
    peak = a.max()
    if peak == 0:
        return []
    edge = max(a[0].max(), a[-1].max(), a[:, 0].max(), a[:, -1].max())
    if edge > rel_tol * peak:
        return [SamplingWarning(WarningCode.TRUNCATION_LOSS,
                                f"edge amplitude is {edge / peak:.3g} of peak")]
    return []


# ---------------------------------------------------------------- helpers


def rel_l2(a, b) -> float:
    """``||a - b|| / ||b||``."""
    a = np.asarray(a)
    b = np.asarray(b)
    den = np.linalg.norm(b.ravel())
    num = np.linalg.norm((a - b).ravel())
    if den == 0:
        return 0.0 if num == 0 else float("inf")
    return float(num / den)


def rel_linf(a, b) -> float:
    """Max pointwise deviation relative to the peak of ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    den = np.max(np.abs(b))
    num = np.max(np.abs(a - b))
    if den == 0:
        return 0.0 if num == 0 else float("inf")
    return float(num / den)


def phase_align(a, b) -> np.ndarray:
    """Return ``a`` times the unit phase that maximises ``|<b, a e^{i phi}>|``."""
    a = np.asarray(a)
    ip = np.vdot(a.ravel(), np.asarray(b).ravel())
    if ip == 0:
        return a
    return a * (ip / abs(ip))


def worker_count() -> int:
    """Worker cap from ``EFRESNEL_THREADS`` (default: CPU count)."""
    raw = os.environ.get("EFRESNEL_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        raise ValueError(f"EFRESNEL_THREADS must be a positive integer, got {raw!r}")
    return n
