"""Command-line front end.

Each subcommand takes one JSON config file::

    efresnel propagate run.json --output-dir out/
    efresnel import-check out/field.cf64

Exit codes: 0 ok, 1 verification failed, 2 bad config, 3 numeric
precondition, 4 I/O or file format, 5 size cap exceeded.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import errors
from .collins import HankelConfig, verify_hankel_consistency
from .core import (SINGULAR_TOL, ABCDMatrix, AngularMode, Gaussian, GridSpec, KernelVariant,
                   RealField, Superposition, field_norm_sq, sample_beam, sampling_diagnostics,
                   truncation_diagnostics, worker_count)
from .entangled import propagate, to_xi_rep
from .io import read_field, write_field, write_table
from .radon import (RadonStats, StripParams, VerifyConfig, radon_from_table,
                    verify_identity_frequency, verify_identity_spatial)
from .wigner import DEFAULT_AXIS_CAP, marginal_gamma, marginal_sigma, wigner

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4
EXIT_SIZE = 5


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------- config models


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridModel(_Strict):
    n: int
    L: float

    def spec(self) -> GridSpec:
        return GridSpec(self.n, self.L)

    @field_validator("n")
    @classmethod
    def _even(cls, v):
        if v <= 0 or v % 2:
            raise ValueError("n must be a positive even integer")
        return v

    @field_validator("L")
    @classmethod
    def _positive(cls, v):
        if not v > 0:
            raise ValueError("L must be positive")
        return v


class GaussianModel(_Strict):
    type: Literal["gaussian"]
    center: tuple[float, float] = (0.0, 0.0)
    width: float = Field(1.0, gt=0)

    def build(self):
        return Gaussian(complex(*self.center), self.width)


class AngularModel(_Strict):
    type: Literal["angular"]
    s: int
    width: float = Field(1.0, gt=0)

    def build(self):
        return AngularMode(self.s, self.width)


class TermModel(_Strict):
    coeff: tuple[float, float]
    beam: Annotated[Union[GaussianModel, AngularModel], Field(discriminator="type")]


class SuperpositionModel(_Strict):
    type: Literal["superposition"]
    terms: list[TermModel] = Field(min_length=1)

    def build(self):
        return Superposition(tuple((complex(*t.coeff), t.beam.build()) for t in self.terms))


BeamModel = Annotated[Union[GaussianModel, AngularModel, SuperpositionModel],
                      Field(discriminator="type")]


class _Base(_Strict):
    beam: BeamModel
    matrix: tuple[float, float, float, float]

    def abcd(self) -> ABCDMatrix:
        return ABCDMatrix(*self.matrix)


class PropagateConfig(_Base):
    variant: Literal["spatial", "swapped", "frequency"] = "spatial"
    grid: GridModel
    out_grid: GridModel | None = None
    output: str = "field.cf64"
    summary: str = "summary.txt"


class WignerConfig(_Base):
    matrix: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 1.0)
    sigma_grid: GridModel
    gamma_grid: GridModel
    field_grid: GridModel | None = None
    output: str = "wigner.wf64"
    sigma_marginal: str = "marginal_sigma.cf64"
    gamma_marginal: str = "marginal_gamma.cf64"
    summary: str = "summary.txt"


class RadonConfig(_Base):
    mode: Literal["spatial", "frequency"] = "spatial"
    sigma_grid: GridModel
    gamma_grid: GridModel
    field_grid: GridModel | None = None
    out_grid: GridModel
    interpolation: Literal["linear", "cubic"] = "cubic"
    output: str = "strip.cf64"
    summary: str = "summary.txt"


class VerifyModel(_Base):
    check: Literal["spatial", "frequency", "hankel"]
    tolerance: float | None = Field(None, gt=0)
    n: int = 32
    n_out: int = 48
    grid: GridModel | None = None
    n_r: int = 128
    s_max: int = Field(4, ge=0)
    report: str = "report.txt"


def _field_grid(cfg) -> GridSpec:
    """Default field lattice: twice the sigma lattice, same spacing."""
    if cfg.field_grid is not None:
        return cfg.field_grid.spec()
    s = cfg.sigma_grid
    return GridSpec(2 * s.n, 2 * s.L)


def load_config(path, model):
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    try:
        cfg = model.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "<root>"
        msg = first["msg"]
        if first["type"] == "extra_forbidden":
            msg = f"unknown key {first['loc'][-1]!r}"
        raise ConfigError(f"{path}: {loc}: {msg}") from None
    try:
        cfg.abcd()
        cfg.beam.build()
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return cfg


# ---------------------------------------------------------------- commands


class Context:
    def __init__(self, output_dir: Path, timestamp: bool, override_size_cap: bool):
        self.output_dir = output_dir
        self.timestamp = timestamp
        self.override_size_cap = override_size_cap

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def write_text(self, name: str, lines: list[str]):
        if self.timestamp:
            lines = lines + [f"timestamp: {_dt.datetime.now(_dt.timezone.utc).isoformat()}"]
        self.path(name).write_text("\n".join(lines) + "\n")


def cmd_propagate(cfg: PropagateConfig, ctx: Context) -> int:
    m = cfg.abcd()
    variant = KernelVariant(cfg.variant)
    spec = cfg.grid.spec()
    out_spec = cfg.out_grid.spec() if cfg.out_grid else spec
    psi = sample_beam(cfg.beam.build(), spec)
    if variant is KernelVariant.FREQUENCY:
        psi = to_xi_rep(psi)
    warnings = sampling_diagnostics(m, spec, out_spec, variant) + truncation_diagnostics(psi)
    out = propagate(psi, m, variant, out_spec)
    write_field(ctx.path(cfg.output), out)
    n_in, n_out = field_norm_sq(psi), field_norm_sq(out)
    lines = ["command: propagate", f"variant: {variant.value}",
             f"matrix: {' '.join(repr(v) for v in m.as_tuple())}",
             f"grid_in: n={spec.n} L={spec.L!r}", f"grid_out: n={out_spec.n} L={out_spec.L!r}",
             f"norm_in: {n_in:.12e}", f"norm_out: {n_out:.12e}",
             f"norm_ratio: {n_out / n_in:.12e}", f"output: {cfg.output}"]
    lines += [f"warning: {w}" for w in warnings]
    ctx.write_text(cfg.summary, lines)
    print(f"norm_ratio: {n_out / n_in:.12e}")
    return EXIT_OK


def cmd_wigner(cfg: WignerConfig, ctx: Context) -> int:
    sigma, gamma = cfg.sigma_grid.spec(), cfg.gamma_grid.spec()
    psi = sample_beam(cfg.beam.build(), _field_grid(cfg))
    table = wigner(psi, sigma, gamma, max_axis=DEFAULT_AXIS_CAP,
                   override_size_cap=ctx.override_size_cap)
    ms, mg = marginal_sigma(table), marginal_gamma(table)
    write_table(ctx.path(cfg.output), table)
    write_field(ctx.path(cfg.sigma_marginal), ms)
    write_field(ctx.path(cfg.gamma_marginal), mg)
    v = table.values
    peak = np.unravel_index(np.argmax(v), v.shape)
    lines = ["command: wigner", f"sigma_grid: n={sigma.n} L={sigma.L!r}",
             f"gamma_grid: n={gamma.n} L={gamma.L!r}", f"peak_value: {v[peak]:.12e}",
             f"peak_index: {' '.join(str(int(i)) for i in peak)}",
             f"total: {table.total():.12e}",
             f"field_norm_sq_over_pi: {field_norm_sq(psi) / np.pi:.12e}",
             f"max_imag_residue: {table.max_imag_residue:.6e}",
             f"sigma_marginal_mass: {ms.mass():.12e}", f"gamma_marginal_mass: {mg.mass():.12e}",
             f"output: {cfg.output}"]
    ctx.write_text(cfg.summary, lines)
    print(f"peak_value: {v[peak]:.12e}")
    return EXIT_OK


def cmd_radon(cfg: RadonConfig, ctx: Context) -> int:
    m = cfg.abcd()
    if cfg.mode == "spatial":
        if abs(m.b) < SINGULAR_TOL:
            raise errors.SingularB(f"|B| = {abs(m.b):.3g}; the spatial strip degenerates")
        strip = StripParams.spatial(m)
    else:
        if abs(m.c) < SINGULAR_TOL:
            raise errors.SingularC(f"|C| = {abs(m.c):.3g}; the frequency strip degenerates")
        strip = StripParams.frequency(m)
    sigma, gamma = cfg.sigma_grid.spec(), cfg.gamma_grid.spec()
    psi = sample_beam(cfg.beam.build(), _field_grid(cfg))
    table = wigner(psi, sigma, gamma, max_axis=DEFAULT_AXIS_CAP,
                   override_size_cap=ctx.override_size_cap)
    stats = RadonStats()
    out = radon_from_table(table, strip, cfg.out_grid.spec(), cfg.interpolation, stats)
    write_field(ctx.path(cfg.output), out)
    lines = ["command: radon", f"mode: {cfg.mode}", f"p: {strip.p!r}", f"q: {strip.q!r}",
             f"mass: {out.mass():.12e}", f"field_norm_sq: {field_norm_sq(psi):.12e}",
             f"gamma_outside_fraction: {stats.outside_fraction:.6e}",
             f"gamma_outside_relevant_fraction: {stats.relevant_fraction:.6e}",
             f"output: {cfg.output}"]
    ctx.write_text(cfg.summary, lines)
    print(f"mass: {out.mass():.12e}")
    return EXIT_OK


def _reraise(reason: str | None):
    """Turn a report's ``reason`` back into the exception it came from."""
    if not reason:
        return
    name = reason.split(":", 1)[0]
    exc = getattr(errors, name, None)
    if isinstance(exc, type) and issubclass(exc, errors.EFresnelError):
        raise exc(reason.split(":", 1)[1].strip())


def cmd_verify(cfg: VerifyModel, ctx: Context) -> int:
    m = cfg.abcd()
    beam = cfg.beam.build()
    if cfg.check == "hankel":
        hc = HankelConfig(field_spec=cfg.grid.spec() if cfg.grid else HankelConfig.field_spec,
                          n_r=cfg.n_r, s_max=cfg.s_max,
                          tolerance=cfg.tolerance or HankelConfig.tolerance)
        report = verify_hankel_consistency(beam, m, hc)
    else:
        tol = cfg.tolerance or 5e-3
        vc = VerifyConfig.for_beam(beam, m, cfg.check, n=cfg.n, n_out=cfg.n_out, tolerance=tol,
                                   override_size_cap=ctx.override_size_cap)
        fn = verify_identity_spatial if cfg.check == "spatial" else verify_identity_frequency
        report = fn(beam, m, vc)
    _reraise(report.reason)
    text = report.to_text()
    if ctx.timestamp:
        text += f"timestamp: {_dt.datetime.now(_dt.timezone.utc).isoformat()}\n"
    ctx.path(cfg.report).write_text(text)
    print(report.verdict_line())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_import(path, ctx: Context) -> int:
    f = read_field(path)
    kind = "real" if isinstance(f, RealField) else "complex"
    data = f.values if kind == "real" else f.samples
    print(f"ok: n={f.spec.n} L={f.spec.L!r} kind={kind} max_abs={float(np.max(np.abs(data))):.12e}")
    return EXIT_OK


COMMANDS = {
    "propagate": (PropagateConfig, cmd_propagate),
    "wigner": (WignerConfig, cmd_wigner),
    "radon": (RadonConfig, cmd_radon),
    "verify": (VerifyModel, cmd_verify),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="efresnel", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*COMMANDS, "import-check"):
        p = sub.add_parser(name)
        p.add_argument("path", help="CF64 file" if name == "import-check" else "JSON config")
        p.add_argument("--output-dir", type=Path, default=Path("."))
        p.add_argument("--no-timestamp", action="store_true")
        p.add_argument("--override-size-cap", action="store_true")
    return parser


def _fail(code: int, exc: BaseException) -> int:
    print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    ctx = Context(args.output_dir, not args.no_timestamp, args.override_size_cap)
    try:
        worker_count()
    except ValueError as exc:
        return _fail(EXIT_CONFIG, exc)
    try:
        args.output_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "import-check":
            return cmd_import(args.path, ctx)
        model, fn = COMMANDS[args.command]
        cfg = load_config(args.path, model)
        return fn(cfg, ctx)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except errors.SizeCapExceeded as exc:
        return _fail(EXIT_SIZE, exc)
    except errors.FormatError as exc:
        return _fail(EXIT_IO, exc)
    except (errors.NumericPrecondition, errors.ImaginaryResidue,
            errors.ExcessiveExtrapolation) as exc:
        return _fail(EXIT_NUMERIC, exc)
    except (errors.InvalidMatrix, errors.InvalidParams) as exc:
        return _fail(EXIT_CONFIG, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)


if __name__ == "__main__":
    sys.exit(main())
