"""JSON run configuration: schema, defaults and conversion to :class:`SolverConfig`.

Unknown keys are rejected.  Lengths may be numbers or multiples of pi written as
strings (``"pi"``, ``"2*pi"``, ``"pi/2"``).
"""
import json
import math
import re
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from memdiff import geometry, kernels, media, nonlinearity, solver
from memdiff.errors import ConfigError, Violation

_PI_RE = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*?\s*)?pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def parse_length(value):
    if isinstance(value, (int, float)):
        return float(value)
    m = _PI_RE.match(str(value))
    if not m:
        raise ValueError(f"cannot read length {value!r}")
    num = float(m.group(1)) if m.group(1) else 1.0
    den = float(m.group(2)) if m.group(2) else 1.0
    return num * math.pi / den


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DomainModel(_Strict):
    kind: Optional[Literal["interval", "rectangle"]] = None
    lengths: list[Union[float, str]]

    @field_validator("lengths")
    @classmethod
    def _lengths(cls, v):
        return [parse_length(x) for x in v]


class KernelModel(_Strict):
    kind: Literal["exponential", "constant", "power"] = "exponential"
    kappa: float = 1.0
    rate: float = 1.0
    alpha: float = 0.0


class PhiModel(_Strict):
    kind: Literal["linear", "power", "constant"] = "linear"
    a: float = 1.0
    b: float = 0.0
    m: float = 2.0
    L: Optional[float] = None


class FieldModel(_Strict):
    d_min: float = 1.0
    d_max: float = 1.0
    cells: int = 1
    seed: int = Field(0, ge=0, lt=2**64)
    realization: int = Field(0, ge=0)


class ForcingModel(_Strict):
    mode: int
    a: float = 0.0
    b: float = 0.0
    omega: float = 0.0


class InitialModel(_Strict):
    kind: Literal["zero", "mode", "coefficients", "parabola"] = "mode"
    index: int = 1
    amplitude: float = 1.0
    values: list[float] = []


class QuadratureModel(_Strict):
    panels: Optional[int] = None
    points: int = 4


class RunModel(_Strict):
    dt_list: list[float] = [4e-3, 2e-3, 1e-3]
    N_list: list[int] = [4, 8, 16]
    n_seeds: int = Field(1, ge=1)
    oracle_tol: float = 1e-4


class ConfigModel(_Strict):
    domain: DomainModel
    N: int
    T: float
    dt: float
    kernel: KernelModel = KernelModel()
    phi: PhiModel = PhiModel()
    field: FieldModel = FieldModel()
    forcing: list[ForcingModel] = []
    u0: InitialModel = InitialModel()
    quadrature: QuadratureModel = QuadratureModel()
    run: RunModel = RunModel()


def _loc(loc):
    out = ""
    for part in loc:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out


def _initial(model, domain):
    u0 = model.u0
    if u0.kind == "zero":
        return None
    if u0.kind == "coefficients":
        return list(u0.values)
    if u0.kind == "mode":
        c = np.zeros(u0.index)
        c[-1] = u0.amplitude
        return c
    lengths = domain.lengths
    amp = u0.amplitude

    def parabola(*xs):
        out = amp
        for x, L in zip(xs, lengths):
            out = out * x * (L - x)
        return out

    return parabola


def to_solver_config(model):
    """Build the solver config; raises :class:`ConfigError` on bad domain data."""
    dom = geometry.DomainSpec(tuple(model.domain.lengths))
    if model.domain.kind is not None and model.domain.kind != dom.kind:
        raise ConfigError(Violation("domain.kind", "dimension", f"{dom.dim} lengths given"))
    if model.u0.kind == "mode" and not 1 <= model.u0.index <= max(model.N, 1):
        raise ConfigError(Violation("u0.index", "range", f"mode {model.u0.index} not in 1..N"))
    return solver.SolverConfig(
        domain=dom,
        N=model.N,
        T=model.T,
        dt=model.dt,
        kernel=kernels.MemoryKernel(**model.kernel.model_dump(), horizon=model.T),
        phi=nonlinearity.Nonlinearity(**model.phi.model_dump()),
        field=media.FieldSpec(
            model.field.d_min, model.field.d_max, model.field.cells, model.field.seed
        ),
        forcing=solver.Forcing(tuple(solver.ForcingMode(**f.model_dump()) for f in model.forcing)),
        u0=_initial(model, dom),
        panels=model.quadrature.panels,
        points=model.quadrature.points,
        realization=model.field.realization,
    )


def load_model(source):
    """Parse a JSON document (path, text or dict) into a :class:`ConfigModel`."""
    if isinstance(source, dict):
        data = source
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            with open(text, encoding="utf-8") as fh:
                text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(Violation("<file>", "syntax", str(exc))) from None
    try:
        return ConfigModel.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(
            [Violation(_loc(e["loc"]) or "<root>", e["type"], e["msg"]) for e in exc.errors()]
        ) from None


def parse_config(source, seed=None):
    """Load, apply a seed override and validate; returns ``(SolverConfig, RunModel, ConfigModel)``."""
    model = load_model(source)
    if seed is not None:
        model = model.model_copy(
            update={"field": model.field.model_copy(update={"seed": int(seed)})}
        )
    try:
        cfg = to_solver_config(model)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(Violation("<config>", "value", str(exc))) from None
    solver.check_config(cfg)
    return cfg, model.run, model
