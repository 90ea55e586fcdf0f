"""Line-oriented experiment configs.

Format::

    # comment
    objective.kind = diagonal_quadratic
    objective.diag = [1, -1]
    domain.kind = box
    domain.lo = [-1, -1]
    domain.hi = [1, 1]
    solver.step_rule = quadbound

Vectors are comma-separated reals in brackets; matrices separate rows with
semicolons, e.g. ``[1, 0; 0, 1]``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields
from functools import cached_property
from pathlib import Path

import numpy as np

from .core import FEASIBILITY_TOL
from .domains import NORMS, AtomSet, Box, Domain, L1Ball, Simplex
from .errors import ConfigError, FWError
from .objectives import SYMMETRY_TOL, DiagonalQuadratic, Quadratic
from .solver import StepRule

C_MODES = ("analytic", "sampled", "explicit")
OBJECTIVE_KINDS = ("diagonal_quadratic", "quadratic")
DOMAIN_KINDS = ("simplex", "box", "l1ball", "atomset")

# config key -> (dataclass field, value type)
_KEYS = {
    "objective.kind": ("objective_kind", "str"),
    "objective.diag": ("diag", "vector"),
    "objective.matrix": ("matrix", "matrix"),
    "objective.b": ("b", "vector"),
    "objective.L": ("lipschitz_L", "float"),
    "domain.kind": ("domain_kind", "str"),
    "domain.dim": ("dim", "int"),
    "domain.lo": ("lo", "vector"),
    "domain.hi": ("hi", "vector"),
    "domain.radius": ("radius", "float"),
    "domain.vertices": ("vertices", "matrix"),
    "solver.step_rule": ("step_rule", "str"),
    "solver.C_mode": ("C_mode", "str"),
    "solver.C": ("C", "float"),
    "solver.epsilon": ("epsilon", "float"),
    "solver.max_iters": ("max_iters", "int"),
    "solver.x0": ("x0", "vector"),
    "solver.seed": ("seed", "int"),
    "solver.norm": ("norm", "str"),
    "solver.samples": ("samples", "int"),
    "output.trace": ("trace_path", "str"),
    "output.report": ("report_path", "str"),
    "output.digits": ("digits", "int"),
}
_FIELD_TO_KEY = {f: k for k, (f, _) in _KEYS.items()}

_LINE = re.compile(r"^\s*([A-Za-z_]+)\.([A-Za-z_0-9]+)\s*=\s*(.*?)\s*$")


@dataclass(frozen=True)
class ExperimentConfig:
    objective_kind: str
    domain_kind: str
    step_rule: StepRule
    diag: tuple[float, ...] | None = None
    matrix: tuple[tuple[float, ...], ...] | None = None
    b: tuple[float, ...] | None = None
    lipschitz_L: float | None = None
    dim: int | None = None
    lo: tuple[float, ...] | None = None
    hi: tuple[float, ...] | None = None
    radius: float | None = None
    vertices: tuple[tuple[float, ...], ...] | None = None
    C_mode: str = "analytic"
    C: float | None = None
    epsilon: float = 1e-8
    max_iters: int = 1000
    x0: tuple[float, ...] | None = None
    seed: int = 0
    norm: str = "l2"
    samples: int = 100_000
    trace_path: str | None = None
    report_path: str | None = None
    digits: int = 17
    name: str = "experiment"

    @cached_property
    def objective(self) -> Quadratic:
        if self.objective_kind == "diagonal_quadratic":
            return DiagonalQuadratic(self.diag, self.b)
        return Quadratic(self.matrix, self.b, self.lipschitz_L)

    @cached_property
    def domain(self) -> Domain:
        k = self.domain_kind
        if k == "simplex":
            return Simplex(self.dim)
        if k == "box":
            return Box(self.lo, self.hi)
        if k == "l1ball":
            return L1Ball(self.radius, self.dim)
        return AtomSet(self.vertices)

    def x0_vector(self) -> np.ndarray:
        if self.x0 is None:
            return self.domain.default_x0()
        return np.array(self.x0, dtype=np.float64)

    def with_seed(self, seed: int) -> ExperimentConfig:
        return _replace(self, seed=seed)


def _replace(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    kw = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    kw.update(changes)
    return ExperimentConfig(**kw)


def _parse_float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {text!r}")
    return v


def _parse_vector(text: str) -> tuple[float, ...]:
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError("vectors must be bracketed, e.g. [1, 2]")
    body = text[1:-1].strip()
    if not body:
        raise ValueError("empty vector")
    return tuple(_parse_float(p) for p in body.split(","))


def _parse_matrix(text: str) -> tuple[tuple[float, ...], ...]:
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError("matrices must be bracketed, e.g. [1, 0; 0, 1]")
    rows = tuple(_parse_vector(f"[{r.strip()}]") for r in text[1:-1].split(";"))
    if len({len(r) for r in rows}) != 1:
        raise ValueError("matrix rows have different lengths")
    return rows


def _parse_int(text: str) -> int:
    f = float(text)
    if f != int(f):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(f)


_PARSERS = {
    "str": str,
    "float": _parse_float,
    "int": _parse_int,
    "vector": _parse_vector,
    "matrix": _parse_matrix,
}


def parse_config(text: str, name: str = "experiment") -> ExperimentConfig:
    """Parse and fully validate config text.

    Defaults: epsilon 1e-8, max_iters 1000, seed 0, C_mode analytic, norm l2.
    Raises :class:`ConfigError` naming the line and field at fault.
    """
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ConfigError("expected 'section.key = value'", line=lineno)
        key = f"{m.group(1)}.{m.group(2)}"
        if key not in _KEYS:
            raise ConfigError("unknown key", field=key, line=lineno)
        fname, kind = _KEYS[key]
        if fname in values:
            raise ConfigError(f"duplicate key (first set on line {lines[fname]})", field=key, line=lineno)
        try:
            values[fname] = _PARSERS[kind](m.group(3))
        except ValueError as exc:
            raise ConfigError(str(exc), field=key, line=lineno) from None
        lines[fname] = lineno

    for req in ("objective_kind", "domain_kind", "step_rule"):
        if req not in values:
            raise ConfigError("missing required field", field=_FIELD_TO_KEY[req])
    return _validate(values, lines, name)


def _validate(values: dict, lines: dict, name: str) -> ExperimentConfig:
    def fail(msg, fname):
        raise ConfigError(msg, field=_FIELD_TO_KEY.get(fname, fname), line=lines.get(fname))

    def need(fname, why):
        if values.get(fname) is None:
            fail(f"missing required field ({why})", fname)

    def choice(fname, options):
        if values.get(fname) is not None and values[fname] not in options:
            fail(f"must be one of {', '.join(options)}; got {values[fname]!r}", fname)

    choice("objective_kind", OBJECTIVE_KINDS)
    choice("domain_kind", DOMAIN_KINDS)
    choice("step_rule", tuple(r.value for r in StepRule))
    choice("C_mode", C_MODES)
    choice("norm", NORMS)

    okind = values["objective_kind"]
    if okind == "diagonal_quadratic":
        need("diag", "diagonal_quadratic needs objective.diag")
        for bad in ("matrix", "lipschitz_L"):
            if bad in values:
                fail("only valid for objective.kind = quadratic", bad)
        d = len(values["diag"])
    else:
        need("matrix", "quadratic needs objective.matrix")
        A = np.array(values["matrix"])
        if A.shape[0] != A.shape[1]:
            fail(f"matrix must be square, got {A.shape[0]}x{A.shape[1]}", "matrix")
        asym = float(np.max(np.abs(A - A.T)))
        if asym > SYMMETRY_TOL:
            fail(f"matrix is not symmetric (max |A - A^T| = {asym:g})", "matrix")
        if "diag" in values:
            fail("only valid for objective.kind = diagonal_quadratic", "diag")
        if values.get("lipschitz_L") is not None and values["lipschitz_L"] < 0:
            fail("must be nonnegative", "lipschitz_L")
        d = A.shape[0]
    if values.get("b") is not None and len(values["b"]) != d:
        fail(f"has dimension {len(values['b'])}, objective has {d}", "b")

    dkind = values["domain_kind"]
    allowed = {
        "simplex": {"dim"},
        "box": {"lo", "hi"},
        "l1ball": {"dim", "radius"},
        "atomset": {"vertices"},
    }[dkind]
    for f in ("dim", "lo", "hi", "radius", "vertices"):
        if f in values and f not in allowed:
            fail(f"not a parameter of {dkind} domains", f)
    if dkind in ("simplex", "l1ball"):
        values.setdefault("dim", d)
    if dkind == "box":
        need("lo", "box needs domain.lo")
        need("hi", "box needs domain.hi")
        for f in ("lo", "hi"):
            if len(values[f]) != d:
                fail(f"has dimension {len(values[f])}, objective has {d}", f)
        for i, (lo, hi) in enumerate(zip(values["lo"], values["hi"])):
            if not lo < hi:
                fail(f"coordinate {i} is degenerate or reversed: lo={lo!r}, hi={hi!r}", "lo")
    if dkind == "l1ball":
        need("radius", "l1ball needs domain.radius")
        if not values["radius"] > 0:
            fail("must be positive", "radius")
    if dkind == "atomset":
        need("vertices", "atomset needs domain.vertices")
        if len(values["vertices"][0]) != d:
            fail(f"vertices have dimension {len(values['vertices'][0])}, objective has {d}", "vertices")
    if values.get("dim") is not None and values["dim"] != d:
        fail(f"is {values['dim']}, objective has dimension {d}", "dim")

    if values.get("C_mode") == "explicit":
        need("C", "C_mode = explicit needs solver.C")
        if not values["C"] > 0:
            fail("must be positive", "C")
    elif "C" in values:
        fail("only valid with solver.C_mode = explicit", "C")
    if values.get("epsilon", 0.0) < 0:
        fail("must be >= 0", "epsilon")
    if values.get("max_iters", 0) < 0:
        fail("must be >= 0", "max_iters")
    if values.get("samples", 1) < 1:
        fail("must be >= 1", "samples")
    if not 1 <= values.get("digits", 17) <= 17:
        fail("must be between 1 and 17", "digits")

    values["step_rule"] = StepRule(values["step_rule"])
    try:
        cfg = ExperimentConfig(name=name, **values)
        cfg.objective  # noqa: B018 - builds and validates
        dom = cfg.domain
    except FWError as exc:
        raise ConfigError(str(exc)) from None
    if "x0" in values:
        x0 = values["x0"]
        if len(x0) != d:
            fail(f"has dimension {len(x0)}, objective has {d}", "x0")
        try:
            dom.require_feasible(np.array(x0), FEASIBILITY_TOL)
        except FWError as exc:
            fail(str(exc), "x0")
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, name=path.stem)


def _fmt_float(v: float) -> str:
    return repr(float(v))


def _fmt_vector(v) -> str:
    return "[" + ", ".join(_fmt_float(x) for x in v) + "]"


def _fmt_matrix(m) -> str:
    return "[" + "; ".join(", ".join(_fmt_float(x) for x in row) for row in m) + "]"


_FORMATTERS = {
    "str": str,
    "float": _fmt_float,
    "int": str,
    "vector": _fmt_vector,
    "matrix": _fmt_matrix,
}


def format_config(cfg: ExperimentConfig) -> str:
    """Canonical text for ``cfg``; ``parse_config`` of it gives ``cfg`` back."""
    out = []
    for key, (fname, kind) in _KEYS.items():
        v = getattr(cfg, fname)
        if v is None:
            continue
        if isinstance(v, StepRule):
            v = v.value
        out.append(f"{key} = {_FORMATTERS[kind](v)}")
    return "\n".join(out) + "\n"
