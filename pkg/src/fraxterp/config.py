"""Scenario configuration files (YAML, strictly validated).

A configuration either lists pieces directly::

    name: example1
    ambient: compact
    domain: "[0, 1]"
    K: "[0, 1]"
    g: {kind: hat, height: 0.5, center: 0.5}
    pieces:
      bounded:
        - {interval: "[0, 1]", map: {kind: affine, params: [0.5, 0.0]}, scale: 0.8}
        - {interval: "[0, 1]", map: {kind: affine, params: [0.5, 0.5]}, scale: -0.6}

or transports another scenario to the compactified half line::

    name: example1-pullback
    pullback: {source: example1.yaml}

Pieces without an ``offset`` use ``g`` composed with the piece map.
Unknown keys are errors; every error carries the offending field path
and, when known, its line number.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError, FraxError
from .functions import Constant, Pullback, ScalarFunction
from .functions import from_dict as function_from_dict
from .geometry import Interval
from .maps import Homeomorphism1D
from .maps import from_dict as map_from_dict
from .partition import PartitionScheme
from .rb import RBOperator, VerticalMap
from .scenarios import DIRECT, Scenario, builtin, pullback_scenario


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# -- maps and functions ----------------------------------------------------------------

class MapModel(_Strict):
    kind: Literal["affine", "mobius", "atan_scaled", "tan_scaled", "translation", "composition"]
    params: list[float] = []
    outer: Optional["MapModel"] = None
    inner: Optional["MapModel"] = None


class ConstantModel(_Strict):
    kind: Literal["constant"]
    value: float


class PolynomialModel(_Strict):
    kind: Literal["polynomial"]
    coeffs: list[float]


class HatModel(_Strict):
    kind: Literal["hat"]
    height: float
    center: float
    slope: float = 1.0


class RationalTailModel(_Strict):
    kind: Literal["rational_tail"]
    a: float


class PiecewiseModel(_Strict):
    kind: Literal["piecewise"]
    breakpoints: list[float]
    pieces: list["FunctionField"]


class TermModel(_Strict):
    coef: float
    function: "FunctionField"


class LinearCombinationModel(_Strict):
    kind: Literal["linear_combination"]
    terms: list[TermModel]


class PullbackFunctionModel(_Strict):
    kind: Literal["pullback"]
    inner: "FunctionField"
    map: MapModel
    map_domain: str


FunctionModel = Annotated[
    Union[ConstantModel, PolynomialModel, HatModel, RationalTailModel, PiecewiseModel,
          LinearCombinationModel, PullbackFunctionModel],
    Field(discriminator="kind"),
]
FunctionField = Union[float, FunctionModel]

for _m in (MapModel, PiecewiseModel, TermModel, PullbackFunctionModel):
    _m.model_rebuild()


# -- scenario ------------------------------------------------------------------------------

def _interval_text(v):
    if v is not None:
        Interval.parse(v)
    return v


class PieceModel(_Strict):
    interval: str
    map: MapModel
    scale: FunctionField
    offset: Optional[FunctionField] = None

    @field_validator("interval")
    @classmethod
    def _check_interval(cls, v):
        return _interval_text(v)


class PiecesModel(_Strict):
    bounded: list[PieceModel] = []
    unbounded: list[PieceModel] = []


class PullbackModel(_Strict):
    source: str
    j: Optional[MapModel] = None


class EvaluationModel(_Strict):
    tol: float = Field(1e-10, gt=0)
    grid: int = Field(4096, ge=2)
    max_depth: int = Field(256, ge=1)


class WindowModel(_Strict):
    x: str
    y: list[float] = Field(min_length=2, max_length=2)

    @field_validator("x")
    @classmethod
    def _check_x(cls, v):
        return _interval_text(v)


class AnalysisModel(_Strict):
    p: list[Union[float, str]] = [1.0, "inf"]
    quadrature: Literal["gauss5", "midpoint"] = "gauss5"
    subdivisions: int = Field(64, ge=1)
    window: Optional[WindowModel] = None
    resolution: list[int] = Field([1024, 1024], min_length=2, max_length=2)


class ScenarioConfig(_Strict):
    name: str = "scenario"
    builtin: Optional[str] = None
    ambient: Literal["compact", "half_line", "real_line"] = "compact"
    domain: Optional[str] = None
    K: Optional[str] = None
    compactified: bool = False
    g: Optional[FunctionField] = None
    pieces: Optional[PiecesModel] = None
    pi: Optional[list[int]] = None
    pullback: Optional[PullbackModel] = None
    evaluation: EvaluationModel = EvaluationModel()
    analysis: AnalysisModel = AnalysisModel()

    @field_validator("domain", "K")
    @classmethod
    def _check_intervals(cls, v):
        return _interval_text(v)


# -- loading ---------------------------------------------------------------------------------

def _locate(root, loc) -> tuple:
    """``(line, path)`` of the YAML node addressed by a pydantic error path.

    Union branch names in ``loc`` are not YAML keys and are dropped from
    the reported path; a missing final key is kept.
    """
    node, line, path = root, None, []
    for pos, key in enumerate(loc):
        if node is None:
            break
        line = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == key:
                    nxt, line = v, k.start_mark.line + 1
                    break
            if nxt is not None:
                node = nxt
                path.append(str(key))
            elif pos == len(loc) - 1:
                path.append(str(key))
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int):
            node = node.value[key] if key < len(node.value) else None
            path.append(str(key))
    if node is not None:
        line = node.start_mark.line + 1
    return line, ".".join(path) or "<top>"


def _diagnostics(err: ValidationError, root) -> list:
    errs = err.errors()
    locs = [tuple(e["loc"]) for e in errs]
    out = []
    for e, loc in zip(errs, locs):
        # a number-or-mapping field reports both branches; keep the mapping branch
        if loc and loc[-1] == "float" and any(o[:len(loc) - 1] == loc[:-1] and o != loc for o in locs):
            continue
        line, field = _locate(root, loc)
        where = f"line {line}: " if line else ""
        out.append(f"{where}{field}: {e['msg']}")
    return out


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    """Validate configuration text; raises :class:`ConfigError`."""
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark is not None else ""
        raise ConfigError(f"{source}: malformed YAML", [f"{where}{exc}"]) from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping", ["line 1: expected key: value pairs"])
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{source}: invalid configuration", _diagnostics(exc, root)) from None


def load_config(path) -> tuple:
    """``(Scenario, ScenarioConfig)`` from a YAML file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}", [str(exc)]) from None
    cfg = parse_config(text, str(path))
    return build_scenario(cfg, path.parent), cfg


def _map(m: MapModel, domain: Interval) -> Homeomorphism1D:
    return map_from_dict(m.model_dump(exclude_none=True), domain)


def _function(field) -> ScalarFunction:
    if isinstance(field, (int, float)):
        return Constant(field)
    return function_from_dict(field.model_dump(exclude_none=True))


def build_scenario(cfg: ScenarioConfig, base_dir=".") -> Scenario:
    """Construct the scenario described by ``cfg``.

    Construction problems (structure, contractivity, unknown sources) are
    reported as :class:`ConfigError` with the failing field.
    """
    modes = [k for k in ("builtin", "pieces", "pullback") if getattr(cfg, k) is not None]
    if len(modes) != 1:
        raise ConfigError("exactly one of builtin, pieces, pullback must be given",
                          [f"found: {', '.join(modes) or 'none'}"])
    try:
        if cfg.builtin is not None:
            try:
                s = builtin(cfg.builtin)
            except KeyError:
                raise ConfigError(f"unknown builtin scenario {cfg.builtin!r}", ["builtin"]) from None
        elif cfg.pullback is not None:
            s = _pullback(cfg, Path(base_dir))
        else:
            s = _direct(cfg)
    except ConfigError:
        raise
    except FraxError as exc:
        raise ConfigError(f"scenario {cfg.name!r} cannot be built", [f"{type(exc).__name__}: {exc}"]) from None
    if cfg.builtin is None or "name" in cfg.model_fields_set:
        s.name = cfg.name
    return s


def _pullback(cfg: ScenarioConfig, base_dir: Path) -> Scenario:
    src = cfg.pullback.source
    cand = base_dir / src
    if cand.is_file():
        source, _ = load_config(cand)
    else:
        try:
            source = builtin(src)
        except KeyError:
            raise ConfigError(f"pullback source {src!r} is neither a file nor a builtin",
                              ["pullback.source"]) from None
    j = None
    if cfg.pullback.j is not None:
        j = _map(cfg.pullback.j, Interval(0.0, math.inf))
    return pullback_scenario(source, j)


def _direct(cfg: ScenarioConfig) -> Scenario:
    g = _function(cfg.g) if cfg.g is not None else None
    built = {}
    for fam in ("bounded", "unbounded"):
        pairs, vmaps = [], []
        for k, pc in enumerate(getattr(cfg.pieces, fam)):
            iv = Interval.parse(pc.interval)
            m = _map(pc.map, iv)
            if pc.offset is not None:
                off = _function(pc.offset)
            elif g is not None:
                off = Pullback(g, m)
            else:
                raise ConfigError("piece without offset and no g given",
                                  [f"pieces.{fam}.{k}.offset: required when g is absent"])
            pairs.append((iv, m))
            vmaps.append(VerticalMap.affine(off, _function(pc.scale), iv))
        built[fam] = (pairs, vmaps)
    K = Interval.parse(cfg.K) if cfg.K else None
    dom = Interval.parse(cfg.domain) if cfg.domain else None
    scheme = PartitionScheme(cfg.ambient, K, built["bounded"][0], built["unbounded"][0],
                             pi=cfg.pi, compactified=cfg.compactified, domain=dom)
    op = RBOperator(scheme, built["bounded"][1], built["unbounded"][1])
    return Scenario(cfg.name, op, DIRECT, g=g)


# -- dumping ---------------------------------------------------------------------------------

def _clean(v):
    """Plain YAML-friendly values (infinities as strings)."""
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def _function_dict(fn: ScalarFunction):
    d = fn.to_dict()
    return d["value"] if d.get("kind") == "constant" else d


def scenario_to_config(s: Scenario, evaluation: EvaluationModel | None = None,
                       analysis: AnalysisModel | None = None) -> dict:
    """Configuration mapping that rebuilds ``s`` piece by piece."""
    op = s.operator
    sch = op.scheme
    use_g = s.g is not None and s.provenance == DIRECT and all(
        isinstance(vm.offset, Pullback) and vm.offset.inner is s.g for vm in op.vmaps)
    out = {"name": s.name, "ambient": sch.ambient}
    if sch.ambient == "compact":
        out["domain"] = sch.X.to_config()
    if sch.K is not None:
        out["K"] = sch.K.to_config()
    if sch.compactified:
        out["compactified"] = True
    if use_g:
        out["g"] = _function_dict(s.g)
    pieces = {}
    for fam, group, vms in (("bounded", sch.bounded_pieces, op.bounded_vmaps),
                            ("unbounded", sch.unbounded_pieces, op.unbounded_vmaps)):
        if not group:
            continue
        rows = []
        for pc, vm in zip(group, vms):
            row = {"interval": pc.interval.to_config(), "map": pc.map.to_dict(),
                   "scale": _function_dict(vm.scale)}
            if not use_g:
                row["offset"] = _function_dict(vm.offset)
            rows.append(row)
        pieces[fam] = rows
    out["pieces"] = pieces
    if sch.pi != tuple(range(1, sch.n + 1)):
        out["pi"] = list(sch.pi)
    out["evaluation"] = (evaluation or EvaluationModel()).model_dump()
    out["analysis"] = (analysis or AnalysisModel()).model_dump(exclude_none=True)
    return _clean(out)


def dump_config(s: Scenario, path=None, **kw) -> str:
    text = yaml.safe_dump(scenario_to_config(s, **kw), sort_keys=False, default_flow_style=None)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def parse_p(v) -> float:
    """``p`` value from a number or the strings ``inf``/``infinity``."""
    if isinstance(v, str):
        t = v.strip().lower()
        if t in ("inf", "infinity", "+inf"):
            return math.inf
        v = float(t)
    return float(v)
