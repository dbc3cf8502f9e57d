"""Loading and validating YAML scenario files.

See ``scenarios/README.md`` for the schema. Validation errors carry the
line of the offending key so the CLI can report ``path:line: message``.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .exceptions import DegenerateParams, InvalidBasis, InvalidState
from .hardy import L_LABEL, R_LABEL, R_PRIME_LABEL, HardyParams, build_hardy
from .hilbert import BipartiteSpace, DensityOperator, Factor, Ket
from .measurement import MeasurementBasis
from .spacetime import Event, OrderTag

SCHEMA_VERSION = 1
ANALYSES = ("joint", "conditional", "counterfactual", "gap", "reciprocity", "montecarlo")
ORDERS = {"l-first": (OrderTag.L_FIRST,), "r-first": (OrderTag.R_FIRST,),
          "both": (OrderTag.R_FIRST, OrderTag.L_FIRST)}
AMPLITUDE_TOL = 1e-6


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message)


class _LineDict(dict):
    line: int | None = None
    key_lines: dict = {}

    def line_of(self, key) -> int | None:
        return self.key_lines.get(key, self.line)


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    loader.flatten_mapping(node)
    d = _LineDict(loader.construct_mapping(node, deep=True))
    d.line = node.start_mark.line + 1
    d.key_lines = {k.value: k.start_mark.line + 1 for k, _ in node.value}
    return d


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_NAMES = {"pi": math.pi, "e": math.e}
_FUNCS = {"sqrt": np.sqrt, "sin": np.sin, "cos": np.cos, "exp": np.exp}


def _eval_node(node):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
        return _FUNCS[node.func.id](_eval_node(node.args[0]))
    raise ValueError("unsupported expression")


def parse_number(value, allow_complex=False):
    """Number, ``[re, im]`` pair, or arithmetic string such as ``"pi/4"`` or ``"1/sqrt(2)"``."""
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        out = value
    elif isinstance(value, list) and allow_complex and len(value) == 2:
        out = complex(parse_number(value[0]), parse_number(value[1]))
    elif isinstance(value, str):
        try:
            out = _eval_node(ast.parse(value.strip(), mode="eval"))
        except (SyntaxError, ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot evaluate {value!r}") from exc
    else:
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(out, complex) or np.iscomplexobj(out):
        if not allow_complex:
            raise ValueError(f"expected a real number, got {value!r}")
        return complex(out)
    return float(out)


@dataclass
class ScenarioSpec:
    name: str
    space: BipartiteSpace
    rho0: DensityOperator
    ket: Ket | None
    l_basis: MeasurementBasis
    r_basis: MeasurementBasis
    r_prime_basis: MeasurementBasis | None
    l_label: str
    r_label: str
    r_prime_label: str | None
    orders: tuple
    analyses: tuple
    n_runs: int = 100_000
    seed: int = 0
    shards: int = 1
    hardy: HardyParams | None = None
    events: tuple | None = None
    source: str = field(default="", repr=False)

    @property
    def order_name(self) -> str:
        for name, orders in ORDERS.items():
            if orders == self.orders:
                return name
        raise AssertionError(self.orders)


def _require(d: _LineDict, key: str, where: str):
    if key not in d:
        raise ScenarioError(f"{where}: missing required key {key!r}", d.line)
    return d[key]


def _mapping(value, where: str, line) -> _LineDict:
    if not isinstance(value, dict):
        raise ScenarioError(f"{where} must be a mapping", line)
    return value


def _vector(raw, where: str, line, dim: int | None = None) -> np.ndarray:
    if not isinstance(raw, list) or not raw:
        raise ScenarioError(f"{where} must be a non-empty list of amplitudes", line)
    try:
        v = np.array([parse_number(a, allow_complex=True) for a in raw], dtype=complex)
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}", line) from None
    if dim is not None and v.size != dim:
        raise ScenarioError(f"{where}: expected {dim} amplitudes, got {v.size}", line)
    return v


def _normalized(v: np.ndarray, where: str, line) -> Ket:
    norm2 = float(np.vdot(v, v).real)
    if abs(norm2 - 1.0) > AMPLITUDE_TOL:
        raise ScenarioError(f"{where}: squared norm {norm2:.9g} is not 1 within {AMPLITUDE_TOL}", line)
    return Ket.normalized(v)


def _basis(raw, factor: Factor, dim: int, where: str, line) -> MeasurementBasis:
    raw = _mapping(raw, where, line)
    labels = raw.get("labels")
    if labels is not None and (not isinstance(labels, list) or len(labels) != dim):
        raise ScenarioError(f"{where}.labels must be a list of {dim} strings", raw.line_of("labels"))
    try:
        if "angle" in raw:
            if dim != 2:
                raise ScenarioError(f"{where}: 'angle' bases need dimension 2", raw.line_of("angle"))
            angle = parse_number(raw["angle"])
            return MeasurementBasis.rotated(factor, angle, labels or [f"{factor.value}+", f"{factor.value}-"])
        if "vectors" in raw:
            vecs = raw["vectors"]
            ln = raw.line_of("vectors")
            if not isinstance(vecs, list) or len(vecs) != dim:
                raise ScenarioError(f"{where}.vectors must list {dim} vectors", ln)
            cols = [_vector(v, f"{where}.vectors[{i}]", ln, dim) for i, v in enumerate(vecs)]
            return MeasurementBasis.from_columns(
                factor, np.column_stack(cols), labels or [f"{factor.value}{i}" for i in range(dim)]
            )
        if raw.get("computational"):
            return MeasurementBasis.computational(factor, dim, labels or [f"{factor.value}{i}" for i in range(dim)])
    except (InvalidBasis, InvalidState, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"{where}: {exc}", raw.line) from None
    raise ScenarioError(f"{where}: give one of 'angle', 'vectors' or 'computational: true'", raw.line)


def _label(value, basis: MeasurementBasis, where: str, line) -> str:
    if str(value) not in basis.labels:
        raise ScenarioError(f"{where}: label {value!r} not among {list(basis.labels)}", line)
    return str(value)


def _state(doc: _LineDict):
    st = _mapping(_require(doc, "state", "scenario"), "state", doc.line_of("state"))
    preset = st.get("preset")
    if preset == "hardy":
        try:
            params = HardyParams(parse_number(_require(st, "alpha", "state")),
                                 parse_number(_require(st, "beta", "state")))
        except (DegenerateParams, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"state: {exc}", st.line) from None
        setup = build_hardy(params)
        return BipartiteSpace(2, 2), setup.ket, None, setup
    if preset == "singlet":
        return BipartiteSpace(2, 2), Ket(np.array([0, 1, -1, 0]) / np.sqrt(2)), None, None
    if preset == "product":
        left = _normalized(_vector(st.get("left", [1, 0]), "state.left", st.line_of("left")),
                           "state.left", st.line_of("left"))
        right = _normalized(_vector(st.get("right", [1, 0]), "state.right", st.line_of("right")),
                            "state.right", st.line_of("right"))
        space = BipartiteSpace(left.dim, right.dim)
        return space, Ket(np.kron(left.amplitudes, right.amplitudes)), None, None
    if preset is not None:
        raise ScenarioError(f"state.preset: unknown preset {preset!r}", st.line_of("preset"))

    dims = _require(st, "dims", "state")
    if not (isinstance(dims, list) and len(dims) == 2 and all(isinstance(d, int) and d >= 2 for d in dims)):
        raise ScenarioError("state.dims must be [d_L, d_R] with integers >= 2", st.line_of("dims"))
    try:
        space = BipartiteSpace(*dims)
    except ValueError as exc:
        raise ScenarioError(f"state.dims: {exc}", st.line_of("dims")) from None
    if "amplitudes" in st:
        ln = st.line_of("amplitudes")
        ket = _normalized(_vector(st["amplitudes"], "state.amplitudes", ln, space.dim), "state.amplitudes", ln)
        return space, ket, None, None
    if "density" in st:
        ln = st.line_of("density")
        rows = st["density"]
        if not isinstance(rows, list) or len(rows) != space.dim:
            raise ScenarioError(f"state.density must have {space.dim} rows", ln)
        m = np.array([_vector(r, "state.density row", ln, space.dim) for r in rows])
        try:
            return space, None, DensityOperator(space, m), None
        except (InvalidState, ValueError) as exc:
            raise ScenarioError(f"state.density: {exc}", ln) from None
    raise ScenarioError("state: give 'preset', 'amplitudes' or 'density'", st.line)


def parse_scenario(text: str, source: str = "<string>") -> ScenarioSpec:
    try:
        doc = yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                            mark.line + 1 if mark else None) from None
    doc = _mapping(doc, "scenario file", 1)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}",
                            doc.line_of("schema_version"))
    name = str(doc.get("name", Path(source).stem))

    space, ket, rho0, hardy_setup = _state(doc)
    if rho0 is None:
        rho0 = DensityOperator.from_ket(ket, space)

    outcomes = doc.get("outcomes", _LineDict())
    outcomes = _mapping(outcomes, "outcomes", doc.line_of("outcomes"))
    if hardy_setup is not None:
        if "bases" in doc:
            raise ScenarioError("hardy preset fixes its own bases; drop 'bases'", doc.line_of("bases"))
        b = hardy_setup.bases
        l_basis, r_basis, r_prime_basis = b["L2"], b["R2"], b["R1"]
        defaults = {"l": L_LABEL, "r": R_LABEL, "r_prime": R_PRIME_LABEL}
    else:
        bases = _mapping(_require(doc, "bases", "scenario"), "bases", doc.line_of("bases"))
        l_basis = _basis(_require(bases, "L", "bases"), Factor.L, space.d_L, "bases.L", bases.line_of("L"))
        r_basis = _basis(_require(bases, "R", "bases"), Factor.R, space.d_R, "bases.R", bases.line_of("R"))
        r_prime_basis = None
        if "R_prime" in bases:
            r_prime_basis = _basis(bases["R_prime"], Factor.R, space.d_R, "bases.R_prime",
                                   bases.line_of("R_prime"))
        defaults = {"l": l_basis.labels[0], "r": r_basis.labels[0],
                    "r_prime": r_prime_basis.labels[0] if r_prime_basis else None}

    l_label = _label(outcomes.get("l", defaults["l"]), l_basis, "outcomes.l", outcomes.line_of("l"))
    r_label = _label(outcomes.get("r", defaults["r"]), r_basis, "outcomes.r", outcomes.line_of("r"))
    r_prime_label = None
    if r_prime_basis is not None:
        r_prime_label = _label(outcomes.get("r_prime", defaults["r_prime"]), r_prime_basis,
                               "outcomes.r_prime", outcomes.line_of("r_prime"))

    order = doc.get("order", "both")
    if order not in ORDERS:
        raise ScenarioError(f"order must be one of {sorted(ORDERS)}, got {order!r}", doc.line_of("order"))

    analyses = doc.get("analyses", ["joint", "conditional"])
    if not isinstance(analyses, list) or not analyses:
        raise ScenarioError("analyses must be a non-empty list", doc.line_of("analyses"))
    for a in analyses:
        if a not in ANALYSES:
            raise ScenarioError(f"unknown analysis {a!r}; choose from {list(ANALYSES)}", doc.line_of("analyses"))
    if {"counterfactual", "gap"} & set(analyses):
        if r_prime_basis is None:
            raise ScenarioError("counterfactual analyses need bases.R_prime", doc.line_of("analyses"))
        if r_basis.commutes_with(r_prime_basis):
            raise ScenarioError("bases.R and bases.R_prime must not commute", doc.line_of("bases"))
    if "reciprocity" in analyses:
        if ket is None or space.d_L != 2 or space.d_R != 2:
            raise ScenarioError("reciprocity needs a pure two-qubit state", doc.line_of("analyses"))

    spec = ScenarioSpec(
        name=name, space=space, rho0=rho0, ket=ket, l_basis=l_basis, r_basis=r_basis,
        r_prime_basis=r_prime_basis, l_label=l_label, r_label=r_label, r_prime_label=r_prime_label,
        orders=ORDERS[order], analyses=tuple(a for a in ANALYSES if a in analyses),
        hardy=hardy_setup.params if hardy_setup else None, source=source,
    )

    if "montecarlo" in doc:
        mc = _mapping(doc["montecarlo"], "montecarlo", doc.line_of("montecarlo"))
        for key in ("n_runs", "seed", "shards"):
            if key in mc:
                v = mc[key]
                if not isinstance(v, int) or isinstance(v, bool) or v < (0 if key == "seed" else 1):
                    raise ScenarioError(f"montecarlo.{key} must be a non-negative integer", mc.line_of(key))
                setattr(spec, key, v)

    if "spacetime" in doc:
        stm = _mapping(doc["spacetime"], "spacetime", doc.line_of("spacetime"))
        events = []
        for key in ("event_l", "event_r"):
            raw = _require(stm, key, "spacetime")
            if not isinstance(raw, list) or len(raw) != 4:
                raise ScenarioError(f"spacetime.{key} must be [t, x, y, z]", stm.line_of(key))
            try:
                events.append(Event(*(parse_number(c) for c in raw)))
            except ValueError as exc:
                raise ScenarioError(f"spacetime.{key}: {exc}", stm.line_of(key)) from None
        spec.events = tuple(events)
    return spec


def load_scenario(path) -> ScenarioSpec:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), str(path))


def with_hardy_params(spec: ScenarioSpec, params: HardyParams) -> ScenarioSpec:
    """Copy of a hardy-preset scenario at different angles."""
    setup = build_hardy(params)
    b = setup.bases
    return ScenarioSpec(
        name=spec.name, space=spec.space, rho0=setup.rho0, ket=setup.ket,
        l_basis=b["L2"], r_basis=b["R2"], r_prime_basis=b["R1"],
        l_label=spec.l_label, r_label=spec.r_label, r_prime_label=spec.r_prime_label,
        orders=spec.orders, analyses=spec.analyses, n_runs=spec.n_runs, seed=spec.seed,
        shards=spec.shards, hardy=params, events=spec.events, source=spec.source,
    )
