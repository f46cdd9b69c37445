"""
Run configuration for the Hardy inequality laboratory

A run config is a line-oriented text file of named blocks:

    # comment
    [setting S]
    Q = 4

    [profile b1]
    text = (bump 1 2)

    [instance euler]
    family = EulerHardy
    setting = S
    p = 2
    alpha = 0.5
    profiles = b1

    [probe euler-sharp]
    instance = euler
    indices = 1e2, 1e3, 1e4

    [identity map1]
    profile = b1
    Q = 3
    m = 2
    R = 4

    [tolerances]
    quadrature = 1e-10

    [output]
    format = json
    path = report.json

Indented lines continue the previous value. Blocks may appear in any
order; instance, probe and identity blocks run in the order written.
"""

import hashlib
import re
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from errors import ConfigError, ProfileError
from grammar import GrammarError, canonical, error_position
from models import Family, HomogeneousSetting, InequalityParams

_HEADER = re.compile(r"^\[\s*([A-Za-z]+)(?:\s+([A-Za-z0-9_.\-]+))?\s*\]\s*$")
_ASSIGN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")

_NAMED = ("setting", "profile", "instance", "probe", "identity")
_SINGLE = ("tolerances", "output")
RUNNABLE = ("instance", "probe", "identity")

_PARAM_FIELDS = set(InequalityParams.model_fields)


class SettingBlock(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    Q: float = Field(gt=1)
    sigma: float = Field(default=1.0, gt=0)

    @property
    def setting(self) -> HomogeneousSetting:
        return HomogeneousSetting(Q=self.Q, sigma=self.sigma)


class ProfileBlock(BaseModel):
    """Named profile, stored in canonical text form."""
    model_config = ConfigDict(frozen=True)

    name: str
    text: str


class InstanceBlock(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    family: Family
    setting: str
    params: InequalityParams
    profiles: List[str] = Field(default_factory=list)


class ProbeBlock(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    instance: str
    indices: List[float]
    family_kind: Optional[str] = None


class IdentityBlock(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    profile: str
    Q: float
    m: float
    R: float
    sigma_Q: float = 1.0
    sigma_m: float = 1.0


class Tolerances(BaseModel):
    model_config = ConfigDict(frozen=True)

    quadrature: Optional[float] = Field(default=None, gt=0)
    probe_gap: float = Field(default=0.02, gt=0)
    identity: float = Field(default=1e-8, gt=0)


class OutputSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    format: Literal["json", "csv"] = "json"
    path: Optional[str] = None


class RunConfig(BaseModel):
    """Fully resolved run configuration."""
    model_config = ConfigDict(frozen=True)

    settings: List[SettingBlock] = Field(default_factory=list)
    profiles: List[ProfileBlock] = Field(default_factory=list)
    instances: List[InstanceBlock] = Field(default_factory=list)
    probes: List[ProbeBlock] = Field(default_factory=list)
    identities: List[IdentityBlock] = Field(default_factory=list)
    order: List[Tuple[str, str]] = Field(default_factory=list)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    output: OutputSpec = Field(default_factory=OutputSpec)

    def setting(self, name: str) -> HomogeneousSetting:
        return next(s.setting for s in self.settings if s.name == name)

    def profile_text(self, name: str) -> str:
        return next(p.text for p in self.profiles if p.name == name)

    def instance(self, name: str) -> InstanceBlock:
        return next(i for i in self.instances if i.name == name)

    def probe(self, name: str) -> ProbeBlock:
        return next(p for p in self.probes if p.name == name)

    def identity(self, name: str) -> IdentityBlock:
        return next(i for i in self.identities if i.name == name)

    def config_hash(self) -> str:
        return hashlib.sha256(print_config(self).encode("utf-8")).hexdigest()


# -- reading ----------------------------------------------------------------

class _Value:
    """A raw value with the position of its first character."""

    def __init__(self, text: str, line: int, column: int):
        self.text = text
        self.line = line
        self.column = column


class _Block:
    def __init__(self, kind: str, name: Optional[str], line: int):
        self.kind = kind
        self.name = name
        self.line = line
        self.values: Dict[str, _Value] = {}

    @property
    def label(self) -> str:
        return f"[{self.kind} {self.name}]" if self.name else f"[{self.kind}]"


def _read_blocks(text: str) -> List[_Block]:
    blocks: List[_Block] = []
    last: Optional[_Value] = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        content = line.strip()
        if not content:
            continue
        indent = len(line) - len(line.lstrip())
        if indent and last is not None:
            last.text += "\n" + line
            continue
        header = _HEADER.match(content)
        if header:
            kind, name = header.group(1).lower(), header.group(2)
            if kind not in _NAMED + _SINGLE:
                raise ConfigError(f"unknown block kind '{kind}'", number, indent + header.start(1) + 1)
            if kind in _NAMED and not name:
                raise ConfigError(f"[{kind}] blocks need a name", number, indent + 1)
            if kind in _SINGLE and name:
                raise ConfigError(f"[{kind}] takes no name", number, indent + header.start(2) + 1)
            blocks.append(_Block(kind, name, number))
            last = None
            continue
        assign = _ASSIGN.match(content)
        if not assign:
            raise ConfigError("expected '[kind name]' or 'key = value'", number, indent + 1)
        if not blocks:
            raise ConfigError("assignment outside of any block", number, indent + 1)
        key = assign.group(1)
        block = blocks[-1]
        if key in block.values:
            raise ConfigError(f"duplicate key '{key}' in {block.label}", number, indent + 1)
        last = _Value(assign.group(2).strip(), number, indent + assign.start(2) + 1)
        block.values[key] = last
    return blocks


def _number(value: _Value, integer: bool = False):
    try:
        return int(value.text) if integer else float(value.text)
    except ValueError:
        kind = "integer" if integer else "number"
        raise ConfigError(f"invalid {kind} '{value.text}'", value.line, value.column) from None


def _names(value: _Value) -> List[str]:
    return [part.strip() for part in value.text.split(",") if part.strip()]


def _numbers(value: _Value) -> List[float]:
    out = []
    for part in value.text.split(","):
        part = part.strip()
        try:
            out.append(float(part))
        except ValueError:
            raise ConfigError(f"invalid number '{part}'", value.line, value.column) from None
    return out


def _take(block: _Block, key: str, required: bool = True) -> Optional[_Value]:
    value = block.values.pop(key, None)
    if value is None and required:
        raise ConfigError(f"{block.label} is missing '{key}'", block.line, 1)
    return value


def _no_leftovers(block: _Block) -> None:
    for key, value in block.values.items():
        raise ConfigError(f"unknown key '{key}' in {block.label}", value.line, 1)


def _profile_text(value: _Value) -> str:
    try:
        return canonical(value.text)
    except GrammarError as exc:
        line, column = error_position(value.text, exc.offset)
        at_line = value.line + line - 1
        at_column = value.column + column - 1 if line == 1 else column
        raise ConfigError(f"profile syntax: {exc}", at_line, at_column) from None
    except ProfileError as exc:
        raise ConfigError(f"profile: {exc}", value.line, value.column) from None


def _model(cls, block: _Block, **fields):
    try:
        return cls(**fields)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(x) for x in first["loc"])
        raise ConfigError(f"{block.label} {where}: {first['msg']}", block.line, 1) from None


def _params(block: _Block) -> InequalityParams:
    fields = {}
    for key in list(block.values):
        if key not in _PARAM_FIELDS:
            continue
        value = block.values.pop(key)
        if key == "k":
            fields[key] = _number(value, integer=True)
        elif key == "R_grid":
            fields[key] = tuple(_numbers(value))
        else:
            fields[key] = _number(value)
    return _model(InequalityParams, block, **fields)


def parse_config(text: str) -> RunConfig:
    """Parse and resolve a run config; every failure is a ConfigError with a position."""
    blocks = _read_blocks(text)
    seen: Dict[Tuple[str, str], int] = {}
    parts = {"settings": [], "profiles": [], "instances": [], "probes": [], "identities": []}
    order: List[Tuple[str, str]] = []
    tolerances, output = Tolerances(), OutputSpec()
    refs: List[Tuple[str, str, _Value, str]] = []

    for block in blocks:
        if block.kind in _NAMED:
            key = (block.kind, block.name)
            if key in seen:
                raise ConfigError(f"duplicate [{block.kind} {block.name}] (first defined on line {seen[key]})", block.line, 1)
            seen[key] = block.line
        if block.kind in RUNNABLE:
            order.append((block.kind, block.name))

        if block.kind == "setting":
            Q = _number(_take(block, "Q"))
            sigma_value = _take(block, "sigma", required=False)
            sigma = _number(sigma_value) if sigma_value else 1.0
            parts["settings"].append(_model(SettingBlock, block, name=block.name, Q=Q, sigma=sigma))
        elif block.kind == "profile":
            parts["profiles"].append(ProfileBlock(name=block.name, text=_profile_text(_take(block, "text"))))
        elif block.kind == "instance":
            family_value = _take(block, "family")
            try:
                family = Family(family_value.text)
            except ValueError:
                known = ", ".join(f.value for f in Family)
                raise ConfigError(f"unknown family '{family_value.text}' (known: {known})",
                                  family_value.line, family_value.column) from None
            setting_value = _take(block, "setting")
            refs.append(("setting", setting_value.text, setting_value, block.name))
            profiles_value = _take(block, "profiles", required=False)
            profiles = _names(profiles_value) if profiles_value else []
            for name in profiles:
                refs.append(("profile", name, profiles_value, block.name))
            params = _params(block)
            parts["instances"].append(InstanceBlock(name=block.name, family=family, setting=setting_value.text,
                                                    params=params, profiles=profiles))
        elif block.kind == "probe":
            instance_value = _take(block, "instance")
            refs.append(("instance", instance_value.text, instance_value, block.name))
            kind_value = _take(block, "family_kind", required=False)
            parts["probes"].append(ProbeBlock(name=block.name, instance=instance_value.text,
                                              indices=_numbers(_take(block, "indices")),
                                              family_kind=kind_value.text if kind_value else None))
        elif block.kind == "identity":
            profile_value = _take(block, "profile")
            refs.append(("profile", profile_value.text, profile_value, block.name))
            fields = {key: _number(_take(block, key)) for key in ("Q", "m", "R")}
            for key in ("sigma_Q", "sigma_m"):
                value = _take(block, key, required=False)
                if value:
                    fields[key] = _number(value)
            parts["identities"].append(_model(IdentityBlock, block, name=block.name, profile=profile_value.text, **fields))
        elif block.kind == "tolerances":
            fields = {}
            for key in ("quadrature", "probe_gap", "identity"):
                value = _take(block, key, required=False)
                if value:
                    fields[key] = _number(value)
            tolerances = _model(Tolerances, block, **fields)
        else:
            fields = {}
            for key in ("format", "path"):
                value = _take(block, key, required=False)
                if value:
                    fields[key] = value.text.lower() if key == "format" else value.text
            output = _model(OutputSpec, block, **fields)
        _no_leftovers(block)

    for kind, name, value, owner in refs:
        if (kind, name) not in seen:
            raise ConfigError(f"unresolved {kind} reference '{name}' in '{owner}'", value.line, value.column)

    return RunConfig(order=order, tolerances=tolerances, output=output, **parts)


# -- printing ---------------------------------------------------------------

def _fmt(value) -> str:
    return str(value) if isinstance(value, int) else repr(float(value))


def print_config(config: RunConfig) -> str:
    """Canonical text of a config; parse_config(print_config(c)) == c."""
    lines: List[str] = []

    def block(header: str, items: List[Tuple[str, str]]) -> None:
        if lines:
            lines.append("")
        lines.append(header)
        lines.extend(f"{key} = {value}" for key, value in items)

    for s in config.settings:
        block(f"[setting {s.name}]", [("Q", _fmt(s.Q)), ("sigma", _fmt(s.sigma))])
    for p in config.profiles:
        block(f"[profile {p.name}]", [("text", p.text)])
    for kind, name in config.order:
        if kind == "instance":
            inst = config.instance(name)
            items = [("family", inst.family.value), ("setting", inst.setting)]
            for key, value in inst.params.given().items():
                text = ", ".join(_fmt(x) for x in value) if key == "R_grid" else _fmt(value)
                items.append((key, text))
            if inst.profiles:
                items.append(("profiles", ", ".join(inst.profiles)))
            block(f"[instance {name}]", items)
        elif kind == "probe":
            pr = config.probe(name)
            items = [("instance", pr.instance), ("indices", ", ".join(_fmt(x) for x in pr.indices))]
            if pr.family_kind:
                items.append(("family_kind", pr.family_kind))
            block(f"[probe {name}]", items)
        else:
            ident = config.identity(name)
            block(f"[identity {name}]", [
                ("profile", ident.profile), ("Q", _fmt(ident.Q)), ("m", _fmt(ident.m)), ("R", _fmt(ident.R)),
                ("sigma_Q", _fmt(ident.sigma_Q)), ("sigma_m", _fmt(ident.sigma_m)),
            ])
    tol = config.tolerances
    items = [("probe_gap", _fmt(tol.probe_gap)), ("identity", _fmt(tol.identity))]
    if tol.quadrature is not None:
        items.insert(0, ("quadrature", _fmt(tol.quadrature)))
    block("[tolerances]", items)
    out = [("format", config.output.format)]
    if config.output.path:
        out.append(("path", config.output.path))
    block("[output]", out)
    return "\n".join(lines) + "\n"
