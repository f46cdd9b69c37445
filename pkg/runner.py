"""
Batch runner for the Hardy inequality laboratory
Executes run configs item by item and writes JSON / CSV reports
"""

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

import catalog
import sharpness
import transforms
from config import settings
from errors import ProbeError
from grammar import parse_profile
from models import CritSubcritContext
from runconfig import RunConfig
from utils import default_worker_count, format_error_message, host_info

logger = logging.getLogger(__name__)

MODES = ("validate", "verify", "probe", "report")

# item outcome -> exit code class
HOLDS = "holds"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"
ADMISSIBLE = "admissible"
INADMISSIBLE = "inadmissible"
ERROR = "error"


class ItemRecord(BaseModel):
    """One report entry."""
    model_config = ConfigDict(frozen=True)

    index: int
    kind: str
    name: str
    instance: Optional[str] = None
    profile: Optional[str] = None
    family: Optional[str] = None
    status: str = "ok"
    verdict: str
    wall_time: float = 0.0
    result: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[str] = None


class RunReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    meta: Dict[str, Any]
    items: List[ItemRecord] = Field(default_factory=list)

    def exit_code(self) -> int:
        verdicts = {item.verdict for item in self.items}
        if verdicts & {VIOLATED, INADMISSIBLE}:
            return settings.EXIT_VIOLATED
        if verdicts & {INCONCLUSIVE, ERROR}:
            return settings.EXIT_INCONCLUSIVE
        return settings.EXIT_OK


class _Task(BaseModel):
    kind: str
    name: str
    instance: Optional[str] = None
    profile: Optional[str] = None
    family: Optional[str] = None


class RunManager:
    """Plans and executes the items of one run config."""

    def __init__(self, config: RunConfig, workers: Optional[int] = None):
        self.config = config
        self.workers = workers or default_worker_count()
        self.tol = config.tolerances.quadrature
        self._profiles = {}

    def profile(self, name: str):
        if name not in self._profiles:
            self._profiles[name] = parse_profile(self.config.profile_text(name))
        return self._profiles[name]

    def plan(self, mode: str) -> List[_Task]:
        """Items in config order for a mode."""
        if mode not in MODES:
            raise ValueError(f"unknown mode '{mode}', expected one of {MODES}")
        tasks: List[_Task] = []
        for kind, name in self.config.order:
            if kind == "instance":
                block = self.config.instance(name)
                family = block.family.value
                if mode == "validate" or (mode in ("verify", "report") and not block.profiles):
                    tasks.append(_Task(kind="validation", name=name, instance=name, family=family))
                elif mode in ("verify", "report"):
                    tasks.extend(
                        _Task(kind="verification", name=f"{name}/{profile}", instance=name, profile=profile, family=family)
                        for profile in block.profiles
                    )
            elif kind == "probe" and mode in ("probe", "report"):
                block = self.config.probe(name)
                tasks.append(_Task(kind="probe", name=name, instance=block.instance,
                                   family=self.config.instance(block.instance).family.value))
            elif kind == "identity" and mode in ("verify", "report"):
                tasks.append(_Task(kind="identity", name=name, profile=self.config.identity(name).profile))
        return tasks

    def run(self, mode: str = "report") -> RunReport:
        tasks = self.plan(mode)
        # parse every profile up front so worker threads only read the cache
        for block in self.config.profiles:
            self.profile(block.name)
        logger.info(f"Running {len(tasks)} items ({mode}) with {self.workers} workers")
        started = time.perf_counter()
        indexed = list(enumerate(tasks))
        if self.workers > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                items = list(pool.map(lambda pair: self._execute(*pair), indexed))
        else:
            items = [self._execute(i, task) for i, task in indexed]
        total = time.perf_counter() - started
        logger.info(f"Run finished in {total:.2f}s")
        meta = {
            "app": settings.APP_NAME,
            "version": settings.APP_VERSION,
            "mode": mode,
            "config_hash": self.config.config_hash(),
            "tolerances": {
                "quadrature": self.tol if self.tol is not None else settings.DEFAULT_REL_TOL,
                "probe_gap": self.config.tolerances.probe_gap,
                "identity": self.config.tolerances.identity,
            },
            "workers": self.workers,
            "host": host_info(),
            "wall_time_total": total,
        }
        return RunReport(meta=meta, items=items)

    def _execute(self, index: int, task: _Task) -> ItemRecord:
        started = time.perf_counter()
        base = dict(index=index, kind=task.kind, name=task.name, instance=task.instance,
                    profile=task.profile, family=task.family)
        try:
            verdict, result = self._dispatch(task)
            record = ItemRecord(verdict=verdict, result=result, wall_time=time.perf_counter() - started, **base)
        except Exception as exc:
            logger.error(f"Item {task.name} failed: {exc}")
            record = ItemRecord(status="error", verdict=ERROR, error=format_error_message(f"{type(exc).__name__}: {exc}"),
                                wall_time=time.perf_counter() - started, **base)
        logger.info(f"Item {task.name} ({task.kind}): {record.verdict} in {record.wall_time:.3f}s")
        return record

    def _dispatch(self, task: _Task):
        handler: Callable = getattr(self, f"_run_{task.kind}")
        return handler(task)

    def _instance(self, name: str):
        """(instance, None) when admissible, else (None, verdict)."""
        block = self.config.instance(name)
        setting = self.config.setting(block.setting)
        verdict = catalog.validate(block.family, block.params, setting)
        if not verdict.admissible:
            return None, verdict
        return catalog.make_instance(block.family, block.params, setting), verdict

    def _run_validation(self, task: _Task):
        block = self.config.instance(task.instance)
        setting = self.config.setting(block.setting)
        verdict = catalog.validate(block.family, block.params, setting)
        result = verdict.model_dump()
        if verdict.admissible:
            instance = catalog.make_instance(block.family, block.params, setting)
            constant = catalog.sharp_constant(instance)
            result["sharp_constant"] = constant.value
            result["claim"] = constant.claim.value
        return (ADMISSIBLE if verdict.admissible else INADMISSIBLE), result

    def _run_verification(self, task: _Task):
        instance, verdict = self._instance(task.instance)
        if instance is None:
            return INADMISSIBLE, verdict.model_dump()
        report = catalog.evaluate_sides(instance, self.profile(task.profile), self.tol)
        return report.verdict.value, report.model_dump()

    def _run_probe(self, task: _Task):
        block = self.config.probe(task.name)
        instance, verdict = self._instance(block.instance)
        if instance is None:
            return INADMISSIBLE, verdict.model_dump()
        family = sharpness.truncation_family_for(instance)
        if block.family_kind and block.family_kind != family.kind.value:
            raise ProbeError(f"{instance.family.value} is probed with {family.kind.value}, not {block.family_kind}")
        result = sharpness.probe(instance, family, block.indices, self.tol)
        within = result.sound and result.relative_gap <= self.config.tolerances.probe_gap
        return (HOLDS if within else VIOLATED), result.model_dump()

    def _run_identity(self, task: _Task):
        block = self.config.identity(task.name)
        ctx = CritSubcritContext(Q=block.Q, m=block.m, R=block.R, sigma_Q=block.sigma_Q, sigma_m=block.sigma_m)
        report = transforms.crit_subcrit_identity_check(self.profile(block.profile), ctx,
                                                        self.config.tolerances.identity, self.tol)
        return report.verdict.value, report.model_dump()


def run(config: RunConfig, mode: str = "report", workers: Optional[int] = None) -> RunReport:
    return RunManager(config, workers).run(mode)


# -- emitting ---------------------------------------------------------------

def _number(value: float) -> str:
    if math.isnan(value):
        return '"nan"'
    if math.isinf(value):
        return '"inf"' if value > 0 else '"-inf"'
    return format(value, f".{settings.JSON_SIGNIFICANT_DIGITS}g")


def _json(value: Any, indent: int = 0) -> str:
    """JSON text with every float written to the configured significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(value, Enum):
        value = value.value
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _number(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        body = ",\n".join(f"{inner}{json.dumps(str(k))}: {_json(v, indent + 1)}" for k, v in value.items())
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        body = ",\n".join(inner + _json(v, indent + 1) for v in value)
        return "[\n" + body + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(report: RunReport) -> str:
    return _json(report.model_dump()) + "\n"


CSV_COLUMNS = [
    "index", "kind", "name", "instance", "profile", "family", "status", "verdict", "wall_time",
    "lhs", "rhs", "constant", "ratio", "margin", "error_budget", "fragile",
    "admissible", "failed_conditions", "classical_ckn_status", "sharp_constant", "claim",
    "extrapolated_limit", "target", "relative_gap", "constant_limit", "fit_residual", "sound",
    "error",
]


def _cell(value: Any) -> str:
    if isinstance(value, Enum):
        value = value.value
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _number(value).strip('"')
    if isinstance(value, (list, tuple)):
        return "; ".join(_cell(v) for v in value)
    return str(value)


def to_csv(report: RunReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for item in report.items:
        row = {**item.result, **item.model_dump(exclude={"result"})}
        writer.writerow([_cell(row.get(column)) for column in CSV_COLUMNS])
    return buffer.getvalue()


def emit(report: RunReport, fmt: str, path: Optional[str]) -> str:
    """Serialize a report; writes to path when given and returns the text."""
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown format '{fmt}', expected json or csv")
    text = to_json(report) if fmt == "json" else to_csv(report)
    if path:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write report to {path}: {exc}") from exc
        logger.info(f"Report written to {path}")
    return text
