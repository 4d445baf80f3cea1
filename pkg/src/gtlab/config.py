"""Run configuration: TOML documents validated into typed settings."""

from __future__ import annotations

import hashlib
import json
import re
import sys
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import ConfigError
from .geometry import ModelConfig
from .studies import default_k_grid
from .window import Window

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

Point = list[tuple[float, float]]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSection(_Strict):
    d: int = 1
    weights: list[float] = [0.0, 1.0]
    energy: float = 0.5


class WindowSection(_Strict):
    kind: Literal["bump", "gaussian_oracle"] = "bump"
    center: float = 0.0
    half_width: float = Field(3.0, gt=0)


class ScenarioSection(_Strict):
    kind: Literal["off_orbit", "off_energy", "on_locus", "points"] = "off_orbit"
    offset: Optional[float] = None
    x: Optional[Point] = None
    y: Optional[Point] = None


class ScalingSection(_Strict):
    x: Optional[Point] = None
    y: Optional[Point] = None
    theta1: float = 0.0
    theta2: float = 0.0
    random_pairs: int = Field(3, ge=0)
    radius: float = Field(2.0, ge=0)
    include_origin: bool = True
    pairs: list[tuple[list[float], list[float]]] = []


class KernelSection(_Strict):
    x: Optional[Point] = None
    y: Optional[Point] = None
    route: Literal["spectral", "integral", "both"] = "both"


class PeriodsSection(_Strict):
    sigma: Optional[float] = None


class RunConfig(_Strict):
    model: ModelSection = ModelSection()
    window: WindowSection = WindowSection()
    k_grid: Optional[list[int]] = None
    seed: int = 0
    output_dir: str = "results"
    workers: int = Field(1, ge=1)
    scenario: ScenarioSection = ScenarioSection()
    scaling: ScalingSection = ScalingSection()
    kernel: KernelSection = KernelSection()
    periods: PeriodsSection = PeriodsSection()

    @field_validator("k_grid")
    @classmethod
    def _grid(cls, v):
        if v is not None and len(v) == 0:
            raise ValueError("k_grid must not be empty")
        return v

    def model_config_obj(self) -> ModelConfig:
        m = self.model
        return ModelConfig(m.d, tuple(m.weights), m.energy)

    def window_obj(self) -> Window:
        w = self.window
        return Window(w.center, w.half_width, w.kind)

    def levels(self) -> list[int]:
        return list(self.k_grid) if self.k_grid is not None else default_k_grid(self.model.d)

    def echo(self) -> dict:
        """Resolved settings that determine results (no paths or thread counts)."""
        data = self.model_dump(mode="json", exclude={"output_dir", "workers"})
        data["k_grid"] = self.levels()
        return data


def config_hash(data: dict) -> str:
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _line_of(text: str, loc: tuple) -> int | None:
    """Best-effort line number of the key at ``loc`` in the TOML source."""
    section = None
    keys = [str(p) for p in loc if isinstance(p, str)]
    if not keys:
        return None
    if len(keys) > 1:
        section, key = keys[0], keys[1]
    else:
        key = keys[0]
    current = None
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        head = re.match(r"^\[([A-Za-z0-9_.]+)\]", s)
        if head:
            current = head.group(1)
            if section is not None and current == section and len(keys) == 1:
                return no
            continue
        if re.match(rf"^{re.escape(key)}\s*=", s) and current == section:
            return no
    if section is not None:
        for no, line in enumerate(text.splitlines(), start=1):
            if line.strip() == f"[{section}]":
                return no
    return None


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Validate a TOML document (plus command-line overrides) into a ``RunConfig``.

    Raises ``ConfigError`` (or ``CriticalEnergyError``) with line references.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    for dotted, value in (overrides or {}).items():
        node = raw
        *parents, leaf = dotted.split(".")
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = value
    try:
        cfg = RunConfig.model_validate(raw)
    except ValidationError as exc:
        msgs = []
        for err in exc.errors():
            line = _line_of(text, err["loc"])
            where = ".".join(str(p) for p in err["loc"])
            at = f" (line {line})" if line else ""
            msgs.append(f"{where}{at}: {err['msg']}")
        raise ConfigError("invalid config: " + "; ".join(msgs)) from None
    try:
        cfg.model_config_obj()
        cfg.window_obj()
        if cfg.k_grid is not None:
            _increasing(cfg.k_grid)
    except ConfigError as exc:
        line = _line_of(text, ("model", "energy")) if "energy" in str(exc) else None
        if line is None and "weights" in str(exc):
            line = _line_of(text, ("model", "weights"))
        at = f" (line {line})" if line else ""
        raise type(exc)(f"{exc}{at}") from None
    return cfg


def _increasing(ks):
    if any(b <= a for a, b in zip(ks, ks[1:])) or ks[0] < 1:
        raise ConfigError(f"k_grid must be positive and strictly increasing, got {ks}")


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    text = "" if path is None else open(path, encoding="utf-8").read()
    return parse_config(text, overrides)
