"""Job configuration schema.

Example::

    {
      "source": {"scene": "street.json"},
      "active_bs": [0],
      "active_areas": [0],
      "selected_points": "all",
      "bs_elements": 16,
      "band": 3.5e9,
      "bw": 100e6,
      "f_up": 3.5e9,
      "f_dn": 60e9,
      "move": true,
      "movement": {"area": 0, "start_point": 0, "direction": "right",
                   "speed": 20.0, "sample_interval": 0.001, "n_samples": 1000},
      "beams": {"enabled": true, "n_beams": 64, "snr": 1000.0,
                "bandwidth": 100e6, "window": 25, "horizon": 1,
                "dl_source": {"scene": "street.json"}, "dl_band": 60e9,
                "dl_bs_elements": 64},
      "seed": 0,
      "output": "out"
    }

Relative source paths are resolved against the config file's directory.
Speeds are m/s (72, 90 and 108 km/h are 20, 25 and 30 m/s).
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

PRESET_BANDS = (3.5e9, 28e9, 60e9)


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Source(_Strict):
    paths: Optional[str] = None
    scene: Optional[str] = None

    @model_validator(mode="after")
    def _one_kind(self):
        if (self.paths is None) == (self.scene is None):
            raise ValueError("source needs exactly one of 'paths' or 'scene'")
        return self

    @property
    def location(self) -> str:
        return self.paths if self.paths is not None else self.scene

    def resolved(self, base: Path) -> "Source":
        loc = Path(self.location)
        if not loc.is_absolute():
            loc = base / loc
        key = "paths" if self.paths is not None else "scene"
        return Source(**{key: str(loc)})


class Movement(_Strict):
    area: Optional[int] = None
    start_point: int = Field(0, ge=0)
    direction: Literal["up", "down", "left", "right"] = "right"
    speed: Optional[float] = Field(None, ge=0)
    sample_interval: float = Field(1e-3, gt=0)
    n_samples: int = Field(100, ge=1)


class Beams(_Strict):
    enabled: bool = False
    n_beams: int = Field(64, ge=1)
    snr: float = Field(1.0, gt=0)
    bandwidth: float = Field(100e6, gt=0)
    window: int = Field(25, ge=1)
    horizon: int = Field(1, ge=0)
    noise_var: float = Field(0.0, ge=0)
    dl_source: Optional[Source] = None
    dl_band: Optional[float] = Field(None, gt=0)
    dl_bs_elements: Optional[int] = Field(None, ge=1)


class JobConfig(_Strict):
    source: Source
    active_bs: List[int] = Field(min_length=1)
    active_areas: List[int] = Field(min_length=1)
    selected_points: Union[Literal["all"], List[int]] = "all"
    bs_elements: Optional[int] = Field(None, ge=1)
    ue_elements: Optional[int] = Field(None, ge=1)
    band: Optional[float] = Field(None, gt=0)
    bw: float = Field(100e6, gt=0)
    f_up: Optional[float] = Field(None, gt=0)
    f_dn: Optional[float] = Field(None, gt=0)
    move: bool = False
    movement: Optional[Movement] = None
    beams: Beams = Beams()
    seed: int = Field(0, ge=0, lt=2**64)
    output: str = "out"

    @model_validator(mode="after")
    def _check(self):
        if (self.move or self.beams.enabled) and (self.movement is None or self.movement.speed is None):
            raise ValueError("movement.speed is required when move or beams is enabled")
        if self.movement is not None:
            if self.movement.area is None:
                self.movement.area = self.active_areas[0]
            elif self.movement.area not in self.active_areas:
                raise ValueError(f"movement.area {self.movement.area} is not an active area")
        return self

    def digest(self) -> str:
        """sha256 of the canonical JSON form (output location excluded)."""
        doc = self.model_dump(mode="json", exclude={"output"})
        text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def load_config(text: str, base_dir: Union[str, Path, None] = None) -> JobConfig:
    """Parse and validate config JSON, filling defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from None
    try:
        cfg = JobConfig.model_validate(doc)
    except ValidationError as err:
        msgs = []
        for e in err.errors():
            loc = ".".join(str(p) for p in e["loc"]) or "<root>"
            msgs.append(f"{loc}: {e['msg']}")
        raise ConfigError("; ".join(msgs)) from None
    if base_dir is not None:
        base = Path(base_dir)
        cfg.source = cfg.source.resolved(base)
        if cfg.beams.dl_source is not None:
            cfg.beams.dl_source = cfg.beams.dl_source.resolved(base)
    return cfg
