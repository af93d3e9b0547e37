"""Flat ``key = value`` run configuration files.

Values use JSON syntax (numbers, ``true``/``false``, double-quoted strings,
lists), which keeps the format a subset of TOML without needing a TOML
parser on Python 3.10.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .errors import ConfigParseError, TVBallError
from .geometry import TwoBallConfig, canonicalize

KEYS = {
    "r1", "r2", "d", "lambda", "h", "box", "levels", "formats",
    "phase_s_points", "phase_lambda_points", "optimality_grid",
    "tv", "tv_h", "tv_iters", "tv_lambdas", "raster_h",
    "corrupt_R1",
}


@dataclass
class RunConfig:
    r1: float
    r2: float
    d: float
    lambdas: List[float] = field(default_factory=lambda: [0.1])
    h: float = 1.0 / 64
    box: Optional[Tuple[float, float, float, float]] = None
    levels: List[float] = field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9])
    formats: List[str] = field(default_factory=lambda: ["csv", "pgm", "svg"])
    phase_s_points: int = 101
    phase_lambda_points: int = 101
    optimality_grid: int = 20
    tv: bool = False
    tv_h: float = 1.0 / 64
    tv_iters: int = 2000
    tv_lambdas: Optional[List[float]] = None
    raster_h: float = 1.0 / 256
    corrupt_R1: float = 0.0  # test hook: relative error injected into R1

    def two_ball(self) -> TwoBallConfig:
        return canonicalize(self.r1, self.r2, self.d)

    def grid_box(self, cfg: TwoBallConfig):
        if self.box is not None:
            return tuple(self.box)
        m = 0.1
        return (-cfg.r1 - m, cfg.D + cfg.r2 + m, -cfg.r1 - m, cfg.r1 + m)


def _value(raw: str, lineno: int):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        pass
    if len(raw) >= 2 and raw[0] == raw[-1] == "'":
        return raw[1:-1]
    raise ConfigParseError(f"line {lineno}: cannot parse value {raw!r}")


def _num(v, key, positive=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigParseError(f"{key} must be a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigParseError(f"{key} must be positive, got {v!r}")
    return float(v)


def parse_config(text: str) -> RunConfig:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigParseError(f"line {lineno}: expected key = value")
        key, val = (t.strip() for t in line.split("=", 1))
        if key not in KEYS:
            raise ConfigParseError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigParseError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = _value(val, lineno)
    for k in ("r1", "r2", "d"):
        if k not in raw:
            raise ConfigParseError(f"missing required key {k!r}")
    cfg = RunConfig(_num(raw["r1"], "r1"), _num(raw["r2"], "r2"), _num(raw["d"], "d"))
    try:
        cfg.two_ball()
    except TVBallError as exc:
        raise ConfigParseError(str(exc)) from exc
    if "lambda" in raw:
        lam = raw["lambda"]
        lam = lam if isinstance(lam, list) else [lam]
        if not lam:
            raise ConfigParseError("lambda list is empty")
        cfg.lambdas = [_num(v, "lambda", positive=True) for v in lam]
    for k in ("h", "tv_h", "raster_h"):
        if k in raw:
            setattr(cfg, k, _num(raw[k], k, positive=True))
    if "box" in raw:
        b = raw["box"]
        if not isinstance(b, list) or len(b) != 4:
            raise ConfigParseError("box must be [xmin, xmax, ymin, ymax]")
        b = [_num(v, "box") for v in b]
        if b[0] >= b[1] or b[2] >= b[3]:
            raise ConfigParseError("box has non-positive extent")
        cfg.box = tuple(b)
    if "levels" in raw:
        lv = raw["levels"] if isinstance(raw["levels"], list) else [raw["levels"]]
        cfg.levels = [_num(v, "levels") for v in lv]
        if any(not 0 <= v <= 1 for v in cfg.levels):
            raise ConfigParseError("levels must lie in [0, 1]")
    if "formats" in raw:
        fm = raw["formats"] if isinstance(raw["formats"], list) else [raw["formats"]]
        bad = [f for f in fm if f not in ("csv", "pgm", "svg")]
        if bad:
            raise ConfigParseError(f"unknown formats {bad}")
        cfg.formats = list(fm)
    for k in ("phase_s_points", "phase_lambda_points", "optimality_grid", "tv_iters"):
        if k in raw:
            v = raw[k]
            if isinstance(v, bool) or not isinstance(v, int) or v < 2:
                raise ConfigParseError(f"{k} must be an integer >= 2")
            setattr(cfg, k, v)
    if "tv" in raw:
        if not isinstance(raw["tv"], bool):
            raise ConfigParseError("tv must be true or false")
        cfg.tv = raw["tv"]
    if "tv_lambdas" in raw:
        tl = raw["tv_lambdas"] if isinstance(raw["tv_lambdas"], list) else [raw["tv_lambdas"]]
        cfg.tv_lambdas = [_num(v, "tv_lambdas", positive=True) for v in tl]
    if "corrupt_R1" in raw:
        cfg.corrupt_R1 = _num(raw["corrupt_R1"], "corrupt_R1")
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
