"""Run configuration and JSON result records."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

from .errors import InvalidArgument
from .states import SchmidtState, make_family_state, make_mes, make_mss

VERSION = "0.1.0"

STATE_KINDS = ("mes", "mss", "family", "alpha", "mvs")


@dataclass(frozen=True)
class StateSpec:
    kind: str = "mes"
    rank: int | None = None
    theta0: float | None = None
    theta1: float | None = None
    alpha: tuple | None = None

    def validate(self, d: int) -> None:
        if self.kind not in STATE_KINDS:
            raise InvalidArgument(f"unknown state kind {self.kind!r}")
        if self.kind == "mss" and (self.rank is None or not 1 <= self.rank <= d):
            raise InvalidArgument(f"mss needs 1 <= rank <= d={d}")
        if self.kind == "mvs" and self.rank is not None and not 2 <= self.rank <= d:
            raise InvalidArgument(f"mvs rank must lie in 2..{d}")
        if self.kind == "family":
            if d < 4:
                raise InvalidArgument("the rank-3 family is scanned for d >= 4")
            if self.theta0 is None or self.theta1 is None:
                raise InvalidArgument("family needs theta0 and theta1")
        if self.kind == "alpha":
            if not self.alpha or len(self.alpha) > d:
                raise InvalidArgument(f"alpha needs between 1 and {d} entries")
            norm = sum(a * a for a in self.alpha)
            if abs(norm - 1) > 1e-6:
                raise InvalidArgument(f"explicit alpha must be normalized (sum of squares {norm:.6g})")

    def build(self, d: int, seed: int = 0, restarts: int = 20) -> SchmidtState:
        self.validate(d)
        if self.kind == "mes":
            return make_mes(d)
        if self.kind == "mss":
            return make_mss(self.rank, d)
        if self.kind == "family":
            return make_family_state(self.theta0, self.theta1, d)
        if self.kind == "alpha":
            return SchmidtState.from_amplitudes(self.alpha, d)
        from .optimizer import find_mvs

        r = d if self.rank is None else self.rank
        return find_mvs(r, restarts, seed).state.padded(d)

    def label(self) -> str:
        if self.kind == "mss":
            return f"mss(r={self.rank})"
        if self.kind == "mvs" and self.rank is not None:
            return f"mvs(r={self.rank})"
        if self.kind == "family":
            return f"family({self.theta0:.4f},{self.theta1:.4f})"
        return self.kind


@dataclass(frozen=True)
class RunConfig:
    command: str
    d: int | None = None
    rank: int | None = None
    mA: int = 2
    mB: int = 2
    scenario: str | None = None
    samples: int | None = None
    seed: int = 0
    grid_n: int | None = None
    output_path: str | None = None
    state_spec: StateSpec = field(default_factory=StateSpec)
    restarts: int = 20
    min_hits: int | None = None
    scale: float | None = None
    figure: str | None = None
    dims: tuple | None = None

    def validate(self) -> "RunConfig":
        if self.d is not None:
            if self.d < 2:
                raise InvalidArgument(f"d must be >= 2, got {self.d}")
            if self.rank is not None and self.rank > self.d:
                raise InvalidArgument(f"rank {self.rank} exceeds d={self.d}")
            if self.command == "pv":
                self.state_spec.validate(self.d)
        if self.samples is not None and self.samples < 1:
            raise InvalidArgument("samples must be >= 1")
        if self.scale is not None and not 0 < self.scale <= 1:
            raise InvalidArgument("scale must lie in (0, 1]")
        if self.mA < 1 or self.mB < 1:
            raise InvalidArgument("need at least one setting per party")
        return self

    def to_dict(self) -> dict:
        out = asdict(self)
        out["state_spec"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self.state_spec).items()}
        if self.dims is not None:
            out["dims"] = list(self.dims)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        spec = dict(data.pop("state_spec", {}) or {})
        if spec.get("alpha") is not None:
            spec["alpha"] = tuple(spec["alpha"])
        if data.get("dims") is not None:
            data["dims"] = tuple(data["dims"])
        return cls(state_spec=StateSpec(**spec), **data)


@dataclass(frozen=True)
class ResultRecord:
    config: RunConfig
    result: dict
    wall_time_s: float
    version: str = VERSION
    timestamp: str = ""

    @classmethod
    def create(cls, config: RunConfig, result: dict, started: float) -> "ResultRecord":
        stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return cls(config, result, time.perf_counter() - started, VERSION, stamp)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "result": self.result,
            "meta": {
                "version": self.version,
                "seed": self.config.seed,
                "wall_time_s": self.wall_time_s,
                "timestamp": self.timestamp,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ResultRecord":
        meta = data["meta"]
        return cls(RunConfig.from_dict(data["config"]), data["result"], meta["wall_time_s"], meta["version"], meta["timestamp"])

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        return cls.from_dict(json.loads(text))
