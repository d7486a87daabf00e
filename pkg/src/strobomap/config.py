"""JSON configuration: schema, defaults, dotted-path overrides, hashing."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigError
from .models import (Family, ForcingParams, SystemParams, VectorFieldSpec,
                     check_hypotheses)

NUMERICS_DEFAULTS = {
    "rtol": 1e-10,
    "atol": 1e-12,
    "event_tol": 1e-12,
    "fp_tol": 1e-10,
    "burn_in": 500,
    "max_period": 64,          # scans; sweeps cap at sweep.period_cap
    "horizon_periods": 2000,
}

JOB_NAMES = ("map", "orbit", "curves", "sweep", "staircase", "farey")


@dataclass(frozen=True)
class Config:
    """Normalized configuration document."""

    raw: dict

    @classmethod
    def from_file(cls, path: str | Path) -> "Config":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "Config":
        if not isinstance(doc, dict):
            raise ConfigError("config root must be a JSON object")
        normalized = json.loads(json.dumps(doc))  # deep copy, JSON-clean
        numerics = dict(NUMERICS_DEFAULTS)
        numerics.update(normalized.get("numerics") or {})
        unknown = set(numerics) - set(NUMERICS_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown numerics keys: {sorted(unknown)}")
        normalized["numerics"] = numerics
        normalized.setdefault("theta", 1.0)
        return cls(raw=normalized)

    def override(self, assignments: list[str]) -> "Config":
        """Apply --set KEY=VALUE items along dotted paths."""
        doc = json.loads(json.dumps(self.raw))
        for item in assignments:
            if "=" not in item:
                raise ConfigError(f"--set requires KEY=VALUE, got {item!r}")
            key, _, raw_value = item.partition("=")
            try:
                value = json.loads(raw_value)
            except json.JSONDecodeError:
                value = raw_value
            node = doc
            parts = key.split(".")
            for part in parts[:-1]:
                node = node.setdefault(part, {})
                if not isinstance(node, dict):
                    raise ConfigError(f"cannot descend into {key!r}")
            node[parts[-1]] = value
        return Config.from_dict(doc)

    # -- typed accessors ----------------------------------------------------

    @property
    def numerics(self) -> dict:
        return self.raw["numerics"]

    def job(self, name: str) -> dict:
        if name not in JOB_NAMES:
            raise ConfigError(f"unknown job {name!r}")
        block = self.raw.get(name, {})
        if not isinstance(block, dict):
            raise ConfigError(f"job block {name!r} must be an object")
        return block

    @property
    def workers(self) -> Optional[int]:
        return self.raw.get("workers")

    def field_spec(self) -> VectorFieldSpec:
        model = self.raw.get("model")
        if not isinstance(model, dict):
            raise ConfigError("config needs a 'model' object (family, params)")
        try:
            family = Family(str(model.get("family", "")).lower())
        except ValueError as exc:
            raise ConfigError(
                f"unknown model family {model.get('family')!r}; expected one "
                f"of {[f.value for f in Family]}") from exc
        params = model.get("params")
        if not isinstance(params, list):
            raise ConfigError("'model.params' must be a list of numbers")
        try:
            return VectorFieldSpec(family, tuple(float(p) for p in params))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def system(self) -> SystemParams:
        forcing = self.raw.get("forcing")
        if not isinstance(forcing, dict):
            raise ConfigError("config needs a 'forcing' object (A, d, T)")
        try:
            fp = ForcingParams(A=float(forcing["A"]), d=float(forcing["d"]),
                               T=float(forcing["T"]))
            return SystemParams(field=self.field_spec(), forcing=fp,
                                theta=float(self.raw["theta"]))
        except KeyError as exc:
            raise ConfigError(f"forcing block misses {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def validated_system(self) -> SystemParams:
        """System plus the structural checks; rejects fields violating them."""
        system = self.system()
        try:
            report = check_hypotheses(system)
        except Exception as exc:
            raise ConfigError(f"hypothesis check failed: {exc}") from exc
        if not (report.h1_ok and report.h2_ok):
            raise ConfigError(
                f"model violates the structural hypotheses: h1_ok="
                f"{report.h1_ok}, h2_ok={report.h2_ok} "
                f"(max f' = {report.max_fprime})")
        return system

    # -- identity -----------------------------------------------------------

    def canonical_json(self) -> str:
        return json.dumps(self.raw, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    def __eq__(self, other):
        return isinstance(other, Config) and self.canonical_json() == other.canonical_json()

    def __hash__(self):
        return hash(self.canonical_json())
