"""Experiment configuration: JSON with an explicit schema version.

Example::

    {
      "schema_version": 1,
      "model": {
        "count": {"family": "poisson", "lambda": 100},
        "claim": {"family": "rademacher", "scale": 1},
        "rho": 0.0
      },
      "bound_kind": "normal_zero_mean",
      "target": "normal",
      "mc_budget": 1000000,
      "seed": 20240101,
      "tail_eps": 1e-12,
      "d_method": "exact",
      "output": {"path": null, "format": "text"}
    }

Only ``schema_version``, ``model`` and ``bound_kind`` are required.  Unknown
keys anywhere are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from ..bounds import BOUND_KINDS
from ..laws import LawError, Poisson, claim_from_config, count_from_config
from ..model import RandomSumModel

SCHEMA_VERSION = 1

TARGET_OF = {
    "normal_zero_mean": "normal",
    "normal_zero_mean_indep": "normal",
    "normal_poisson": "normal",
    "normal_count_coupling_alt": "normal",
    "gamma_stoploss": "gamma",
    "poisson_wasserstein": "poisson",
    "poisson_tv": "poisson",
}

_TOP_KEYS = {"schema_version", "model", "bound_kind", "target", "mc_budget", "seed", "tail_eps", "d_method", "output"}
_MODEL_KEYS = {"count", "claim", "rho"}
_OUTPUT_KEYS = {"path", "format"}
FORMATS = ("text", "csv")


class ConfigError(ValueError):
    """The configuration is malformed or violates a bound's precondition."""


@dataclass(frozen=True)
class ExperimentConfig:
    model: RandomSumModel
    bound_kind: str
    target: str
    mc_budget: int = 10**6
    seed: int = 0
    tail_eps: float = 1e-12
    d_method: str = "exact"
    output_path: str | None = None
    output_format: str = "text"

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        cfg = replace(self, **kw)
        validate(cfg)
        return cfg

    def echo(self) -> dict:
        """Flat description used as the leading columns of output rows."""
        return {
            "bound_kind": self.bound_kind,
            "target": self.target,
            "count": _compact(self.model.count.to_config()),
            "claim": _compact(self.model.claim.to_config()),
            "rho": self.model.rho,
            "seed": self.seed,
            "mc_budget": self.mc_budget,
            "tail_eps": self.tail_eps,
        }

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "model": self.model.to_config(),
            "bound_kind": self.bound_kind,
            "target": self.target,
            "mc_budget": self.mc_budget,
            "seed": self.seed,
            "tail_eps": self.tail_eps,
            "d_method": self.d_method,
            "output": {"path": self.output_path, "format": self.output_format},
        }


def _compact(d: dict) -> str:
    return json.dumps(d, sort_keys=True, separators=(",", ":"))


def _unknown(keys, allowed, where):
    extra = sorted(set(keys) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def validate(cfg: ExperimentConfig) -> None:
    """Check types and the bound's preconditions; raise :class:`ConfigError`."""
    kind = cfg.bound_kind
    if kind not in BOUND_KINDS:
        raise ConfigError(f"bound_kind must be one of {', '.join(BOUND_KINDS)}; got {kind!r}")
    if cfg.target != TARGET_OF[kind]:
        raise ConfigError(f"bound_kind {kind} approximates a {TARGET_OF[kind]} target, not {cfg.target!r}")
    if not (isinstance(cfg.mc_budget, int) and cfg.mc_budget > 0):
        raise ConfigError(f"mc_budget must be a positive integer, got {cfg.mc_budget!r}")
    if not (isinstance(cfg.seed, int) and 0 <= cfg.seed < 2**64):
        raise ConfigError(f"seed must be an integer in [0, 2^64), got {cfg.seed!r}")
    if not 0.0 < cfg.tail_eps < 1e-3:
        raise ConfigError(f"tail_eps must lie in (0, 1e-3), got {cfg.tail_eps!r}")
    if cfg.d_method not in ("exact", "mc"):
        raise ConfigError(f"d_method must be 'exact' or 'mc', got {cfg.d_method!r}")
    if cfg.output_format not in FORMATS:
        raise ConfigError(f"output format must be one of {FORMATS}, got {cfg.output_format!r}")
    model = cfg.model
    mo = model.claim.moments()
    if kind in ("normal_zero_mean", "normal_zero_mean_indep", "normal_count_coupling_alt"):
        if abs(mo.mean) > 1e-12:
            raise ConfigError(f"{kind} requires mean(claim) = 0, got {mo.mean:g}")
        if not mo.variance > 0:
            raise ConfigError(f"{kind} requires Var(claim) > 0")
    if kind in ("normal_zero_mean_indep", "normal_count_coupling_alt") and model.rho != 0:
        raise ConfigError(f"{kind} requires rho = 0, got {model.rho}")
    if kind in ("normal_poisson", "gamma_stoploss") and not isinstance(model.count, Poisson):
        raise ConfigError(f"{kind} requires a Poisson count, got {model.count.family}")
    if kind == "normal_poisson" and not mo.m2 > 0:
        raise ConfigError("normal_poisson requires E[X^2] > 0")
    if kind == "gamma_stoploss" and not (model.claim.non_negative and mo.mean > 0):
        raise ConfigError("gamma_stoploss requires non-negative claims with positive mean")
    if kind in ("poisson_wasserstein", "poisson_tv"):
        if not (model.claim.non_negative and model.claim.integer_valued):
            raise ConfigError(f"{kind} requires non-negative integer claims")
        if not mo.mean > 0:
            raise ConfigError(f"{kind} requires E[X] > 0")


def from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _unknown(raw, _TOP_KEYS, "config")
    if raw.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version must be {SCHEMA_VERSION}, got {raw.get('schema_version')!r}")
    for key in ("model", "bound_kind"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    m = raw["model"]
    if not isinstance(m, dict):
        raise ConfigError("model must be an object")
    _unknown(m, _MODEL_KEYS, "model")
    if "count" not in m or "claim" not in m:
        raise ConfigError("model needs 'count' and 'claim'")
    out = raw.get("output") or {}
    _unknown(out, _OUTPUT_KEYS, "output")
    try:
        model = RandomSumModel(count_from_config(m["count"]), claim_from_config(m["claim"]), float(m.get("rho", 0.0)))
    except (LawError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model: {exc}") from None
    kind = raw["bound_kind"]
    cfg = ExperimentConfig(
        model=model,
        bound_kind=kind,
        target=raw.get("target", TARGET_OF.get(kind, "")),
        mc_budget=raw.get("mc_budget", 10**6),
        seed=raw.get("seed", 0),
        tail_eps=float(raw.get("tail_eps", 1e-12)),
        d_method=raw.get("d_method", "exact"),
        output_path=out.get("path"),
        output_format=out.get("format", "text"),
    )
    validate(cfg)
    return cfg


def load(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return from_dict(raw)
