"""Run configuration: a single JSON document, validated with field-path errors."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from carleman._numeric import DEFAULT_PREC, MIN_PREC
from carleman.errors import ConfigInvalid
from carleman.sequences import BASE_FAMILIES, DEFAULT_HORIZON, DEFAULT_N_MAX


def _default_seq():
    return {"family": "log"}


@dataclass
class RunConfig:
    M: dict = field(default_factory=_default_seq)
    N: dict = field(default_factory=_default_seq)
    precision: int = DEFAULT_PREC
    n_max: int = DEFAULT_N_MAX
    p_max: int = 300
    P: int = 100
    J: int = 2
    n_start: int = 1
    horizon: int = DEFAULT_HORIZON
    alpha_threshold: float = 4.0
    tolerances: dict = field(default_factory=lambda: {"identity": 1e-20, "inequality": 1e-30})
    output_dir: str = "out"
    workers: int = 1

    def to_json(self):
        return asdict(self)

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


_INT_FIELDS = ("precision", "n_max", "p_max", "P", "J", "n_start", "horizon", "workers")


def _check_seq(path, spec):
    if not isinstance(spec, dict):
        raise ConfigInvalid(path, "must be an object")
    fam = spec.get("family")
    if fam == "widened":
        if "base" not in spec:
            raise ConfigInvalid(f"{path}.base", "widened sequence needs a base")
        _check_seq(f"{path}.base", spec["base"])
        return
    if fam not in BASE_FAMILIES:
        raise ConfigInvalid(f"{path}.family", f"unknown family {fam!r}")
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise ConfigInvalid(f"{path}.params", "must be an object")
    if fam == "custom":
        table = spec.get("table")
        if not isinstance(table, list) or not table:
            raise ConfigInvalid(f"{path}.table", "custom family needs a non-empty ratio list")


def parse_config(text) -> RunConfig:
    """Parse and validate a JSON configuration; missing fields take defaults."""
    if isinstance(text, (bytes, bytearray)):
        text = text.decode()
    if isinstance(text, str):
        if not text.strip():
            data = {}
        else:
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigInvalid("$", f"not valid JSON ({exc.msg})") from None
    else:
        data = dict(text)
    if not isinstance(data, dict):
        raise ConfigInvalid("$", "top level must be an object")
    known = {f.name for f in fields(RunConfig)}
    for key in data:
        if key not in known:
            raise ConfigInvalid(key, "unknown field")
    cfg = RunConfig(**data)
    for name in _INT_FIELDS:
        v = getattr(cfg, name)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigInvalid(name, "must be an integer")
    if cfg.precision < MIN_PREC:
        raise ConfigInvalid("precision", f"below floor {MIN_PREC}")
    for name in ("n_max", "p_max", "P", "n_start", "horizon", "workers"):
        if getattr(cfg, name) <= 0:
            raise ConfigInvalid(name, "must be positive")
    if cfg.J < 0:
        raise ConfigInvalid("J", "must be non-negative")
    if cfg.n_max < 2:
        raise ConfigInvalid("n_max", "must be at least 2")
    if not isinstance(cfg.alpha_threshold, (int, float)) or cfg.alpha_threshold <= 0:
        raise ConfigInvalid("alpha_threshold", "must be a positive number")
    if not isinstance(cfg.tolerances, dict):
        raise ConfigInvalid("tolerances", "must be an object")
    tols = {"identity": 1e-20, "inequality": 1e-30}
    for k, v in cfg.tolerances.items():
        if k not in tols:
            raise ConfigInvalid(f"tolerances.{k}", "unknown tolerance")
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not 0 < v < 1:
            raise ConfigInvalid(f"tolerances.{k}", "must lie in (0, 1)")
        tols[k] = v
    cfg.tolerances = tols
    if not isinstance(cfg.output_dir, str) or not cfg.output_dir:
        raise ConfigInvalid("output_dir", "must be a non-empty path")
    _check_seq("M", cfg.M)
    _check_seq("N", cfg.N)
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    return cfg.dumps()


__all__ = ["RunConfig", "parse_config", "serialize_config"]
