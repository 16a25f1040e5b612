"""Experiment configuration: a flat YAML mapping, validated before anything runs."""

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from .adversary import parse_behavior
from .channel import ChannelParams, ChannelState
from .errors import ConfigError, DomainError
from .field import DEFAULT_Q, get_field

MODES = ("full", "simplified", "concentration", "leakage-oracle")
REGION_KINDS = ("secrecy", "nosecurity", "naive", "common", "all")
ENSEMBLES = ("plaintext", "otp", "tiny")


@dataclass(frozen=True)
class ExperimentConfig:
    delta1: float = 0.7
    delta2: float = 0.6
    joint: tuple = None
    L: int = 1
    q: int = DEFAULT_Q
    N1: int = 1000
    N2: int = 1000
    seed: int = 0
    seeds: int = 1
    bob: str = "honest"
    calvin: str = "honest"
    mode: str = "full"
    out: str = None
    # region export
    region: str = "all"
    Rc: float = 0.0
    region_q: int = None
    # simplified mode / golden trace
    states: tuple = ()
    key_sizes: tuple = (2, 2)
    golden: str = None
    # leakage oracle
    ensemble: str = "tiny"
    budget: int = 10 ** 8
    tiny: dict = field(default=None, hash=False)
    # concentration
    trials: int = 1000

    def validate(self):
        for name in ("delta1", "delta2"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not 0 <= v <= 1:
                raise ConfigError(f"{name} must be a probability, got {v!r}")
        try:
            ChannelParams(self.delta1, self.delta2, self.joint)
            get_field(self.q)
            if self.region_q is not None:
                get_field(self.region_q)
        except DomainError as e:
            raise ConfigError(str(e)) from None
        for name in ("L", "N1", "N2", "seed", "seeds", "budget", "trials"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ConfigError(f"{name} must be a nonnegative integer, got {v!r}")
        if self.L == 0:
            raise ConfigError("L must be at least 1")
        if self.seed >= 1 << 64:
            raise ConfigError("seed must fit in 64 bits")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.region not in REGION_KINDS:
            raise ConfigError(f"region must be one of {REGION_KINDS}, got {self.region!r}")
        if self.ensemble not in ENSEMBLES:
            raise ConfigError(f"ensemble must be one of {ENSEMBLES}, got {self.ensemble!r}")
        if self.Rc < 0:
            raise ConfigError("Rc must be nonnegative")
        parse_behavior(self.bob)
        parse_behavior(self.calvin)
        try:
            [ChannelState.parse(str(s)) for s in self.states]
        except DomainError as e:
            raise ConfigError(str(e)) from None
        return self

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw).validate() if kw else self

    def as_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


_TUPLES = ("joint", "states", "key_sizes")


def config_from_mapping(data, base_dir=None):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping of keys to values")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    data = dict(data)
    for k in _TUPLES:
        if data.get(k) is not None:
            if not isinstance(data[k], (list, tuple)):
                raise ConfigError(f"{k} must be a list")
            data[k] = tuple(data[k])
    if base_dir is not None and data.get("golden"):
        data["golden"] = str((Path(base_dir) / data["golden"]).resolve())
    try:
        cfg = ExperimentConfig(**data)
    except TypeError as e:
        raise ConfigError(str(e)) from None
    return cfg.validate()


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: {e}") from None
    return config_from_mapping(data, base_dir=path.parent)
