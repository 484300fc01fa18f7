"""Run configuration: one JSON file, overridable per command by CLI flags."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace

from .codec import EncoderParams
from .errors import ConfigError, DataIOError
from .itp import STRATEGIES, intensity_levels
from .kernels import KernelBankConfig
from .stream import StreamConfig


@dataclass(frozen=True)
class ItpConfig:
    K: int = 3
    strategy: str = "log"
    c_min: float = 1e-3

    def validate(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        intensity_levels(self.K, self.strategy, self.c_min)
        return self


@dataclass(frozen=True)
class MetricsConfig:
    bin_width: float = 0.01
    entropy_bin_width: float = 0.005
    entropy_window: int = 32

    def validate(self):
        if not self.bin_width > 0 or not self.entropy_bin_width > 0:
            raise ConfigError("bin widths must be > 0")
        if self.entropy_window < 2:
            raise ConfigError(f"entropy_window must be >= 2, got {self.entropy_window}")
        return self


@dataclass(frozen=True)
class SnnConfig:
    neurons_per_group: int = 10
    epochs: int = 200
    learning_rate: float = 0.003
    membrane_tau: float = 0.02
    synaptic_tau: float = 0.005
    threshold: float = 1.0
    init_scale: float = 0.01
    dt: float = 1e-3

    def validate(self):
        if self.neurons_per_group < 1 or self.epochs < 0:
            raise ConfigError("neurons_per_group must be >= 1 and epochs >= 0")
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not self.membrane_tau > self.synaptic_tau > 0 or not self.threshold > 0:
            raise ConfigError("need membrane_tau > synaptic_tau > 0 and threshold > 0")
        if not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        return self


_SECTIONS = {
    "bank": KernelBankConfig,
    "encoder": EncoderParams,
    "itp": ItpConfig,
    "stream": StreamConfig,
    "metrics": MetricsConfig,
    "snn": SnnConfig,
}


@dataclass(frozen=True)
class RunConfig:
    bank: KernelBankConfig = field(default_factory=KernelBankConfig)
    encoder: EncoderParams = field(default_factory=lambda: EncoderParams(target_spike_rate=1000.0))
    itp: ItpConfig = field(default_factory=ItpConfig)
    stream: StreamConfig | None = None
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    snn: SnnConfig = field(default_factory=SnnConfig)
    seed: int = 0

    def validate(self):
        self.bank.validate()
        self.encoder.validate()
        self.itp.validate()
        self.metrics.validate()
        self.snn.validate()
        if self.stream is not None:
            self.stream.validate()
        if int(self.seed) != self.seed:
            raise ConfigError(f"seed must be an integer, got {self.seed}")
        return self

    def stream_config(self):
        """Stream settings, defaulting to the bank's rate and size and the ITP settings."""
        if self.stream is not None:
            return self.stream
        return StreamConfig(sample_rate=self.bank.sample_rate, M=self.bank.num_kernels,
                            K=self.itp.K, strategy=self.itp.strategy, c_min=self.itp.c_min)

    def to_dict(self):
        d = {name: asdict(getattr(self, name)) for name in _SECTIONS if getattr(self, name) is not None}
        d["seed"] = self.seed
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(d) - set(_SECTIONS) - {"seed"}
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        kw = {}
        for name, typ in _SECTIONS.items():
            if name not in d or d[name] is None:
                continue
            sub = d[name]
            allowed = {f.name for f in fields(typ)}
            bad = set(sub) - allowed
            if bad:
                raise ConfigError(f"unknown keys in [{name}]: {sorted(bad)}")
            if name == "encoder" and "max_codes" not in sub and "target_spike_rate" not in sub:
                sub = {**sub, "target_spike_rate": 1000.0}
            try:
                kw[name] = typ(**sub)
            except TypeError as e:
                raise ConfigError(f"[{name}]: {e}") from e
        if "seed" in d:
            kw["seed"] = d["seed"]
        return cls(**kw).validate()

    @classmethod
    def load(cls, path):
        try:
            with open(path) as f:
                text = f.read()
        except OSError as e:
            raise DataIOError(f"cannot read config {path}: {e.strerror}") from e
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e

    def override(self, section, **values):
        """New config with keys of one section replaced; None values are ignored."""
        values = {k: v for k, v in values.items() if v is not None}
        if not values:
            return self
        if section == "seed":
            return replace(self, seed=values["seed"]).validate()
        current = getattr(self, section)
        if current is None and section == "stream":
            current = self.stream_config()
        return replace(self, **{section: replace(current, **values)}).validate()
