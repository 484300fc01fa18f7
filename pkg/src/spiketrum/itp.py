"""Intensity-to-place coding.

Each kernel owns K output channels with fixed characteristic intensities.
A code fires one spike, at its own time, on the channel of its kernel whose
intensity is nearest to the code's normalized amplitude.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codec import CodeSet
from .errors import ConfigError, ValidationError

STRATEGIES = ("log", "linear")


def intensity_levels(K, strategy="log", c_min=1e-3):
    if K < 1:
        raise ConfigError(f"K must be >= 1, got {K}")
    if strategy not in STRATEGIES:
        raise ConfigError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    if K == 1:
        return np.array([1.0])
    if strategy == "linear":
        return np.arange(1, K + 1) / K
    if not 0 < c_min < 1:
        raise ConfigError(f"c_min must lie in (0, 1), got {c_min}")
    return 10.0 ** np.linspace(np.log10(c_min), 0.0, K)


@dataclass(frozen=True, eq=False)
class IntensityMap:
    strategy: str
    levels: np.ndarray
    normalization_scale: float
    c_min: float = 1e-3

    @property
    def K(self):
        return len(self.levels)

    def quantize(self, normalized):
        """1-based level index nearest to each normalized amplitude; ties go to the lower level."""
        u = np.asarray(normalized, dtype=float)
        if len(u) == 0:
            return np.zeros(0, dtype=np.int64)
        # argmin returns the first minimum, which is the smaller k on a tie.
        d = np.abs(self.levels[None, :] - u[:, None])
        return d.argmin(axis=1).astype(np.int64) + 1

    def quantization_bound(self):
        """Worst-case |s - s_hat| for |s| <= normalization_scale.

        Half the widest gap between adjacent levels, or the lowest level
        itself for amplitudes that fall below it.
        """
        half_gap = 0.5 * float(np.max(np.diff(self.levels))) if self.K > 1 else 0.0
        top = 1.0 - float(self.levels[-1])
        return max(half_gap, float(self.levels[0]), top) * self.normalization_scale

    def to_dict(self):
        return {
            "strategy": self.strategy,
            "levels": [float(c) for c in self.levels],
            "normalization_scale": float(self.normalization_scale),
            "c_min": float(self.c_min),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["strategy"], np.array(d["levels"], dtype=float),
                   float(d["normalization_scale"]), float(d.get("c_min", 1e-3)))


def make_intensity_map(codes, K, strategy="log", c_min=1e-3):
    amp = np.abs(codes.amplitude)
    scale = float(amp.max()) if len(amp) and amp.max() > 0 else 1.0
    return IntensityMap(strategy, intensity_levels(K, strategy, c_min), scale, c_min)


@dataclass(eq=False)
class Spiketrum:
    """Binary spike pattern over K*M channels.

    Events are sorted by time then channel. ``negative`` marks events whose
    source amplitude was negative (only possible with |H| selection).
    ``scales``, when set, gives each event its own normalization scale
    (streaming with a running maximum); otherwise the map's scale applies.
    """

    channels: np.ndarray
    sample_index: np.ndarray
    sample_rate: float
    n_samples: int
    intensity_map: IntensityMap
    M: int
    bank_fingerprint: str = ""
    negative: np.ndarray | None = field(default=None)
    scales: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.channels = np.asarray(self.channels, dtype=np.int64)
        self.sample_index = np.asarray(self.sample_index, dtype=np.int64)
        if self.negative is not None:
            self.negative = np.asarray(self.negative, dtype=bool)
        if self.scales is not None:
            self.scales = np.asarray(self.scales, dtype=float)

    def __len__(self):
        return len(self.channels)

    @property
    def K(self):
        return self.intensity_map.K

    @property
    def num_channels(self):
        return self.K * self.M

    @property
    def times(self):
        return self.sample_index / self.sample_rate

    @property
    def duration(self):
        return self.n_samples / self.sample_rate

    def validate(self):
        if len(self) and (self.channels.min() < 1 or self.channels.max() > self.num_channels):
            bad = self.channels[(self.channels < 1) | (self.channels > self.num_channels)][0]
            raise ValidationError(f"channel {int(bad)} outside 1..{self.num_channels}")
        if len(self) and (self.sample_index.min() < 0 or self.sample_index.max() >= self.n_samples):
            raise ValidationError("spike time outside pattern duration")
        for name in ("negative", "scales"):
            extra = getattr(self, name)
            if extra is not None and len(extra) != len(self):
                raise ValidationError(f"{name} has {len(extra)} entries for {len(self)} events")
        return self

    def select(self, mask):
        neg = None if self.negative is None else self.negative[mask]
        sc = None if self.scales is None else self.scales[mask]
        return Spiketrum(self.channels[mask], self.sample_index[mask], self.sample_rate,
                         self.n_samples, self.intensity_map, self.M, self.bank_fingerprint, neg, sc)


def channel_of(kernel_index, level, K):
    return K * (np.asarray(kernel_index) - 1) + np.asarray(level)


def itp_encode(codes, imap, M, scales=None):
    """Route each code to channel K*(m - 1) + k.

    ``scales`` optionally gives a per-code normalization scale in code order.
    """
    if len(codes) and (codes.kernel_index.min() < 1 or codes.kernel_index.max() > M):
        bad = codes.kernel_index[(codes.kernel_index < 1) | (codes.kernel_index > M)][0]
        raise ValidationError(f"code references kernel {int(bad)} but M = {M}")
    if scales is not None:
        scales = np.asarray(scales, dtype=float)
        if len(scales) != len(codes) or (len(scales) and not scales.min() > 0):
            raise ValidationError("scales must be positive, one per code")
    k = imap.quantize(np.abs(codes.amplitude) / (imap.normalization_scale if scales is None else scales))
    h = channel_of(codes.kernel_index, k, imap.K)
    order = np.lexsort((h, codes.sample_index))
    neg = codes.amplitude[order] < 0
    return Spiketrum(
        channels=h[order],
        sample_index=codes.sample_index[order],
        sample_rate=codes.sample_rate,
        n_samples=codes.n_samples,
        intensity_map=imap,
        M=M,
        bank_fingerprint=codes.bank_fingerprint,
        negative=neg if neg.any() else None,
        scales=None if scales is None else scales[order],
    )


def itp_decode(spikes):
    """Map each spike back to (kernel, time, level intensity * scale)."""
    spikes.validate()
    K = spikes.K
    h = spikes.channels - 1
    m = 1 + h // K
    k = h % K
    scale = spikes.intensity_map.normalization_scale if spikes.scales is None else spikes.scales
    amp = spikes.intensity_map.levels[k] * scale
    if spikes.negative is not None:
        amp = np.where(spikes.negative, -amp, amp)
    return CodeSet(m, spikes.sample_index.copy(), amp, spikes.sample_rate, spikes.n_samples,
                   None, spikes.bank_fingerprint)


def spike_spread(spikes):
    """Spike count per channel and the fraction of channels that fired at least once."""
    counts = np.bincount(spikes.channels - 1, minlength=spikes.num_channels)[: spikes.num_channels]
    occupancy = float(np.count_nonzero(counts)) / spikes.num_channels
    return counts, occupancy
