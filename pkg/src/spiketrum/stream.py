"""Segment-buffered streaming encoder, emulating the real-time cochlea.

The input is cut into fixed segments. Each segment is encoded by pursuit
with a fixed iteration budget, using kernel spectra cached at one FFT
length. Kernels placed near a segment end overhang into the future; that
overhang is subtracted from a carried tail that is added to the following
segment(s) before they are encoded.
"""
from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass, field

import numpy as np

from .codec import CodeSet, Pursuit, Signal
from .errors import ConfigError, ValidationError
from .itp import IntensityMap, intensity_levels, itp_encode
from .metrics import precision

HARDWARE_RATE = 2000.0
NORMALIZATIONS = ("running", "global")


@dataclass(frozen=True)
class StreamConfig:
    segment_length: float = 0.0435
    sample_rate: float = 16000.0
    spikes_per_segment_budget: int | None = None
    K: int = 3
    M: int = 40
    fft_length: int | None = None
    strategy: str = "log"
    c_min: float = 1e-3
    absolute: bool = False
    normalization: str = "running"

    @property
    def segment_samples(self):
        return int(round(self.segment_length * self.sample_rate))

    @property
    def budget(self):
        if self.spikes_per_segment_budget is not None:
            return int(self.spikes_per_segment_budget)
        return int(round(HARDWARE_RATE * self.segment_length))

    def validate(self, bank=None):
        if not self.segment_length > 0 or self.segment_samples < 1:
            raise ConfigError(f"segment_length must cover >= 1 sample, got {self.segment_length}")
        if not self.sample_rate > 0:
            raise ConfigError(f"sample_rate must be > 0, got {self.sample_rate}")
        if self.budget < 0:
            raise ConfigError(f"budget must be >= 0, got {self.budget}")
        intensity_levels(self.K, self.strategy, self.c_min)
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")
        if bank is not None:
            if bank.sample_rate != self.sample_rate:
                raise ConfigError(f"stream rate {self.sample_rate} Hz != bank rate {bank.sample_rate} Hz")
            if len(bank) != self.M:
                raise ConfigError(f"stream M={self.M} but bank has {len(bank)} kernels")
            need = self.segment_samples + bank.max_length - 1
            if self.fft_length is not None and self.fft_length < need:
                raise ConfigError(f"fft_length {self.fft_length} < segment + kernel - 1 = {need}")
        return self

    def fft_size(self, bank):
        if self.fft_length is not None:
            return int(self.fft_length)
        need = self.segment_samples + bank.max_length - 1
        return 1 << (need - 1).bit_length()


@dataclass
class StreamResult:
    codes: CodeSet
    segment_starts: np.ndarray
    segment_counts: np.ndarray
    segment_energies: list = field(repr=False)

    def scales(self, normalization="running"):
        """Per-code ITP scale: running max |s| up to the code's segment, or the global max."""
        amp = np.abs(self.codes.amplitude)
        if not len(amp):
            return amp
        seg = np.repeat(np.arange(len(self.segment_counts)), self.segment_counts)
        seg_max = np.zeros(len(self.segment_counts))
        np.maximum.at(seg_max, seg, amp)
        if normalization == "global":
            return np.full(len(amp), seg_max.max())
        return np.maximum.accumulate(seg_max)[seg]


def stream_codes(x, bank, cfg=None, backend=None):
    """Run the segmented encoder and return analog codes plus per-segment bookkeeping."""
    cfg = (cfg or StreamConfig(sample_rate=bank.sample_rate, M=len(bank))).validate(bank)
    if x.sample_rate != cfg.sample_rate:
        raise ConfigError(f"signal rate {x.sample_rate} Hz != stream rate {cfg.sample_rate} Hz")
    seg = cfg.segment_samples
    nfft = cfg.fft_size(bank)
    T = len(x)
    budget = cfg.budget
    # carry[j] is pending subtraction for sample start + j
    carry = np.zeros(seg + bank.max_length)
    ms, taus, ss = [], [], []
    starts, counts, energies = [], [], []
    for start in range(0, T, seg):
        n = min(seg, T - start)
        buf = x.samples[start : start + n] + carry[:n]
        carry = np.concatenate([carry[n:], np.zeros(n)])
        p = Pursuit(buf, bank, absolute=cfg.absolute, backend=backend, nfft=nfft)
        # A trailing partial segment gets a pro-rata budget.
        seg_budget = budget if n == seg else (budget * n) // seg
        if p.energy > 0:
            p.run(seg_budget)
        for m, tau, s in zip(p.m, p.tau, p.s):
            phi = bank.kernels[m].samples
            over = tau + len(phi) - n
            if over > 0:
                carry[:over] -= s * phi[n - tau :]
            ms.append(m + 1)
            taus.append(start + tau)
            ss.append(s)
        starts.append(start)
        counts.append(len(p.m))
        energies.append(np.array(p.e))
    codes = CodeSet(ms, taus, ss, x.sample_rate, T, None, bank.fingerprint)
    e0 = float(np.dot(x.samples, x.samples))
    if e0 > 0:
        from .codec import reconstruct

        r = x.samples - reconstruct(codes, bank).samples
        codes.residual_energy_ratio = float(min(1.0, np.dot(r, r) / e0))
    else:
        codes.residual_energy_ratio = 0.0
    return StreamResult(codes, np.array(starts), np.array(counts), energies)


def stream_encode(x, bank, cfg=None, backend=None):
    """Segmented encoding followed by intensity-to-place coding.

    With the default running normalization each code is scaled by the
    largest amplitude seen up to the end of its segment, which is what a
    causal encoder can know; the per-spike scales travel with the pattern.
    ``normalization="global"`` uses one scale for the whole stream.
    """
    cfg = (cfg or StreamConfig(sample_rate=bank.sample_rate, M=len(bank))).validate(bank)
    res = stream_codes(x, bank, cfg, backend)
    scales = res.scales(cfg.normalization)
    top = float(scales.max()) if len(scales) else 1.0
    imap = IntensityMap(cfg.strategy, intensity_levels(cfg.K, cfg.strategy, cfg.c_min), top, cfg.c_min)
    return itp_encode(res.codes, imap, len(bank), scales if cfg.normalization == "running" else None)


@dataclass
class ErrorTrace:
    difference: np.ndarray
    max_abs: float
    rms: float
    precision_gap: float | None = None


def segment_error(full, segmented, original=None):
    """Pointwise difference between two reconstructions plus summary statistics.

    With `original`, also reports P(full) - P(segmented).
    """
    if len(full) != len(segmented) or full.sample_rate != segmented.sample_rate:
        raise ValidationError(
            f"length/rate mismatch: {len(full)}@{full.sample_rate} vs {len(segmented)}@{segmented.sample_rate}"
        )
    d = full.samples - segmented.samples
    gap = None
    if original is not None:
        gap = precision(original, full) - precision(original, segmented)
    rms = float(np.sqrt(np.mean(d**2))) if len(d) else 0.0
    return ErrorTrace(d, float(np.max(np.abs(d))) if len(d) else 0.0, rms, gap)


def linear_chirp(duration=5.0, f0=20.0, f1=8000.0, sample_rate=16000.0, amplitude=0.5):
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    phase = 2.0 * np.pi * (f0 * t + 0.5 * (f1 - f0) / duration * t**2)
    return Signal(amplitude * np.sin(phase), sample_rate)


def characteristics_raster(cfg=None, bank=None, duration=5.0, f0=20.0, f1=8000.0, amplitude=0.5,
                           signal=None):
    """Stream a linear chirp (or `signal`) and return raster rows (channel, time_s)."""
    from .kernels import KernelBankConfig, build_bank

    cfg = cfg or StreamConfig()
    if bank is None:
        bank = build_bank(KernelBankConfig(num_kernels=cfg.M, sample_rate=cfg.sample_rate,
                                           f_min=f0, f_max=min(f1, cfg.sample_rate / 2)))
    x = signal if signal is not None else linear_chirp(duration, f0, f1, cfg.sample_rate, amplitude)
    spikes = stream_encode(x, bank, cfg)
    return np.column_stack([spikes.channels, spikes.times]) if len(spikes) else np.zeros((0, 2)), spikes


def raster_csv(rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["channel", "time_s"])
    for h, t in rows:
        w.writerow([int(h), repr(float(t))])
    return buf.getvalue()


def group_activation_times(spikes, stat="median"):
    """Per kernel group (1..M), the median (or first/last) spike time; NaN if silent."""
    K = spikes.K
    groups = (spikes.channels - 1) // K
    out = np.full(spikes.M, np.nan)
    t = spikes.times
    for g in range(spikes.M):
        tg = t[groups == g]
        if len(tg):
            out[g] = {"median": np.median, "first": np.min, "last": np.max}[stat](tg)
    return out
