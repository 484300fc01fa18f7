"""Sparse coding of signals by temporal matching pursuit, and decoding.

A signal is modelled as a sum of time-shifted, scaled kernels. ``encode``
greedily extracts the best (kernel, shift) atom until the code budget is
spent or the residual is small enough; ``reconstruct`` sums the atoms back.
Times are kept as integer sample indices internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from . import _backend
from .errors import ConfigError, SizingError, ValidationError

BLOCK = 32


@dataclass(frozen=True, eq=False)
class Signal:
    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float).ravel())
        if not self.sample_rate > 0:
            raise ValidationError(f"sample_rate must be > 0, got {self.sample_rate}")

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self):
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class Code:
    kernel_index: int
    time: float
    amplitude: float


@dataclass(eq=False)
class CodeSet:
    """Codes in extraction order, stored column-wise.

    ``energies[i]`` is the residual energy after i codes (``energies[0]`` is
    the input energy), so its length is ``len(codes) + 1`` for encoder output.
    """

    kernel_index: np.ndarray
    sample_index: np.ndarray
    amplitude: np.ndarray
    sample_rate: float
    n_samples: int
    residual_energy_ratio: float | None = None
    bank_fingerprint: str = ""
    energies: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.kernel_index = np.asarray(self.kernel_index, dtype=np.int64)
        self.sample_index = np.asarray(self.sample_index, dtype=np.int64)
        self.amplitude = np.asarray(self.amplitude, dtype=float)
        if not (len(self.kernel_index) == len(self.sample_index) == len(self.amplitude)):
            raise ValidationError("code columns have different lengths")

    def __len__(self):
        return len(self.amplitude)

    def __iter__(self):
        for m, n, s in zip(self.kernel_index, self.sample_index, self.amplitude):
            yield Code(int(m), float(n) / self.sample_rate, float(s))

    def __getitem__(self, i):
        if isinstance(i, slice):
            return self._slice(i)
        return Code(int(self.kernel_index[i]), float(self.sample_index[i]) / self.sample_rate,
                    float(self.amplitude[i]))

    def _slice(self, sl):
        energies = None
        if self.energies is not None and sl.step in (None, 1) and (sl.start in (None, 0)):
            stop = len(self) if sl.stop is None else min(sl.stop, len(self))
            energies = self.energies[: stop + 1]
        out = CodeSet(self.kernel_index[sl], self.sample_index[sl], self.amplitude[sl],
                      self.sample_rate, self.n_samples, None, self.bank_fingerprint, energies)
        if energies is not None and energies[0] > 0:
            out.residual_energy_ratio = float(energies[-1] / energies[0])
        return out

    def head(self, n):
        """First n codes, i.e. what encoding with a budget of n would have produced."""
        return self._slice(slice(0, n))

    @property
    def times(self):
        return self.sample_index / self.sample_rate

    @property
    def duration(self):
        return self.n_samples / self.sample_rate

    def validate(self, bank):
        if len(self) == 0:
            return self
        M = len(bank)
        bad = (self.kernel_index < 1) | (self.kernel_index > M)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise ValidationError(
                f"code {i} references kernel {int(self.kernel_index[i])}; bank has {M} kernels"
            )
        bad = (self.sample_index < 0) | (self.sample_index >= self.n_samples)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise ValidationError(
                f"code {i} at sample {int(self.sample_index[i])} outside [0, {self.n_samples})"
            )
        return self

    @classmethod
    def empty(cls, sample_rate, n_samples, bank_fingerprint="", ratio=0.0):
        return cls(np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0), sample_rate,
                   n_samples, ratio, bank_fingerprint, np.zeros(1))


@dataclass(frozen=True)
class EncoderParams:
    """Budget and stopping rule.

    Exactly one of ``max_codes`` / ``target_spike_rate`` sets the budget;
    with a target rate the budget is round(rate * duration).
    ``absolute=True`` selects atoms by |correlation| instead of the signed value.
    """

    max_codes: int | None = None
    min_energy_ratio: float = 1e-4
    target_spike_rate: float | None = None
    absolute: bool = False

    def validate(self):
        if self.max_codes is None and self.target_spike_rate is None:
            raise ConfigError("set max_codes or target_spike_rate")
        if self.max_codes is not None and self.target_spike_rate is not None:
            raise ConfigError("max_codes and target_spike_rate are mutually exclusive")
        if self.max_codes is not None and self.max_codes < 1:
            raise ConfigError(f"max_codes must be >= 1, got {self.max_codes}")
        if self.target_spike_rate is not None and not self.target_spike_rate > 0:
            raise ConfigError(f"target_spike_rate must be > 0, got {self.target_spike_rate}")
        if not 0 <= self.min_energy_ratio < 1:
            raise ConfigError(f"min_energy_ratio must lie in [0, 1), got {self.min_energy_ratio}")
        return self

    def budget(self, duration):
        if self.max_codes is not None:
            return int(self.max_codes)
        return codes_for_rate(self.target_spike_rate, duration)


def codes_for_rate(rate, duration):
    """Number of codes giving spike rate `rate` over `duration` (half-up rounding)."""
    return int(math.floor(rate * duration + 0.5))


def spike_rate(codes):
    """Spikes per second: number of codes over signal duration."""
    if codes.duration <= 0:
        raise ValidationError("duration must be > 0")
    return len(codes) / codes.duration


def cross_correlate(residual, kernel):
    """Sliding inner product H[t] = sum_u r[t + u] phi[u] for t in [0, len(r)).

    Shifts where the kernel overhangs the end see zeros there. Computed in
    the frequency domain.
    """
    r = np.asarray(getattr(residual, "samples", residual), dtype=float)
    phi = np.asarray(getattr(kernel, "samples", kernel), dtype=float)
    if len(phi) > len(r):
        raise SizingError(f"kernel length {len(phi)} exceeds signal length {len(r)}")
    nfft = sfft.next_fast_len(len(r) + len(phi) - 1, real=True)
    H = sfft.irfft(sfft.rfft(r, nfft) * np.conj(sfft.rfft(phi, nfft)), nfft)
    return H[: len(r)]


class Pursuit:
    """Incremental pursuit state over one residual buffer.

    Holds the residual, the correlation table H (kernel-major, shape (M, T))
    and per-block maxima so each iteration only touches the window the last
    atom changed. Used by ``encode`` and by the streaming encoder.
    """

    def __init__(self, samples, bank, absolute=False, backend=None, nfft=None):
        self.bank = bank
        self.nfft = nfft
        self.impl = _backend.get(backend)
        self.absolute = bool(absolute)
        x = np.asarray(samples, dtype=float)
        self.T = T = len(x)
        self.M = len(bank)
        self.R = np.ascontiguousarray(x.copy())
        self.energy = float(np.dot(self.R, self.R))
        self.H = bank.correlate_all(self.R, T, nfft)
        n_blocks = (T + BLOCK - 1) // BLOCK
        self.colmax = np.empty((self.M, n_blocks))
        self.colarg = np.empty((self.M, n_blocks), dtype=np.int64)
        self.block_max = np.empty(n_blocks)
        self.block_arg = np.empty(n_blocks, dtype=np.int64)
        self._refresh(0, T)
        self.gram, self.gram_off = bank.gram()
        self.m = []
        self.tau = []
        self.s = []
        self.e = [self.energy]

    def _recompute_tail(self):
        # Only rows within one kernel length of the end saw a truncated atom.
        T = self.T
        lo = T
        for span, nfft, idx, spec in self.bank.tail_groups():
            a = max(0, T - span + 1)
            X = sfft.rfft(self.R[a:], nfft)
            self.H[idx, a:] = sfft.irfft(X[None, :] * spec, nfft, axis=-1)[:, : T - a]
            lo = min(lo, a)
        self._refresh(lo, T)

    def _refresh(self, lo, hi):
        self.impl.refresh_blocks(self.H, self.colmax, self.colarg, self.block_max, self.block_arg,
                                 BLOCK, lo, hi, self.absolute)

    def run(self, n_codes, stop_energy=0.0):
        """Extract up to n_codes more atoms. Returns the stop status."""
        n_codes = int(n_codes)
        if n_codes <= 0 or self.T == 0:
            return _backend.DONE
        out_m = np.empty(n_codes, dtype=np.int64)
        out_tau = np.empty(n_codes, dtype=np.int64)
        out_s = np.empty(n_codes)
        out_e = np.empty(n_codes)
        bank = self.bank
        count = 0
        while True:
            count, self.energy, status = self.impl.run_pursuit(
                self.R, self.H, self.colmax, self.colarg, self.block_max, self.block_arg, BLOCK,
                bank.kernel_flat, bank.kernel_offsets, bank.lengths, self.gram, self.gram_off,
                n_codes, float(stop_energy), self.energy, self.absolute,
                out_m, out_tau, out_s, out_e, count,
            )
            if status != _backend.CLIPPED:
                break
            self._recompute_tail()
        self.m.extend(out_m[:count].tolist())
        self.tau.extend(out_tau[:count].tolist())
        self.s.extend(out_s[:count].tolist())
        self.e.extend(out_e[:count].tolist())
        return status


def encode(x, bank, params, backend=None):
    """Encode signal `x` into a CodeSet by matching pursuit over `bank`."""
    params = params.validate()
    if x.sample_rate != bank.sample_rate:
        raise ConfigError(f"signal rate {x.sample_rate} Hz != bank rate {bank.sample_rate} Hz")
    n_max = params.budget(x.duration)
    e0 = float(np.dot(x.samples, x.samples))
    if len(x) == 0 or e0 == 0.0:
        return CodeSet.empty(x.sample_rate, len(x), bank.fingerprint)
    p = Pursuit(x.samples, bank, absolute=params.absolute, backend=backend)
    p.run(n_max, params.min_energy_ratio * e0)
    energies = np.array(p.e)
    return CodeSet(
        kernel_index=np.array(p.m, dtype=np.int64) + 1,
        sample_index=np.array(p.tau, dtype=np.int64),
        amplitude=np.array(p.s),
        sample_rate=x.sample_rate,
        n_samples=len(x),
        residual_energy_ratio=float(min(1.0, max(0.0, energies[-1] / e0))),
        bank_fingerprint=bank.fingerprint,
        energies=energies,
    )


def reconstruct(codes, bank, duration=None):
    """Sum of amplitude-scaled kernels placed at the code times, clipped to the signal."""
    if duration is None:
        n = codes.n_samples
    else:
        n = int(round(duration * bank.sample_rate))
    M = len(bank)
    if len(codes) and (codes.kernel_index.min() < 1 or codes.kernel_index.max() > M):
        bad = int(codes.kernel_index[(codes.kernel_index < 1) | (codes.kernel_index > M)][0])
        raise ValidationError(f"unknown kernel index {bad}; bank has {M} kernels")
    out = np.zeros(n + bank.max_length)
    for m, tau, s in zip(codes.kernel_index, codes.sample_index, codes.amplitude):
        if not 0 <= tau < n:
            raise ValidationError(f"code at sample {tau} outside [0, {n})")
        phi = bank.kernels[m - 1].samples
        out[tau : tau + len(phi)] += s * phi
    return Signal(out[:n], bank.sample_rate)
