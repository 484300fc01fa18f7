"""Gammatone kernel bank.

Kernels are unit-energy Gammatone impulse responses whose center frequencies
are equally spaced on the ERB-rate scale. The bank also caches the frequency
domain transforms and the kernel-to-kernel cross-correlations that the
pursuit engine needs.
"""
from __future__ import annotations

import hashlib
import json
import math
import threading
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import fft as sfft
from scipy.optimize import brentq

from .errors import ConfigError


def erb(f):
    """Equivalent rectangular bandwidth in Hz (Glasberg & Moore)."""
    return 24.7 * (4.37 * np.asarray(f, dtype=float) / 1000.0 + 1.0)


def erb_rate(f):
    return 21.4 * np.log10(4.37 * np.asarray(f, dtype=float) / 1000.0 + 1.0)


def erb_rate_inv(e):
    return (10.0 ** (np.asarray(e, dtype=float) / 21.4) - 1.0) * 1000.0 / 4.37


def eval_gammatone(t, f, b, n, phase=0.0, a=1.0):
    """Gammatone impulse response a t^(n-1) exp(-2 pi b t) cos(2 pi f t + phase)."""
    t = np.asarray(t, dtype=float)
    return a * t ** (n - 1) * np.exp(-2.0 * np.pi * b * t) * np.cos(2.0 * np.pi * f * t + phase)


def _envelope_cutoff_x(n, cutoff):
    # Dimensionless x = 2 pi b t where the gamma envelope decays to `cutoff` of its peak.
    if n == 1:
        return -math.log(cutoff)
    p = n - 1
    target = math.log(cutoff)

    def g(x):
        return p * math.log(x / p) - (x - p) - target

    hi = 2.0 * p + 10.0
    while g(hi) > 0:
        hi *= 2.0
    return brentq(g, float(p), hi, xtol=1e-13)


@dataclass(frozen=True)
class KernelBankConfig:
    num_kernels: int = 40
    sample_rate: float = 16000.0
    f_min: float = 20.0
    f_max: float = 8000.0
    order: int = 4
    phase: float = 0.0
    envelope_cutoff: float = 1e-3

    def validate(self):
        if int(self.num_kernels) != self.num_kernels or self.num_kernels < 1:
            raise ConfigError(f"num_kernels must be an integer >= 1, got {self.num_kernels}")
        if int(self.order) != self.order or self.order < 1:
            raise ConfigError(f"order must be an integer >= 1, got {self.order}")
        if not self.sample_rate > 0:
            raise ConfigError(f"sample_rate must be > 0, got {self.sample_rate}")
        if not 0 < self.f_min:
            raise ConfigError(f"f_min must be > 0, got {self.f_min}")
        if not self.f_min < self.f_max:
            raise ConfigError(f"f_min must be < f_max, got f_min={self.f_min}, f_max={self.f_max}")
        if self.f_max > self.sample_rate / 2:
            raise ConfigError(
                f"f_max must be <= sample_rate/2 = {self.sample_rate / 2}, got {self.f_max}"
            )
        if not 0 < self.envelope_cutoff < 1:
            raise ConfigError(f"envelope_cutoff must lie in (0, 1), got {self.envelope_cutoff}")
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        unknown = set(d) - set(known)
        if unknown:
            raise ConfigError(f"unknown kernel bank keys: {sorted(unknown)}")
        return cls(**known).validate()


@dataclass(frozen=True, eq=False)
class Kernel:
    index: int
    center_frequency: float
    bandwidth: float
    samples: np.ndarray = field(repr=False)

    @property
    def length(self):
        return len(self.samples)


class KernelBank:
    """Immutable ordered set of kernels plus lazily built caches.

    Caches are filled under a lock, so one bank can be shared by threads.
    """

    def __init__(self, config, kernels):
        self.config = config
        self.kernels = tuple(kernels)
        self._lock = threading.Lock()
        self._spectra = {}
        self._gram = None
        self._tail_groups = None
        self.lengths = np.array([k.length for k in self.kernels], dtype=np.int64)
        self.max_length = int(self.lengths.max())
        self.kernel_offsets = np.concatenate([[0], np.cumsum(self.lengths)]).astype(np.int64)
        self.kernel_flat = np.concatenate([k.samples for k in self.kernels])
        self.kernel_flat.setflags(write=False)
        h = hashlib.sha256(json.dumps(config.to_dict(), sort_keys=True).encode())
        h.update(self.kernel_flat.tobytes())
        self.fingerprint = h.hexdigest()[:16]

    def __len__(self):
        return len(self.kernels)

    def __getitem__(self, i):
        return self.kernels[i]

    @property
    def sample_rate(self):
        return self.config.sample_rate

    @property
    def center_frequencies(self):
        return np.array([k.center_frequency for k in self.kernels])

    def spectra(self, nfft):
        """rfft of every kernel zero-padded to nfft, shape (M, nfft//2 + 1)."""
        nfft = int(nfft)
        if nfft < self.max_length:
            raise ValueError(f"nfft={nfft} shorter than longest kernel ({self.max_length})")
        with self._lock:
            spec = self._spectra.get(nfft)
            if spec is None:
                padded = np.zeros((len(self), nfft))
                for j, k in enumerate(self.kernels):
                    padded[j, : k.length] = k.samples
                spec = sfft.rfft(padded, axis=-1)
                spec.setflags(write=False)
                self._spectra[nfft] = spec
        return spec

    def correlate_all(self, x, n_out=None, nfft=None):
        """Zero-padded correlation of x against every kernel.

        Returns H with shape (M, n_out) where H[m, t] = sum_u x[t + u] phi_m[u],
        samples of x beyond its end treated as zero.
        """
        x = np.asarray(x, dtype=float)
        n_out = len(x) if n_out is None else int(n_out)
        need = len(x) + self.max_length - 1
        if nfft is None:
            # Power of two keeps the spectra cache small.
            nfft = 1 << (need - 1).bit_length()
        elif nfft < need:
            raise ValueError(f"nfft={nfft} < {need} needed for linear correlation")
        X = sfft.rfft(x, nfft)
        H = sfft.irfft(X[None, :] * np.conj(self.spectra(nfft)), nfft, axis=-1)
        return np.ascontiguousarray(H[:, :n_out])

    def tail_groups(self):
        """Kernels grouped by the FFT size that suffices for their end-of-signal rows.

        Returns a list of (span, nfft, indices, conj spectra). Correlating the
        last span - 1 samples at size nfft gives exact zero-padded rows
        [T - span + 1, T) for every kernel in the group.
        """
        with self._lock:
            if self._tail_groups is None:
                sizes = np.array([1 << max(0, int(2 * L - 3).bit_length()) for L in self.lengths])
                groups = []
                for nfft in np.unique(sizes):
                    idx = np.flatnonzero(sizes == nfft)
                    padded = np.zeros((len(idx), int(nfft)))
                    for j, i in enumerate(idx):
                        padded[j, : self.lengths[i]] = self.kernels[i].samples
                    spec = np.conj(sfft.rfft(padded, axis=-1))
                    spec.setflags(write=False)
                    groups.append((int(self.lengths[idx].max()), int(nfft), idx, spec))
                self._tail_groups = groups
        return self._tail_groups

    def gram(self):
        """Full cross-correlations between every kernel pair.

        Returns (flat, offsets). For the pair (i, m) the slice
        flat[offsets[i, m] : offsets[i, m] + L_i + L_m - 1] holds
        sum_u phi_i[u] phi_m[u - d] for lags d = -(L_m - 1) .. L_i - 1.
        """
        with self._lock:
            if self._gram is None:
                M = len(self)
                offsets = np.zeros((M, M), dtype=np.int64)
                chunks = []
                pos = 0
                for i, ki in enumerate(self.kernels):
                    for m, km in enumerate(self.kernels):
                        c = np.correlate(ki.samples, km.samples, mode="full")
                        offsets[i, m] = pos
                        chunks.append(c)
                        pos += len(c)
                flat = np.concatenate(chunks)
                flat.setflags(write=False)
                self._gram = (flat, offsets)
        return self._gram

    def to_json(self):
        return json.dumps(self.config.to_dict(), indent=2, sort_keys=True)


def kernel_length(f, config):
    b = 1.019 * float(erb(f))
    x_cut = _envelope_cutoff_x(config.order, config.envelope_cutoff)
    return int(math.floor(x_cut / (2.0 * math.pi * b) * config.sample_rate)) + 1


def center_frequencies(config):
    if config.num_kernels == 1:
        return np.array([float(config.f_min)])
    e = np.linspace(erb_rate(config.f_min), erb_rate(config.f_max), config.num_kernels)
    return erb_rate_inv(e)


def build_bank(config=None):
    """Build the kernel bank described by `config` (defaults: 40 kernels, 20 Hz - 8 kHz)."""
    config = (config or KernelBankConfig()).validate()
    fs = config.sample_rate
    kernels = []
    for i, f in enumerate(center_frequencies(config)):
        f = float(f)
        b = 1.019 * float(erb(f))
        n_samp = kernel_length(f, config)
        t = np.arange(n_samp) / fs
        g = eval_gammatone(t, f, b, config.order, config.phase)
        norm = np.sqrt(np.dot(g, g))
        if norm == 0:
            raise ConfigError(f"kernel {i + 1} at {f:.3f} Hz has zero energy; raise sample_rate")
        g = g / norm
        g.setflags(write=False)
        kernels.append(Kernel(index=i + 1, center_frequency=f, bandwidth=b, samples=g))
    return KernelBank(config, kernels)
