"""Evaluation measures for spike codes.

- ``precision``: fraction of signal energy captured by a reconstruction.
- ``psth`` / ``psth_similarity`` / ``similarity_report``: discriminability of
  spike patterns by correlating their binned rates.
- ``entropy``: per-channel and population entropy rates and redundancy.
- ``add_noise``: mix a noise recording in at an exact SNR.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .errors import InsufficientDataError, ValidationError

SNR_CAP_DB = 120.0


class DegenerateSimilarityWarning(RuntimeWarning):
    """A PSTH with zero variance was compared; its similarity is reported as 0."""


@dataclass
class PrecisionReport:
    precision: float
    spike_rate: float
    K: int | None = None
    strategy: str | None = None


@dataclass
class EntropyReport:
    per_channel_entropy_sum: float
    population_entropy: float
    redundancy: float
    per_channel: np.ndarray | None = None


@dataclass
class SimilarityReport:
    matrix: np.ndarray
    m_within: float
    m_among: float
    m_overall: float
    n_degenerate: int = 0


def precision(original, reconstructed):
    """1 - ||x - x_hat||^2 / ||x||^2, clamped to [0, 1]."""
    x = np.asarray(getattr(original, "samples", original), dtype=float)
    y = np.asarray(getattr(reconstructed, "samples", reconstructed), dtype=float)
    if x.shape != y.shape:
        raise ValidationError(f"length mismatch: {len(x)} vs {len(y)}")
    rate_x = getattr(original, "sample_rate", None)
    rate_y = getattr(reconstructed, "sample_rate", None)
    if rate_x is not None and rate_y is not None and rate_x != rate_y:
        raise ValidationError(f"rate mismatch: {rate_x} vs {rate_y}")
    ex = float(np.dot(x, x))
    if ex == 0.0:
        raise ValidationError("precision undefined for a zero-energy original")
    d = x - y
    return float(min(1.0, max(0.0, 1.0 - np.dot(d, d) / ex)))


def _bin_counts(spikes, bin_width, per_channel, n_bins=None):
    fs = spikes.sample_rate
    if n_bins is None:
        n_bins = max(1, int(math.ceil(spikes.duration / bin_width - 1e-9)))
    b = np.floor(spikes.sample_index / (bin_width * fs) + 1e-9).astype(np.int64)
    b = np.minimum(b, n_bins - 1)
    if not per_channel:
        return np.bincount(b, minlength=n_bins)[:n_bins].astype(float)
    C = spikes.num_channels
    flat = (spikes.channels - 1) * n_bins + b
    return np.bincount(flat, minlength=C * n_bins)[: C * n_bins].reshape(C, n_bins).astype(float)


def psth(spikes, bin_width=0.01, per_channel=False, n_bins=None):
    """Spike counts per time bin divided by the bin width (Hz).

    Channel-collapsed by default; ``per_channel=True`` gives shape (channels, bins).
    """
    if not bin_width > 0:
        raise ValidationError(f"bin_width must be > 0, got {bin_width}")
    return _bin_counts(spikes, bin_width, per_channel, n_bins) / bin_width


def psth_similarity(a, b):
    """Pearson correlation of two rate vectors; the shorter one is zero-padded."""
    a = np.ravel(np.asarray(a, dtype=float))
    b = np.ravel(np.asarray(b, dtype=float))
    n = max(len(a), len(b))
    a = np.pad(a, (0, n - len(a)))
    b = np.pad(b, (0, n - len(b)))
    a = a - a.mean()
    b = b - b.mean()
    na, nb = np.sqrt(np.dot(a, a)), np.sqrt(np.dot(b, b))
    if na == 0 or nb == 0:
        warnings.warn("zero-variance PSTH; similarity set to 0", DegenerateSimilarityWarning, stacklevel=2)
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def similarity_matrix(vectors):
    """Pairwise Pearson similarities; symmetric with unit diagonal.

    Returns (matrix, number of zero-variance vectors).
    """
    n = max(len(np.ravel(v)) for v in vectors)
    Z = np.zeros((len(vectors), n))
    for i, v in enumerate(vectors):
        v = np.ravel(v)
        Z[i, : len(v)] = v
    Z -= Z.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.einsum("ij,ij->i", Z, Z))
    degenerate = norms == 0
    Z[~degenerate] /= norms[~degenerate, None]
    S = Z @ Z.T
    S = np.clip(0.5 * (S + S.T), -1.0, 1.0)
    S[degenerate, :] = 0.0
    S[:, degenerate] = 0.0
    np.fill_diagonal(S, 1.0)
    if degenerate.any():
        warnings.warn(f"{int(degenerate.sum())} zero-variance PSTHs; similarity set to 0",
                      DegenerateSimilarityWarning, stacklevel=2)
    return S, int(degenerate.sum())


def _within_among(S, labels):
    labels = np.asarray(labels)
    same = labels[:, None] == labels[None, :]
    off = ~np.eye(len(labels), dtype=bool)
    within = S[same & off]
    among = S[~same]
    return float(within.mean()), float(among.mean())


def similarity_report(patterns, labels, bin_width=0.01, per_channel=True):
    """PSTH similarity matrix over labelled spike patterns with within/among-class means."""
    if len(patterns) != len(labels):
        raise ValidationError("patterns and labels differ in length")
    n_bins = max(max(1, int(math.ceil(p.duration / bin_width - 1e-9))) for p in patterns)
    vecs = [psth(p, bin_width, per_channel, n_bins) for p in patterns]
    S, n_deg = similarity_matrix(vecs)
    w, a = _within_among(S, labels)
    return SimilarityReport(S, w, a, w - a, n_deg)


def bootstrap_within_among(S, labels, n_boot=1000, seed=0, level=0.95):
    """Percentile CI for m_within - m_among, resampling patterns within each class."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    classes = [np.flatnonzero(labels == c) for c in np.unique(labels)]
    diffs = np.empty(n_boot)
    for r in range(n_boot):
        idx = np.concatenate([rng.choice(ix, size=len(ix), replace=True) for ix in classes])
        sub = S[np.ix_(idx, idx)]
        lab = labels[idx]
        same = lab[:, None] == lab[None, :]
        distinct = idx[:, None] != idx[None, :]
        w = sub[same & distinct].mean()
        a = sub[~same].mean()
        diffs[r] = w - a
    lo, hi = np.quantile(diffs, [(1 - level) / 2, 1 - (1 - level) / 2])
    return float(lo), float(hi)


def _plugin_entropy_bits(counts):
    # Miller-Madow corrected plug-in entropy of the per-bin count distribution.
    vals, freq = np.unique(counts, return_counts=True)
    n = counts.size
    p = freq / n
    h = -np.sum(p * np.log2(p))
    return float(h + (len(vals) - 1) / (2.0 * n * math.log(2))) if len(vals) > 1 else 0.0


def _total_correlation_bits(counts, window):
    """Gaussian total-correlation rate (bits/bin) from the cross-spectral coherence.

    Welch estimate with Hann-windowed half-overlapping segments, shrunk
    toward the identity by C / (C + n_segments).
    """
    C, B = counts.shape
    if C < 2:
        return 0.0
    hop = max(1, window // 2)
    starts = np.arange(0, B - window + 1, hop)
    segs = np.stack([counts[:, s : s + window] for s in starts])  # (n_seg, C, W)
    segs = segs - segs.mean(axis=2, keepdims=True)
    X = sfft.rfft(segs * np.hanning(window + 2)[1:-1], axis=2)  # (n_seg, C, F)
    S = np.einsum("scf,sdf->fcd", X, np.conj(X)) / len(starts)
    d = np.sqrt(np.real(np.einsum("fcc->fc", S)))
    live = d > 0
    tc = np.zeros(S.shape[0])
    alpha = C / (C + len(starts))
    for f in range(S.shape[0]):
        keep = live[f]
        if keep.sum() < 2:
            continue
        Sf = S[f][np.ix_(keep, keep)]
        df = d[f][keep]
        coh = Sf / np.outer(df, df)
        coh = (1 - alpha) * coh + alpha * np.eye(len(df))
        sign, logdet = np.linalg.slogdet(coh)
        tc[f] = np.inf if sign <= 0 else -0.5 * logdet / math.log(2)
    return float(np.mean(tc))


def _surrogate_tc_bits(counts, window, n_surrogates, seed):
    # Mean TC after independent circular shifts: same spectra, no coupling.
    if n_surrogates <= 0 or counts.shape[0] < 2:
        return 0.0
    rng = np.random.default_rng(seed)
    B = counts.shape[1]
    vals = []
    for _ in range(n_surrogates):
        shifts = rng.integers(0, B, size=counts.shape[0])
        vals.append(_total_correlation_bits(
            np.stack([np.roll(c, k) for c, k in zip(counts, shifts)]), window))
    return float(np.mean(vals))


def entropy(spikes, bin_width=0.005, window=32, n_surrogates=4, seed=0):
    """Entropy rates (bits/s) of the binned spike counts.

    Per-channel entropies are plug-in entropies of each channel's count
    distribution. The population entropy subtracts the inter-channel total
    correlation, estimated under a Gaussian approximation from the
    cross-spectral coherence and debiased by the mean over circularly
    shifted surrogates. It is never below the largest single-channel
    entropy. Redundancy is 1 - population / sum(per-channel).
    """
    if not bin_width > 0 or window < 2:
        raise ValidationError("bin_width must be > 0 and window >= 2")
    min_bins = 8 * window
    n_bins = int(math.ceil(spikes.duration / bin_width - 1e-9))
    if n_bins < min_bins:
        raise InsufficientDataError(
            f"pattern lasts {spikes.duration:.4g} s; need at least {min_bins * bin_width:.4g} s "
            f"({min_bins} bins of {bin_width} s)"
        )
    counts = _bin_counts(spikes, bin_width, True, n_bins)
    active = counts.sum(axis=1) > 0
    counts = counts[active]
    h = np.array([_plugin_entropy_bits(c) for c in counts])
    total = float(h.sum())
    if total == 0.0:
        return EntropyReport(0.0, 0.0, 0.0, h / bin_width)
    tc = _total_correlation_bits(counts, window)
    if np.isfinite(tc):
        tc -= _surrogate_tc_bits(counts, window, n_surrogates, seed)
    tc = min(max(tc, 0.0), total - float(h.max()))
    pop = total - tc
    return EntropyReport(total / bin_width, pop / bin_width, float(tc / total), h / bin_width)


def add_noise(x, noise, snr_db, seed=0):
    """Return x + g * noise with g set so the mixture has exactly `snr_db` SNR.

    Longer noise is cropped at a seeded random offset; shorter noise is looped.
    """
    from .codec import Signal

    xs = x.samples
    n = np.asarray(getattr(noise, "samples", noise), dtype=float)
    if len(n) == 0 or not np.any(n):
        raise ValidationError("noise has zero energy")
    rng = np.random.default_rng(seed)
    if len(n) >= len(xs):
        off = int(rng.integers(0, len(n) - len(xs) + 1))
        seg = n[off : off + len(xs)]
    else:
        off = int(rng.integers(0, len(n)))
        seg = np.resize(np.roll(n, -off), len(xs))
    en = float(np.dot(seg, seg))
    if en == 0.0:
        raise ValidationError("selected noise segment has zero energy")
    snr = min(float(snr_db), SNR_CAP_DB)
    ex = float(np.dot(xs, xs))
    g = math.sqrt(ex / (en * 10.0 ** (snr / 10.0)))
    return Signal(xs + g * seg, x.sample_rate)


def measured_snr_db(clean, noisy):
    c = np.asarray(getattr(clean, "samples", clean), dtype=float)
    d = np.asarray(getattr(noisy, "samples", noisy), dtype=float) - c
    return 10.0 * math.log10(np.dot(c, c) / np.dot(d, d))
