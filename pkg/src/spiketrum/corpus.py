"""Synthetic signals so every experiment runs without external datasets."""
from __future__ import annotations

import numpy as np
from scipy import signal as sps

from .codec import CodeSet, Signal

EVENT_CLASSES = (
    "tone", "up_chirp", "down_chirp", "noise_burst", "am_tone",
    "harmonic", "clicks", "rumble", "double_beep", "bell",
)


def kernel_sum_signal(bank, n_atoms, rng, n_samples=None, amplitudes="exponential",
                      non_overlapping=False):
    """Sum of randomly placed, scaled kernels. Returns (signal, planted codes).

    With ``non_overlapping`` every atom gets its own slot of 2*L_max samples so
    any kernel shift overlaps at most one atom; amplitudes are then positive.
    """
    M = len(bank)
    Lmax = bank.max_length
    m = rng.integers(1, M + 1, size=n_atoms)
    if amplitudes == "exponential":
        s = rng.exponential(1.0, size=n_atoms)
    elif amplitudes == "uniform":
        s = rng.uniform(0.2, 1.0, size=n_atoms)
    else:
        raise ValueError(f"unknown amplitude law {amplitudes!r}")
    if non_overlapping:
        slot = 2 * Lmax
        n_samples = n_samples or n_atoms * slot
        if n_samples < n_atoms * slot:
            raise ValueError("signal too short for non-overlapping placement")
        s = np.abs(s) + 0.05
        tau = np.array([j * slot + rng.integers(0, Lmax - bank.lengths[mj - 1] + 1)
                        for j, mj in enumerate(m)])
    else:
        if n_samples is None:
            raise ValueError("n_samples required for overlapping placement")
        tau = np.array([rng.integers(0, n_samples - bank.lengths[mj - 1] + 1) for mj in m])
    x = np.zeros(n_samples)
    for mj, tj, sj in zip(m, tau, s):
        phi = bank.kernels[mj - 1].samples
        x[tj : tj + len(phi)] += sj * phi
    planted = CodeSet(m, tau, s, bank.sample_rate, n_samples, None, bank.fingerprint)
    return Signal(x, bank.sample_rate), planted


def _envelope(n, fs, attack, decay):
    t = np.arange(n) / fs
    return (1 - np.exp(-t / attack)) * np.exp(-t / decay)


def _bandnoise(n, fs, lo, hi, rng, order=4):
    sos = sps.butter(order, [lo, hi], btype="bandpass", fs=fs, output="sos")
    return sps.sosfilt(sos, rng.standard_normal(n))


def audio_like_signal(n_samples, fs, rng):
    """Random mixture of decaying harmonic tones, band noise and onsets."""
    t = np.arange(n_samples) / fs
    x = np.zeros(n_samples)
    for _ in range(rng.integers(1, 4)):
        f0 = rng.uniform(100, 800)
        onset = rng.integers(0, n_samples // 2)
        env = np.zeros(n_samples)
        env[onset:] = _envelope(n_samples - onset, fs, 0.005, rng.uniform(0.05, 0.4))
        for h in range(1, rng.integers(2, 6)):
            if h * f0 < fs / 2:
                x += env * rng.uniform(0.1, 1.0) / h * np.sin(2 * np.pi * h * f0 * t + rng.uniform(0, 2 * np.pi))
    lo = rng.uniform(100, 2000)
    x += 0.1 * _bandnoise(n_samples, fs, lo, min(lo * rng.uniform(1.5, 3.0), 0.45 * fs), rng)
    return Signal(x / (np.max(np.abs(x)) + 1e-12), fs)


def sound_event(cls, rng, duration=0.4, fs=16000.0):
    """One jittered instance of the named event class, peak-normalized."""
    n = int(round(duration * fs))
    t = np.arange(n) / fs
    j = lambda: rng.uniform(0.97, 1.03)  # noqa: E731
    onset = int(rng.integers(0, int(0.01 * fs)))
    if cls == "tone":
        x = np.sin(2 * np.pi * 440 * j() * t) * _envelope(n, fs, 0.01, 0.15)
    elif cls == "up_chirp":
        x = sps.chirp(t, 300 * j(), duration, 3000 * j()) * _envelope(n, fs, 0.01, 1.0)
    elif cls == "down_chirp":
        x = sps.chirp(t, 3000 * j(), duration, 300 * j()) * _envelope(n, fs, 0.01, 1.0)
    elif cls == "noise_burst":
        x = _bandnoise(n, fs, 2000, 4000, rng) * _envelope(n, fs, 0.002, 0.05)
    elif cls == "am_tone":
        x = np.sin(2 * np.pi * 1000 * j() * t) * (1 + np.sin(2 * np.pi * 8 * j() * t)) * 0.5
    elif cls == "harmonic":
        f0 = 150 * j()
        x = sum(np.sin(2 * np.pi * h * f0 * t) / h for h in range(1, 12)) * _envelope(n, fs, 0.02, 0.3)
    elif cls == "clicks":
        x = np.zeros(n)
        period = int(0.02 * fs * j())
        x[::period] = 1.0
        x = sps.sosfilt(sps.butter(2, [1000, 6000], btype="bandpass", fs=fs, output="sos"), x)
    elif cls == "rumble":
        x = _bandnoise(n, fs, 50, 300, rng, order=2) * _envelope(n, fs, 0.05, 1.0)
    elif cls == "double_beep":
        x = np.zeros(n)
        for start in (0.0, 0.2):
            env = np.clip((t - start) / 0.005, 0, 1) * (t < start + 0.1)
            x += env * (np.sin(2 * np.pi * 600 * j() * t) + np.sin(2 * np.pi * 1800 * j() * t))
    elif cls == "bell":
        f = 2500 * j()
        x = sum(a * np.sin(2 * np.pi * f * r * t) for a, r in ((1, 1), (0.6, 2.76), (0.4, 5.4 / 2.76)))
        x = x * _envelope(n, fs, 0.001, 0.08)
    else:
        raise ValueError(f"unknown event class {cls!r}")
    x = np.concatenate([np.zeros(onset), x[: n - onset]])
    x = x + 1e-3 * rng.standard_normal(n)
    return Signal(x / np.max(np.abs(x)) * rng.uniform(0.5, 1.0), fs)


def sound_event_corpus(n_classes=10, n_per_class=50, duration=0.4, fs=16000.0, seed=0):
    """Labelled corpus: list of signals and integer labels 0..n_classes-1."""
    if not 1 <= n_classes <= len(EVENT_CLASSES):
        raise ValueError(f"n_classes must be in 1..{len(EVENT_CLASSES)}")
    rng = np.random.default_rng(seed)
    signals, labels = [], []
    for c in range(n_classes):
        for _ in range(n_per_class):
            signals.append(sound_event(EVENT_CLASSES[c], rng, duration, fs))
            labels.append(c)
    return signals, np.array(labels)


def babble(n_samples, fs=16000.0, n_sources=8, seed=0):
    """Babble stand-in: sum of syllable-rate modulated, speech-band noise sources."""
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / fs
    x = np.zeros(n_samples)
    for _ in range(n_sources):
        lo = rng.uniform(150, 500)
        src = _bandnoise(n_samples, fs, lo, rng.uniform(2000, 4000), rng, order=2)
        rate = rng.uniform(3, 8)
        mod = 0.5 * (1 + np.sin(2 * np.pi * rate * t + rng.uniform(0, 2 * np.pi)))
        x += src * mod**2
    return Signal(x / np.max(np.abs(x)), fs)
