"""File formats: code/spike CSV with JSON sidecars, WAV audio, atomic writes.

Floats are written with ``repr`` so every file reads back bit-exactly.
Sidecars live next to the CSV with the suffix replaced by ``.json``.
"""
from __future__ import annotations

import contextlib
import csv
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

from .codec import CodeSet, Signal
from .errors import DataIOError, ValidationError
from .itp import IntensityMap, Spiketrum

CODE_HEADER = ["kernel_index", "time_s", "amplitude"]
SPIKE_HEADER = ["channel", "time_s"]


def sidecar_path(path):
    return Path(path).with_suffix(".json")


@contextlib.contextmanager
def atomic_outputs():
    """Collect (tmp, final) pairs and rename them all only if the block succeeds."""
    pending = []

    def open_tmp(path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        os.close(fd)
        pending.append((Path(tmp), path))
        return Path(tmp)

    try:
        yield open_tmp
    except BaseException:
        for tmp, _ in pending:
            tmp.unlink(missing_ok=True)
        raise
    for tmp, final in pending:
        os.replace(tmp, final)


def write_text_atomic(path, text):
    with atomic_outputs() as tmp:
        tmp(path).write_text(text)


def _fmt(x):
    return repr(float(x))


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_codes(tmp_csv, tmp_json, codes):
    with open(tmp_csv, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(CODE_HEADER)
        for m, n, s in zip(codes.kernel_index, codes.sample_index, codes.amplitude):
            w.writerow([int(m), _fmt(n / codes.sample_rate), _fmt(s)])
    meta = {
        "bank_fingerprint": codes.bank_fingerprint,
        "sample_rate": float(codes.sample_rate),
        "n_samples": int(codes.n_samples),
        "duration": codes.duration,
        "residual_energy_ratio": codes.residual_energy_ratio,
    }
    Path(tmp_json).write_text(_dump_json(meta))


def write_codes(path, codes):
    with atomic_outputs() as tmp:
        _write_codes(tmp(path), tmp(sidecar_path(path)), codes)


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as e:
        raise DataIOError(f"missing sidecar {path}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e


def _read_rows(path, header):
    try:
        f = open(path, newline="")
    except OSError as e:
        raise DataIOError(f"cannot read {path}: {e.strerror}") from e
    with f:
        reader = csv.reader(f)
        first = next(reader, None)
        if first != header:
            raise ValidationError(f"{path}:1: expected header {','.join(header)}, got {first}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValidationError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            rows.append((lineno, row))
    return rows


def read_codes(path):
    meta = _read_json(sidecar_path(path))
    fs = float(meta["sample_rate"])
    m, n, s = [], [], []
    for lineno, row in _read_rows(path, CODE_HEADER):
        try:
            m.append(int(row[0]))
            n.append(int(round(float(row[1]) * fs)))
            s.append(float(row[2]))
        except ValueError as e:
            raise ValidationError(f"{path}:{lineno}: {e}") from e
    return CodeSet(m, n, s, fs, int(meta["n_samples"]), meta.get("residual_energy_ratio"),
                   meta.get("bank_fingerprint", ""))


def _write_spikes(tmp_csv, tmp_json, spikes):
    with open(tmp_csv, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SPIKE_HEADER)
        for h, n in zip(spikes.channels, spikes.sample_index):
            w.writerow([int(h), _fmt(n / spikes.sample_rate)])
    imap = spikes.intensity_map
    meta = {
        "K": imap.K,
        "M": int(spikes.M),
        "strategy": imap.strategy,
        "levels": [float(c) for c in imap.levels],
        "c_min": float(imap.c_min),
        "normalization_scale": float(imap.normalization_scale),
        "duration": spikes.duration,
        "n_samples": int(spikes.n_samples),
        "sample_rate": float(spikes.sample_rate),
        "bank_fingerprint": spikes.bank_fingerprint,
        "negative_events": [] if spikes.negative is None
        else [int(i) for i in np.flatnonzero(spikes.negative)],
    }
    if spikes.scales is not None:
        meta["event_scales"] = _run_lengths(spikes.scales)
    Path(tmp_json).write_text(_dump_json(meta))


def _run_lengths(values):
    # [[first_event, value], ...] for each run of equal values.
    if len(values) == 0:
        return []
    starts = np.flatnonzero(np.r_[True, values[1:] != values[:-1]])
    return [[int(i), float(values[i])] for i in starts]


def _expand_runs(runs, n):
    out = np.empty(n)
    bounds = [r[0] for r in runs] + [n]
    if runs and bounds[0] != 0:
        raise ValidationError("event_scales must start at event 0")
    for (start, value), stop in zip(runs, bounds[1:]):
        out[start:stop] = value
    return out


def write_spikes(path, spikes):
    with atomic_outputs() as tmp:
        _write_spikes(tmp(path), tmp(sidecar_path(path)), spikes)


def read_spikes(path):
    meta = _read_json(sidecar_path(path))
    fs = float(meta["sample_rate"])
    h, n = [], []
    for lineno, row in _read_rows(path, SPIKE_HEADER):
        try:
            h.append(int(row[0]))
            n.append(int(round(float(row[1]) * fs)))
        except ValueError as e:
            raise ValidationError(f"{path}:{lineno}: {e}") from e
    imap = IntensityMap(meta["strategy"], np.array(meta["levels"], dtype=float),
                        float(meta["normalization_scale"]), float(meta.get("c_min", 1e-3)))
    neg_idx = meta.get("negative_events") or []
    negative = None
    if neg_idx:
        negative = np.zeros(len(h), dtype=bool)
        negative[neg_idx] = True
    scales = None
    if "event_scales" in meta:
        scales = _expand_runs(meta["event_scales"], len(h))
    spikes = Spiketrum(h, n, fs, int(meta["n_samples"]), imap, int(meta["M"]),
                       meta.get("bank_fingerprint", ""), negative, scales)
    if imap.K != int(meta["K"]):
        raise ValidationError(f"{path}: sidecar K={meta['K']} but {imap.K} levels listed")
    return spikes.validate()


def read_wav(path, target_rate=None):
    """Read a mono WAV as float in [-1, 1], resampling to target_rate if given.

    Returns (signal, original_rate).
    """
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError as e:
        raise DataIOError(f"{path}: no such file") from e
    except (ValueError, OSError) as e:
        raise DataIOError(f"{path}: not a readable PCM WAV ({e}); convert with e.g. "
                          "`sox in.xxx -c 1 out.wav`") from e
    if data.ndim > 1 and data.shape[1] > 1:
        raise DataIOError(f"{path}: {data.shape[1]} channels; only mono is supported, "
                          "downmix first (e.g. `sox in.wav -c 1 out.wav`)")
    data = data.reshape(-1)
    if data.dtype == np.uint8:
        x = (data.astype(float) - 128.0) / 128.0
    elif np.issubdtype(data.dtype, np.integer):
        x = data.astype(float) / float(-np.iinfo(data.dtype).min)
    else:
        x = data.astype(float)
    if target_rate is not None and rate != target_rate:
        x = resample(x, rate, target_rate)
        return Signal(x, float(target_rate)), rate
    return Signal(x, float(rate)), rate


def resample(x, rate_in, rate_out):
    """Polyphase windowed-sinc resampling."""
    frac = Fraction(int(round(rate_out)), int(round(rate_in))).limit_denominator(10000)
    return resample_poly(x, frac.numerator, frac.denominator)


def write_wav(path, signal):
    with atomic_outputs() as tmp:
        wavfile.write(tmp(path), int(round(signal.sample_rate)), signal.samples.astype(np.float32))
