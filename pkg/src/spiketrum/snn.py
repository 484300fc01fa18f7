"""Single-layer LIF readout trained with the tempotron rule.

Training uses the binary tempotron: a neuron either fires on a pattern or
not, and errors are corrected at the time of maximal potential. Inference
lets neurons fire repeatedly (threshold and reset) so that groups can be
compared by spike count. All potentials are evaluated on a regular grid of
step ``dt``; input spike times are used exactly.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from . import _backend
from .errors import ConfigError, ValidationError

DEFAULT_DT = 1e-3
STA_WINDOW = 0.120


def psp_peak_time(tau_m, tau_s):
    return tau_m * tau_s / (tau_m - tau_s) * math.log(tau_m / tau_s)


def psp_norm(tau_m, tau_s):
    """V0 such that the double-exponential kernel peaks at exactly 1."""
    tp = psp_peak_time(tau_m, tau_s)
    return 1.0 / (math.exp(-tp / tau_m) - math.exp(-tp / tau_s))


def psp_kernel(dt, tau_m=0.02, tau_s=0.005):
    """V0 (exp(-dt/tau_m) - exp(-dt/tau_s)) for dt >= 0, zero before."""
    dt = np.asarray(dt, dtype=float)
    pos = np.maximum(dt, 0.0)
    k = psp_norm(tau_m, tau_s) * (np.exp(-pos / tau_m) - np.exp(-pos / tau_s))
    return np.where(dt > 0, k, 0.0)


@dataclass
class LifNeuron:
    weights: np.ndarray
    membrane_tau: float = 0.02
    synaptic_tau: float = 0.005
    threshold: float = 1.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).copy()
        self.validate()

    def validate(self):
        if not self.membrane_tau > self.synaptic_tau > 0:
            raise ConfigError(
                f"need membrane_tau > synaptic_tau > 0, got {self.membrane_tau}, {self.synaptic_tau}"
            )
        if not self.threshold > 0:
            raise ConfigError(f"threshold must be > 0, got {self.threshold}")
        if self.weights.ndim != 1:
            raise ConfigError("weights must be a vector")
        return self

    @property
    def n_inputs(self):
        return len(self.weights)

    def to_dict(self):
        return {"weights": self.weights.tolist(), "membrane_tau": self.membrane_tau,
                "synaptic_tau": self.synaptic_tau, "threshold": self.threshold}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["weights"], dtype=float), float(d["membrane_tau"]),
                   float(d["synaptic_tau"]), float(d["threshold"]))


@dataclass
class ReadoutGroups:
    """label -> neuron indices. Groups are disjoint and cover every neuron."""

    groups: dict

    def __post_init__(self):
        self.groups = {lab: [int(i) for i in ix] for lab, ix in sorted(self.groups.items())}
        seen = [i for ix in self.groups.values() for i in ix]
        if len(seen) != len(set(seen)):
            raise ConfigError("readout groups overlap")
        if sorted(seen) != list(range(len(seen))):
            raise ConfigError("readout groups must cover neurons 0..n-1 exactly once")

    @classmethod
    def uniform(cls, labels, per_group):
        labels = sorted(set(labels))
        return cls({lab: list(range(j * per_group, (j + 1) * per_group)) for j, lab in enumerate(labels)})

    @property
    def labels(self):
        return list(self.groups)

    @property
    def n_neurons(self):
        return sum(len(ix) for ix in self.groups.values())

    def label_of(self):
        out = [None] * self.n_neurons
        for lab, ix in self.groups.items():
            for i in ix:
                out[i] = lab
        return out

    def to_dict(self):
        return {"groups": [[lab, ix] for lab, ix in self.groups.items()]}

    @classmethod
    def from_dict(cls, d):
        return cls({lab: ix for lab, ix in d["groups"]})


def make_neurons(n_neurons, n_inputs, seed=0, init_scale=0.01, membrane_tau=0.02,
                 synaptic_tau=0.005, threshold=1.0):
    rng = np.random.default_rng(seed)
    return [LifNeuron(rng.normal(0.0, init_scale, n_inputs), membrane_tau, synaptic_tau, threshold)
            for _ in range(n_neurons)]


def _grid_steps(duration, dt):
    return int(math.ceil(duration / dt - 1e-9)) + 1


def psp_matrix(pattern, tau_m=0.02, tau_s=0.005, dt=DEFAULT_DT, n_steps=None):
    """Summed PSP per input channel on the grid t_k = k dt, shape (n_steps, channels).

    P[k, c] = sum over spikes t_i < t_k of channel c of the PSP kernel at t_k - t_i.
    """
    n = n_steps or _grid_steps(pattern.duration, dt)
    C = pattern.num_channels
    t = pattern.times
    c = np.asarray(pattern.channels, dtype=np.int64) - 1
    k = np.floor(t / dt).astype(np.int64) + 1
    keep = k < n
    k, c, t = k[keep], c[keep], t[keep]
    lag = np.maximum(k * dt - t, 0.0)
    out = np.zeros((n, C))
    for tau, sign in ((tau_m, 1.0), (tau_s, -1.0)):
        d = np.zeros((n, C))
        np.add.at(d, (k, c), np.exp(-lag / tau))
        out += sign * lfilter([1.0], [1.0, -math.exp(-dt / tau)], d, axis=0)
    return psp_norm(tau_m, tau_s) * out


def _shared_params(neurons):
    if not neurons:
        raise ConfigError("no neurons")
    tm = {n.membrane_tau for n in neurons}
    ts = {n.synaptic_tau for n in neurons}
    ni = {n.n_inputs for n in neurons}
    if len(tm) > 1 or len(ts) > 1:
        raise ConfigError("all neurons in a layer must share membrane and synaptic time constants")
    if len(ni) > 1:
        raise ConfigError("all neurons must have the same number of inputs")
    return tm.pop(), ts.pop(), ni.pop()


def _check_channels(pattern, n_inputs):
    if pattern.num_channels != n_inputs:
        raise ValidationError(
            f"pattern has {pattern.num_channels} channels but neurons have {n_inputs} weights"
        )


def membrane_potential(neuron, pattern, t, shunt=True, dt=DEFAULT_DT):
    """Potential at time(s) t, evaluated exactly from the input spike times.

    With ``shunt`` the first threshold crossing (located on the dt grid) cuts
    off all later input, as in the binary tempotron.
    """
    _check_channels(pattern, neuron.n_inputs)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0) or np.any(t > pattern.duration + 1e-12):
        raise ValidationError("t must lie within the pattern duration")
    ti = pattern.times
    w = neuron.weights[np.asarray(pattern.channels, dtype=np.int64) - 1]
    cutoff = np.inf
    if shunt:
        P = psp_matrix(pattern, neuron.membrane_tau, neuron.synaptic_tau, dt)
        V = P @ neuron.weights
        above = np.flatnonzero(V >= neuron.threshold)
        if len(above):
            cutoff = above[0] * dt
    K = psp_kernel(t[:, None] - ti[None, :], neuron.membrane_tau, neuron.synaptic_tau)
    K[:, ti >= cutoff] = 0.0
    v = K @ w
    return v if v.size > 1 else float(v[0])


class _Layer:
    """Stacked weights of a list of neurons sharing time constants."""

    def __init__(self, neurons, dt):
        self.neurons = neurons
        self.tau_m, self.tau_s, self.n_inputs = _shared_params(neurons)
        self.dt = dt
        self.W = np.column_stack([n.weights for n in neurons])
        self.theta = np.array([n.threshold for n in neurons])

    def psp(self, pattern):
        _check_channels(pattern, self.n_inputs)
        return psp_matrix(pattern, self.tau_m, self.tau_s, self.dt)

    def spike_counts(self, P, backend=None):
        return self.raster(P, backend).sum(axis=0)

    def raster(self, P, backend=None):
        drive = np.ascontiguousarray((P @ self.W) / self.theta)
        return _backend.get(backend).lif_run(drive, 1.0, math.exp(-self.dt / self.tau_m))

    def write_back(self):
        for j, n in enumerate(self.neurons):
            n.weights = self.W[:, j].copy()


def _winner(counts, groups):
    labels = groups.labels
    totals = np.array([counts[groups.groups[lab]].sum() for lab in labels])
    best = totals.max()
    tied = np.flatnonzero(totals == best)
    return labels[tied[0]], bool(len(tied) > 1), totals


def classify(neurons, groups, pattern, dt=DEFAULT_DT, backend=None):
    """(label, tie) of the group emitting the most spikes; ties go to the smallest label."""
    layer = _Layer(neurons, dt)
    label, tie, _ = _winner(layer.spike_counts(layer.psp(pattern), backend), groups)
    return label, tie


@dataclass
class Evaluation:
    accuracy: float
    predictions: list
    ties: int
    total_spikes: int
    per_pattern_spikes: np.ndarray = field(repr=False)


def evaluate(neurons, groups, patterns, labels, dt=DEFAULT_DT, backend=None, psps=None):
    layer = _Layer(neurons, dt)
    preds, ties, spikes = [], 0, []
    for i, p in enumerate(patterns):
        P = psps[i] if psps is not None else layer.psp(p)
        counts = layer.spike_counts(P, backend)
        lab, tie, _ = _winner(counts, groups)
        preds.append(lab)
        ties += tie
        spikes.append(int(counts.sum()))
    labels = list(labels)
    acc = float(np.mean([a == b for a, b in zip(preds, labels)])) if labels else 0.0
    return Evaluation(acc, preds, ties, int(sum(spikes)), np.array(spikes))


def tempotron_train(neurons, dataset, groups, epochs=200, learning_rate=0.01, seed=0,
                    dt=DEFAULT_DT, target_accuracy=None, backend=None):
    """Train in place with the binary tempotron rule.

    dataset: sequence of (Spiketrum, label). Returns (neurons, per-epoch
    training accuracy under the winner-group readout). With
    ``target_accuracy`` training stops at the first epoch reaching it.
    """
    dataset = list(dataset)
    if not dataset:
        raise ValidationError("empty training set")
    if len(neurons) != groups.n_neurons:
        raise ConfigError(f"{len(neurons)} neurons but groups cover {groups.n_neurons}")
    layer = _Layer(neurons, dt)
    patterns = [p for p, _ in dataset]
    labels = [lab for _, lab in dataset]
    unknown = set(labels) - set(groups.labels)
    if unknown:
        raise ValidationError(f"labels without a readout group: {sorted(unknown)}")
    psps = [layer.psp(p) for p in patterns]
    owner = groups.label_of()
    targets = {lab: np.array([o == lab for o in owner]) for lab in groups.labels}
    rng = np.random.default_rng(seed)
    curve = []
    for _ in range(int(epochs)):
        for i in rng.permutation(len(dataset)):
            P = psps[i]
            V = P @ layer.W
            above = V >= layer.theta
            fired = above.any(axis=0)
            t_max = np.where(fired, above.argmax(axis=0), V.argmax(axis=0))
            y = targets[labels[i]]
            sign = (y & ~fired).astype(float) - (~y & fired).astype(float)
            if learning_rate and sign.any():
                layer.W += learning_rate * P[t_max].T * sign
        layer.write_back()
        acc = evaluate(neurons, groups, patterns, labels, dt, backend, psps).accuracy
        curve.append(acc)
        if target_accuracy is not None and acc >= target_accuracy:
            break
    layer.write_back()
    return neurons, curve


@dataclass
class StaReport:
    joint: np.ndarray
    bin_width: float
    window: float
    n_post: int

    @property
    def n_bins(self):
        return self.joint.shape[1]

    @property
    def channel_marginal(self):
        return self.joint.sum(axis=1)

    @property
    def dt_marginal(self):
        return self.joint.sum(axis=0)

    @property
    def dt_upper_edges(self):
        return self.bin_width * np.arange(1, self.n_bins + 1)

    def to_csv(self):
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["channel", "dt_bin", "count"])
        for c in range(self.joint.shape[0]):
            for b in range(self.n_bins):
                w.writerow([c + 1, b + 1, int(self.joint[c, b])])
        return buf.getvalue()


def sta_from_spikes(pre_channels, pre_times, post_times, n_channels, window=STA_WINDOW,
                    bin_width=DEFAULT_DT):
    """(channel, dt) histogram of pre spikes with 0 < t_post - t_pre <= window.

    Bin j (1-based in reports) covers ((j-1) bin_width, j bin_width].
    """
    n_bins = int(round(window / bin_width))
    joint = np.zeros((n_channels, n_bins), dtype=np.int64)
    ch = np.asarray(pre_channels, dtype=np.int64) - 1
    tp = np.asarray(pre_times, dtype=float)
    post = np.asarray(post_times, dtype=float)
    if len(post) == 0:
        raise ValidationError("neuron never fired; spike-triggered average is empty")
    for t in post:
        d = t - tp
        sel = (d > 0) & (d <= window + 1e-12)
        b = np.ceil(d[sel] / bin_width - 1e-9).astype(np.int64) - 1
        np.add.at(joint, (ch[sel], np.clip(b, 0, n_bins - 1)), 1)
    return StaReport(joint, bin_width, window, len(post))


def spike_triggered_average(neuron, dataset, window=STA_WINDOW, dt=DEFAULT_DT, backend=None):
    """STA over all output spikes (multi-spike inference) of one neuron on a dataset."""
    layer = _Layer([neuron], dt)
    joint = None
    n_post = 0
    for item in dataset:
        p = item[0] if isinstance(item, tuple) else item
        fired = np.flatnonzero(layer.raster(layer.psp(p), backend)[:, 0])
        if not len(fired):
            continue
        rep = sta_from_spikes(p.channels, p.times, fired * dt, neuron.n_inputs, window, dt)
        joint = rep.joint if joint is None else joint + rep.joint
        n_post += rep.n_post
    if joint is None:
        raise ValidationError("neuron never fired on the dataset; spike-triggered average is empty")
    return StaReport(joint, dt, window, n_post)


def checkpoint_dict(neurons, groups, dt=DEFAULT_DT, meta=None):
    return {"format": "spiketrum-snn/1", "dt": dt, "neurons": [n.to_dict() for n in neurons],
            "groups": groups.to_dict()["groups"], "meta": meta or {}}


def save_checkpoint(path, neurons, groups, dt=DEFAULT_DT, meta=None):
    from .io import write_text_atomic

    write_text_atomic(path, json.dumps(checkpoint_dict(neurons, groups, dt, meta), indent=1))


def load_checkpoint(path):
    """Returns (neurons, groups, dt, meta)."""
    from .errors import DataIOError

    try:
        with open(path) as f:
            d = json.load(f)
    except OSError as e:
        raise DataIOError(f"cannot read checkpoint {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: invalid JSON at line {e.lineno}") from e
    try:
        neurons = [LifNeuron.from_dict(n) for n in d["neurons"]]
        groups = ReadoutGroups.from_dict({"groups": d["groups"]})
        return neurons, groups, float(d["dt"]), d.get("meta", {})
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"{path}: malformed checkpoint ({e})") from e
