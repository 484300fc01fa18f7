import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spiketrum.codec import Signal
from spiketrum.corpus import babble
from spiketrum.errors import InsufficientDataError, ValidationError
from spiketrum.itp import IntensityMap, Spiketrum, intensity_levels
from spiketrum.metrics import (DegenerateSimilarityWarning, add_noise, bootstrap_within_among, entropy,
                               measured_snr_db, precision, psth, psth_similarity, similarity_matrix,
                               similarity_report)

FS = 1000.0


def pattern(channels, times, n_channels, duration, fs=FS):
    """Spike pattern with K=1 so channel count equals M."""
    imap = IntensityMap("log", intensity_levels(1), 1.0)
    n = np.round(np.asarray(times) * fs).astype(int)
    order = np.lexsort((channels, n))
    return Spiketrum(np.asarray(channels)[order], n[order], fs, int(round(duration * fs)), imap, n_channels)


def poisson_pattern(rng, n_channels, rate, duration, duplicate_of=None):
    """Independent Poisson trains; ``duplicate_of`` maps a channel to the one it copies."""
    duplicate_of = duplicate_of or {}
    trains = []
    for c in range(n_channels):
        if c in duplicate_of:
            trains.append(trains[duplicate_of[c]])
        else:
            trains.append(np.sort(rng.uniform(0, duration, rng.poisson(rate * duration))))
    ch = np.concatenate([np.full(len(t), c + 1) for c, t in enumerate(trains)])
    return pattern(ch, np.concatenate(trains), n_channels, duration)


class TestPrecision:
    def test_perfect_and_zero(self, rng):
        x = Signal(rng.standard_normal(100), 16000.0)
        assert precision(x, x) == 1.0
        assert precision(x, Signal(np.zeros(100), 16000.0)) == 0.0

    def test_clamped(self):
        assert precision(np.ones(4), -np.ones(4)) == 0.0

    def test_errors(self):
        with pytest.raises(ValidationError):
            precision(np.zeros(5), np.zeros(5))
        with pytest.raises(ValidationError):
            precision(np.ones(5), np.ones(6))
        with pytest.raises(ValidationError):
            precision(Signal(np.ones(5), 8000.0), Signal(np.ones(5), 16000.0))

    @given(seed=st.integers(0, 2**32 - 1), a=st.floats(1e-6, 1e6) | st.floats(-1e6, -1e-6))
    def test_scale_invariant(self, seed, a):
        rng = np.random.default_rng(seed)
        x, y = rng.standard_normal(64), rng.standard_normal(64)
        assert precision(a * x, a * y) == pytest.approx(precision(x, y), abs=1e-9)


class TestPsth:
    def test_empty(self):
        assert not psth(pattern([], [], 4, 1.0), 0.01).any()

    def test_uniform_rate(self):
        t = (np.arange(100) + 0.5) / 100
        r = psth(pattern(np.ones(100, int), t, 1, 1.0), 0.01)
        assert len(r) == 100 and np.all(r == 100.0)

    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(0, 300), bw=st.floats(0.001, 0.2))
    def test_conservation(self, seed, n, bw):
        rng = np.random.default_rng(seed)
        sp = pattern(rng.integers(1, 6, n), rng.uniform(0, 0.999, n), 5, 1.0)
        assert psth(sp, bw).sum() * bw == pytest.approx(n, abs=1e-6)
        assert psth(sp, bw, per_channel=True).sum() * bw == pytest.approx(n, abs=1e-6)

    def test_per_channel_shape(self):
        sp = pattern([1, 3], [0.0, 0.5], 3, 1.0)
        r = psth(sp, 0.1, per_channel=True)
        assert r.shape == (3, 10) and r[0, 0] == 10.0 and r[2, 5] == 10.0

    def test_bad_bin(self):
        with pytest.raises(ValidationError):
            psth(pattern([], [], 1, 1.0), 0.0)


class TestSimilarity:
    def test_self_and_negated(self, rng):
        a = rng.standard_normal(50)
        assert psth_similarity(a, a) == pytest.approx(1.0)
        assert psth_similarity(a, -a) == pytest.approx(-1.0)

    def test_zero_padding(self):
        assert psth_similarity([1, 0, 1, 0], [1, 0, 1]) == pytest.approx(psth_similarity([1, 0, 1, 0], [1, 0, 1, 0]))

    def test_degenerate(self):
        with pytest.warns(DegenerateSimilarityWarning):
            assert psth_similarity([1, 1, 1], [1, 2, 3]) == 0.0

    def test_matrix_exact_properties(self, rng):
        vecs = [rng.poisson(3.0, 40) for _ in range(7)] + [np.zeros(40)]
        with pytest.warns(DegenerateSimilarityWarning):
            S, n_deg = similarity_matrix(vecs)
        assert n_deg == 1
        assert np.array_equal(S, S.T) and np.all(np.diag(S) == 1.0)
        assert np.all(S[-1, :-1] == 0)

    def test_report_identity_and_classes(self, rng):
        pats, labels = [], []
        for c in range(3):
            base = rng.uniform(0, 1, 30)
            for _ in range(6):
                t = np.clip(base + rng.normal(0, 0.003, 30), 0, 0.999)
                pats.append(pattern(np.full(30, c + 1), t, 3, 1.0))
                labels.append(c)
        rep = similarity_report(pats, labels, 0.01)
        assert rep.m_overall == rep.m_within - rep.m_among
        assert rep.m_within > rep.m_among
        lo, hi = bootstrap_within_among(rep.matrix, labels, n_boot=200)
        assert lo > 0 and lo <= hi

    def test_report_length_mismatch(self):
        with pytest.raises(ValidationError):
            similarity_report([pattern([], [], 1, 1.0)], [0, 1])


class TestEntropy:
    def test_too_short(self):
        with pytest.raises(InsufficientDataError, match="1.28 s"):
            entropy(pattern([1], [0.1], 2, 1.0), 0.005, 32)

    def test_silent(self):
        rep = entropy(pattern([], [], 4, 2.0))
        assert rep.population_entropy == 0 and rep.redundancy == 0

    def test_independent_poisson(self, rng):
        rep = entropy(poisson_pattern(rng, 8, 20.0, 60.0))
        assert 0.0 <= rep.redundancy < 0.05
        assert rep.population_entropy <= rep.per_channel_entropy_sum

    def test_duplicated_pair(self, rng):
        rep = entropy(poisson_pattern(rng, 2, 20.0, 60.0, duplicate_of={1: 0}))
        assert rep.redundancy == pytest.approx(0.5, abs=0.05)

    def test_single_channel_entropy_rate(self):
        # Spike in every other 5 ms bin: p = 1/2, plus Miller-Madow term.
        t = np.arange(0, 4.0, 0.01) + 0.001
        rep = entropy(pattern(np.ones(len(t), int), t, 1, 4.0))
        n = 800
        expected = (1.0 + 1 / (2 * n * np.log(2))) / 0.005
        assert rep.per_channel_entropy_sum == pytest.approx(expected, rel=1e-9)
        assert rep.redundancy == 0

    @settings(max_examples=8, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), C=st.integers(1, 6), rate=st.floats(5, 80))
    def test_bounds(self, seed, C, rate):
        rep = entropy(poisson_pattern(np.random.default_rng(seed), C, rate, 4.0))
        assert 0 <= rep.redundancy <= 1
        assert rep.population_entropy <= rep.per_channel_entropy_sum + 1e-9
        assert rep.population_entropy >= rep.per_channel.max() - 1e-9


class TestAddNoise:
    @pytest.mark.parametrize("snr", [20.0, 10.0, 0.0, -5.0])
    def test_exact_snr(self, rng, snr):
        x = Signal(rng.standard_normal(4000), 16000.0)
        y = add_noise(x, babble(20000, seed=3), snr, seed=7)
        assert abs(measured_snr_db(x, y) - snr) < 1e-9

    def test_zero_db_equal_energy(self, rng):
        x = Signal(rng.standard_normal(1000), 16000.0)
        d = add_noise(x, rng.standard_normal(3000), 0.0).samples - x.samples
        assert np.dot(d, d) == pytest.approx(np.dot(x.samples, x.samples), rel=1e-12)

    def test_capped(self, rng):
        x = Signal(rng.standard_normal(1000), 16000.0)
        y = add_noise(x, rng.standard_normal(1000), np.inf)
        assert measured_snr_db(x, y) == pytest.approx(120.0, abs=1e-9)

    def test_short_noise_loops(self, rng):
        x = Signal(rng.standard_normal(1000), 16000.0)
        assert abs(measured_snr_db(x, add_noise(x, rng.standard_normal(37), 5.0)) - 5.0) < 1e-9

    def test_deterministic(self, rng):
        x = Signal(rng.standard_normal(500), 16000.0)
        n = rng.standard_normal(5000)
        assert np.array_equal(add_noise(x, n, 3.0, seed=1).samples, add_noise(x, n, 3.0, seed=1).samples)

    def test_zero_noise(self):
        with pytest.raises(ValidationError):
            add_noise(Signal(np.ones(10), 16000.0), np.zeros(10), 0.0)
