import numpy as np
import pytest

from spiketrum.corpus import (EVENT_CLASSES, audio_like_signal, babble, kernel_sum_signal, sound_event,
                              sound_event_corpus)


class TestKernelSum:
    def test_planted_codes_rebuild_signal(self, bank, rng):
        from spiketrum.codec import reconstruct

        x, planted = kernel_sum_signal(bank, 25, rng, n_samples=6000)
        np.testing.assert_allclose(reconstruct(planted, bank).samples, x.samples, atol=1e-12)

    def test_non_overlapping_slots(self, bank, rng):
        _, planted = kernel_sum_signal(bank, 8, rng, non_overlapping=True)
        ends = planted.sample_index + bank.lengths[planted.kernel_index - 1]
        slot = 2 * bank.max_length
        assert np.all(planted.sample_index // slot == np.arange(8))
        assert np.all(ends <= (np.arange(8) + 1) * slot - bank.max_length)
        assert np.all(planted.amplitude > 0)

    def test_errors(self, bank, rng):
        with pytest.raises(ValueError):
            kernel_sum_signal(bank, 3, rng)
        with pytest.raises(ValueError):
            kernel_sum_signal(bank, 3, rng, n_samples=10, non_overlapping=True)
        with pytest.raises(ValueError):
            kernel_sum_signal(bank, 3, rng, n_samples=5000, amplitudes="pareto")


class TestEvents:
    @pytest.mark.parametrize("cls", EVENT_CLASSES)
    def test_each_class(self, cls, rng):
        x = sound_event(cls, rng)
        assert len(x) == 6400 and 0.5 <= np.max(np.abs(x.samples)) <= 1.0

    def test_unknown(self, rng):
        with pytest.raises(ValueError):
            sound_event("whistle", rng)

    def test_corpus_shape_and_determinism(self):
        a, la = sound_event_corpus(3, 4, 0.1, seed=2)
        b, lb = sound_event_corpus(3, 4, 0.1, seed=2)
        assert la.tolist() == [0] * 4 + [1] * 4 + [2] * 4
        assert all(np.array_equal(u.samples, v.samples) for u, v in zip(a, b))
        with pytest.raises(ValueError):
            sound_event_corpus(11)


def test_audio_like_peak_normalized(rng):
    x = audio_like_signal(8000, 16000.0, rng)
    assert np.max(np.abs(x.samples)) == pytest.approx(1.0, abs=1e-9)


def test_babble_band_limited():
    x = babble(32000, seed=1).samples
    spec = np.abs(np.fft.rfft(x)) ** 2
    f = np.fft.rfftfreq(len(x), 1 / 16000.0)
    assert spec[(f > 100) & (f < 4500)].sum() / spec.sum() > 0.95
    assert np.array_equal(x, babble(32000, seed=1).samples)
