"""Acceptance gate. Each test checks one criterion at its stated tolerance and
prints a single PASS/FAIL line; the lines are repeated in the pytest summary.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``pytest -m acceptance``.
"""
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from spiketrum.codec import EncoderParams, Signal, cross_correlate, encode, reconstruct
from spiketrum.corpus import audio_like_signal, babble, kernel_sum_signal, sound_event_corpus
from spiketrum.itp import itp_decode, itp_encode, make_intensity_map, spike_spread
from spiketrum.metrics import (add_noise, bootstrap_within_among, entropy, precision,
                               similarity_report)
from spiketrum.snn import ReadoutGroups, evaluate, make_neurons, tempotron_train
from spiketrum.stream import (StreamConfig, characteristics_raster, group_activation_times,
                              stream_codes)

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

FS = 16000.0
LAMBDA_SWEEP = np.arange(100.0, 3001.0, 100.0)


def n_codes(lam, duration):
    return int(np.floor(lam * duration + 0.5))


def concave_violations(curve, rel_tol=0.0):
    """Fraction of steps past the knee where the increment grows.

    The knee is the step with the largest increment. An increase counts
    only if it exceeds ``rel_tol`` times that largest increment.
    """
    d = np.diff(curve)
    knee = int(np.argmax(d))
    dd = np.diff(d[knee:])
    if not len(dd):
        return 0.0
    return float(np.mean(dd > rel_tol * d.max()))


def bootstrap_mean_ci(values, n_boot=2000, seed=0, level=0.95):
    rng = np.random.default_rng(seed)
    v = np.asarray(values)
    means = v[rng.integers(0, len(v), size=(n_boot, len(v)))].mean(axis=1)
    return tuple(np.quantile(means, [(1 - level) / 2, 1 - (1 - level) / 2]))


def test_c01_exact_spike_rate(bank, verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    bad = []
    for tau in (0.5, 1.5, 4.7):
        x = Signal(rng.standard_normal(int(round(tau * FS))), FS)
        for lam in (100.0, 1500.0, 2000.0):
            got = len(encode(x, bank, EncoderParams(target_spike_rate=lam, min_energy_ratio=0.0)))
            if got != n_codes(lam, tau):
                bad.append((tau, lam, got))
    dt = time.perf_counter() - t0
    verdict(1, not bad and dt < 60, f"9/9 (tau, lambda) counts exact={not bad} {bad or ''} runtime {dt:.1f}s < 60s")


def test_c02_pursuit_oracle(bank, verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    recovered, amp_err = 0, 0.0
    for _ in range(100):
        n_atoms = int(rng.integers(1, 9))
        x, planted = kernel_sum_signal(bank, n_atoms, rng, non_overlapping=True)
        codes = encode(x, bank, EncoderParams(max_codes=n_atoms, min_energy_ratio=0.0))
        got = sorted(zip(codes.kernel_index.tolist(), codes.sample_index.tolist(), codes.amplitude))
        want = sorted(zip(planted.kernel_index.tolist(), planted.sample_index.tolist(), planted.amplitude))
        if [g[:2] for g in got] == [w[:2] for w in want]:
            recovered += 1
            amp_err = max(amp_err, max(abs(g[2] - w[2]) for g, w in zip(got, want)))
    not_monotone = 0
    for _ in range(1000):
        x = audio_like_signal(4000, FS, rng)
        e = encode(x, bank, EncoderParams(max_codes=250, min_energy_ratio=0.0)).energies
        not_monotone += bool(np.any(np.diff(e) > 1e-12 * e[0]))
    dt = time.perf_counter() - t0
    ok = recovered == 100 and amp_err < 1e-6 and not_monotone == 0 and dt < 300
    verdict(2, ok, f"planted recovered {recovered}/100, max amplitude error {amp_err:.1e} < 1e-6; "
                   f"non-monotone residuals {not_monotone}/1000; runtime {dt:.0f}s < 300s")


def test_c03_fft_matches_direct(bank, verdict):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(200):
        k = bank.kernels[int(rng.integers(0, len(bank)))]
        r = rng.standard_normal(int(rng.integers(k.length, 6000)))
        padded = np.concatenate([r, np.zeros(k.length - 1)])
        direct = np.correlate(padded, k.samples, mode="valid")
        worst = max(worst, float(np.max(np.abs(cross_correlate(r, k) - direct))))
    verdict(3, worst < 1e-9, f"max |FFT - direct| over 200 pairs = {worst:.2e} < 1e-9")


def _kernel_sum_corpus(bank, n, seed, n_atoms=100, n_samples=4000):
    rng = np.random.default_rng(seed)
    return [kernel_sum_signal(bank, n_atoms, rng, n_samples=n_samples)[0] for _ in range(n)]


def test_c04_itp_roundtrip(bank, verdict):
    sigs = _kernel_sum_corpus(bank, 50, 4)
    bound_ok, identity_ok = True, True
    gaps = []
    for x in sigs:
        c = encode(x, bank, EncoderParams(target_spike_rate=1500.0, min_energy_ratio=0.0))
        # Repeated (m, tau) atoms pair up by amplitude since quantization is monotone.
        order = np.lexsort((c.amplitude, c.kernel_index, c.sample_index))
        p_analog = precision(x, reconstruct(c, bank))
        for K in (3, 5, 30, 100):
            imap = make_intensity_map(c, K, "log")
            back = itp_decode(itp_encode(c, imap, len(bank)))
            ob = np.lexsort((back.amplitude, back.kernel_index, back.sample_index))
            identity_ok &= np.array_equal(c.kernel_index[order], back.kernel_index[ob])
            identity_ok &= np.array_equal(c.sample_index[order], back.sample_index[ob])
            err = np.abs(c.amplitude[order] - back.amplitude[ob])
            bound_ok &= bool(err.max() <= imap.quantization_bound() + 1e-12)
            if K == 30:
                gaps.append(p_analog - precision(x, reconstruct(back, bank)))
    worst = max(np.abs(gaps))
    ok = identity_ok and bound_ok and worst <= 0.05
    verdict(4, ok, f"(m, tau) preserved={identity_ok}, error <= bound for K in 3/5/30/100={bound_ok}, "
                   f"max |P_analog - P_log30| = {worst:.4f} <= 0.05")


def test_c05_log_beats_linear(bank, verdict):
    sigs = _kernel_sum_corpus(bank, 50, 5)
    diff, occ_log, occ_lin = [], [], []
    for x in sigs:
        c = encode(x, bank, EncoderParams(target_spike_rate=1500.0, min_energy_ratio=0.0))
        p = {}
        for strat, occ in (("log", occ_log), ("linear", occ_lin)):
            sp = itp_encode(c, make_intensity_map(c, 5, strat), len(bank))
            p[strat] = precision(x, reconstruct(itp_decode(sp), bank))
            occ.append(spike_spread(sp)[1])
        diff.append(p["log"] - p["linear"])
    lo, hi = bootstrap_mean_ci(diff)
    ok = lo > 0 and np.mean(occ_log) >= np.mean(occ_lin)
    verdict(5, ok, f"mean P_log - P_linear = {np.mean(diff):.4f}, 95% CI [{lo:.4f}, {hi:.4f}] > 0; "
                   f"occupancy log {np.mean(occ_log):.3f} >= linear {np.mean(occ_lin):.3f}")


def test_c06_precision_saturates(bank, verdict):
    rng = np.random.default_rng(6)
    dur = 1.0
    P = np.zeros((20, len(LAMBDA_SWEEP)))
    for i in range(20):
        x = audio_like_signal(int(dur * FS), FS, rng)
        full = encode(x, bank, EncoderParams(max_codes=n_codes(LAMBDA_SWEEP[-1], dur), min_energy_ratio=0.0))
        for j, lam in enumerate(LAMBDA_SWEEP):
            P[i, j] = precision(x, reconstruct(full.head(n_codes(lam, dur)), bank))
    mean = P.mean(axis=0)
    decreasing = int(np.sum(np.diff(mean) < 0))
    frac = concave_violations(mean)
    verdict(6, decreasing == 0 and frac <= 0.05,
            f"mean P {mean[0]:.3f} -> {mean[-1]:.4f}; decreasing steps {decreasing}; "
            f"growing gains past the knee {frac:.1%} <= 5%")


def _spikes_for(c, bank):
    return itp_encode(c, make_intensity_map(c, 3), len(bank))


def _poisson_pattern(trains, duration):
    from spiketrum.itp import IntensityMap, Spiketrum, intensity_levels

    ch = np.concatenate([np.full(len(t), c + 1) for c, t in enumerate(trains)])
    n = np.round(np.concatenate(trains) * 1000.0).astype(int)
    order = np.lexsort((ch, n))
    return Spiketrum(ch[order], n[order], 1000.0, int(duration * 1000), IntensityMap("log", intensity_levels(1), 1.0),
                     len(trains))


def test_c07_entropy_trends(bank, verdict):
    dur = 2.0
    H = np.zeros((10, len(LAMBDA_SWEEP)))
    for i in range(10):
        x = babble(int(dur * FS), seed=i)
        full = encode(x, bank, EncoderParams(max_codes=n_codes(LAMBDA_SWEEP[-1], dur), min_energy_ratio=0.0))
        for j, lam in enumerate(LAMBDA_SWEEP):
            H[i, j] = entropy(_spikes_for(full.head(n_codes(lam, dur)), bank)).population_entropy
    mean = H.mean(axis=0)
    decreasing = int(np.sum(np.diff(mean) < 0))
    frac = concave_violations(mean, rel_tol=0.01)

    rng = np.random.default_rng(7)
    trains = [np.sort(rng.uniform(0, 60.0, rng.poisson(20 * 60.0))) for _ in range(8)]
    hg_indep = entropy(_poisson_pattern(trains, 60.0)).redundancy
    hg_dup = entropy(_poisson_pattern([trains[0], trains[0]], 60.0)).redundancy
    ok = decreasing == 0 and frac <= 0.05 and hg_indep < 0.05 and abs(hg_dup - 0.5) <= 0.05
    verdict(7, ok, f"H_C {mean[0]:.0f} -> {mean[-1]:.0f} bits/s, decreasing steps {decreasing}, "
                   f"growing increments (>1% of max) {frac:.1%} <= 5%; H_G Poisson {hg_indep:.4f} < 0.05, "
                   f"duplicated pair {hg_dup:.3f} in 0.5 +- 0.05")


def test_c08_discriminability(bank, verdict):
    sigs, labels = sound_event_corpus(10, 50, 0.4, FS, seed=8)
    pats = [_spikes_for(encode(x, bank, EncoderParams(target_spike_rate=1500.0, min_energy_ratio=0.0)), bank)
            for x in sigs]
    rep = similarity_report(pats, labels, 0.01)
    lo, hi = bootstrap_within_among(rep.matrix, labels, n_boot=1000, seed=0)
    ok = lo > 0 and rep.m_overall > 0
    verdict(8, ok, f"m_within {rep.m_within:.3f} > m_among {rep.m_among:.3f}, "
                   f"95% CI of difference [{lo:.3f}, {hi:.3f}]; m_overall {rep.m_overall:.3f} > 0")


def test_c09_tempotron(bank, verdict):
    lam = 1500.0
    sigs, labels = sound_event_corpus(5, 50, 0.4, FS, seed=9)
    is_test = np.tile(np.arange(50) >= 40, 5)
    enc = lambda x: _spikes_for(encode(x, bank, EncoderParams(target_spike_rate=lam, min_energy_ratio=0.0)), bank)  # noqa: E731
    train = [(enc(x), int(y)) for x, y, t in zip(sigs, labels, is_test) if not t]
    test_sigs = [x for x, t in zip(sigs, is_test) if t]
    test_labels = labels[is_test].tolist()
    groups = ReadoutGroups.uniform(range(5), 10)
    neurons = make_neurons(50, train[0][0].num_channels, seed=0)
    neurons, curve = tempotron_train(neurons, train, groups, epochs=200, learning_rate=0.003, seed=0)
    best = max(curve)

    noise = babble(int(30 * FS), FS, seed=1)
    snrs = (20.0, 15.0, 10.0, 5.0, 0.0)
    acc, spikes = [], []
    for r, snr in enumerate(snrs):
        noisy, lab = [], []
        for rep in range(3):
            for i, (x, y) in enumerate(zip(test_sigs, test_labels)):
                noisy.append(enc(add_noise(x, noise, snr, seed=1000 * rep + i)))
                lab.append(y)
        ev = evaluate(neurons, groups, noisy, lab)
        acc.append(ev.accuracy)
        spikes.append(ev.per_pattern_spikes.mean())
    acc_ok = all(b <= a for a, b in zip(acc, acc[1:]))
    spk_ok = all(b <= a for a, b in zip(spikes, spikes[1:]))
    ok = best >= 0.9 and acc_ok and spk_ok
    first = next(i + 1 for i, a in enumerate(curve) if a == best)
    verdict(9, ok, f"train accuracy {best:.3f} >= 0.9 (epoch {first}/200); accuracy 20->0 dB "
                   f"{'/'.join(f'{a:.2f}' for a in acc)} non-increasing={acc_ok}; mean readout spikes "
                   f"{'/'.join(f'{s:.1f}' for s in spikes)} non-increasing={spk_ok}")


def test_c10_streaming(bank, verdict):
    rng = np.random.default_rng(10)
    cfg = StreamConfig()
    gaps, violations = [], 0
    for _ in range(10):
        x = audio_like_signal(int(FS), FS, rng)
        res = stream_codes(x, bank, cfg)
        violations += int(np.sum(res.segment_counts > cfg.budget))
        full = encode(x, bank, EncoderParams(max_codes=max(1, len(res.codes)), min_energy_ratio=0.0))
        gaps.append(precision(x, reconstruct(full, bank)) - precision(x, reconstruct(res.codes, bank)))
    _, sp = characteristics_raster(cfg, bank, duration=5.0)
    med = group_activation_times(sp)
    active = int(np.sum(~np.isnan(med)))
    rho = spearmanr(np.arange(len(med)), med).statistic if active == len(med) else float("nan")
    inversions = float(np.mean(np.diff(med) < 0)) if active == len(med) else 1.0
    chirp_ok = active == len(med) and rho >= 0.95 and inversions <= 0.05
    ok = max(gaps) <= 0.1 and violations == 0 and chirp_ok
    verdict(10, ok, f"max P gap {max(gaps):.4f} <= 0.1; budget violations {violations}; chirp groups active "
                    f"{active}/40, Spearman {rho:.3f} >= 0.95, order inversions {inversions:.1%} <= 5%")


def test_c11_throughput(bank, verdict):
    x = audio_like_signal(int(1.5 * FS), FS, np.random.default_rng(11))
    t0 = time.perf_counter()
    codes = encode(x, bank, EncoderParams(target_spike_rate=1000.0, min_energy_ratio=0.0))
    dt = time.perf_counter() - t0
    verdict(11, dt <= 5.0 and len(codes) == 1500, f"1.5 s clip at 1000 Hz: {len(codes)} codes in {dt:.2f}s <= 5s")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
