"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 data validation error.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import _backend
from . import io as sio
from .codec import EncoderParams, Signal, encode, reconstruct, spike_rate
from .config import RunConfig
from .corpus import EVENT_CLASSES, audio_like_signal, babble, kernel_sum_signal, sound_event_corpus
from .errors import ConfigError, SizingError, SpiketrumError, ValidationError
from .itp import IntensityMap, intensity_levels, itp_decode, itp_encode, make_intensity_map
from .kernels import build_bank
from .metrics import (add_noise, bootstrap_within_among, entropy, precision, similarity_report)

DEFAULT_MAX_CODES = 5_000_000
DEFAULT_MAX_CELLS = 200_000


def _say(msg):
    print(msg, file=sys.stderr)


def _float_list(text):
    """'100:3000:100' (inclusive) or '5,30,100'."""
    try:
        if ":" in text:
            a, b, step = (float(v) for v in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            n = int(np.floor((b - a) / step + 1e-9)) + 1
            return [a + i * step for i in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'start:stop:step' or a comma list, got {text!r}")


def _int_list(text):
    vals = _float_list(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _csv_text(header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _config(args):
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    cfg = cfg.override("bank", num_kernels=getattr(args, "channels", None),
                       sample_rate=getattr(args, "rate", None))
    if getattr(args, "rate", None) is not None and cfg.bank.f_max > args.rate / 2:
        cfg = cfg.override("bank", f_max=args.rate / 2)
    lam = getattr(args, "lam", None)
    n_spikes = getattr(args, "n_spikes", None)
    if lam is not None and n_spikes is not None:
        raise ConfigError("--lambda and --n-spikes are mutually exclusive")
    if lam is not None:
        cfg = replace(cfg, encoder=replace(cfg.encoder, target_spike_rate=lam, max_codes=None)).validate()
    if n_spikes is not None:
        cfg = replace(cfg, encoder=replace(cfg.encoder, max_codes=n_spikes, target_spike_rate=None)).validate()
    cfg = cfg.override("encoder", min_energy_ratio=getattr(args, "min_energy_ratio", None))
    cfg = cfg.override("itp", K=getattr(args, "k_levels", None), strategy=getattr(args, "strategy", None))
    cfg = cfg.override("seed", seed=getattr(args, "seed", None))
    return cfg


def _corpus(kind, n, duration, fs, seed, bank=None):
    rng = np.random.default_rng(seed)
    n_samples = int(round(duration * fs))
    if kind == "audio":
        return [audio_like_signal(n_samples, fs, rng) for _ in range(n)]
    if kind == "babble":
        return [babble(n_samples, fs, seed=seed + i) for i in range(n)]
    if kind == "kernel-sum":
        atoms = max(1, int(round(2000 * duration)))
        return [kernel_sum_signal(bank, atoms, rng, n_samples=n_samples)[0] for _ in range(n)]
    if kind == "events":
        n_classes = min(len(EVENT_CLASSES), max(1, n))
        sigs, _ = sound_event_corpus(n_classes, -(-n // n_classes), duration, fs, seed)
        return sigs[:n]
    raise ConfigError(f"unknown corpus {kind!r}")


def _check_size(n_codes_total, n_cells, args):
    if n_codes_total > args.max_codes or n_cells > args.max_cells:
        raise SizingError(
            f"grid too large: about {n_codes_total:,} pursuit iterations and {n_cells:,} grid cells "
            f"(limits {args.max_codes:,} / {args.max_cells:,}); shrink the grid or raise "
            "--max-codes / --max-cells"
        )


# -- commands ---------------------------------------------------------------

def cmd_kernels(args):
    cfg = _config(args)
    bank = build_bank(cfg.bank)
    rows = [(k.index, k.center_frequency, k.bandwidth, k.length) for k in bank.kernels]
    doc = {"config": cfg.bank.to_dict(), "fingerprint": bank.fingerprint,
           "kernels": [{"index": i, "center_frequency": f, "bandwidth": b, "length": n}
                       for i, f, b, n in rows]}
    text = _json_text(doc)
    if args.output:
        sio.write_text_atomic(args.output, text)
    else:
        sys.stdout.write(_csv_text(["index", "center_frequency_hz", "bandwidth_hz", "length"], rows))
    _say(f"{len(bank)} kernels, fingerprint {bank.fingerprint}")
    return 0


def _encode_paths(out):
    out = Path(out)
    return out.with_name(out.name + ".codes.csv"), out.with_name(out.name + ".spikes.csv")


def cmd_encode(args):
    cfg = _config(args)
    bank = build_bank(cfg.bank)
    x, rate = sio.read_wav(args.input, bank.sample_rate)
    if rate != bank.sample_rate:
        _say(f"note: resampled {rate} Hz -> {bank.sample_rate:g} Hz")
    codes = encode(x, bank, cfg.encoder, backend=args.backend)
    spikes = itp_encode(codes, make_intensity_map(codes, cfg.itp.K, cfg.itp.strategy, cfg.itp.c_min),
                        len(bank))
    codes_path, spikes_path = _encode_paths(args.output)
    with sio.atomic_outputs() as tmp:
        sio._write_codes(tmp(codes_path), tmp(sio.sidecar_path(codes_path)), codes)
        sio._write_spikes(tmp(spikes_path), tmp(sio.sidecar_path(spikes_path)), spikes)
    P = 1.0 - codes.residual_energy_ratio if np.any(x.samples) else float("nan")
    lam = spike_rate(codes) if x.duration > 0 else 0.0
    print(f"spikes={len(codes)} lambda={lam:.6g} P={P:.6f}")
    return 0


def _load_any(path):
    with open(path, newline="") as f:
        head = f.readline().strip()
    if head == ",".join(sio.CODE_HEADER):
        return sio.read_codes(path), None
    spikes = sio.read_spikes(path)
    return itp_decode(spikes), spikes


def cmd_decode(args):
    cfg = _config(args)
    bank = build_bank(cfg.bank)
    try:
        codes, _ = _load_any(args.input)
    except FileNotFoundError as e:
        raise sio.DataIOError(f"{args.input}: no such file") from e
    if codes.bank_fingerprint and codes.bank_fingerprint != bank.fingerprint:
        raise ValidationError(
            f"bank fingerprint mismatch: file was encoded with {codes.bank_fingerprint}, "
            f"current bank is {bank.fingerprint}; use the bank config from encoding "
            "(see `spiketrum kernels`)"
        )
    if codes.sample_rate != bank.sample_rate:
        raise ValidationError(f"file rate {codes.sample_rate} Hz != bank rate {bank.sample_rate} Hz")
    y = reconstruct(codes, bank)
    if args.reference:
        ref, _ = sio.read_wav(args.reference, bank.sample_rate)
        n = min(len(ref), len(y))
        P = precision(Signal(ref.samples[:n], ref.sample_rate), Signal(y.samples[:n], y.sample_rate))
        print(f"P={P:.6f}")
    sio.write_wav(args.output, y)
    return 0


def cmd_stream(args):
    from .stream import characteristics_raster, raster_csv, stream_codes

    cfg = _config(args)
    sc = cfg.stream_config()
    sc = replace(sc, K=cfg.itp.K, strategy=cfg.itp.strategy,
                 sample_rate=cfg.bank.sample_rate, M=cfg.bank.num_kernels)
    if args.segment_ms is not None:
        sc = replace(sc, segment_length=args.segment_ms / 1000.0)
    if args.budget is not None:
        sc = replace(sc, spikes_per_segment_budget=args.budget)
    bank = build_bank(cfg.bank)
    sc.validate(bank)
    if args.chirp:
        rows, spikes = characteristics_raster(sc, bank, duration=args.chirp)
        sio.write_text_atomic(args.output, raster_csv(rows))
        print(f"spikes={len(spikes)} groups_active={len(set(((spikes.channels - 1) // sc.K).tolist()))}")
        return 0
    if not args.input:
        raise ConfigError("stream needs an input WAV or --chirp SECONDS")
    x, _ = sio.read_wav(args.input, bank.sample_rate)
    res = stream_codes(x, bank, sc, backend=args.backend)
    codes = res.codes
    scales = res.scales(sc.normalization)
    top = float(scales.max()) if len(scales) else 1.0
    imap = IntensityMap(sc.strategy, intensity_levels(sc.K, sc.strategy, sc.c_min), top, sc.c_min)
    spikes = itp_encode(codes, imap, len(bank), scales if sc.normalization == "running" else None)
    seg_rows = [(int(s), int(c)) for s, c in zip(res.segment_starts, res.segment_counts)]
    codes_path, spikes_path = _encode_paths(args.output)
    with sio.atomic_outputs() as tmp:
        sio._write_codes(tmp(codes_path), tmp(sio.sidecar_path(codes_path)), codes)
        sio._write_spikes(tmp(spikes_path), tmp(sio.sidecar_path(spikes_path)), spikes)
        tmp(Path(args.output).with_name(Path(args.output).name + ".segments.csv")).write_text(
            _csv_text(["segment_start_sample", "spikes"], seg_rows))
    P = 1.0 - codes.residual_energy_ratio
    print(f"spikes={len(codes)} segments={len(seg_rows)} max_per_segment="
          f"{max((c for _, c in seg_rows), default=0)} budget={sc.budget} P={P:.6f}")
    return 0


def _eval_precision(args, cfg, bank):
    lams = args.lambdas or [float(v) for v in range(100, 5001, 100)]
    Ks = args.k_list or [5, 30, 100]
    strategies = args.strategies or ["log", "linear"]
    fs = bank.sample_rate
    n_top = int(np.floor(max(lams) * args.duration + 0.5))
    _check_size(args.n_signals * n_top, args.n_signals * len(lams) * len(Ks) * len(strategies), args)
    sigs = _corpus(args.corpus, args.n_signals, args.duration, fs, cfg.seed, bank)
    rows = []
    for i, x in enumerate(sigs):
        full = encode(x, bank, EncoderParams(max_codes=max(1, n_top), min_energy_ratio=0.0),
                      backend=args.backend)
        for lam in lams:
            c = full.head(int(np.floor(lam * x.duration + 0.5)))
            p_analog = precision(x, reconstruct(c, bank))
            for K in Ks:
                for strat in strategies:
                    q = itp_decode(itp_encode(c, make_intensity_map(c, K, strat, cfg.itp.c_min), len(bank)))
                    rows.append((i, lam, K, strat, len(c), p_analog, precision(x, reconstruct(q, bank))))
    return ["signal", "lambda_hz", "K", "strategy", "n_spikes", "precision_analog", "precision_itp"], rows


def _eval_entropy(args, cfg, bank):
    lams = args.lambdas or [float(v) for v in range(100, 3001, 100)]
    n_top = int(np.floor(max(lams) * args.duration + 0.5))
    _check_size(args.n_signals * n_top, args.n_signals * len(lams), args)
    sigs = _corpus(args.corpus, args.n_signals, args.duration, bank.sample_rate, cfg.seed, bank)
    rows = []
    m = cfg.metrics
    for i, x in enumerate(sigs):
        full = encode(x, bank, EncoderParams(max_codes=max(1, n_top), min_energy_ratio=0.0),
                      backend=args.backend)
        for lam in lams:
            c = full.head(int(np.floor(lam * x.duration + 0.5)))
            sp = itp_encode(c, make_intensity_map(c, cfg.itp.K, cfg.itp.strategy, cfg.itp.c_min), len(bank))
            r = entropy(sp, m.entropy_bin_width, m.entropy_window, seed=cfg.seed)
            rows.append((i, lam, len(c), r.per_channel_entropy_sum, r.population_entropy, r.redundancy))
    return ["signal", "lambda_hz", "n_spikes", "sum_channel_entropy_bps", "population_entropy_bps",
            "redundancy"], rows


def _encode_corpus(sigs, bank, cfg, lam, backend):
    out = []
    for x in sigs:
        c = encode(x, bank, EncoderParams(target_spike_rate=lam, min_energy_ratio=0.0), backend=backend)
        out.append(itp_encode(c, make_intensity_map(c, cfg.itp.K, cfg.itp.strategy, cfg.itp.c_min), len(bank)))
    return out


def _eval_similarity(args, cfg, bank):
    lam = cfg.encoder.target_spike_rate or 1500.0
    n = args.classes * args.per_class
    _check_size(int(n * lam * args.duration), n * n, args)
    sigs, labels = sound_event_corpus(args.classes, args.per_class, args.duration, bank.sample_rate, cfg.seed)
    pats = _encode_corpus(sigs, bank, cfg, lam, args.backend)
    rep = similarity_report(pats, labels, cfg.metrics.bin_width)
    lo, hi = bootstrap_within_among(rep.matrix, labels, n_boot=args.n_boot, seed=cfg.seed)
    rows = [(lam, cfg.metrics.bin_width, rep.m_within, rep.m_among, rep.m_overall, lo, hi, rep.n_degenerate)]
    return ["lambda_hz", "bin_width_s", "m_within", "m_among", "m_overall", "ci_low", "ci_high",
            "n_degenerate"], rows


def _eval_raster(args, cfg, bank):
    lams = args.lambdas or [float(v) for v in range(1100, 99, -100)]
    if args.input:
        x, _ = sio.read_wav(args.input, bank.sample_rate)
    else:
        x = _corpus(args.corpus, 1, args.duration, bank.sample_rate, cfg.seed, bank)[0]
    n_top = int(np.floor(max(lams) * x.duration + 0.5))
    _check_size(n_top, n_top * len(lams), args)
    full = encode(x, bank, EncoderParams(max_codes=max(1, n_top), min_energy_ratio=0.0), backend=args.backend)
    imap = make_intensity_map(full, cfg.itp.K, cfg.itp.strategy, cfg.itp.c_min)
    rows = []
    for lam in lams:
        sp = itp_encode(full.head(int(np.floor(lam * x.duration + 0.5))), imap, len(bank))
        rows.extend((lam, int(h), t) for h, t in zip(sp.channels, sp.times))
    return ["lambda_hz", "channel", "time_s"], rows


def _eval_noise(args, cfg, bank):
    from .snn import evaluate, load_checkpoint

    if not args.model:
        raise ConfigError("eval noise needs --model")
    neurons, groups, dt, meta = load_checkpoint(args.model)
    snrs = args.snr_db or [20.0, 15.0, 10.0, 5.0, 0.0]
    lam = float(meta.get("lambda_hz") or cfg.encoder.target_spike_rate or 1500.0)
    n_classes = len(groups.labels)
    n = n_classes * args.per_class
    _check_size(int(n * (len(snrs) + 1) * lam * args.duration), n * (len(snrs) + 1), args)
    sigs, labels = sound_event_corpus(n_classes, args.per_class, args.duration, bank.sample_rate,
                                      cfg.seed + 1)
    noise = babble(int(30 * bank.sample_rate), bank.sample_rate, seed=cfg.seed)
    rows = []
    ev = evaluate(neurons, groups, _encode_corpus(sigs, bank, cfg, lam, args.backend), labels, dt)
    rows.append(("inf", ev.accuracy, ev.total_spikes, ev.ties))
    for snr in snrs:
        noisy = [add_noise(x, noise, snr, seed=cfg.seed + i) for i, x in enumerate(sigs)]
        ev = evaluate(neurons, groups, _encode_corpus(noisy, bank, cfg, lam, args.backend), labels, dt)
        rows.append((snr, ev.accuracy, ev.total_spikes, ev.ties))
    return ["snr_db", "accuracy", "total_output_spikes", "ties"], rows


_EVALS = {"precision": _eval_precision, "entropy": _eval_entropy, "similarity": _eval_similarity,
          "raster": _eval_raster, "noise": _eval_noise}


def cmd_eval(args):
    cfg = _config(args)
    bank = build_bank(cfg.bank)
    header, rows = _EVALS[args.what](args, cfg, bank)
    text = _csv_text(header, rows)
    if args.output:
        sio.write_text_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def _dataset(args, cfg, bank):
    """(patterns, labels) from a manifest of spike files or the synthetic corpus."""
    if args.data:
        pats, labels = [], []
        base = Path(args.data).parent
        for lineno, row in sio._read_rows(args.data, ["path", "label"]):
            try:
                labels.append(int(row[1]))
            except ValueError as e:
                raise ValidationError(f"{args.data}:{lineno}: label must be an integer") from e
            pats.append(sio.read_spikes(base / row[0]))
        return pats, np.array(labels)
    lam = cfg.encoder.target_spike_rate or 1500.0
    sigs, labels = sound_event_corpus(args.classes, args.per_class, args.duration, bank.sample_rate, cfg.seed)
    return _encode_corpus(sigs, bank, cfg, lam, args.backend), labels


def cmd_train(args):
    from .snn import ReadoutGroups, checkpoint_dict, make_neurons, tempotron_train

    cfg = _config(args)
    cfg = cfg.override("snn", epochs=args.epochs, learning_rate=args.lr,
                       neurons_per_group=args.neurons_per_group)
    s = cfg.snn
    bank = build_bank(cfg.bank)
    pats, labels = _dataset(args, cfg, bank)
    if not len(pats):
        raise ValidationError("empty training set")
    C = pats[0].num_channels
    groups = ReadoutGroups.uniform(sorted(set(labels.tolist())), s.neurons_per_group)
    neurons = make_neurons(groups.n_neurons, C, cfg.seed, s.init_scale, s.membrane_tau,
                           s.synaptic_tau, s.threshold)
    neurons, curve = tempotron_train(neurons, list(zip(pats, labels.tolist())), groups, s.epochs,
                                     s.learning_rate, cfg.seed, s.dt, args.target_accuracy, args.backend)
    meta = {"lambda_hz": cfg.encoder.target_spike_rate, "K": cfg.itp.K, "strategy": cfg.itp.strategy,
            "accuracy_curve": curve, "bank_fingerprint": bank.fingerprint}
    with sio.atomic_outputs() as tmp:
        tmp(args.output).write_text(json.dumps(checkpoint_dict(neurons, groups, s.dt, meta), indent=1))
        if args.curve:
            tmp(args.curve).write_text(_csv_text(["epoch", "accuracy"],
                                                 [(i + 1, a) for i, a in enumerate(curve)]))
    print(f"epochs={len(curve)} final_accuracy={curve[-1] if curve else float('nan'):.4f}")
    return 0


def cmd_classify(args):
    from .snn import classify, load_checkpoint

    neurons, groups, dt, _ = load_checkpoint(args.model)
    rows = []
    for path in args.inputs:
        label, tie = classify(neurons, groups, sio.read_spikes(path), dt, args.backend)
        rows.append((str(path), label, int(tie)))
    text = _csv_text(["path", "label", "tie"], rows)
    if args.output:
        sio.write_text_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_sta(args):
    from .snn import load_checkpoint, spike_triggered_average

    cfg = _config(args)
    neurons, groups, dt, _ = load_checkpoint(args.model)
    if not 0 <= args.neuron < len(neurons):
        raise ConfigError(f"--neuron must be in 0..{len(neurons) - 1}")
    bank = build_bank(cfg.bank)
    pats, _ = _dataset(args, cfg, bank)
    rep = spike_triggered_average(neurons[args.neuron], pats, args.window, dt, args.backend)
    text = rep.to_csv()
    if args.output:
        sio.write_text_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    _say(f"post spikes={rep.n_post} pairs={int(rep.joint.sum())}")
    return 0


# -- parser -------------------------------------------------------------------

def _add_bank(p):
    p.add_argument("--channels", type=int, help="number of kernels M")
    p.add_argument("--rate", type=float, help="bank sample rate in Hz")


def _add_encoder(p):
    p.add_argument("--lambda", dest="lam", type=float, help="target spike rate in Hz")
    p.add_argument("--n-spikes", type=int, help="fixed number of spikes")
    p.add_argument("--min-energy-ratio", type=float, help="stop when residual/original energy drops below")
    p.add_argument("--k-levels", type=int, help="intensity levels per kernel")
    p.add_argument("--strategy", choices=["log", "linear"])


def _add_corpus(p, duration=0.4):
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--duration", type=float, default=duration)


def build_parser():
    top = argparse.ArgumentParser(prog="spiketrum", description="Spike-based audio coding toolkit.")
    top.add_argument("--config", help="RunConfig JSON; flags override its values")
    top.add_argument("--backend", choices=["cython", "python"], default=None)
    top.add_argument("--seed", type=int)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernels", help="describe the kernel bank")
    _add_bank(p)
    p.add_argument("-o", "--output", help="write bank JSON here (default: table on stdout)")
    p.set_defaults(func=cmd_kernels)

    p = sub.add_parser("encode", help="WAV -> codes + spikes")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="output prefix")
    _add_bank(p)
    _add_encoder(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="spikes or codes -> WAV")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--reference", help="original WAV; prints precision P")
    _add_bank(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("stream", help="segmented encoder")
    p.add_argument("input", nargs="?")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--segment-ms", type=float)
    p.add_argument("--budget", type=int, help="spikes per full segment")
    p.add_argument("--chirp", type=float, metavar="SECONDS", help="stream a 20 Hz-8 kHz chirp; write raster")
    _add_bank(p)
    _add_encoder(p)
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("eval", help="sweep drivers writing long-format CSV")
    p.add_argument("what", choices=sorted(_EVALS))
    p.add_argument("-o", "--output")
    p.add_argument("input", nargs="?", help="WAV for 'raster'")
    p.add_argument("--lambdas", type=_float_list, help="e.g. 100:5000:100")
    p.add_argument("--k-list", type=_int_list)
    p.add_argument("--strategies", type=_str_list)
    p.add_argument("--corpus", choices=["audio", "babble", "kernel-sum", "events"], default="audio")
    p.add_argument("--n-signals", type=int, default=10)
    p.add_argument("--n-boot", type=int, default=1000)
    p.add_argument("--snr-db", type=_float_list)
    p.add_argument("--model")
    p.add_argument("--max-codes", type=int, default=DEFAULT_MAX_CODES)
    p.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS)
    _add_bank(p)
    _add_encoder(p)
    _add_corpus(p, duration=2.0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("train", help="train the tempotron readout")
    p.add_argument("-o", "--output", required=True, help="checkpoint JSON")
    p.add_argument("--curve", help="per-epoch accuracy CSV")
    p.add_argument("--data", help="manifest CSV with columns path,label (default: synthetic corpus)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--neurons-per-group", type=int)
    p.add_argument("--target-accuracy", type=float)
    _add_bank(p)
    _add_encoder(p)
    _add_corpus(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="winner-group labels for spike files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--model", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sta", help="spike-triggered average of one neuron")
    p.add_argument("--model", required=True)
    p.add_argument("--neuron", type=int, default=0)
    p.add_argument("--window", type=float, default=0.120)
    p.add_argument("--data")
    p.add_argument("-o", "--output")
    _add_bank(p)
    _add_encoder(p)
    _add_corpus(p)
    p.set_defaults(func=cmd_sta)
    for p in sub.choices.values():
        # Also accepted after the subcommand; SUPPRESS keeps a top-level value.
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    return top


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend is not None and args.backend not in _backend.available():
        _say(f"error: backend {args.backend!r} not built")
        return 2
    try:
        return args.func(args)
    except SpiketrumError as e:
        _say(f"error: {e}")
        return e.exit_code
    except FileNotFoundError as e:
        _say(f"error: {e}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
