"""Sparse spike coding of audio by matching pursuit over a Gammatone bank.

Signals are decomposed into placed, scaled kernels (codes); amplitudes are
then mapped to per-kernel intensity channels so that every code becomes a
single binary spike.
"""
from ._backend import BACKEND
from .codec import CodeSet, EncoderParams, Pursuit, Signal, encode, reconstruct, spike_rate
from .errors import (ConfigError, DataIOError, InsufficientDataError, SizingError, SpiketrumError,
                     ValidationError)
from .itp import IntensityMap, Spiketrum, intensity_levels, itp_decode, itp_encode, make_intensity_map
from .kernels import KernelBank, KernelBankConfig, build_bank
from .metrics import entropy, precision, psth, psth_similarity, similarity_report
from .stream import StreamConfig, stream_encode

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CodeSet", "ConfigError", "DataIOError", "EncoderParams", "InsufficientDataError",
    "IntensityMap", "KernelBank", "KernelBankConfig", "Pursuit", "Signal", "SizingError",
    "Spiketrum", "SpiketrumError", "StreamConfig", "ValidationError", "build_bank", "encode",
    "entropy", "intensity_levels", "itp_decode", "itp_encode", "make_intensity_map", "precision",
    "psth", "psth_similarity", "reconstruct", "similarity_report", "spike_rate", "stream_encode",
]
