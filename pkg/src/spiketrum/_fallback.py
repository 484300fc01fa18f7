"""Pure numpy implementation of the hot kernels.

Mirrors ``_core.pyx`` argument for argument. Used when the compiled
extension is unavailable or SPIKETRUM_PURE_PYTHON is set.

Correlation table layout: H has shape (M, T). For every kernel m and block
b of ``block`` consecutive shifts, colmax[m, b] / colarg[m, b] hold the
block maximum and its shift (first occurrence). block_max[b] / block_arg[b]
reduce over kernels; block_arg stores tau * M + m and ties resolve to the
smallest (tau, m).
"""
import numpy as np

DONE = 0
STOP_ENERGY = 1
STOP_NONPOSITIVE = 2
CLIPPED = 3


def _column_blocks(H, colmax, colarg, m, b0, b1, block, absolute):
    T = H.shape[1]
    n = b1 - b0
    seg = H[m, b0 * block : min(b1 * block, T)]
    if absolute:
        seg = np.abs(seg)
    if len(seg) < n * block:
        seg = np.concatenate([seg, np.full(n * block - len(seg), -np.inf)])
    blocks = seg.reshape(n, block)
    arg = blocks.argmax(axis=1)
    colmax[m, b0:b1] = blocks[np.arange(n), arg]
    colarg[m, b0:b1] = (b0 + np.arange(n)) * block + arg


def _reduce_blocks(colmax, colarg, block_max, block_arg, b0, b1):
    M = colmax.shape[0]
    v = colmax[:, b0:b1]
    best = v.max(axis=0)
    key = colarg[:, b0:b1] * M + np.arange(M)[:, None]
    key = np.where(v == best[None, :], key, np.iinfo(np.int64).max)
    block_max[b0:b1] = best
    block_arg[b0:b1] = key.min(axis=0)


def refresh_blocks(H, colmax, colarg, block_max, block_arg, block, lo, hi, absolute):
    """Recompute every kernel's maxima for blocks touching shifts [lo, hi)."""
    if hi <= lo:
        return
    b0 = lo // block
    b1 = (hi - 1) // block + 1
    for m in range(H.shape[0]):
        _column_blocks(H, colmax, colarg, m, b0, b1, block, absolute)
    _reduce_blocks(colmax, colarg, block_max, block_arg, b0, b1)


def run_pursuit(R, H, colmax, colarg, block_max, block_arg, block, kern_flat, kern_off, lengths,
                gram, gram_off, n_max, stop_energy, energy, absolute,
                out_m, out_tau, out_s, out_e, count):
    M, T = H.shape
    Lmax = int(lengths.max())
    while count < n_max:
        if energy < stop_energy:
            return count, energy, STOP_ENERGY
        b = int(np.argmax(block_max))
        if not block_max[b] > 0:
            return count, energy, STOP_NONPOSITIVE
        tau, m = divmod(int(block_arg[b]), M)
        L = int(lengths[m])
        Lc = min(L, T - tau)
        phi = kern_flat[kern_off[m] : kern_off[m] + Lc]
        seg = R[tau : tau + Lc]
        s = float(np.dot(seg, phi))
        new = seg - s * phi
        energy += float(np.dot(new, new) - np.dot(seg, seg))
        R[tau : tau + Lc] = new
        for m2 in range(M):
            L2 = int(lengths[m2])
            lo = max(0, tau - L2 + 1)
            hi = min(T, tau + L)
            g0 = gram_off[m, m2] + (lo - tau) + (L2 - 1)
            H[m2, lo:hi] -= s * gram[g0 : g0 + hi - lo]
            _column_blocks(H, colmax, colarg, m2, lo // block, (hi - 1) // block + 1, block, absolute)
        lo = max(0, tau - Lmax + 1)
        hi = min(T, tau + L)
        _reduce_blocks(colmax, colarg, block_max, block_arg, lo // block, (hi - 1) // block + 1)
        out_m[count] = m
        out_tau[count] = tau
        out_s[count] = s
        out_e[count] = energy
        count += 1
        if tau + L > T:
            return count, energy, CLIPPED
    return count, energy, DONE


def lif_run(drive, threshold, decay):
    """Threshold-and-reset readout over a precomputed free potential.

    drive has shape (n_steps, n_neurons). A spike resets the potential to
    zero; the reset decays with factor `decay` per step. Returns a uint8
    raster of the same shape.
    """
    n_t, n = drive.shape
    raster = np.zeros((n_t, n), dtype=np.uint8)
    r = np.zeros(n)
    for t in range(n_t):
        r *= decay
        v = drive[t] - r
        fired = v >= threshold
        if fired.any():
            raster[t, fired] = 1
            r[fired] += v[fired]
    return raster
