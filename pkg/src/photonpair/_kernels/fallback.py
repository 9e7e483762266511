"""Pure-numpy implementations of the hot kernels.

Same contracts as the compiled ``_core`` extension; used automatically
when the extension is unavailable or when PHOTONPAIR_PURE is set.
"""

import numpy as np


def comb_amplitude(tau, coefs, fsr):
    """Real amplitude c_0 + 2*Re(sum_{m>=1} c_m z^m), z = exp(-2j*pi*fsr*tau).

    Mirrors the compiled kernel's per-element power recurrence so the two
    backends agree to rounding noise.
    """
    tau = np.ascontiguousarray(tau, dtype=np.float64)
    out = np.full(tau.shape, coefs[0].real, dtype=np.float64)
    w = np.exp(-2j * np.pi * fsr * tau)
    p = np.ones_like(w)
    for m in range(1, len(coefs)):
        p = p * w
        out += 2.0 * (coefs[m].real * p.real - coefs[m].imag * p.imag)
    return out


def correlate_ticks(s, it, tick, bin_width, window, n_bins):
    """Delay histogram over all (signal, idler) pairs within the window.

    Vectorized over the signal stream with searchsorted range bounds; the
    exact bin test matches the compiled kernel bit for bit.
    """
    s = np.ascontiguousarray(s, dtype=np.int64)
    it = np.ascontiguousarray(it, dtype=np.int64)
    counts = np.zeros(n_bins, dtype=np.int64)
    if len(s) == 0 or len(it) == 0 or n_bins <= 0:
        return counts
    d_lo = np.int64(np.floor(-window / tick)) - 1
    d_hi = np.int64(np.floor(window / tick)) + 1
    lo = np.searchsorted(it, s + d_lo, side="left")
    hi = np.searchsorted(it, s + d_hi, side="right")
    lengths = hi - lo
    keep = lengths > 0
    if not keep.any():
        return counts
    lo, lengths, s_kept = lo[keep], lengths[keep], s[keep]
    # expand [lo, lo+len) ranges into flat idler indexes
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    total = int(lengths.sum())
    flat = np.repeat(lo - starts, lengths) + np.arange(total, dtype=np.int64)
    d = it[flat] - np.repeat(s_kept, lengths)
    x = (d * tick + window) / bin_width
    idx = np.floor(x).astype(np.int64)
    ok = (idx >= 0) & (idx < n_bins)
    np.add.at(counts, idx[ok], 1)
    return counts
