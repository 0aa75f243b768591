"""Pure-numpy implementations of the hot kernels.

Same signatures and results as the compiled ``_ckernels`` module.  Used when
the extension is not built or ``GCTUBES_PURE_PYTHON`` is set.
"""

import numpy as np

_CHUNK = 65536


def tube_counts(samples, poles, sin_w):
    """Number of tubes containing each sample, as an ``int32`` array."""
    samples = np.asarray(samples, dtype=np.float64)
    poles = np.asarray(poles, dtype=np.float64)
    out = np.empty(samples.shape[0], dtype=np.int32)
    for start in range(0, samples.shape[0], _CHUNK):
        block = samples[start:start + _CHUNK]
        inside = np.abs(block @ poles.T) <= sin_w
        out[start:start + _CHUNK] = inside.sum(axis=1)
    return out


def pair_hits(samples, a, b, sin_w):
    samples = np.asarray(samples, dtype=np.float64)
    da = np.abs(samples @ np.asarray(a, dtype=np.float64))
    db = np.abs(samples @ np.asarray(b, dtype=np.float64))
    return int(np.count_nonzero((da <= sin_w) & (db <= sin_w)))


def band_hits(z, phi, sin_alpha, cos_alpha, sin_w):
    """Count band samples ``(z, phi)`` around pole ``e_z`` that also lie in the
    tube with pole ``(0, sin_alpha, cos_alpha)``."""
    z = np.asarray(z, dtype=np.float64)
    r = np.sqrt(1.0 - z * z)
    d = r * np.sin(phi) * sin_alpha + z * cos_alpha
    return int(np.count_nonzero(np.abs(d) <= sin_w))


def greedy_fill(candidates, accepted, n_acc, max_dot, reject_run, max_reject):
    """Scan candidates, appending each one whose ``|<c, p>|`` is at most
    ``max_dot`` for every accepted ``p``.

    ``accepted`` is an ``(n, 3)`` buffer whose first ``n_acc`` rows are filled.
    Returns ``(n_acc, consumed, reject_run)``; stops early when the buffer is
    full or ``reject_run`` reaches ``max_reject``.
    """
    n = accepted.shape[0]
    consumed = 0
    for c in candidates:
        if n_acc >= n or reject_run >= max_reject:
            break
        consumed += 1
        if n_acc == 0 or np.max(np.abs(accepted[:n_acc] @ c)) <= max_dot:
            accepted[n_acc] = c
            n_acc += 1
            reject_run = 0
        else:
            reject_run += 1
    return n_acc, consumed, reject_run
