"""Counter-based pseudo-randomness.

Every random quantity in the package is a pure function of integer words
(master seed, trial index, site coordinates).  This keeps Monte Carlo
trials deterministic regardless of scheduling and lets overlapping field
regions agree site-by-site without storing generator state.

The mixer is the splitmix64 finalizer applied in an absorb chain: each
input word is folded into a 64-bit state and the state is re-mixed.  The
final state maps to a double in [0, 1) using the top 53 bits.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = float(2.0**-53)


def _mix(z):
    """splitmix64 finalizer on uint64 scalars or arrays (wraps mod 2^64)."""
    z = z + _GAMMA
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _as_word(w) -> np.uint64:
    return np.int64(w).view(np.uint64) if w < 0 else np.uint64(w)


def hash_words(*words: int) -> int:
    """Collapse a tuple of signed integer words into one 64-bit value."""
    with np.errstate(over="ignore"):
        state = _mix(np.uint64(0))
        for w in words:
            state = _mix(state ^ _as_word(w))
    return int(state)


def unit_from_words(*words: int) -> float:
    """One uniform [0, 1) variate keyed by integer words."""
    return (hash_words(*words) >> 11) * _INV53


def counter_uniforms(seed: int, trial, coords) -> np.ndarray:
    """Uniform [0, 1) variates indexed by (seed, trial, site coordinates).

    Parameters
    ----------
    seed : int
        64-bit master seed.
    trial : int or (T,) array of int
        Trial index (or indices, broadcast against sites).
    coords : (M, k) array of int
        Integer site coordinates; each row is an independent counter.

    Returns
    -------
    (M,) array when ``trial`` is scalar, else (T, M).

    The same (seed, trial, row) always yields the same variate, which is
    what makes region extension and parallel trials reproducible.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=np.int64))
    trials = np.asarray(trial, dtype=np.int64)
    scalar_trial = trials.ndim == 0
    trials = np.atleast_1d(trials)

    with np.errstate(over="ignore"):
        base = _mix(np.uint64(seed) ^ _GAMMA)
        tstate = _mix(base ^ trials.view(np.uint64))  # (T,)
        state = np.broadcast_to(tstate[:, None], (trials.size, coords.shape[0])).copy()
        for k in range(coords.shape[1]):
            word = coords[:, k].view(np.uint64)
            state = _mix(state ^ word[None, :])
        out = (state >> np.uint64(11)).astype(np.float64) * _INV53
    return out[0] if scalar_trial else out
