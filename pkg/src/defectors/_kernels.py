"""Match-play kernels.

The hot loop of a generation is playing every neighbour pairing for
``rounds`` rounds.  Two interchangeable implementations live here:

* ``count_outcomes_numba``: per-edge loop compiled with numba.  Once both
  players are past their opening moves the pair's state is the last three
  joint outcomes (64 states), so the trajectory is eventually periodic; the
  kernel detects the first repeated state and multiplies out whole cycles.
* ``count_outcomes_numpy``: round-by-round loop vectorised over edges.

Both return, per edge, how many rounds ended in each joint outcome from the
first player's point of view (columns CC, CD, DC, DD).  Counts are integers,
so payoffs derived from them are identical whichever backend ran.

Set ``DEFECTORS_DISABLE_NUMBA=1`` to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

NUMBA_DISABLED = os.environ.get("DEFECTORS_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
HAVE_NUMBA = numba is not None


def _swap_table() -> np.ndarray:
    # history index seen by the other player: swap own/opponent bits of each outcome
    out = np.empty(64, dtype=np.int64)
    for s in range(64):
        t = 0
        for shift in (4, 2, 0):
            code = (s >> shift) & 3
            t |= (((code & 1) << 1) | (code >> 1)) << shift
        out[s] = t
    return out


SWAP = _swap_table()


def _count_one(ca, cb, rounds, swap, out):
    """Outcome counts for one match, written into ``out`` (length 4)."""
    for k in range(4):
        out[k] = 0
    a0 = 0
    a1 = 0
    b0 = 0
    b1 = 0
    s = 0
    t = 0
    while t < rounds and t < 3:
        if t == 0:
            a = ca[64]
            b = cb[64]
            a0 = a
            b0 = b
        elif t == 1:
            a = ca[65 + b0]
            b = cb[65 + a0]
            a1 = a
            b1 = b
        else:
            a = ca[67 + 2 * b0 + b1]
            b = cb[67 + 2 * a0 + a1]
        code = 2 * a + b
        out[code] += 1
        s = ((s << 2) & 63) | code
        t += 1
    if t >= rounds:
        return

    seen = np.full(64, -1, dtype=np.int64)
    snap = np.zeros((64, 4), dtype=np.int64)
    while t < rounds:
        if seen[s] >= 0:
            t0 = seen[s]
            period = t - t0
            remaining = rounds - t
            cycles = remaining // period
            for k in range(4):
                out[k] += cycles * (out[k] - snap[s, k])
            tail = remaining - cycles * period
            for _ in range(tail):
                a = ca[s]
                b = cb[swap[s]]
                code = 2 * a + b
                out[code] += 1
                s = ((s << 2) & 63) | code
            return
        seen[s] = t
        for k in range(4):
            snap[s, k] = out[k]
        a = ca[s]
        b = cb[swap[s]]
        code = 2 * a + b
        out[code] += 1
        s = ((s << 2) & 63) | code
        t += 1


def _count_edges(pop, ea, eb, rounds, swap):
    n_edges = ea.shape[0]
    counts = np.zeros((n_edges, 4), dtype=np.int64)
    row = np.zeros(4, dtype=np.int64)
    for e in range(n_edges):
        _count_one(pop[ea[e]], pop[eb[e]], rounds, swap, row)
        for k in range(4):
            counts[e, k] = row[k]
    return counts


def trace_moves(ca, cb, rounds):
    """Per-round moves of both players, without cycle skipping."""
    ma = np.zeros(rounds, dtype=np.uint8)
    mb = np.zeros(rounds, dtype=np.uint8)
    s = 0
    for t in range(rounds):
        if t == 0:
            a, b = ca[64], cb[64]
        elif t == 1:
            a, b = ca[65 + mb[0]], cb[65 + ma[0]]
        elif t == 2:
            a, b = ca[67 + 2 * mb[0] + mb[1]], cb[67 + 2 * ma[0] + ma[1]]
        else:
            a, b = ca[s], cb[SWAP[s]]
        ma[t] = a
        mb[t] = b
        s = ((s << 2) & 63) | int(2 * a + b)
    return ma, mb


if HAVE_NUMBA:
    _count_one_nb = numba.njit(cache=True, nogil=True)(_count_one)

    @numba.njit(cache=True, nogil=True)
    def _count_edges_nb(pop, ea, eb, rounds, swap):
        n_edges = ea.shape[0]
        counts = np.zeros((n_edges, 4), dtype=np.int64)
        row = np.zeros(4, dtype=np.int64)
        for e in range(n_edges):
            _count_one_nb(pop[ea[e]], pop[eb[e]], rounds, swap, row)
            for k in range(4):
                counts[e, k] = row[k]
        return counts


def count_outcomes_numba(pop, ea, eb, rounds) -> np.ndarray:
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    return _count_edges_nb(np.ascontiguousarray(pop, dtype=np.uint8),
                           np.ascontiguousarray(ea, dtype=np.int64),
                           np.ascontiguousarray(eb, dtype=np.int64),
                           int(rounds), SWAP)


def count_outcomes_python(pop, ea, eb, rounds) -> np.ndarray:
    """The numba kernel body run by the interpreter; slow, kept for cross-checks."""
    pop = np.asarray(pop, dtype=np.int64)
    return _count_edges(pop, np.asarray(ea), np.asarray(eb), int(rounds), SWAP)


def count_outcomes_numpy(pop, ea, eb, rounds) -> np.ndarray:
    pop = np.asarray(pop, dtype=np.uint8)
    ca = pop[np.asarray(ea, dtype=np.int64)].astype(np.int64)
    cb = pop[np.asarray(eb, dtype=np.int64)].astype(np.int64)
    n_edges = ca.shape[0]
    rows = np.arange(n_edges)
    counts = np.zeros((n_edges, 4), dtype=np.int64)
    s = np.zeros(n_edges, dtype=np.int64)
    a_hist = []
    b_hist = []
    for t in range(int(rounds)):
        if t == 0:
            a = ca[:, 64]
            b = cb[:, 64]
        elif t == 1:
            a = ca[rows, 65 + b_hist[0]]
            b = cb[rows, 65 + a_hist[0]]
        elif t == 2:
            a = ca[rows, 67 + 2 * b_hist[0] + b_hist[1]]
            b = cb[rows, 67 + 2 * a_hist[0] + a_hist[1]]
        else:
            a = ca[rows, s]
            b = cb[rows, SWAP[s]]
        if t < 2:
            a_hist.append(a)
            b_hist.append(b)
        code = 2 * a + b
        counts[rows, code] += 1
        s = ((s << 2) & 63) | code
    return counts


def count_outcomes(pop, ea, eb, rounds) -> np.ndarray:
    """Per-edge outcome counts using the active backend."""
    if HAVE_NUMBA and not NUMBA_DISABLED:
        return count_outcomes_numba(pop, ea, eb, rounds)
    return count_outcomes_numpy(pop, ea, eb, rounds)


def backend_name() -> str:
    return "numba" if HAVE_NUMBA and not NUMBA_DISABLED else "numpy"
