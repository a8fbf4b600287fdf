"""Slot loop of the simulator.

``slot_loop`` is written once in plain Python over numpy arrays. Under the
numba backend it is compiled with ``@njit``; under the numpy backend the
same function runs interpreted, with link-success flags and harvests still
produced by vectorized numpy code in the caller. Both paths consume the same
pre-drawn arrays and return identical counters.
"""

import numpy as np

from .._jit import njit, requested_backend
from ..protocol import decide

N_CODES = 12

# slot-loop state vector layout (float64): cbn, b1, b2, min_b1, min_b2
STATE_SIZE = 5


def slot_loop(ok, harvest, batch, state, m1, m2, bin1, bin2,
              occ, cond, deliv, ge1, ge2, bsum1, bsum2, cons1, cons2, hist1, hist2, joint,
              decide_fn):
    n = ok.shape[0]
    nbins = hist1.shape[0] - 1
    cbn = int(state[0])
    b1 = state[1]
    b2 = state[2]
    min1 = state[3]
    min2 = state[4]
    for i in range(n):
        e1 = b1 >= m1
        e2 = b2 >= m2
        code, nxt = decide_fn(cbn, ok[i, 0], ok[i, 1], ok[i, 2], ok[i, 3], ok[i, 4], ok[i, 5], e1, e2)
        c1 = code == 5 or code == 8 or code == 10 or code == 11
        c2 = code == 9
        k = batch[i]
        if k >= 0:
            occ[k, cbn] += 1
            cond[cbn, code] += 1
            joint[cbn, 2 * int(e1) + int(e2)] += 1
            if code == 1 or code == 5 or code == 9 or code == 10 or code == 11:
                deliv[k] += 1
            if e1:
                ge1[k] += 1
            if e2:
                ge2[k] += 1
            bsum1[k] += b1
            bsum2[k] += b2
            if c1:
                cons1[k] += 1
            if c2:
                cons2[k] += 1
        if c1:
            b1 = b1 - m1
        if c2:
            b2 = b2 - m2
        b1 = b1 + harvest[i, 0]
        b2 = b2 + harvest[i, 1]
        if b1 < min1:
            min1 = b1
        if b2 < min2:
            min2 = b2
        if k >= 0:
            j = int(b1 / bin1)
            if j > nbins:
                j = nbins
            hist1[j] += 1
            j = int(b2 / bin2)
            if j > nbins:
                j = nbins
            hist2[j] += 1
        cbn = nxt
    state[0] = cbn
    state[1] = b1
    state[2] = b2
    state[3] = min1
    state[4] = min2


_slot_loop_nb = None


def _compiled():
    global _slot_loop_nb
    if _slot_loop_nb is None:
        _slot_loop_nb = njit(slot_loop)
    return _slot_loop_nb


def run_slots(backend, *args):
    """Dispatch ``slot_loop`` to the requested backend (``None`` reads the env flag)."""
    backend = backend or requested_backend()
    if backend == "numba":
        _compiled()(*args, decide)
    elif backend == "numpy":
        slot_loop(*args, decide.py_func)
    else:
        raise ValueError(f"unknown backend {backend!r}")


def decide_codes(backend, cbn, ok, e1, e2):
    """Vectorized protocol decision over many independent inputs (for property tests)."""
    backend = backend or requested_backend()
    fn = _decide_many_nb() if backend == "numba" else _decide_many
    n = cbn.shape[0]
    code = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    if backend == "numba":
        fn(cbn, ok, e1, e2, code, nxt, decide)
    else:
        fn(cbn, ok, e1, e2, code, nxt, decide.py_func)
    return code, nxt


def _decide_many(cbn, ok, e1, e2, code, nxt, decide_fn):
    for i in range(cbn.shape[0]):
        c, s = decide_fn(cbn[i], ok[i, 0], ok[i, 1], ok[i, 2], ok[i, 3], ok[i, 4], ok[i, 5], e1[i], e2[i])
        code[i] = c
        nxt[i] = s


_decide_many_compiled = None


def _decide_many_nb():
    global _decide_many_compiled
    if _decide_many_compiled is None:
        _decide_many_compiled = njit(_decide_many)
    return _decide_many_compiled
