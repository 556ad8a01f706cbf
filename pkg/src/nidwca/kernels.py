"""Batch evolution of fuzzy states to their attractors.

Two interchangeable implementations with bit-identical output:

* ``*_nb`` -- numba ``@njit`` loops, one record at a time, parallel over
  chunks of records;
* ``*_np`` -- pure numpy, all records of a chunk advanced together.

``evolve_batch`` dispatches on the backend chosen in ``_accel``.

Cycle detection works on quantized fingerprints ``rint(x / eps)``.  Each
visited fingerprint is hashed (wrapping uint64 dot product) and a hash hit is
confirmed by comparing the full fingerprint, so collisions cannot merge
states.  A cycle is represented by its lexicographically smallest
fingerprint, which makes the representative independent of the phase at which
a trajectory enters the cycle.
"""
import numpy as np

from . import _accel
from ._accel import njit, prange
from .rules import GENE_COMPLEMENT, GENE_READS

_HASH_CACHE = {}


def hash_multipliers(n):
    m = _HASH_CACHE.get(n)
    if m is None:
        rng = np.random.default_rng(0x5EED_CA)
        m = rng.integers(1, 2**63, size=n, dtype=np.uint64) | np.uint64(1)
        _HASH_CACHE[n] = m
    return m


def gene_tables(genes):
    genes = np.asarray(genes, dtype=np.int64)
    reads = GENE_READS[genes]
    return (
        np.ascontiguousarray(reads[:, 0]),
        np.ascontiguousarray(reads[:, 1]),
        np.ascontiguousarray(reads[:, 2]),
        np.ascontiguousarray(GENE_COMPLEMENT[genes]),
    )


# --------------------------------------------------------------------------
# numba path

@njit(cache=True)
def _step_one_nb(x, out, rl, rs, rr, comp):
    n = x.shape[0]
    for i in range(n):
        acc = 0.0
        if rl[i] and i > 0:
            acc += x[i - 1]
        if rs[i]:
            acc += x[i]
        if rr[i] and i < n - 1:
            acc += x[i + 1]
        if acc > 1.0:
            acc = 1.0
        if comp[i]:
            acc = 1.0 - acc
        out[i] = acc


@njit(cache=True)
def step_batch_nb(states, rl, rs, rr, comp):
    out = np.empty_like(states)
    for r in range(states.shape[0]):
        _step_one_nb(states[r], out[r], rl, rs, rr, comp)
    return out


@njit(cache=True)
def _quantize_nb(x, eps, q, mult):
    h = np.uint64(0)
    for i in range(x.shape[0]):
        v = np.int64(np.rint(x[i] / eps))
        q[i] = v
        h += np.uint64(v) * mult[i]
    return h


@njit(cache=True)
def _lex_less(a, b):
    for i in range(a.shape[0]):
        if a[i] < b[i]:
            return True
        if a[i] > b[i]:
            return False
    return False


@njit(cache=True)
def _evolve_range_nb(states, lo, hi, rl, rs, rr, comp, max_steps, eps,
                     max_cycle_len, mult, attractors, fingerprints, cycles,
                     transients, truncated):
    n = states.shape[1]
    hx = np.empty((max_steps + 1, n), dtype=np.float64)
    hq = np.empty((max_steps + 1, n), dtype=np.int64)
    hh = np.empty(max_steps + 1, dtype=np.uint64)
    q = np.empty(n, dtype=np.int64)
    # open-addressing table: slot -> history index (-1 = empty)
    size = 1
    while size < 2 * (max_steps + 1):
        size *= 2
    mask = np.uint64(size - 1)
    table = np.full(size, -1, dtype=np.int64)
    for r in range(lo, hi):
        hx[0, :] = states[r]
        hh[0] = _quantize_nb(hx[0], eps, hq[0], mult)
        table[np.int64(hh[0] & mask)] = 0
        start = -1
        t_end = 0
        for t in range(1, max_steps + 1):
            _step_one_nb(hx[t - 1], hx[t], rl, rs, rr, comp)
            h = _quantize_nb(hx[t], eps, q, mult)
            slot = np.int64(h & mask)
            while table[slot] >= 0:
                u = table[slot]
                if hh[u] == h:
                    same = True
                    for i in range(n):
                        if hq[u, i] != q[i]:
                            same = False
                            break
                    if same:
                        start = u
                        break
                slot = (slot + 1) & (size - 1)
            t_end = t
            if start >= 0:
                break
            hq[t, :] = q
            hh[t] = h
            table[slot] = t
        table[:] = -1
        if start < 0 or t_end - start > max_cycle_len:
            attractors[r, :] = hx[t_end]
            _quantize_nb(hx[t_end], eps, fingerprints[r], mult)
            cycles[r] = 1
            transients[r] = t_end
            truncated[r] = True
            continue
        best = start
        for u in range(start + 1, t_end):
            if _lex_less(hq[u], hq[best]):
                best = u
        attractors[r, :] = hx[best]
        fingerprints[r, :] = hq[best]
        cycles[r] = t_end - start
        transients[r] = start
        truncated[r] = False


@njit(parallel=True, cache=True)
def evolve_batch_nb(states, rl, rs, rr, comp, max_steps, eps, max_cycle_len,
                    mult, n_chunks):
    n_rec, n = states.shape
    attractors = np.empty((n_rec, n), dtype=np.float64)
    fingerprints = np.empty((n_rec, n), dtype=np.int64)
    cycles = np.empty(n_rec, dtype=np.int64)
    transients = np.empty(n_rec, dtype=np.int64)
    truncated = np.empty(n_rec, dtype=np.bool_)
    size = (n_rec + n_chunks - 1) // n_chunks
    for c in prange(n_chunks):
        lo = c * size
        hi = min(n_rec, lo + size)
        if lo < hi:
            _evolve_range_nb(states, lo, hi, rl, rs, rr, comp, max_steps, eps,
                             max_cycle_len, mult, attractors, fingerprints,
                             cycles, transients, truncated)
    return attractors, fingerprints, cycles, transients, truncated


# --------------------------------------------------------------------------
# numpy path

def step_batch_np(states, rl, rs, rr, comp):
    left = np.zeros_like(states)
    left[:, 1:] = states[:, :-1]
    right = np.zeros_like(states)
    right[:, :-1] = states[:, 1:]
    # same summation order as the numba loop: left, self, right
    acc = left * rl + states * rs + right * rr
    np.minimum(acc, 1.0, out=acc)
    return np.where(comp, 1.0 - acc, acc)


def _quantize_np(x, eps, mult):
    q = np.rint(x / eps).astype(np.int64)
    h = (q.astype(np.uint64) * mult).sum(axis=1, dtype=np.uint64)
    return q, h


def _evolve_chunk_np(states, tables, max_steps, eps, max_cycle_len, mult):
    rl, rs, rr, comp = (t.astype(np.float64) if i < 3 else t for i, t in enumerate(tables))
    m, n = states.shape
    hx = np.empty((max_steps + 1, m, n))
    hq = np.empty((max_steps + 1, m, n), dtype=np.int64)
    hh = np.empty((max_steps + 1, m), dtype=np.uint64)
    hx[0] = states
    hq[0], hh[0] = _quantize_np(states, eps, mult)
    start = np.full(m, -1, dtype=np.int64)
    t_end = np.zeros(m, dtype=np.int64)
    active = np.arange(m)
    for t in range(1, max_steps + 1):
        if active.size == 0:
            break
        x = step_batch_np(hx[t - 1, active], rl, rs, rr, comp)
        q, h = _quantize_np(x, eps, mult)
        hx[t, active] = x
        t_end[active] = t
        hit = hh[:t, active] == h  # (t, a)
        found = np.zeros(active.size, dtype=bool)
        for u, j in zip(*np.nonzero(hit)):
            # np.nonzero is row-major, so the first confirmed u per record is the smallest
            if not found[j] and np.array_equal(hq[u, active[j]], q[j]):
                found[j] = True
                start[active[j]] = u
        keep = ~found
        hq[t, active[keep]] = q[keep]
        hh[t, active[keep]] = h[keep]
        active = active[keep]

    attractors = np.empty((m, n))
    fingerprints = np.empty((m, n), dtype=np.int64)
    cycles = np.ones(m, dtype=np.int64)
    transients = np.empty(m, dtype=np.int64)
    truncated = np.zeros(m, dtype=bool)
    for r in range(m):
        s, e = start[r], t_end[r]
        if s < 0 or e - s > max_cycle_len:
            attractors[r] = hx[e, r]
            fingerprints[r] = np.rint(hx[e, r] / eps).astype(np.int64)
            transients[r] = e
            truncated[r] = True
            continue
        cyc = hq[s:e, r]
        best = s
        if e - s > 1:
            order = np.lexsort(cyc.T[::-1])
            best = s + int(order[0])
        attractors[r] = hx[best, r]
        fingerprints[r] = hq[best, r]
        cycles[r] = e - s
        transients[r] = s
    return attractors, fingerprints, cycles, transients, truncated


def evolve_batch_np(states, tables, max_steps, eps, max_cycle_len, mult, chunk=2048):
    parts = [
        _evolve_chunk_np(states[lo:lo + chunk], tables, max_steps, eps, max_cycle_len, mult)
        for lo in range(0, states.shape[0], chunk)
    ]
    if not parts:
        n = states.shape[1]
        return (np.empty((0, n)), np.empty((0, n), dtype=np.int64),
                np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64),
                np.empty(0, dtype=bool))
    return tuple(np.concatenate(p) for p in zip(*parts))


# --------------------------------------------------------------------------
# dispatch

def step_batch(states, genes, backend=None):
    backend = backend or _accel.requested_backend()
    states = np.ascontiguousarray(states, dtype=np.float64)
    tables = gene_tables(genes)
    if backend == "numba":
        return step_batch_nb(states, *tables)
    return step_batch_np(states, *tables)


def evolve_batch(states, genes, max_steps, eps, max_cycle_len, backend=None):
    """Evolve every row of ``states`` under the rule vector ``genes``.

    Returns ``(attractors, fingerprints, cycle_lengths, transients, truncated)``.
    """
    backend = backend or _accel.requested_backend()
    states = np.ascontiguousarray(states, dtype=np.float64)
    if states.ndim != 2:
        raise ValueError("states must be 2-D (records x cells)")
    tables = gene_tables(genes)
    mult = hash_multipliers(states.shape[1])
    if backend == "numba":
        import numba

        _accel.configure_threads()
        n_chunks = max(1, min(states.shape[0], 4 * numba.get_num_threads()))
        return evolve_batch_nb(states, *tables, int(max_steps), float(eps),
                               int(max_cycle_len), mult, n_chunks)
    return evolve_batch_np(states, tables, int(max_steps), float(eps),
                           int(max_cycle_len), mult)
