"""Fast access-count (tac) evaluation of machines on texts.

Encodes machines as flat integer tables and texts as byte matrices, then runs
a compiled scan loop (numba) over (machine, text) job lists; falls back to
the reference pure-Python loop when numba is unavailable.  Only the access
count is computed here — occurrence reporting and traces stay in
machine.run_generic, against which this kernel is cross-checked by the test
suite."""

from __future__ import annotations

import numpy as np

from .machine import Machine, MachineError, run_generic

try:  # pragma: no cover - environment dependent
    import numba

    HAS_NUMBA = True
except Exception:  # pragma: no cover
    numba = None
    HAS_NUMBA = False

__all__ = ["HAS_NUMBA", "encode_texts", "batch_tac", "batch_tac_jobs"]


def encode_texts(texts, alphabet) -> tuple[np.ndarray, np.ndarray]:
    """Pack texts into a (count, max_len) uint8 matrix of symbol indices plus
    a vector of true lengths."""
    symbols = alphabet.symbols
    if any(ord(s) > 255 for s in symbols):
        raise MachineError("engine supports single-byte alphabet symbols only")
    lut = np.full(256, 255, dtype=np.uint8)
    for i, s in enumerate(symbols):
        lut[ord(s)] = i
    lengths = np.array([len(t) for t in texts], dtype=np.int64)
    maxlen = int(lengths.max()) if len(texts) else 0
    mat = np.zeros((len(texts), maxlen), dtype=np.uint8)
    for i, t in enumerate(texts):
        raw = np.frombuffer(t.encode("latin-1"), dtype=np.uint8)
        enc = lut[raw]
        if (enc == 255).any():
            pos = int(np.argmax(enc == 255))
            raise MachineError(
                f"text symbol {t[pos]!r} at position {pos} not in alphabet "
                f"{symbols!r}"
            )
        mat[i, : len(t)] = enc
    return mat, lengths


def _machine_tables(machines: list[Machine]):
    """Flatten several machines (sharing one alphabet) into contiguous
    delta/sigma/next tables with per-machine offsets."""
    alphabet = machines[0].alphabet
    for m in machines:
        if m.alphabet != alphabet:
            raise MachineError("all machines in a batch must share the alphabet")
    asz = alphabet.size
    offsets = np.zeros(len(machines), dtype=np.int64)
    total = 0
    for i, m in enumerate(machines):
        offsets[i] = total
        total += m.n_states
    delta = np.zeros(total * asz, dtype=np.int64)
    sigma = np.zeros(total * asz, dtype=np.int64)
    nxt = np.zeros(total, dtype=np.int64)
    inits = np.zeros(len(machines), dtype=np.int64)
    nstates = np.zeros(len(machines), dtype=np.int64)
    wlens = np.zeros(len(machines), dtype=np.int64)
    for i, m in enumerate(machines):
        base = offsets[i]
        inits[i] = m.initial
        nstates[i] = m.n_states
        wlens[i] = len(m.pattern)
        for q in range(m.n_states):
            nxt[base + q] = m.next_of[q]
            for x in range(asz):
                delta[(base + q) * asz + x] = m.delta[q][x]
                sigma[(base + q) * asz + x] = m.sigma[q][x]
    return delta, sigma, nxt, asz, offsets, inits, nstates, wlens


def _py_scan(machine: Machine, text: str) -> int:
    trace = run_generic(machine, text, record_steps=False)
    return -1 if trace.truncated else trace.tac


_kernel = None


def _get_kernel():
    global _kernel
    if _kernel is not None:
        return _kernel

    @numba.njit(cache=True, nogil=True)
    def kernel(delta, sigma, nxt, asz, offsets, inits, nstates, wlens,
               texts, tlens, jobs, out):  # pragma: no cover - compiled
        for ji in range(jobs.shape[0]):
            mid = jobs[ji, 0]
            tid = jobs[ji, 1]
            base = offsets[mid]
            tl = tlens[tid]
            limit = tl - wlens[mid]
            cap = (tl + 1) * (nstates[mid] + 1) + 1
            q = inits[mid]
            p = np.int64(0)
            tac = np.int64(0)
            while p <= limit:
                idx = p + nxt[base + q]
                if idx >= tl:
                    break
                x = texts[tid, idx]
                tac += 1
                if tac > cap:
                    tac = -1
                    break
                row = (base + q) * asz + x
                p += sigma[row]
                q = delta[row]
            out[ji] = tac

    _kernel = kernel
    return _kernel


def batch_tac_jobs(machines: list[Machine], texts: list[str], jobs) -> np.ndarray:
    """Access counts for each (machine index, text index) job; -1 marks a
    scan that exceeded its iteration cap (a validity violation)."""
    jobs = np.asarray(jobs, dtype=np.int64).reshape(-1, 2)
    out = np.zeros(len(jobs), dtype=np.int64)
    if not len(jobs):
        return out
    if HAS_NUMBA:
        tables = _machine_tables(machines)
        mat, lengths = encode_texts(texts, machines[0].alphabet)
        _get_kernel()(*tables[:3], tables[3], *tables[4:], mat, lengths, jobs, out)
    else:
        for i, (mid, tid) in enumerate(jobs):
            out[i] = _py_scan(machines[mid], texts[tid])
    return out


def batch_tac(machine: Machine, texts: list[str]) -> list[int]:
    """Access count of one machine on each text."""
    jobs = [(0, i) for i in range(len(texts))]
    return batch_tac_jobs([machine], texts, jobs).tolist()
