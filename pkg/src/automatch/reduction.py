"""Minimal-shift analysis, relevance/consistency/interchangeability of
states, the position-normalizing transform, irrelevant-read equalization, and
the full canonicalization pipeline.

The minimal shift of a state is the least total window advance before a
report can possibly happen from there.  States reading at offsets below their
minimal shift perform reads whose outcome cannot influence the next report;
canonicalization eliminates such waste while never decreasing asymptotic
speed under the chosen model.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .expansion import (
    compact,
    expand,
    has_zero_shift_cycle,
    check_validity_standard,
    memory_of_standard,
    redirect,
    standardize,
    _find_reduction,
)
from .machine import (
    Machine,
    MachineError,
    PreconditionError,
    canonical_relabel,
    prune_unreachable,
    validate_bruteforce,
)
from .models import IidModel
from .speed import asymptotic_speed

__all__ = [
    "ShiftProfile",
    "compute_mnshft",
    "relevant_states",
    "is_consistent",
    "are_interchangeable",
    "positify",
    "equalize_irrelevant",
    "canonicalize",
]


@dataclass(frozen=True)
class ShiftProfile:
    """Minimal total shift from each state to a possible report; math.inf
    when no prematch state is reachable."""

    mnshft: dict[int, float]

    def of(self, q: int) -> float:
        return self.mnshft[q]


def compute_mnshft(machine: Machine) -> ShiftProfile:
    """Shortest-path solve of the minimal-shift recursion: prematch states
    are 0; otherwise the cheapest transition shift plus the target's value
    (Dijkstra over reversed transitions, non-negative weights)."""
    n = machine.n_states
    reverse: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for q in machine.non_sink_states():
        for x in range(machine.alphabet.size):
            r = machine.delta[q][x]
            if r != machine.sink:
                reverse[r].append((q, machine.sigma[q][x]))
    dist: dict[int, float] = {q: math.inf for q in range(n)}
    heap = []
    for q in machine.non_sink_states():
        if machine.prematch[q]:
            dist[q] = 0
            heapq.heappush(heap, (0, q))
    while heap:
        d, r = heapq.heappop(heap)
        if d > dist[r]:
            continue
        for q, w in reverse[r]:
            if machine.prematch[q]:
                continue
            nd = d + w
            if nd < dist[q]:
                dist[q] = nd
                heapq.heappush(heap, (nd, q))
    return ShiftProfile(mnshft=dist)


def relevant_states(machine: Machine) -> set[int]:
    """States whose current read can still influence the next report:
    exactly those with minimal shift 0."""
    profile = compute_mnshft(machine)
    return {q for q in machine.non_sink_states() if profile.of(q) == 0}


def _memories_by_origin(machine: Machine) -> dict[int, list]:
    em = expand(machine)
    groups: dict[int, list] = {}
    for sid, mem in em.memory_of.items():
        groups.setdefault(em.origin_of[sid], []).append(mem)
    return groups


def _agree(mem_a, mem_b, floor: float) -> bool:
    if mem_a.frst != mem_b.frst:
        return False
    return all(
        mem_a.get(i) == mem_b.get(i) for i in mem_a.frst if i >= floor
    )


def is_consistent(machine: Machine, q: int) -> bool:
    """All memories the expansion attaches to q share their known-position
    set and agree on every entry at or above q's minimal shift."""
    mems = _memories_by_origin(machine).get(q, [])
    if len(mems) <= 1:
        return True
    floor = compute_mnshft(machine).of(q)
    first = mems[0]
    return all(_agree(first, other, floor) for other in mems[1:])


def are_interchangeable(machine: Machine, q: int, q2: int) -> bool:
    """Both states consistent, and every cross pair of their memories shares
    the known-position set and agrees at positions visible to either state
    (at or above the smaller of the two minimal shifts)."""
    groups = _memories_by_origin(machine)
    profile = compute_mnshft(machine)
    mems_a = groups.get(q, [])
    mems_b = groups.get(q2, [])
    fa, fb = profile.of(q), profile.of(q2)
    if len(mems_a) > 1 and not all(_agree(mems_a[0], m, fa) for m in mems_a[1:]):
        return False
    if len(mems_b) > 1 and not all(_agree(mems_b[0], m, fb) for m in mems_b[1:]):
        return False
    floor = min(fa, fb)
    return all(_agree(ma, mb, floor) for ma in mems_a for mb in mems_b)


def positify(machine: Machine, profile: ShiftProfile | None = None) -> Machine:
    """Re-anchor every read as early as possible: subtract each state's
    minimal shift from its read offset, moving the difference into the
    surrounding transition shifts.  Accessed text positions, reported
    occurrences, and speed are unchanged; the order never increases.

    Requires next(q) >= mnshft(q) (finite) on every reachable state;
    unreachable non-sink states are dropped."""
    machine = prune_unreachable(machine)
    if profile is None:
        profile = compute_mnshft(machine)
    shifts = {}
    for q in machine.non_sink_states():
        mq = profile.of(q)
        if math.isinf(mq):
            raise PreconditionError(
                f"state {q} cannot reach a report (infinite minimal shift)"
            )
        if machine.next_of[q] < mq:
            raise PreconditionError(
                f"state {q} reads at offset {machine.next_of[q]} below its "
                f"minimal shift {mq}; equalize irrelevant reads first"
            )
        shifts[q] = int(mq)
    if all(v == 0 for v in shifts.values()):
        return machine
    next_of = list(machine.next_of)
    delta = [list(row) for row in machine.delta]
    sigma = [list(row) for row in machine.sigma]
    for q in machine.non_sink_states():
        next_of[q] = machine.next_of[q] - shifts[q]
        for x in range(machine.alphabet.size):
            r = machine.delta[q][x]
            if r == machine.sink:
                sigma[q][x] = 0
            else:
                sigma[q][x] = machine.sigma[q][x] - shifts[q] + shifts[r]
                assert sigma[q][x] >= 0
    return Machine(
        alphabet=machine.alphabet,
        pattern=machine.pattern,
        next_of=tuple(next_of),
        prematch=machine.prematch,
        delta=tuple(tuple(row) for row in delta),
        sigma=tuple(tuple(row) for row in sigma),
        initial=machine.initial,
        sink=machine.sink,
    )


def _is_compact(machine: Machine) -> bool:
    return _find_reduction(machine) is None


def _check_valid(machine: Machine) -> bool:
    """Validity via the structural theorem when applicable, else a bounded
    behavioral check."""
    try:
        return bool(check_validity_standard(machine))
    except PreconditionError:
        wlen = len(machine.pattern)
        return bool(
            validate_bruteforce(
                machine,
                exhaustive_len=min(7, 2 * wlen + 2),
                random_trials=60,
                random_len=6 * wlen + 8,
                seed=0,
            )
        )


def equalize_irrelevant(machine: Machine, model: IidModel) -> Machine:
    """While some state reads below its minimal shift with disagreeing
    transition targets, merge the two targets (they are interchangeable) by
    whichever redirection is faster under the model, ties toward keeping the
    lower state id.  Speed never decreases; the number of disagreeing triples
    strictly decreases, so the loop terminates."""
    em = expand(machine)
    if em.forced_read_states:
        raise PreconditionError("equalization requires a non-redundant machine")
    if not _is_compact(machine):
        raise PreconditionError("equalization requires a compact machine")
    for q in machine.non_sink_states():
        if not is_consistent(machine, q):
            raise PreconditionError(f"state {q} is not consistent")
    if not _check_valid(machine):
        raise PreconditionError("equalization requires a valid machine")

    cur = machine
    guard = machine.n_states * machine.alphabet.size**2 + machine.n_states + 8
    for _ in range(guard):
        profile = compute_mnshft(cur)
        reachable = [s for s in cur.reachable_states() if s != cur.sink]
        pick = None
        for q in reachable:
            if cur.next_of[q] >= profile.of(q):
                continue
            for x in range(cur.alphabet.size):
                for y in range(x + 1, cur.alphabet.size):
                    a, b = cur.delta[q][x], cur.delta[q][y]
                    if a != b and a != cur.sink and b != cur.sink:
                        pick = (a, b) if a < b else (b, a)
                        break
                if pick:
                    break
            if pick:
                break
        if pick is None:
            return cur
        a, b = pick
        keep_low = redirect(cur, a, b)
        keep_high = redirect(cur, b, a)
        s_low = float(asymptotic_speed(keep_low, model))
        s_high = float(asymptotic_speed(keep_high, model))
        cur = keep_high if s_high > s_low + 1e-12 else keep_low
    raise MachineError("equalization did not converge (internal guard hit)")


def _disagreeing_irrelevant_targets(machine: Machine, profile: ShiftProfile):
    """Ordered (a, b) target pairs of reachable states that read below
    their minimal shift yet send symbols to two different non-sink states."""
    pairs = []
    seen = set()
    for q in machine.reachable_states():
        if q == machine.sink or machine.next_of[q] >= profile.of(q):
            continue
        for x in range(machine.alphabet.size):
            for y in range(x + 1, machine.alphabet.size):
                a, b = machine.delta[q][x], machine.delta[q][y]
                if a != b and a != machine.sink and b != machine.sink:
                    pair = (a, b) if a < b else (b, a)
                    if pair not in seen:
                        seen.add(pair)
                        pairs.append(pair)
    return pairs


def _equalize_defensive(machine: Machine, model: IidModel) -> Machine:
    """Equalization for machines outside the lemma's hypotheses (e.g. left
    redundant by an irremovable re-reader): the same interchangeable-target
    redirects, but each candidate is verified for validity and required not
    to lose speed; unverifiable pairs are left in place."""
    cur = machine
    for _ in range(machine.n_states + 2):
        profile = compute_mnshft(cur)
        pairs = _disagreeing_irrelevant_targets(cur, profile)
        applied = False
        for a, b in pairs:
            candidates = []
            for keep, drop in ((a, b), (b, a)):
                try:
                    cand = redirect(cur, keep, drop)
                except MachineError:
                    continue
                if has_zero_shift_cycle(cand):
                    continue
                if not _check_valid(cand):
                    continue
                candidates.append(cand)
            if not candidates:
                continue
            cur_speed = float(asymptotic_speed(cur, model))
            speeds = [float(asymptotic_speed(c, model)) for c in candidates]
            best = max(range(len(candidates)), key=lambda i: speeds[i])
            if speeds[best] < cur_speed - 1e-9:
                continue
            if best > 0 and speeds[best] <= speeds[0] + 1e-12:
                best = 0
            cur = candidates[best]
            applied = True
            break
        if not applied:
            return cur
    return cur


def _merge_duplicate_memories(machine: Machine, model: IidModel) -> Machine:
    """Merge pairs of states to which the expansion attaches identical
    memories, keeping whichever redirection is fastest under the model (ties
    toward the lower id).  Each candidate is verified — it must stay
    structurally sound, advance its windows, and report correctly on a
    bounded text family — because for redundant standard machines a
    redirection can be invalid; unprofitable or unverifiable merges are
    skipped."""
    cur = machine
    skipped: set[tuple] = set()
    while True:
        try:
            memories = memory_of_standard(cur)
        except PreconditionError:
            cur = standardize(cur)
            memories = memory_of_standard(cur)
        by_memory: dict = {}
        for q, mem in sorted(memories.items()):
            by_memory.setdefault(mem.entries, []).append(q)
        cur_speed = None
        merged = False
        for entry, group in sorted(by_memory.items()):
            if len(group) < 2:
                continue
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    a, b = group[i], group[j]
                    key = (cur.signature(), a, b)
                    if key in skipped:
                        continue
                    candidates = []
                    for keep, drop in ((a, b), (b, a)):
                        try:
                            cand = redirect(cur, keep, drop)
                        except MachineError:
                            continue
                        if has_zero_shift_cycle(cand):
                            continue
                        if not _check_valid(cand):
                            continue
                        candidates.append(cand)
                    if not candidates:
                        skipped.add(key)
                        continue
                    if cur_speed is None:
                        cur_speed = float(asymptotic_speed(cur, model))
                    speeds = [float(asymptotic_speed(c, model)) for c in candidates]
                    best = max(range(len(candidates)), key=lambda i: speeds[i])
                    if speeds[best] < cur_speed - 1e-9:
                        skipped.add(key)
                        continue
                    # ties keep the first candidate (lower id kept)
                    if best > 0 and speeds[best] <= speeds[0] + 1e-12:
                        best = 0
                    cur = candidates[best]
                    merged = True
                    break
                if merged:
                    break
            if merged:
                break
        if not merged:
            return cur


def canonicalize(machine: Machine, model: IidModel) -> Machine:
    """Speed-canonical form of a valid machine under the model: standardize,
    equalize irrelevant reads, compact, re-anchor reads, re-standardize, and
    merge duplicate-memory states, repeated to a fixpoint.

    The result is standard, compact, valid, has only relevant states, and is
    at least as fast as the input under the model.  Stages whose
    preconditions a particular intermediate machine cannot meet (e.g.
    equalization of a machine left redundant by an irremovable re-reader) are
    skipped for that round; the remaining stages restore their preconditions
    in later rounds."""
    cur = standardize(machine)
    for _ in range(8):
        before = canonical_relabel(cur).signature()
        try:
            cur = equalize_irrelevant(cur, model)
        except PreconditionError:
            cur = _equalize_defensive(cur, model)
        cur = compact(cur)
        try:
            cur = positify(cur)
        except PreconditionError:
            pass
        cur = standardize(cur)
        cur = _merge_duplicate_memories(cur, model)
        if canonical_relabel(cur).signature() == before:
            break
    return canonical_relabel(cur)
