"""Full-memory expansion, standardness/redundancy predicates, the
theorem-based validity checker for standard machines, redirection, and
compaction.

The expansion of a machine tracks, alongside each state, the partial memory of
text positions already read but not yet passed (offsets relative to the
current window).  It makes explicit which reads are forced (re-reads of known
positions), which are contradictions (impossible given memory), and which are
fresh.
"""

from __future__ import annotations

from dataclasses import dataclass

from .machine import (
    Machine,
    MachineError,
    Pattern,
    PreconditionError,
    prune_unreachable,
)

__all__ = [
    "MemoryState",
    "ExpandedMachine",
    "expand",
    "is_standard",
    "memory_of_standard",
    "is_redundant",
    "ValidityVerdict",
    "check_validity_standard",
    "has_zero_shift_cycle",
    "max_valid_shift",
    "redirect",
    "compact",
    "standardize",
    "serialize_expanded",
]


@dataclass(frozen=True)
class MemoryState:
    """A partial map from window offsets to known symbols (sorted, functional).

    Offsets are relative to the current window position; entry (i, y) means
    "the text symbol at the current position + i is known to be y"."""

    entries: tuple[tuple[int, str], ...]

    def __post_init__(self) -> None:
        positions = [p for p, _ in self.entries]
        if positions != sorted(positions) or len(set(positions)) != len(positions):
            raise MachineError("memory entries must be sorted with distinct positions")
        if positions and positions[0] < 0:
            raise MachineError("memory positions must be non-negative")

    @staticmethod
    def empty() -> "MemoryState":
        return MemoryState(())

    @staticmethod
    def of(items) -> "MemoryState":
        return MemoryState(tuple(sorted(dict(items).items())))

    @property
    def frst(self) -> frozenset[int]:
        """The set of known positions."""
        return frozenset(p for p, _ in self.entries)

    def get(self, pos: int) -> str | None:
        for p, y in self.entries:
            if p == pos:
                return y
        return None

    def with_entry(self, pos: int, sym: str) -> "MemoryState":
        cur = self.get(pos)
        if cur is not None:
            if cur != sym:
                raise MachineError(f"memory contradiction at position {pos}")
            return self
        return MemoryState(tuple(sorted(self.entries + ((pos, sym),))))

    def shifted(self, k: int) -> "MemoryState":
        """Drop positions below k and re-anchor the rest (slide the window)."""
        if k == 0:
            return self
        return MemoryState(tuple((p - k, y) for p, y in self.entries if p >= k))

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ExpandedMachine:
    """A machine together with the memory attached to each state by the
    full-memory expansion, and the originating state in the source machine."""

    machine: Machine
    memory_of: dict[int, MemoryState]
    origin_of: dict[int, int]
    forced_read_states: frozenset[int]


def expand(machine: Machine) -> ExpandedMachine:
    """Full-memory expansion: states become (state, memory) pairs reachable
    from (initial, no knowledge).

    Reading at a known position either confirms memory (and proceeds without
    new knowledge) or contradicts it (transition to the sink — that run is
    impossible); reading a fresh position records the symbol, then the shift
    slides the memory window.
    """
    asz = machine.alphabet.size
    symbols = machine.alphabet.symbols
    key0 = (machine.initial, MemoryState.empty())
    index: dict[tuple[int, MemoryState], int] = {key0: 0}
    worklist = [key0]
    rows_d: list[list] = []
    rows_s: list[list[int]] = []
    forced: set[int] = set()
    SINK = object()  # placeholder until the sink id is assigned

    while worklist:
        nextlist = []
        for q, mem in worklist:
            sid = index[(q, mem)]
            while len(rows_d) <= sid:
                rows_d.append(None)
                rows_s.append(None)
            row_d: list = [SINK] * asz
            row_s: list[int] = [0] * asz
            off = machine.next_of[q]
            known = mem.get(off)
            if known is not None:
                forced.add(sid)
            for x in range(asz):
                sym = symbols[x]
                shift = machine.sigma[q][x]
                row_s[x] = shift
                if known is not None and known != sym:
                    continue  # contradiction: sink
                target = machine.delta[q][x]
                if target == machine.sink:
                    continue
                new_mem = mem if known is not None else mem.with_entry(off, sym)
                key = (target, new_mem.shifted(shift))
                if key not in index:
                    index[key] = len(index)
                    nextlist.append(key)
                row_d[x] = key
            rows_d[sid] = row_d
            rows_s[sid] = row_s
        worklist = nextlist

    n = len(index)
    sink_id = n
    next_of = [0] * (n + 1)
    prematch = [False] * (n + 1)
    memory_of: dict[int, MemoryState] = {}
    origin_of: dict[int, int] = {}
    for (q, mem), sid in index.items():
        next_of[sid] = machine.next_of[q]
        prematch[sid] = machine.prematch[q]
        memory_of[sid] = mem
        origin_of[sid] = q
    delta = []
    sigma = []
    for sid in range(n):
        delta.append(
            tuple(sink_id if t is SINK else index[t] for t in rows_d[sid])
        )
        sigma.append(tuple(rows_s[sid]))
    delta.append(tuple([sink_id] * asz))
    sigma.append(tuple([0] * asz))
    m = Machine(
        alphabet=machine.alphabet,
        pattern=machine.pattern,
        next_of=tuple(next_of),
        prematch=tuple(prematch),
        delta=tuple(delta),
        sigma=tuple(sigma),
        initial=0,
        sink=sink_id,
    )
    return ExpandedMachine(
        machine=m,
        memory_of=memory_of,
        origin_of=origin_of,
        forced_read_states=frozenset(forced),
    )


def is_standard(machine: Machine) -> bool:
    """True when the expansion adds no states: every state corresponds to
    exactly one memory.  Machines with unreachable non-sink states are not
    standard (the expansion only materializes reachable states)."""
    em = expand(machine)
    if em.machine.n_states != machine.n_states:
        return False
    origins = list(em.origin_of.values())
    return len(set(origins)) == len(origins)


def memory_of_standard(machine: Machine) -> dict[int, MemoryState]:
    """The unique memory attached to each non-sink state of a standard
    machine, keyed by the machine's own state ids."""
    em = expand(machine)
    if em.machine.n_states != machine.n_states or len(
        set(em.origin_of.values())
    ) != len(em.origin_of):
        raise PreconditionError("machine is not standard; expand/compact it first")
    return {em.origin_of[sid]: mem for sid, mem in em.memory_of.items()}


def is_redundant(machine: Machine) -> bool:
    """True when some execution reads a text position it already knows."""
    return bool(expand(machine).forced_read_states)


def _window_confirmed_at(entries: dict[int, str], w: str, d: int) -> bool:
    """Does the memory confirm a full pattern occurrence at window offset d?"""
    return all(entries.get(d + j) == w[j] for j in range(len(w)))


def max_valid_shift(
    memory: MemoryState,
    next_off: int,
    x: str,
    prematch: bool,
    pattern: Pattern,
) -> int:
    """Largest shift a valid machine may take after reading x at offset
    next_off with the given memory: the smallest window offset not yet ruled
    out.

    Offset 0 is ruled out a priori when the state is prematch (the occurrence
    there was just reported) or when memory plus the new read confirms the
    full window at 0 (the occurrence there has necessarily been reported
    already).  Larger offsets are ruled out when a known symbol contradicts
    the pattern.
    """
    w = pattern.text
    wlen = len(w)
    known = memory.get(next_off)
    if known is not None and known != x:
        raise PreconditionError(
            "read contradicts memory (this transition goes to the sink)"
        )
    entries = dict(memory.entries)
    entries[next_off] = x
    base = 1 if (prematch or _window_confirmed_at(entries, w, 0)) else 0
    top = max(entries) + 1  # at this offset no known position remains in-window
    for k in range(base, top + 1):
        if all(
            w[i - k] == y for i, y in entries.items() if k <= i < k + wlen
        ):
            return k
    raise AssertionError("unreachable: the vacuous offset always satisfies")


@dataclass(frozen=True)
class ValidityVerdict:
    """Outcome of the theorem-based validity check."""

    ok: bool
    condition: str | None = None
    witness: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_validity_standard(machine: Machine) -> ValidityVerdict:
    """Decide validity of a standard, non-redundant machine by structural
    conditions (no text enumeration).

    Checks, for every reachable state/read: (a) no transition into the sink;
    (b) for states reading inside the window, prematch holds exactly when
    memory covers the whole window except the read offset; (c) no read may
    leave a full window confirmed at a strictly positive offset (such an
    occurrence could never be reported); (d) every shift is at most the
    largest shift that keeps all not-yet-ruled-out occurrences reachable;
    (e) no zero-shift cycle.  Agrees with the brute-force behavioral check on
    this domain (the test suite asserts this).
    """
    em = expand(machine)
    if em.machine.n_states != machine.n_states or len(
        set(em.origin_of.values())
    ) != len(em.origin_of):
        raise PreconditionError(
            "validity theorem requires a standard machine; standardize() first"
        )
    if em.forced_read_states:
        raise PreconditionError(
            "validity theorem requires a non-redundant machine; standardize() first"
        )
    mem_by_state = {em.origin_of[sid]: mem for sid, mem in em.memory_of.items()}
    w = machine.pattern.text
    wlen = len(w)
    symbols = machine.alphabet.symbols
    reachable = [q for q in machine.reachable_states() if q != machine.sink]

    for q in reachable:
        mem = mem_by_state[q]
        off = machine.next_of[q]
        if off < wlen:
            entries = dict(mem.entries)
            coverage = all(
                entries.get(j) == w[j] for j in range(wlen) if j != off
            )
            if coverage != machine.prematch[q]:
                which = "coverage-without-prematch" if coverage else "prematch-without-coverage"
                return ValidityVerdict(False, "coverage", f"state {q}: {which}")

    for q in reachable:
        mem = mem_by_state[q]
        off = machine.next_of[q]
        for x, sym in enumerate(symbols):
            if machine.delta[q][x] == machine.sink:
                return ValidityVerdict(
                    False,
                    "sink-reachable",
                    f"state {q} reading {sym!r} can reach the sink",
                )
            entries = dict(mem.entries)
            entries[off] = sym
            hi = max(entries)
            for d in range(1, hi - wlen + 2):
                if _window_confirmed_at(entries, w, d):
                    return ValidityVerdict(
                        False,
                        "unreportable-occurrence",
                        f"state {q} reading {sym!r} confirms an occurrence at "
                        f"offset {d} that can never be reported",
                    )
            bound = max_valid_shift(mem, off, sym, machine.prematch[q], machine.pattern)
            if machine.sigma[q][x] > bound:
                return ValidityVerdict(
                    False,
                    "shift-bound",
                    f"state {q} reading {sym!r}: shift {machine.sigma[q][x]} "
                    f"exceeds the largest valid shift {bound}",
                )

    if has_zero_shift_cycle(machine):
        return ValidityVerdict(
            False, "zero-shift-cycle", "a reachable cycle never advances the window"
        )
    return ValidityVerdict(True)


def has_zero_shift_cycle(machine: Machine) -> bool:
    """True when some reachable cycle of non-sink transitions has total shift
    zero (such a machine can loop forever without advancing)."""
    reachable = set(machine.reachable_states()) - {machine.sink}
    adj: dict[int, set[int]] = {q: set() for q in reachable}
    for q in reachable:
        for x in range(machine.alphabet.size):
            r = machine.delta[q][x]
            if r != machine.sink and machine.sigma[q][x] == 0:
                adj[q].add(r)
    color: dict[int, int] = {}
    for start in sorted(reachable):
        if color.get(start, 0) != 0:
            continue
        stack = [(start, iter(sorted(adj[start])))]
        color[start] = 1
        while stack:
            node, it = stack[-1]
            advanced = False
            for nb in it:
                c = color.get(nb, 0)
                if c == 1:
                    return True
                if c == 0:
                    color[nb] = 1
                    stack.append((nb, iter(sorted(adj[nb]))))
                    advanced = True
                    break
            if not advanced:
                color[node] = 2
                stack.pop()
    return False


def redirect(machine: Machine, a: int, b: int) -> Machine:
    """Remove state b, sending every transition into b to a instead (and
    moving initial/prematch roles from b to a as needed); prunes states made
    unreachable."""
    if a == b:
        raise PreconditionError("redirect requires two distinct states")
    if a == machine.sink or b == machine.sink:
        raise PreconditionError("cannot redirect the sink")
    n = machine.n_states
    if not (0 <= a < n and 0 <= b < n):
        raise PreconditionError("redirect: state id out of range")
    keep = [q for q in range(n) if q != b]
    remap = {old: new for new, old in enumerate(keep)}

    def target(q: int) -> int:
        return remap[a if q == b else q]

    prematch = list(machine.prematch)
    if machine.prematch[b]:
        prematch[a] = True
    initial = a if machine.initial == b else machine.initial
    m = Machine(
        alphabet=machine.alphabet,
        pattern=machine.pattern,
        next_of=tuple(machine.next_of[q] for q in keep),
        prematch=tuple(prematch[q] for q in keep),
        delta=tuple(
            tuple(target(machine.delta[q][x]) for x in range(machine.alphabet.size))
            for q in keep
        ),
        sigma=tuple(tuple(machine.sigma[q]) for q in keep),
        initial=remap[initial],
        sink=remap[machine.sink],
    )
    return prune_unreachable(m)


def _find_reduction(machine: Machine) -> tuple[int, int, bool] | None:
    """First state (in id order) that can be collapsed onto its designated
    successor without changing reported occurrences of valid machines.
    Returns (state, designated symbol, promote-predecessors flag).

    A state qualifies if it has a single non-sink transition, or if all its
    transitions are identical (then the alphabet-least symbol is designated).
    A prematch state whose single realizable read matches the pattern reports
    on every visit; it can still be removed when every incoming transition has
    shift 0 and is itself a pattern-matching read — the report then transfers
    to the predecessors, which become prematch (windows coincide, and their
    matching read confirms exactly what the removed state would have
    re-checked).  Skipped for safety: collapsing onto itself or the sink;
    prematch states with identical transitions (any read may report); the
    initial state unless its designated shift is 0 (the window position would
    otherwise be re-anchored incorrectly).
    """
    asz = machine.alphabet.size
    w = machine.pattern.text
    wlen = len(w)
    for s in range(machine.n_states):
        if s == machine.sink:
            continue
        row_d, row_s = machine.delta[s], machine.sigma[s]
        non_sink = [x for x in range(asz) if row_d[x] != machine.sink]
        x_hat = None
        kind = 0
        if len(non_sink) == 1:
            x_hat, kind = non_sink[0], 1
        elif len(set(row_d)) == 1 and len(set(row_s)) == 1:
            x_hat, kind = 0, 2
        if x_hat is None:
            continue
        r = row_d[x_hat]
        if r == s or r == machine.sink:
            continue
        promote = False
        if machine.prematch[s]:
            if kind == 2:
                continue
            if w[machine.next_of[s]] == machine.alphabet.symbols[x_hat]:
                # every visit reports: removable only by promoting predecessors
                if s == machine.initial:
                    continue
                ok = True
                for q in machine.non_sink_states():
                    if q == s:
                        continue
                    for x in range(asz):
                        if machine.delta[q][x] != s:
                            continue
                        if (
                            machine.sigma[q][x] != 0
                            or machine.next_of[q] >= wlen
                            or machine.alphabet.symbols[x] != w[machine.next_of[q]]
                        ):
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    continue
                promote = True
        if s == machine.initial and row_s[x_hat] != 0:
            continue
        return s, x_hat, promote
    return None


def _remo(machine: Machine, s: int, x_hat: int, promote: bool) -> Machine:
    """Collapse state s onto its designated successor, folding s's shift into
    every incoming transition (and, when promoting, transferring s's report
    duty to the sources of those transitions)."""
    r = machine.delta[s][x_hat]
    add = machine.sigma[s][x_hat]
    keep = [q for q in range(machine.n_states) if q != s]
    remap = {old: new for new, old in enumerate(keep)}
    initial = r if machine.initial == s else machine.initial
    prematch = list(machine.prematch)
    delta = []
    sigma = []
    for q in keep:
        row_d = []
        row_s = []
        for x in range(machine.alphabet.size):
            t = machine.delta[q][x]
            sh = machine.sigma[q][x]
            if t == s:
                t = r
                sh = sh + add
                if promote:
                    prematch[q] = True
            row_d.append(remap[t])
            row_s.append(sh)
        delta.append(tuple(row_d))
        sigma.append(tuple(row_s))
    return Machine(
        alphabet=machine.alphabet,
        pattern=machine.pattern,
        next_of=tuple(machine.next_of[q] for q in keep),
        prematch=tuple(prematch[q] for q in keep),
        delta=tuple(delta),
        sigma=tuple(sigma),
        initial=remap[initial],
        sink=remap[machine.sink],
    )


def compact(machine: Machine) -> Machine:
    """Repeatedly collapse states whose read cannot influence the outcome
    (single non-sink transition, or all transitions identical), folding their
    shifts into incoming transitions.

    On valid machines this preserves reported occurrences on every text and
    never increases the access count.  Returns the input unchanged when no
    state qualifies.
    """
    m = machine
    changed = False
    while True:
        found = _find_reduction(m)
        if found is None:
            break
        m = _remo(m, *found)
        changed = True
    return prune_unreachable(m) if changed else m


def standardize(machine: Machine) -> Machine:
    """Expand then compact: the result is standard, reduced, behaviorally
    equivalent in reported occurrences, and at least as fast on every text."""
    return compact(expand(machine).machine)


def serialize_expanded(em: ExpandedMachine) -> dict:
    """Machine document with a memory annotation per state."""
    from .machine import serialize

    doc = serialize(em.machine)
    for state in doc["states"]:
        mem = em.memory_of.get(state["id"])
        state["memory"] = [[p, y] for p, y in mem.entries] if mem is not None else []
    return doc
