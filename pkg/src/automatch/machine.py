"""Core machine types, the generic search loop, and brute-force reference checks.

A matching machine is a finite-state machine that drives a universal
pattern-search loop over a text: at each iteration the machine reads one text
symbol at a fixed offset from the current window position, possibly reports an
occurrence, then switches state and advances the window.  Every classic
single-pattern search algorithm (naive, Morris-Pratt, Knuth-Morris-Pratt,
Horspool, Quicksearch) can be encoded as such a machine; see `classics`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "MachineError",
    "SchemaError",
    "PreconditionError",
    "CapExceeded",
    "Alphabet",
    "Pattern",
    "Machine",
    "TraceStep",
    "ExecutionTrace",
    "run_generic",
    "occurrences_oracle",
    "order",
    "default_iteration_cap",
    "BruteforceVerdict",
    "validate_bruteforce",
    "serialize",
    "deserialize",
    "to_json",
    "from_json",
    "dot_export",
    "canonical_relabel",
    "prune_unreachable",
]


class MachineError(ValueError):
    """Malformed machine, pattern, text, or model input."""


class SchemaError(MachineError):
    """A machine document violates the serialization schema or an invariant."""


class PreconditionError(MachineError):
    """An operation was called on a machine outside its supported domain."""


class CapExceeded(RuntimeError):
    """A configured work cap (iterations, assemblies, chain size) was hit."""


@dataclass(frozen=True)
class Alphabet:
    """An ordered set of distinct single-character symbols."""

    symbols: str

    def __post_init__(self) -> None:
        if len(self.symbols) < 1:
            raise MachineError("alphabet must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise MachineError(f"alphabet symbols must be distinct: {self.symbols!r}")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[str]:
        return iter(self.symbols)

    def __contains__(self, sym: str) -> bool:
        return sym in self.symbols

    def index(self, sym: str) -> int:
        i = self.symbols.find(sym)
        if i < 0:
            raise MachineError(f"symbol {sym!r} not in alphabet {self.symbols!r}")
        return i

    def indices(self, text: str) -> list[int]:
        """Map a string to symbol indices, diagnosing the first bad position."""
        table = {c: i for i, c in enumerate(self.symbols)}
        out = []
        for pos, c in enumerate(text):
            i = table.get(c)
            if i is None:
                raise MachineError(
                    f"symbol {c!r} at position {pos} not in alphabet {self.symbols!r}"
                )
            out.append(i)
        return out


@dataclass(frozen=True)
class Pattern:
    """A non-empty string over an alphabet — the pattern a machine searches for."""

    text: str
    alphabet: Alphabet

    def __post_init__(self) -> None:
        if len(self.text) < 1:
            raise MachineError("pattern must be non-empty")
        self.alphabet.indices(self.text)  # validates membership

    def __len__(self) -> int:
        return len(self.text)

    def __getitem__(self, i: int) -> str:
        return self.text[i]


def _as_pattern(pattern: "Pattern | str", alphabet: "Alphabet | str | None" = None) -> Pattern:
    """Accept a Pattern, or a plain string plus an alphabet (inferred if omitted)."""
    if isinstance(pattern, Pattern):
        return pattern
    if alphabet is None:
        alphabet = Alphabet("".join(sorted(set(pattern))))
    elif isinstance(alphabet, str):
        alphabet = Alphabet(alphabet)
    return Pattern(pattern, alphabet)


@dataclass(frozen=True)
class Machine:
    """A matching machine: states with read offsets, prematch flags, transition
    and shift tables, a distinguished initial state and an absorbing sink.

    States are integers 0..n-1.  `next_of[q]` is the text offset (from the
    current window position) the machine reads while in state q; prematch
    states additionally report an occurrence when that read matches the
    pattern.  The sink self-loops with zero shift and is the explicit dead
    state.  Instances are immutable and safe to share across threads.
    """

    alphabet: Alphabet
    pattern: Pattern
    next_of: tuple[int, ...]
    prematch: tuple[bool, ...]
    delta: tuple[tuple[int, ...], ...]
    sigma: tuple[tuple[int, ...], ...]
    initial: int
    sink: int

    def __post_init__(self) -> None:
        n = len(self.next_of)
        asz = self.alphabet.size
        if self.pattern.alphabet != self.alphabet:
            raise MachineError("pattern alphabet differs from machine alphabet")
        if not (len(self.prematch) == len(self.delta) == len(self.sigma) == n):
            raise SchemaError("state-indexed fields have inconsistent lengths")
        if not (0 <= self.initial < n) or not (0 <= self.sink < n):
            raise SchemaError("initial/sink out of range")
        if self.initial == self.sink:
            raise SchemaError("initial state must not be the sink")
        wlen = len(self.pattern)
        for q in range(n):
            row_d, row_s = self.delta[q], self.sigma[q]
            if len(row_d) != asz or len(row_s) != asz:
                raise SchemaError(f"state {q}: transition rows must cover the alphabet")
            if self.next_of[q] < 0:
                raise SchemaError(f"state {q}: negative read offset")
            if self.prematch[q] and self.next_of[q] >= wlen:
                raise SchemaError(
                    f"state {q}: prematch state must read inside the pattern window "
                    f"(offset {self.next_of[q]} >= |w|={wlen})"
                )
            for x in range(asz):
                if not (0 <= row_d[x] < n):
                    raise SchemaError(f"state {q}: transition target out of range")
                if row_s[x] < 0:
                    raise SchemaError(f"state {q}: negative shift")
        if self.prematch[self.sink]:
            raise SchemaError("sink must not be prematch")
        for x in range(asz):
            if self.delta[self.sink][x] != self.sink or self.sigma[self.sink][x] != 0:
                raise SchemaError("sink must self-loop with zero shift")

    # -- basic views ------------------------------------------------------

    @property
    def n_states(self) -> int:
        return len(self.next_of)

    @property
    def order(self) -> int:
        """Greatest read offset over non-sink states."""
        return max(
            (self.next_of[q] for q in range(self.n_states) if q != self.sink),
            default=0,
        )

    def non_sink_states(self) -> list[int]:
        return [q for q in range(self.n_states) if q != self.sink]

    def reachable_states(self) -> list[int]:
        """States reachable from the initial state, in breadth-first order."""
        seen = [False] * self.n_states
        seen[self.initial] = True
        frontier = [self.initial]
        out = [self.initial]
        while frontier:
            nxt = []
            for q in frontier:
                for x in range(self.alphabet.size):
                    r = self.delta[q][x]
                    if not seen[r]:
                        seen[r] = True
                        nxt.append(r)
                        out.append(r)
            frontier = nxt
        return out

    def signature(self) -> tuple:
        """Hashable structural identity (used for dedup and fixpoint tests)."""
        return (
            self.pattern.text,
            self.alphabet.symbols,
            self.next_of,
            self.prematch,
            self.delta,
            self.sigma,
            self.initial,
            self.sink,
        )

    # -- helpers for building --------------------------------------------

    @staticmethod
    def create(
        alphabet: Alphabet | str,
        pattern: Pattern | str,
        next_of: Sequence[int],
        prematch: Sequence[bool],
        delta: Sequence[Sequence[int]],
        sigma: Sequence[Sequence[int]],
        initial: int,
        sink: int | None = None,
    ) -> "Machine":
        """Build a machine, materializing a sink as a fresh last state when
        `sink` is None (transitions pointing nowhere are not repaired; the
        tables must already be total)."""
        if isinstance(alphabet, str):
            alphabet = Alphabet(alphabet)
        pat = _as_pattern(pattern, alphabet)
        next_l = list(next_of)
        prem_l = list(prematch)
        delta_l = [tuple(row) for row in delta]
        sigma_l = [tuple(row) for row in sigma]
        if sink is None:
            sink = len(next_l)
            asz = alphabet.size
            next_l.append(0)
            prem_l.append(False)
            delta_l.append(tuple([sink] * asz))
            sigma_l.append(tuple([0] * asz))
        return Machine(
            alphabet=alphabet,
            pattern=pat,
            next_of=tuple(next_l),
            prematch=tuple(prem_l),
            delta=tuple(delta_l),
            sigma=tuple(sigma_l),
            initial=initial,
            sink=sink,
        )


def order(machine: Machine) -> int:
    """Greatest read offset over non-sink states."""
    return machine.order


@dataclass(frozen=True)
class TraceStep:
    """One iteration of the generic loop: the state, the window position, the
    absolute text index read, the symbol found there, and the shift applied."""

    state: int
    position: int
    index: int
    symbol: str
    shift: int


@dataclass(frozen=True)
class ExecutionTrace:
    """Record of one run of the generic loop.

    `tac` counts loop iterations, i.e. text accesses.  `truncated` is set when
    the iteration cap was hit (a valid machine provably stays under the
    default cap, so truncation signals invalidity).  `out_of_bounds` is set
    when the machine's next read would fall past the end of the text, which
    ends the scan; the attempted access is not counted.
    """

    occurrences: tuple[int, ...]
    tac: int
    truncated: bool
    out_of_bounds: bool
    steps: tuple[TraceStep, ...] | None = None

    @property
    def accessed_indices(self) -> tuple[int, ...]:
        if self.steps is None:
            raise MachineError("trace was recorded without steps")
        return tuple(s.index for s in self.steps)


def default_iteration_cap(machine: Machine, text_len: int) -> int:
    """One more than the proven worst-case access count of a valid machine."""
    return (text_len + 1) * (machine.n_states + 1) + 1


def run_generic(
    machine: Machine,
    text: str,
    iteration_cap: int | None = None,
    *,
    record_steps: bool = True,
) -> ExecutionTrace:
    """Run the universal search loop of `machine` over `text`.

    While the window position p satisfies p <= |t|-|w|: read t[p+next(q)],
    report p if q is prematch and the read symbol equals w[next(q)], then move
    to state delta(q, symbol) and advance p by sigma(q, symbol).  A read past
    the end of the text ends the scan (see ExecutionTrace.out_of_bounds).
    """
    if iteration_cap is None:
        iteration_cap = default_iteration_cap(machine, len(text))
    if iteration_cap < 1:
        raise MachineError("iteration_cap must be >= 1")
    sym_index = {c: i for i, c in enumerate(machine.alphabet.symbols)}
    w = machine.pattern.text
    wlen = len(w)
    n = len(text)
    limit = n - wlen
    next_of, prematch = machine.next_of, machine.prematch
    delta, sigma = machine.delta, machine.sigma
    q = machine.initial
    p = 0
    tac = 0
    occ: list[int] = []
    steps: list[TraceStep] | None = [] if record_steps else None
    truncated = False
    oob = False
    while p <= limit:
        if tac >= iteration_cap:
            truncated = True
            break
        idx = p + next_of[q]
        if idx >= n:
            oob = True
            break
        c = text[idx]
        x = sym_index.get(c)
        if x is None:
            raise MachineError(
                f"symbol {c!r} at position {idx} not in alphabet "
                f"{machine.alphabet.symbols!r}"
            )
        if prematch[q] and c == w[next_of[q]]:
            if not occ or occ[-1] != p:
                occ.append(p)
        s = sigma[q][x]
        if steps is not None:
            steps.append(TraceStep(q, p, idx, c, s))
        tac += 1
        p += s
        q = delta[q][x]
    return ExecutionTrace(
        occurrences=tuple(occ),
        tac=tac,
        truncated=truncated,
        out_of_bounds=oob,
        steps=tuple(steps) if steps is not None else None,
    )


def occurrences_oracle(pattern: Pattern | str, text: str) -> list[int]:
    """All positions where the pattern occurs in the text, by direct window
    comparison.  The ground truth every validity notion refers to."""
    w = pattern.text if isinstance(pattern, Pattern) else pattern
    wlen = len(w)
    return [i for i in range(len(text) - wlen + 1) if text[i : i + wlen] == w]


@dataclass(frozen=True)
class BruteforceVerdict:
    """Outcome of a bounded behavioral validity check."""

    ok: bool
    text: str | None = None
    expected: tuple[int, ...] | None = None
    got: tuple[int, ...] | None = None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def _check_one_text(machine: Machine, text: str) -> BruteforceVerdict | None:
    trace = run_generic(machine, text, record_steps=False)
    expected = tuple(occurrences_oracle(machine.pattern, text))
    if trace.truncated:
        return BruteforceVerdict(
            False, text, expected, trace.occurrences, "iteration cap exceeded"
        )
    if trace.occurrences != expected:
        return BruteforceVerdict(
            False, text, expected, trace.occurrences, "occurrence mismatch"
        )
    return None


def validate_bruteforce(
    machine: Machine,
    exhaustive_len: int = 8,
    random_trials: int = 200,
    random_len: int = 50,
    seed: int = 0,
) -> BruteforceVerdict:
    """Bounded behavioral validity check: compare reported occurrences against
    the oracle on every text up to `exhaustive_len` and on random texts.

    The verdict is bounded (no counterexample found != proof of validity), but
    exhaustive short texts catch every invalidity the test suites inject.
    """
    symbols = machine.alphabet.symbols
    if len(symbols) ** max(exhaustive_len, 0) > 10**7:
        raise PreconditionError(
            f"exhaustive enumeration of |A|^{exhaustive_len} texts exceeds the guard"
        )
    for length in range(exhaustive_len + 1):
        for tup in product(symbols, repeat=length):
            bad = _check_one_text(machine, "".join(tup))
            if bad is not None:
                return bad
    if random_trials > 0:
        rng = np.random.default_rng(seed)
        for _ in range(random_trials):
            idx = rng.integers(0, len(symbols), size=random_len)
            text = "".join(symbols[i] for i in idx)
            bad = _check_one_text(machine, text)
            if bad is not None:
                return bad
    return BruteforceVerdict(True)


# -- serialization ---------------------------------------------------------


def serialize(machine: Machine) -> dict:
    """Machine document with exact field names; see `deserialize`."""
    states = [
        {"id": q, "next": machine.next_of[q], "prematch": bool(machine.prematch[q])}
        for q in range(machine.n_states)
    ]
    delta = []
    sigma = []
    for q in range(machine.n_states):
        for x, sym in enumerate(machine.alphabet.symbols):
            delta.append([q, sym, machine.delta[q][x]])
            sigma.append([q, sym, machine.sigma[q][x]])
    return {
        "pattern": machine.pattern.text,
        "alphabet": machine.alphabet.symbols,
        "states": states,
        "initial": machine.initial,
        "sink": machine.sink,
        "delta": delta,
        "sigma": sigma,
    }


def deserialize(doc: dict) -> Machine:
    """Load a machine document, checking the schema and machine invariants."""
    try:
        alphabet = Alphabet(str(doc["alphabet"]))
        pattern = Pattern(str(doc["pattern"]), alphabet)
        states = doc["states"]
        ids = [int(s["id"]) for s in states]
        n = len(states)
        if sorted(ids) != list(range(n)):
            raise SchemaError("state ids must be exactly 0..n-1")
        next_of = [0] * n
        prematch = [False] * n
        for s in states:
            next_of[int(s["id"])] = int(s["next"])
            prematch[int(s["id"])] = bool(s["prematch"])
        delta = [[-1] * alphabet.size for _ in range(n)]
        sigma = [[-1] * alphabet.size for _ in range(n)]
        for q, sym, r in doc["delta"]:
            delta[int(q)][alphabet.index(str(sym))] = int(r)
        for q, sym, s in doc["sigma"]:
            sigma[int(q)][alphabet.index(str(sym))] = int(s)
        for q in range(n):
            if -1 in delta[q] or -1 in sigma[q]:
                raise SchemaError(f"state {q}: transition tables are not total")
        return Machine(
            alphabet=alphabet,
            pattern=pattern,
            next_of=tuple(next_of),
            prematch=tuple(prematch),
            delta=tuple(tuple(r) for r in delta),
            sigma=tuple(tuple(r) for r in sigma),
            initial=int(doc["initial"]),
            sink=int(doc["sink"]),
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise SchemaError(f"malformed machine document: {exc}") from exc


def to_json(machine: Machine) -> str:
    return json.dumps(serialize(machine), indent=2) + "\n"


def from_json(text: str) -> Machine:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    return deserialize(doc)


def dot_export(machine: Machine) -> str:
    """Graphviz rendering: prematch states doubly circled, sink grey, edges
    labeled "symbol/shift"."""
    lines = ["digraph machine {", "  rankdir=LR;"]
    for q in range(machine.n_states):
        attrs = []
        if q == machine.sink:
            attrs.append('label="sink"')
            attrs.append("style=filled")
            attrs.append("fillcolor=grey")
            attrs.append("shape=circle")
        else:
            attrs.append(f'label="{q}:{machine.next_of[q]}"')
            attrs.append("shape=doublecircle" if machine.prematch[q] else "shape=circle")
        lines.append(f"  n{q} [{', '.join(attrs)}];")
    lines.append(f"  start [shape=point]; start -> n{machine.initial};")
    for q in range(machine.n_states):
        if q == machine.sink:
            continue
        for x, sym in enumerate(machine.alphabet.symbols):
            r = machine.delta[q][x]
            s = machine.sigma[q][x]
            lines.append(f'  n{q} -> n{r} [label="{sym}/{s}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- structural transforms shared by later modules --------------------------


def prune_unreachable(machine: Machine) -> Machine:
    """Drop states unreachable from the initial state, keeping the sink.

    Surviving states keep their relative id order; returns the machine itself
    when nothing is dropped.
    """
    reach = set(machine.reachable_states())
    reach.add(machine.sink)
    if len(reach) == machine.n_states:
        return machine
    keep = sorted(reach)
    remap = {old: new for new, old in enumerate(keep)}
    return Machine(
        alphabet=machine.alphabet,
        pattern=machine.pattern,
        next_of=tuple(machine.next_of[q] for q in keep),
        prematch=tuple(machine.prematch[q] for q in keep),
        delta=tuple(
            tuple(remap[machine.delta[q][x]] for x in range(machine.alphabet.size))
            for q in keep
        ),
        sigma=tuple(tuple(machine.sigma[q]) for q in keep),
        initial=remap[machine.initial],
        sink=remap[machine.sink],
    )


def canonical_relabel(machine: Machine) -> Machine:
    """Relabel states in breadth-first discovery order (sink last).

    Two machines are structurally identical up to renaming iff their canonical
    relabelings are equal.
    """
    m = prune_unreachable(machine)
    bfs = [q for q in m.reachable_states() if q != m.sink]
    bfs.append(m.sink)
    remap = {old: new for new, old in enumerate(bfs)}
    return Machine(
        alphabet=m.alphabet,
        pattern=m.pattern,
        next_of=tuple(m.next_of[q] for q in bfs),
        prematch=tuple(m.prematch[q] for q in bfs),
        delta=tuple(
            tuple(remap[m.delta[q][x]] for x in range(m.alphabet.size)) for q in bfs
        ),
        sigma=tuple(tuple(m.sigma[q]) for q in bfs),
        initial=remap[m.initial],
        sink=remap[m.sink],
    )
