"""Search for the fastest valid machine of a given order under an iid model.

The search space is the finite normal form: states are pattern-consistent
partial memories over window offsets {0..k}, each state freshly reads one
unknown offset, and every shift is the maximal one validity allows.  The
space is explored lazily — only states reachable under the choices made so
far receive a read offset — either exhaustively or by seeded hill climbing.
"""

from __future__ import annotations

import itertools
import random
from collections.abc import Mapping
from dataclasses import dataclass, field

from .expansion import MemoryState, has_zero_shift_cycle, max_valid_shift
from .machine import (
    Alphabet,
    CapExceeded,
    Machine,
    MachineError,
    Pattern,
    _as_pattern,
)
from .models import IidModel
from .speed import asymptotic_speed_iid

__all__ = [
    "AssemblyRejected",
    "CandidateState",
    "SearchConfig",
    "SearchResult",
    "assemble_machine",
    "candidate_states",
    "optimize_exhaustive",
    "optimize_hill_climb",
]


class AssemblyRejected(MachineError):
    """A next-offset choice map does not yield a valid machine."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class CandidateState:
    """A search-space state: what the machine may remember about the text
    window, as a partial map from offsets {0..k} to symbols.  Offsets inside
    the pattern window must agree with the pattern."""

    memory: MemoryState


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for the optimizers.  `shift_policy` records that every assembly
    takes the maximal valid shift; the enum exists so sub-maximal policies
    could be added without changing call sites."""

    strategy: str = "exhaustive"
    shift_policy: str = "maximal"
    restarts: int = 8
    seed: int = 0
    state_cap: int = 100_000
    assembly_cap: int = 10_000_000

    def __post_init__(self) -> None:
        if self.strategy not in ("exhaustive", "hill_climb"):
            raise MachineError(f"unknown strategy {self.strategy!r}")
        if self.shift_policy != "maximal":
            raise MachineError(f"unknown shift policy {self.shift_policy!r}")
        if self.restarts <= 0 or self.state_cap <= 0 or self.assembly_cap <= 0:
            raise MachineError("search caps must be positive")


@dataclass(frozen=True)
class SearchResult:
    """Winning machine with its asymptotic speed and a provenance record."""

    machine: Machine
    speed: float
    provenance: dict

    def __iter__(self):
        return iter((self.machine, self.speed))


def candidate_states(
    w: Pattern | str, k: int, alphabet: Alphabet | str | None = None
) -> frozenset[CandidateState]:
    """All pattern-consistent partial memories over offsets {0..k}: an offset
    below the pattern length is either unknown or pinned to the pattern
    symbol; offsets beyond it may hold any alphabet symbol."""
    pat = _as_pattern(w, alphabet)
    n = len(pat.text)
    if k < n - 1:
        raise MachineError(
            f"order {k} cannot host pattern of length {n} (need k >= {n - 1})"
        )
    per_position = []
    for i in range(k + 1):
        if i < n:
            per_position.append((None, pat.text[i]))
        else:
            per_position.append((None, *pat.alphabet))
    out = []
    for combo in itertools.product(*per_position):
        entries = tuple((i, y) for i, y in enumerate(combo) if y is not None)
        out.append(CandidateState(MemoryState(entries)))
    return frozenset(out)


def _is_prematch(pat: Pattern, mem: MemoryState, d: int) -> bool:
    """Reading offset d reports an occurrence exactly when every other window
    offset is already known (and hence, by consistency, matches)."""
    n = len(pat.text)
    if d >= n:
        return False
    return all(j in mem.frst for j in range(n) if j != d)


class _TransitionSpace:
    """Caches, per (memory, read offset), the per-symbol landing states under
    the maximal-shift rule — or the verdict that the choice is unusable
    because some landing confirms a full window whose report already passed,
    or loops without shifting."""

    def __init__(self, pat: Pattern):
        self.pat = pat
        self.n = len(pat.text)
        self._cache: dict[tuple[MemoryState, int], list[tuple[MemoryState, int]] | None] = {}

    def outcomes(self, mem: MemoryState, d: int) -> list[tuple[MemoryState, int]] | None:
        key = (mem, d)
        hit = self._cache.get(key, False)
        if hit is not False:
            return hit
        pm = _is_prematch(self.pat, mem, d)
        out: list[tuple[MemoryState, int]] | None = []
        for x in self.pat.alphabet:
            s = max_valid_shift(mem, d, x, pm, self.pat)
            tgt = mem.with_entry(d, x).shifted(s)
            if all(j in tgt.frst for j in range(self.n)):
                # The landing already confirms the whole window: that
                # occurrence could only have been reported during a read,
                # which will never come again.  No assembly using this
                # choice is valid.
                out = None
                break
            if s == 0 and tgt == mem:
                out = None  # zero-shift self-loop
                break
            out.append((tgt, s))
        self._cache[key] = out
        return out

    def legal_choices(self, mem: MemoryState, k: int) -> list[int]:
        return [
            d
            for d in range(k + 1)
            if d not in mem.frst and self.outcomes(mem, d) is not None
        ]


def _build_machine(
    pat: Pattern,
    order_: list[MemoryState],
    choice: Mapping[MemoryState, int],
    space: _TransitionSpace,
) -> Machine:
    index = {mem: i for i, mem in enumerate(order_)}
    next_of, prematch, delta, sigma = [], [], [], []
    for mem in order_:
        d = choice[mem]
        next_of.append(d)
        prematch.append(_is_prematch(pat, mem, d))
        row_d, row_s = [], []
        for tgt, s in space.outcomes(mem, d):
            row_d.append(index[tgt])
            row_s.append(s)
        delta.append(row_d)
        sigma.append(row_s)
    return Machine.create(pat.alphabet, pat, next_of, prematch, delta, sigma, initial=0)


def _closure(
    pat: Pattern,
    k: int,
    space: _TransitionSpace,
    pick,
    state_cap: int,
) -> tuple[list[MemoryState], dict[MemoryState, int]]:
    """Walk the reachable states from the empty memory, calling pick(mem,
    legal) to fix each state's read offset; states are numbered in discovery
    order (new landings appended symbol-by-symbol)."""
    start = MemoryState.empty()
    order_ = [start]
    seen = {start}
    choice: dict[MemoryState, int] = {}
    i = 0
    while i < len(order_):
        mem = order_[i]
        i += 1
        legal = space.legal_choices(mem, k)
        if not legal:
            raise AssemblyRejected(f"state {mem.entries} has no usable read offset")
        d = pick(mem, legal)
        if d not in legal:
            if d in mem.frst:
                raise AssemblyRejected(
                    f"choice re-reads known offset {d} at state {mem.entries}"
                )
            raise AssemblyRejected(
                f"offset {d} at state {mem.entries} leads to an unreportable "
                "occurrence or a zero-shift self-loop"
            )
        choice[mem] = d
        for tgt, _ in space.outcomes(mem, d):
            if tgt not in seen:
                seen.add(tgt)
                order_.append(tgt)
                if len(order_) > state_cap:
                    raise CapExceeded(f"assembly exceeds {state_cap} states")
    return order_, choice


def _finish(pat: Pattern, order_, choice, space) -> Machine:
    machine = _build_machine(pat, order_, choice, space)
    if not any(machine.prematch[q] for q in range(len(order_))):
        raise AssemblyRejected("no reachable state can report an occurrence")
    if has_zero_shift_cycle(machine):
        raise AssemblyRejected("choices create a cycle of zero shifts")
    return machine


def assemble_machine(
    w: Pattern | str,
    k: int,
    next_choice: Mapping,
    model: IidModel | None = None,
    alphabet: Alphabet | str | None = None,
) -> Machine:
    """Realize a next-offset choice map as a concrete machine: from each
    reachable memory, read the chosen unknown offset, report when the rest of
    the window is already known, and take the maximal valid shift.  Raises
    AssemblyRejected when the map re-reads a known offset, strands an
    occurrence, shifts nowhere, or never reports."""
    alpha = _search_alphabet(w, model, alphabet)
    pat = _as_pattern(w, alpha)
    if k < len(pat.text) - 1:
        raise MachineError(
            f"order {k} cannot host pattern of length {len(pat.text)}"
        )
    table: dict[MemoryState, int] = {}
    for key, d in next_choice.items():
        mem = key.memory if isinstance(key, CandidateState) else key
        table[mem] = d
    space = _TransitionSpace(pat)

    def pick(mem: MemoryState, legal: list[int]) -> int:
        if mem not in table:
            raise AssemblyRejected(f"no read offset chosen for state {mem.entries}")
        return table[mem]

    order_, choice = _closure(pat, k, space, pick, SearchConfig().state_cap)
    return _finish(pat, order_, choice, space)


def _search_alphabet(w, model, alphabet) -> Alphabet:
    if alphabet is not None:
        return alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)
    text = w.text if isinstance(w, Pattern) else w
    symbols = set(text)
    if model is not None:
        symbols |= set(model.symbols)
    return Alphabet("".join(sorted(symbols)))


def optimize_exhaustive(
    w: Pattern | str,
    k: int,
    model: IidModel,
    config: SearchConfig | None = None,
    alphabet: Alphabet | str | None = None,
) -> SearchResult:
    """Enumerate every lazily-reachable choice map depth-first (offsets in
    ascending order, so ties keep the lexicographically least map), keep the
    fastest valid machine under the model."""
    cfg = config or SearchConfig(strategy="exhaustive")
    alpha = _search_alphabet(w, model, alphabet)
    pat = _as_pattern(w, alpha)
    n = len(pat.text)
    if k < n - 1:
        raise MachineError(f"order {k} cannot host pattern of length {n}")
    space = _TransitionSpace(pat)
    start = MemoryState.empty()

    best: tuple[float, Machine] | None = None
    examined = 0

    order_: list[MemoryState] = [start]
    seen: dict[MemoryState, int] = {start: 1}  # value = reference count
    choice: dict[MemoryState, int] = {}

    def complete() -> None:
        nonlocal best, examined
        examined += 1
        if examined > cfg.assembly_cap:
            raise CapExceeded(
                f"more than {cfg.assembly_cap} assemblies; use optimize_hill_climb"
            )
        try:
            machine = _finish(pat, order_, choice, space)
        except AssemblyRejected:
            return
        speed = float(asymptotic_speed_iid(machine, model))
        if best is None or speed > best[0]:
            best = (speed, machine)

    def rec(i: int) -> None:
        if i == len(order_):
            complete()
            return
        mem = order_[i]
        for d in space.legal_choices(mem, k):
            appended = []
            for tgt, _ in space.outcomes(mem, d):
                if tgt in seen:
                    seen[tgt] += 1
                else:
                    seen[tgt] = 1
                    order_.append(tgt)
                    appended.append(tgt)
            if len(order_) > cfg.state_cap:
                raise CapExceeded(f"assembly exceeds {cfg.state_cap} states")
            choice[mem] = d
            rec(i + 1)
            del choice[mem]
            for tgt, _ in space.outcomes(mem, d):
                seen[tgt] -= 1
                if seen[tgt] == 0:
                    del seen[tgt]
            for _ in appended:
                order_.pop()
        return

    rec(0)
    if best is None:
        raise MachineError(
            f"no valid order-{k} machine exists for pattern {pat.text!r}"
        )
    provenance = {
        "w": pat.text,
        "k": k,
        "model": {sym: float(p) for sym, p in model.probs.items()},
        "strategy": "exhaustive",
        "seed": None,
        "assemblies_examined": examined,
        "speed": best[0],
    }
    return SearchResult(best[1], best[0], provenance)


def optimize_hill_climb(
    w: Pattern | str,
    k: int,
    model: IidModel,
    config: SearchConfig | None = None,
    alphabet: Alphabet | str | None = None,
) -> SearchResult:
    """Seeded random-restart local search over choice maps: start from a
    random assembly, repeatedly move to the best strictly faster single-state
    change, keep the best machine across restarts.  Deterministic for a given
    (seed, config)."""
    cfg = config or SearchConfig(strategy="hill_climb")
    alpha = _search_alphabet(w, model, alphabet)
    pat = _as_pattern(w, alpha)
    n = len(pat.text)
    if k < n - 1:
        raise MachineError(f"order {k} cannot host pattern of length {n}")
    space = _TransitionSpace(pat)
    examined = 0

    def try_assemble(table: dict[MemoryState, int], fill) -> tuple | None:
        """Assemble with table entries, filling missing states via fill();
        returns (speed, machine, order_, choice) or None."""
        nonlocal examined

        def pick(mem: MemoryState, legal: list[int]) -> int:
            if mem in table and table[mem] in legal:
                return table[mem]
            d = fill(mem, legal)
            table[mem] = d
            return d

        try:
            order_, choice = _closure(pat, k, space, pick, cfg.state_cap)
            machine = _finish(pat, order_, choice, space)
        except (AssemblyRejected, CapExceeded):
            return None
        examined += 1
        if examined > cfg.assembly_cap:
            raise CapExceeded(
                f"more than {cfg.assembly_cap} assemblies examined"
            )
        speed = float(asymptotic_speed_iid(machine, model))
        return speed, machine, order_, choice

    best: tuple[float, Machine] | None = None
    for restart in range(cfg.restarts):
        rng = random.Random(cfg.seed * 1_000_003 + restart)
        current = None
        for _ in range(64):
            table: dict[MemoryState, int] = {}
            current = try_assemble(table, lambda mem, legal: rng.choice(legal))
            if current is not None:
                break
        if current is None:
            continue
        while True:
            speed, machine, order_, choice = current
            improved = None
            for mem in order_:
                for d in space.legal_choices(mem, k):
                    if d == choice[mem]:
                        continue
                    table = dict(choice)
                    table[mem] = d
                    cand = try_assemble(table, lambda m, legal: min(legal))
                    if cand is None:
                        continue
                    if cand[0] > speed and (improved is None or cand[0] > improved[0]):
                        improved = cand
            if improved is None:
                break
            current = improved
        if best is None or current[0] > best[0]:
            best = (current[0], current[1])
    if best is None:
        raise MachineError(
            f"hill climb found no valid order-{k} machine for {pat.text!r}"
        )
    provenance = {
        "w": pat.text,
        "k": k,
        "model": {sym: float(p) for sym, p in model.probs.items()},
        "strategy": "hill_climb",
        "seed": cfg.seed,
        "assemblies_examined": examined,
        "speed": best[0],
    }
    return SearchResult(best[1], best[0], provenance)
