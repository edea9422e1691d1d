"""Asymptotic search speed: the machine-state Markov chain under a text
model, its decomposition into transient states and recurrent classes, exact
stationary analysis (float or rational), and empirical estimation on sampled
texts.

Speed is the limit of |t| / (number of text accesses) as |t| grows; for a
machine whose state process is a finite Markov chain it equals the
absorption-weighted average, over recurrent classes, of the stationary
expected shift per access.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .expansion import expand
from .machine import CapExceeded, Machine, MachineError, PreconditionError
from .models import Hmm, IidModel, MarkovTextModel, TextModel, as_hmm, sample_text

__all__ = [
    "StateChain",
    "decompose",
    "state_chain_iid",
    "asymptotic_speed_iid",
    "state_chain_hmm",
    "asymptotic_speed_hmm",
    "asymptotic_speed",
    "EmpiricalSpeed",
    "empirical_speed",
    "trace_bounds",
]


@dataclass(frozen=True)
class StateChain:
    """A finite Markov chain over machine states (or composite nodes), with
    the expected shift per visit attached to each node.

    `classes`/`absorption` are filled by decompose(): recurrent classes are
    the closed strongly connected components; absorption[m] is the
    probability, from the initial distribution, of ending up in class m."""

    nodes: tuple
    initial: tuple
    transition: tuple
    expected_shift: tuple
    recurrent_classes: tuple | None = None
    transient: tuple | None = None
    absorption: tuple | None = None

    def __post_init__(self) -> None:
        n = len(self.nodes)
        if not (len(self.initial) == len(self.transition) == len(self.expected_shift) == n):
            raise MachineError("state chain field lengths disagree")
        for i, row in enumerate(self.transition):
            if len(row) != n:
                raise MachineError("state chain transition matrix is not square")
            if abs(float(sum(row)) - 1.0) > 1e-9:
                raise MachineError(
                    f"state chain row {i} sums to {float(sum(row))!r}, not 1"
                )
        if abs(float(sum(self.initial)) - 1.0) > 1e-9:
            raise MachineError("state chain initial distribution does not sum to 1")


def _scc(n: int, adj: list[list[int]]) -> list[list[int]]:
    """Strongly connected components (iterative Tarjan), in discovery order."""
    index_of = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index_of[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index_of[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for i in range(pi, len(adj[v])):
                u = adj[v][i]
                if index_of[u] == -1:
                    work[-1] = (v, i + 1)
                    work.append((u, 0))
                    advanced = True
                    break
                if on_stack[u]:
                    low[v] = min(low[v], index_of[u])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index_of[v]:
                comp = []
                while True:
                    u = stack.pop()
                    on_stack[u] = False
                    comp.append(u)
                    if u == v:
                        break
                out.append(comp)
    return out


def _gauss_solve(A: list[list], B: list[list]) -> list[list]:
    """Solve A X = B exactly (entries support field operations, e.g.
    Fraction); returns X as a list of rows. Raises on singular A."""
    n = len(A)
    m = len(B[0]) if B else 0
    aug = [list(A[i]) + list(B[i]) for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise MachineError("singular linear system in exact mode")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = Fraction(1, 1) / aug[col][col] if isinstance(aug[col][col], Fraction) else 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [aug[r][k] - f * aug[col][k] for k in range(n + m)]
    return [row[n:] for row in aug]


def decompose(chain: StateChain) -> StateChain:
    """Fill in recurrent classes (closed SCCs), transient states, and
    absorption probabilities from the initial distribution."""
    n = len(chain.nodes)
    exact = any(isinstance(v, Fraction) for v in chain.initial) or any(
        isinstance(v, Fraction) for row in chain.transition for v in row
    )
    adj = [
        [j for j in range(n) if float(chain.transition[i][j]) > 0.0]
        for i in range(n)
    ]
    comps = _scc(n, adj)
    comp_of = [0] * n
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = ci
    closed = []
    for ci, comp in enumerate(comps):
        if all(comp_of[j] == ci for v in comp for j in adj[v]):
            closed.append(ci)
    recurrent = [tuple(sorted(comps[ci])) for ci in closed]
    recurrent.sort()
    rec_states = {v for comp in recurrent for v in comp}
    transient = tuple(v for v in range(n) if v not in rec_states)
    c = len(recurrent)

    zero = Fraction(0) if exact else 0.0
    if transient:
        tidx = {v: i for i, v in enumerate(transient)}
        one = Fraction(1) if exact else 1.0
        A = [
            [
                (one if i == j else zero) - chain.transition[v][u]
                for j, u in enumerate(transient)
            ]
            for i, v in enumerate(transient)
        ]
        B = [
            [
                sum(
                    (chain.transition[v][u] for u in recurrent[m]),
                    start=zero,
                )
                for m in range(c)
            ]
            for v in transient
        ]
        if exact:
            Y = _gauss_solve(A, B)
        else:
            Y = np.linalg.solve(np.array(A, dtype=float), np.array(B, dtype=float)).tolist()
    else:
        Y = []
    absorption = []
    for m in range(c):
        h = sum((chain.initial[v] for v in recurrent[m]), start=zero)
        for i, v in enumerate(transient):
            h = h + chain.initial[v] * Y[i][m]
        absorption.append(h)
    total = float(sum(absorption))
    if abs(total - 1.0) > 1e-9:
        raise MachineError(f"absorption probabilities sum to {total!r}, not 1")
    return replace(
        chain,
        recurrent_classes=tuple(recurrent),
        transient=transient,
        absorption=tuple(absorption),
    )


def _stationary(chain: StateChain, comp: tuple[int, ...], exact: bool):
    """Stationary distribution of the chain restricted to a closed class,
    indexed like comp."""
    k = len(comp)
    if k == 1:
        return [Fraction(1) if exact else 1.0]
    P = [[chain.transition[v][u] for u in comp] for v in comp]
    if exact:
        one, zero = Fraction(1), Fraction(0)
        A = [[P[j][i] - (one if i == j else zero) for j in range(k)] for i in range(k)]
        A[k - 1] = [one] * k
        B = [[zero] for _ in range(k - 1)] + [[one]]
        alpha = [row[0] for row in _gauss_solve(A, B)]
        assert all(a >= 0 for a in alpha)
        return alpha
    Pf = np.array(P, dtype=float)
    A = Pf.T - np.eye(k)
    A[-1, :] = 1.0
    b = np.zeros(k)
    b[-1] = 1.0
    try:
        alpha = np.linalg.solve(A, b)
        residual = float(np.abs(alpha @ Pf - alpha).max())
        if residual > 1e-10 or float(alpha.min()) < -1e-10:
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        # lazy-chain power iteration (robust to periodicity)
        lazy = 0.5 * (Pf + np.eye(k))
        alpha = np.full(k, 1.0 / k)
        for _ in range(10**6):
            nxt = alpha @ lazy
            if float(np.abs(nxt - alpha).max()) < 1e-12:
                alpha = nxt
                break
            alpha = nxt
        else:
            raise MachineError("stationary distribution did not converge")
    alpha = np.clip(alpha, 0.0, None)
    alpha = alpha / alpha.sum()
    return alpha.tolist()


def _chain_speed(chain: StateChain, exact: bool):
    """Absorption-weighted stationary expected shift."""
    d = decompose(chain)
    total = Fraction(0) if exact else 0.0
    for m, comp in enumerate(d.recurrent_classes):
        h = d.absorption[m]
        if float(h) == 0.0:
            continue
        alpha = _stationary(d, comp, exact)
        class_speed = sum(
            (alpha[i] * d.expected_shift[v] for i, v in enumerate(comp)),
            start=Fraction(0) if exact else 0.0,
        )
        total = total + h * class_speed
    return total


# ---------------------------------------------------------------------------
# iid path


def state_chain_iid(
    machine: Machine, model: IidModel, *, exact: bool = False
) -> StateChain:
    """The Markov chain followed by the machine's state under iid text.

    Standard machines condition each read on the realizable symbols
    (renormalized rows over non-sink transitions); non-redundant machines use
    the plain symbol distribution.  Other machines are outside the theorem's
    hypotheses: expand them first."""
    em = expand(machine)
    n_match = em.machine.n_states == machine.n_states
    standard = n_match and len(set(em.origin_of.values())) == len(em.origin_of)
    redundant = bool(em.forced_read_states)
    if not standard and redundant:
        raise PreconditionError(
            "state chain requires a standard or non-redundant machine; "
            "use the expansion (which is standard) instead"
        )
    extra = set(model.symbols) - set(machine.alphabet.symbols)
    if extra:
        raise MachineError(
            f"model emits symbols {sorted(extra)!r} outside the machine alphabet"
        )

    def nu(sym: str):
        p = model.prob(sym)
        return Fraction(p) if exact else float(p)

    probs = [nu(sym) for sym in machine.alphabet.symbols]
    nodes = [q for q in machine.reachable_states() if q != machine.sink]
    idx = {q: i for i, q in enumerate(nodes)}
    zero = Fraction(0) if exact else 0.0
    transition = []
    shifts = []
    for q in nodes:
        row = [zero] * len(nodes)
        denom = zero
        shift = zero
        for x in range(machine.alphabet.size):
            target = machine.delta[q][x]
            if target == machine.sink:
                continue
            denom = denom + probs[x]
            shift = shift + probs[x] * machine.sigma[q][x]
            row[idx[target]] = row[idx[target]] + probs[x]
        if float(denom) == 0.0:
            raise PreconditionError(
                f"state {q} has no realizable read (all transitions to the sink)"
            )
        if standard:
            row = [v / denom for v in row]
            shift = shift / denom
        else:
            if abs(float(denom) - 1.0) > 1e-12:
                raise PreconditionError(
                    f"non-standard machine with sink transitions at state {q}: "
                    "outside the chain theorem's hypotheses"
                )
        transition.append(tuple(row))
        shifts.append(shift)
    one = Fraction(1) if exact else 1.0
    initial = tuple(one if q == machine.initial else zero for q in nodes)
    return StateChain(
        nodes=tuple(nodes),
        initial=initial,
        transition=tuple(transition),
        expected_shift=tuple(shifts),
    )


def asymptotic_speed_iid(
    machine: Machine, model: IidModel, *, exact: bool = False
):
    """Exact asymptotic speed under an iid model.

    Machines that are neither standard nor non-redundant are analyzed through
    their expansion (same accesses on every text, hence same speed); no
    compaction is ever applied implicitly (it changes the access count).
    Returns a Fraction in exact mode, else a float."""
    try:
        chain = state_chain_iid(machine, model, exact=exact)
    except PreconditionError:
        chain = state_chain_iid(expand(machine).machine, model, exact=exact)
    return _chain_speed(chain, exact)


# ---------------------------------------------------------------------------
# HMM path


def _hidden_power_rows(trans: np.ndarray, power: int, cache: dict) -> np.ndarray:
    if power not in cache:
        cache[power] = np.linalg.matrix_power(trans, power)
    return cache[power]


def state_chain_hmm(
    machine: Machine, hmm: Hmm, *, cap: int = 10**6
) -> StateChain:
    """The Markov chain followed by (hidden-state block, machine state) under
    a deterministic-emission HMM text.

    A block is the tuple of hidden states generating the text window's
    positions 0..order; the machine's read inside the window is then
    determined, so the pair process is Markov for any machine.  Non-
    deterministic HMMs are determinized first."""
    hmm = as_hmm(hmm)
    k = order = machine.order
    K = len(hmm.states)
    if (K ** (k + 1)) * machine.n_states > cap:
        raise CapExceeded(
            f"HMM chain would have up to {K ** (k + 1) * machine.n_states} nodes "
            f"(cap {cap})"
        )
    trans = np.array([[float(p) for p in row] for row in hmm.transition])
    init = np.array([float(p) for p in hmm.initial])
    emit = [hmm.emitted_symbol(i) for i in range(K)]
    sym_index = {s: i for i, s in enumerate(machine.alphabet.symbols)}
    power_cache: dict[int, np.ndarray] = {1: trans}

    DEAD = ("dead",)

    def block_extensions(start_dist: np.ndarray, length: int):
        """All hidden-state tuples of the given length whose first element is
        drawn from start_dist and the rest follow the chain, with
        probabilities."""
        out = [((), 1.0, None)]  # (tuple, prob, last-state)
        for step in range(length):
            nxt = []
            for tup, p, last in out:
                if step == 0:
                    for h in range(K):
                        ph = float(start_dist[h])
                        if ph > 0.0:
                            nxt.append(((h,), p * ph, h))
                else:
                    for h in range(K):
                        ph = float(trans[last][h])
                        if ph > 0.0:
                            nxt.append((tup + (h,), p * ph, h))
            out = nxt
        return [(tup, p) for tup, p, _ in out]

    # initial nodes
    initial_support: dict[tuple, float] = {}
    for tup, p in block_extensions(init, k + 1):
        node = (tup, machine.initial)
        initial_support[node] = initial_support.get(node, 0.0) + p

    index: dict[tuple, int] = {}
    nodes: list[tuple] = []
    rows: list[dict[int, float]] = []
    shifts: list[float] = []

    def intern(node) -> int:
        if node not in index:
            index[node] = len(nodes)
            nodes.append(node)
            rows.append({})
            shifts.append(0.0)
        return index[node]

    worklist = [intern(node) for node in initial_support]
    done = 0
    while done < len(nodes):
        nid = done
        done += 1
        node = nodes[nid]
        if node == DEAD:
            rows[nid] = {nid: 1.0}
            shifts[nid] = 0.0
            continue
        d, q = node
        if q == machine.sink:
            rows[nid] = {intern(DEAD): 1.0}
            continue
        read_sym = emit[d[machine.next_of[q]]]
        x = sym_index.get(read_sym)
        if x is None:
            raise MachineError(
                f"HMM emits symbol {read_sym!r} outside the machine alphabet"
            )
        ell = machine.sigma[q][x]
        q2 = machine.delta[q][x]
        if q2 == machine.sink:
            rows[nid] = {intern(DEAD): 1.0}
            shifts[nid] = float(ell)
            continue
        shifts[nid] = float(ell)
        row: dict[int, float] = {}
        if ell == 0:
            row[intern((d, q2))] = 1.0
        elif ell <= k:
            head = d[ell:]
            start = trans[d[k]]
            for tail, p in block_extensions(start, ell):
                row_key = intern((head + tail, q2))
                row[row_key] = row.get(row_key, 0.0) + p
        else:
            gap = ell - k
            start = _hidden_power_rows(trans, gap, power_cache)[d[k]]
            for tup, p in block_extensions(start, k + 1):
                row_key = intern((tup, q2))
                row[row_key] = row.get(row_key, 0.0) + p
        rows[nid] = row

    n = len(nodes)
    transition = tuple(
        tuple(rows[i].get(j, 0.0) for j in range(n)) for i in range(n)
    )
    initial = tuple(initial_support.get(node, 0.0) for node in nodes)
    labels = tuple(
        "dead" if node == DEAD else f"{'.'.join(hmm.states[h] for h in node[0])}|{node[1]}"
        for node in nodes
    )
    return StateChain(
        nodes=labels,
        initial=initial,
        transition=transition,
        expected_shift=tuple(shifts),
    )


def asymptotic_speed_hmm(machine: Machine, model, *, cap: int = 10**6) -> float:
    """Asymptotic speed under an HMM (or Markov, converted) text model."""
    if isinstance(model, IidModel):
        hmm = as_hmm(model)
    elif isinstance(model, MarkovTextModel):
        hmm = as_hmm(model)
    else:
        hmm = model
    chain = state_chain_hmm(machine, hmm, cap=cap)
    return float(_chain_speed(chain, exact=False))


def asymptotic_speed(machine: Machine, model: TextModel, *, exact: bool = False, cap: int = 10**6):
    """Dispatch on the model type: iid models use the state chain directly,
    Markov and HMM models the hidden-block chain."""
    if isinstance(model, IidModel):
        return asymptotic_speed_iid(machine, model, exact=exact)
    return asymptotic_speed_hmm(machine, model, cap=cap)


# ---------------------------------------------------------------------------
# empirical estimation


def trace_bounds(machine: Machine, text_len: int) -> tuple[int, int]:
    """(lower, upper) bounds on the access count of any complete scan of a
    length-`text_len` text: each access shifts by at most the largest shift
    in the table, and a scan that never cycles at zero shift advances at
    least once every |Q| accesses."""
    max_shift = max(
        (machine.sigma[q][x]
         for q in machine.non_sink_states()
         for x in range(machine.alphabet.size)),
        default=1,
    )
    max_shift = max(max_shift, 1)
    horizon = max(len(machine.pattern) - 1, machine.order)
    lower = max(0, -(-(text_len - horizon) // max_shift))
    upper = (text_len + 1) * (machine.n_states + 1)
    return lower, upper


@dataclass(frozen=True)
class EmpiricalSpeed:
    mean: float
    std_error: float
    values: tuple[float, ...]

    def __iter__(self):
        return iter((self.mean, self.std_error))


def empirical_speed(
    machine: Machine,
    model: TextModel | None = None,
    text_len: int = 10**6,
    reps: int = 20,
    seed=0,
    *,
    text: str | None = None,
) -> EmpiricalSpeed:
    """Mean and standard error of |t|/tac over sampled texts (or the single
    ratio for a fixed text).  Raises when a scan exceeds the iteration cap
    (which proves the machine invalid)."""
    from ._engine import batch_tac

    if text is not None:
        texts = [text]
    else:
        if model is None:
            raise MachineError("empirical_speed needs a model or a fixed text")
        if text_len < 10 * len(machine.pattern):
            raise MachineError(
                "text too short for a meaningful empirical estimate "
                f"(need at least {10 * len(machine.pattern)})"
            )
        seeds = np.random.SeedSequence(seed).spawn(reps)
        texts = [sample_text(model, text_len, s) for s in seeds]
    tacs = batch_tac(machine, texts)
    values = []
    for t, tac in zip(texts, tacs):
        if tac < 0:
            raise MachineError(
                "scan exceeded the iteration cap: the machine loops without "
                "advancing (invalid)"
            )
        lo, hi = trace_bounds(machine, len(t))
        if not (lo <= tac <= hi):
            raise MachineError(
                f"access count {tac} violates the structural bounds [{lo}, {hi}]"
            )
        values.append(len(t) / tac if tac > 0 else float("inf"))
    arr = np.array(values)
    mean = float(arr.mean())
    std_error = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return EmpiricalSpeed(mean=mean, std_error=std_error, values=tuple(values))
