"""Random text models: iid, finite-order Markov, and hidden Markov models
with (optionally) deterministic emission; sampling, exact text probabilities,
model conversions, and ingestion of plain/FASTA text files."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .machine import MachineError

__all__ = [
    "IidModel",
    "MarkovTextModel",
    "Hmm",
    "TextModel",
    "sample_text",
    "text_probability",
    "determinize_emission",
    "hmm_from_iid",
    "hmm_from_markov",
    "as_hmm",
    "fit_iid",
    "ingest_text",
    "model_to_json",
    "model_from_json",
]

_TOL = 1e-12


def _check_distribution(probs, what: str) -> None:
    total = 0.0
    for key, p in probs.items():
        if float(p) < -_TOL:
            raise MachineError(f"{what}: negative probability for {key!r}")
        total += float(p)
    if abs(total - 1.0) > 1e-9:
        raise MachineError(f"{what}: probabilities sum to {total!r}, not 1")


@dataclass(frozen=True)
class IidModel:
    """Independent identically distributed symbols.

    Probabilities may be floats or Fractions; Fractions enable the exact
    speed computations downstream."""

    probs: dict[str, object]

    def __post_init__(self) -> None:
        _check_distribution(self.probs, "iid model")
        for sym in self.probs:
            if not (isinstance(sym, str) and len(sym) == 1):
                raise MachineError(f"iid model: symbol {sym!r} is not a single character")

    @staticmethod
    def uniform(alphabet) -> "IidModel":
        symbols = getattr(alphabet, "symbols", alphabet)
        return IidModel({sym: Fraction(1, len(symbols)) for sym in symbols})

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(sorted(self.probs))

    def prob(self, sym: str):
        try:
            return self.probs[sym]
        except KeyError:
            raise MachineError(f"symbol {sym!r} not covered by the iid model") from None


@dataclass(frozen=True)
class MarkovTextModel:
    """Order-n Markov chain over symbols: an initial distribution over
    length-n words and conditional next-symbol probabilities per word."""

    order: int
    initial: dict[str, object]
    trans: dict[str, dict[str, object]]

    def __post_init__(self) -> None:
        if self.order < 1:
            raise MachineError("Markov model order must be >= 1")
        for word in self.initial:
            if len(word) != self.order:
                raise MachineError(
                    f"Markov initial word {word!r} does not have length {self.order}"
                )
        _check_distribution(self.initial, "Markov initial distribution")
        for word, row in self.trans.items():
            if len(word) != self.order:
                raise MachineError(
                    f"Markov context {word!r} does not have length {self.order}"
                )
            _check_distribution(row, f"Markov row for context {word!r}")

    @property
    def symbols(self) -> tuple[str, ...]:
        syms = set()
        for row in self.trans.values():
            syms.update(row)
        for word in self.initial:
            syms.update(word)
        return tuple(sorted(syms))

    def row(self, word: str) -> dict[str, object]:
        try:
            return self.trans[word]
        except KeyError:
            raise MachineError(f"Markov model has no row for context {word!r}") from None


@dataclass(frozen=True)
class Hmm:
    """Hidden Markov model: hidden-state labels, initial distribution,
    transition matrix (row-stochastic, indexed like `states`), and per-state
    emission distributions over symbols."""

    states: tuple[str, ...]
    initial: tuple
    transition: tuple
    emission: tuple  # one dict[symbol -> probability] per state

    def __post_init__(self) -> None:
        n = len(self.states)
        if len(set(self.states)) != n:
            raise MachineError("HMM state labels must be distinct")
        if len(self.initial) != n or len(self.transition) != n or len(self.emission) != n:
            raise MachineError("HMM field lengths disagree with the state count")
        _check_distribution(dict(enumerate(self.initial)), "HMM initial distribution")
        for i, row in enumerate(self.transition):
            if len(row) != n:
                raise MachineError("HMM transition matrix is not square")
            _check_distribution(dict(enumerate(row)), f"HMM transition row {i}")
        for i, em in enumerate(self.emission):
            _check_distribution(em, f"HMM emission of state {self.states[i]}")

    @property
    def symbols(self) -> tuple[str, ...]:
        syms = set()
        for em in self.emission:
            syms.update(em)
        return tuple(sorted(syms))

    @property
    def deterministic(self) -> bool:
        return all(
            any(abs(float(p) - 1.0) <= 1e-9 for p in em.values()) and len(
                [s for s, p in em.items() if float(p) > _TOL]
            ) == 1
            for em in self.emission
        )

    def emitted_symbol(self, i: int) -> str:
        """The single symbol emitted by hidden state i (deterministic HMMs)."""
        em = self.emission[i]
        for sym, p in em.items():
            if float(p) > 0.5:
                return sym
        raise MachineError(
            f"HMM state {self.states[i]} has no deterministic emission"
        )


TextModel = IidModel | MarkovTextModel | Hmm


# ---------------------------------------------------------------------------
# sampling


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _sample_from(rng, items, probs) -> int:
    """Index into items drawn according to probs (floats)."""
    u = rng.random()
    acc = 0.0
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            return i
    return len(items) - 1


def sample_text(model: TextModel, n: int, seed) -> str:
    """Draw a length-n text from the model, deterministically in seed."""
    if n < 0:
        raise MachineError("text length must be non-negative")
    if n == 0:
        return ""
    rng = _rng(seed)
    if isinstance(model, IidModel):
        symbols = model.symbols
        probs = np.array([float(model.probs[s]) for s in symbols])
        probs = probs / probs.sum()
        draws = rng.choice(len(symbols), size=n, p=probs)
        return "".join(symbols[i] for i in draws)
    if isinstance(model, MarkovTextModel):
        words = sorted(model.initial)
        wprobs = [float(model.initial[w]) for w in words]
        word = words[_sample_from(rng, words, wprobs)]
        out = list(word[: min(n, model.order)])
        uniforms = rng.random(max(0, n - model.order))
        for u in uniforms:
            row = model.row(word)
            syms = sorted(row)
            acc = 0.0
            nxt = syms[-1]
            for sym in syms:
                acc += float(row[sym])
                if u < acc:
                    nxt = sym
                    break
            out.append(nxt)
            word = word[1:] + nxt
        return "".join(out[:n])
    if isinstance(model, Hmm):
        k = len(model.states)
        init = [float(p) for p in model.initial]
        trans = np.array([[float(p) for p in row] for row in model.transition])
        cum = np.cumsum(trans, axis=1)
        state = _sample_from(rng, range(k), init)
        uniforms = rng.random(n)
        out = []
        for i in range(n):
            em = model.emission[state]
            syms = sorted(em)
            u = rng.random()
            acc = 0.0
            sym = syms[-1]
            for s in syms:
                acc += float(em[s])
                if u < acc:
                    sym = s
                    break
            out.append(sym)
            if i + 1 < n:
                state = int(np.searchsorted(cum[state], uniforms[i], side="right"))
                state = min(state, k - 1)
        return "".join(out)
    raise MachineError(f"unknown text model type {type(model).__name__}")


# ---------------------------------------------------------------------------
# exact probabilities


def text_probability(model: TextModel, t: str):
    """Exact probability of the model emitting exactly the text t (as its
    first |t| symbols)."""
    if isinstance(model, IidModel):
        p = 1
        for ch in t:
            p = p * model.prob(ch)
        return p
    if isinstance(model, MarkovTextModel):
        n = model.order
        if len(t) >= n:
            head = t[:n]
            p = model.initial.get(head, 0)
            word = head
            for ch in t[n:]:
                if float(p) == 0.0:
                    return p
                p = p * model.row(word).get(ch, 0)
                word = word[1:] + ch
            return p
        # short text: marginalize the initial word distribution over prefixes
        p = 0
        for word, q in model.initial.items():
            if word.startswith(t):
                p = p + q
        return p
    if isinstance(model, Hmm):
        # forward algorithm
        if not t:
            return 1
        k = len(model.states)
        alpha = [model.initial[i] * model.emission[i].get(t[0], 0) for i in range(k)]
        for ch in t[1:]:
            stepped = [0] * k
            for i in range(k):
                ai = alpha[i]
                if float(ai) == 0.0:
                    continue
                row = model.transition[i]
                for j in range(k):
                    if float(row[j]) != 0.0:
                        stepped[j] = stepped[j] + ai * row[j]
            alpha = [stepped[j] * model.emission[j].get(ch, 0) for j in range(k)]
        total = 0
        for a in alpha:
            total = total + a
        return total
    raise MachineError(f"unknown text model type {type(model).__name__}")

# ---------------------------------------------------------------------------
# conversions


def determinize_emission(hmm: Hmm) -> Hmm:
    """Equivalent HMM whose states each emit a single symbol, obtained by
    splitting every hidden state per symbol it can emit."""
    if hmm.deterministic:
        return hmm
    split: list[tuple[int, str]] = []
    for i, em in enumerate(hmm.emission):
        for sym in sorted(em):
            if float(em[sym]) > _TOL:
                split.append((i, sym))
    index = {pair: n for n, pair in enumerate(split)}
    states = tuple(f"{hmm.states[i]}:{sym}" for i, sym in split)
    initial = tuple(hmm.initial[i] * hmm.emission[i][sym] for i, sym in split)
    transition = tuple(
        tuple(
            hmm.transition[i][j] * hmm.emission[j][sym2]
            for (j, sym2) in split
        )
        for (i, _sym) in split
    )
    emission = tuple({sym: 1} for _i, sym in split)
    return Hmm(states=states, initial=initial, transition=transition, emission=emission)


def hmm_from_iid(model: IidModel) -> Hmm:
    """Deterministic-emission HMM emitting exactly the iid distribution
    (one hidden state per symbol)."""
    symbols = model.symbols
    return Hmm(
        states=symbols,
        initial=tuple(model.probs[s] for s in symbols),
        transition=tuple(tuple(model.probs[s] for s in symbols) for _ in symbols),
        emission=tuple({s: 1} for s in symbols),
    )


def hmm_from_markov(model: MarkovTextModel) -> Hmm:
    """Deterministic-emission HMM with one hidden state per length-n context,
    emitting the context's last symbol.

    The hidden chain reproduces the Markov model's conditional law exactly;
    the initial word distribution is carried over as the distribution of the
    context in effect at the first position (asymptotics are unaffected)."""
    contexts = sorted(set(model.trans) | set(model.initial))
    index = {w: i for i, w in enumerate(contexts)}
    n = len(contexts)
    transition = [[0] * n for _ in range(n)]
    for w in contexts:
        row = model.trans.get(w)
        if row is None:
            raise MachineError(f"Markov model has no row for reachable context {w!r}")
        for sym, p in row.items():
            v = w[1:] + sym
            if v not in index:
                raise MachineError(
                    f"Markov context {v!r} reachable from {w!r} has no row"
                )
            transition[index[w]][index[v]] = p
    initial = [model.initial.get(w, 0) for w in contexts]
    emission = tuple({w[-1]: 1} for w in contexts)
    return Hmm(
        states=tuple(contexts),
        initial=tuple(initial),
        transition=tuple(tuple(r) for r in transition),
        emission=emission,
    )


def as_hmm(model: TextModel) -> Hmm:
    """Any text model as a deterministic-emission HMM."""
    if isinstance(model, Hmm):
        return determinize_emission(model)
    if isinstance(model, IidModel):
        return hmm_from_iid(model)
    if isinstance(model, MarkovTextModel):
        return hmm_from_markov(model)
    raise MachineError(f"unknown text model type {type(model).__name__}")


# ---------------------------------------------------------------------------
# fitting and ingestion

from collections import Counter
from fractions import Fraction as _Fr


def fit_iid(text: str) -> IidModel:
    """Symbol relative frequencies of the text (exact rationals)."""
    if not text:
        raise MachineError("cannot fit a model to an empty text")
    counts = Counter(text)
    total = len(text)
    return IidModel({sym: _Fr(c, total) for sym, c in counts.items()})


def ingest_text(data: str, *, fasta: bool | None = None, alphabet=None) -> str:
    """Normalize raw file contents into a text over the working alphabet.

    FASTA input (auto-detected by a leading '>' unless `fasta` forces the
    choice): header lines are dropped, sequence lines are concatenated and
    case-folded.  Plain input: taken verbatim minus one trailing newline.
    With `alphabet` given, symbols outside it are rejected with their
    position."""
    if fasta is None:
        fasta = data.lstrip().startswith(">")
    if fasta:
        parts = [
            line.strip()
            for line in data.splitlines()
            if line.strip() and not line.lstrip().startswith((">", ";"))
        ]
        text = "".join(parts).lower()
    else:
        text = data[:-1] if data.endswith("\n") else data
    if alphabet is not None:
        symbols = set(getattr(alphabet, "symbols", alphabet))
        for i, ch in enumerate(text):
            if ch not in symbols:
                raise MachineError(
                    f"text symbol {ch!r} at position {i} is outside the alphabet"
                )
    return text


def model_to_json(model: TextModel) -> dict:
    """Text-model document: {"type": ...} plus the model's own fields.
    Probabilities are written as strings when exact (Fraction), floats
    otherwise; `model_from_json` restores either form."""

    def num(p):
        return str(p) if isinstance(p, _Fr) else float(p)

    if isinstance(model, IidModel):
        return {"type": "iid", "probs": {s: num(p) for s, p in model.probs.items()}}
    if isinstance(model, MarkovTextModel):
        return {
            "type": "markov",
            "order": model.order,
            "initial": {wrd: num(p) for wrd, p in model.initial.items()},
            "transition": {
                wrd: {s: num(p) for s, p in row.items()}
                for wrd, row in model.trans.items()
            },
        }
    if isinstance(model, Hmm):
        return {
            "type": "hmm",
            "states": list(model.states),
            "initial": [num(p) for p in model.initial],
            "transition": [[num(p) for p in row] for row in model.transition],
            "emission": [{s: num(p) for s, p in em.items()} for em in model.emission],
        }
    raise MachineError(f"cannot serialize model of type {type(model).__name__}")


def model_from_json(doc: dict) -> TextModel:
    """Inverse of `model_to_json`; raises on unknown or malformed documents."""

    def num(p):
        return _Fr(p) if isinstance(p, str) else float(p)

    try:
        kind = doc["type"]
        if kind == "iid":
            return IidModel({s: num(p) for s, p in doc["probs"].items()})
        if kind == "markov":
            return MarkovTextModel(
                order=int(doc["order"]),
                initial={wrd: num(p) for wrd, p in doc["initial"].items()},
                trans={
                    wrd: {s: num(p) for s, p in row.items()}
                    for wrd, row in doc["transition"].items()
                },
            )
        if kind == "hmm":
            return Hmm(
                states=tuple(doc["states"]),
                initial=tuple(num(p) for p in doc["initial"]),
                transition=tuple(tuple(num(p) for p in row) for row in doc["transition"]),
                emission=tuple({s: num(p) for s, p in em.items()} for em in doc["emission"]),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise MachineError(f"malformed model document: {exc}") from exc
    raise MachineError(f"unknown model type {doc.get('type')!r}")
