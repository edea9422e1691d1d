"""Command-line surface: build, export, validate, measure, transform,
optimize, and tabulate machines.

Exit codes: 0 success (or positive verdict), 1 negative verdict, 2 bad
usage / unmet precondition, 3 internal cap exceeded.  All outputs are
deterministic given the flags; tables carry their invocation as a comment
header and never embed timestamps.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

from .classics import ALGORITHMS, build_classic
from .expansion import (
    check_validity_standard,
    compact,
    expand,
    serialize_expanded,
    standardize,
)
from .machine import (
    Alphabet,
    CapExceeded,
    Machine,
    MachineError,
    PreconditionError,
    SchemaError,
    deserialize,
    dot_export,
    serialize,
    validate_bruteforce,
)
from .models import (
    IidModel,
    TextModel,
    fit_iid,
    ingest_text,
    model_from_json,
)
from .optimize import SearchConfig, optimize_exhaustive, optimize_hill_climb
from .reduction import canonicalize, positify
from .speed import asymptotic_speed, empirical_speed

__all__ = ["main", "TableSpec", "cmd_table", "parse_model_spec"]

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_CAP = 3


@dataclass(frozen=True)
class TableSpec:
    """What a speed table covers: which patterns (explicit, or every pattern
    of a given length over an alphabet), which algorithm columns, which text
    model, and optionally an optimal-machine column of a given order."""

    patterns: tuple[str, ...]
    algorithms: tuple[str, ...]
    model: TextModel
    optimal_order: int | None = None
    restarts: int = 50
    assembly_cap: int = 10_000_000

    def __post_init__(self) -> None:
        if not self.patterns:
            raise MachineError("table needs at least one pattern")
        if not self.algorithms:
            raise MachineError("table needs at least one algorithm column")


def parse_model_spec(spec: str, alphabet: Alphabet) -> TextModel:
    """Parse a --model flag: "iid:a=0.25,b=0.75" (unlisted alphabet symbols
    share the remaining mass equally; "iid:" alone is uniform), or
    "markov:FILE" / "hmm:FILE" pointing at a model document."""
    kind, _, rest = spec.partition(":")
    if kind == "iid":
        listed: dict[str, Fraction] = {}
        if rest.strip():
            for item in rest.split(","):
                sym, eq, val = item.partition("=")
                if not eq or len(sym) != 1:
                    raise MachineError(
                        f"bad iid entry {item!r} (want symbol=probability)"
                    )
                try:
                    listed[sym] = Fraction(val)
                except ValueError as exc:
                    raise MachineError(f"bad probability {val!r}") from exc
        rest_syms = [s for s in alphabet if s not in listed]
        remaining = Fraction(1) - sum(listed.values(), Fraction(0))
        probs: dict[str, Fraction] = dict(listed)
        if rest_syms:
            for s in rest_syms:
                probs[s] = remaining / len(rest_syms)
        elif remaining:
            raise MachineError(
                f"iid probabilities sum to {float(1 - remaining)}, "
                "not 1, and no unlisted symbol can absorb the rest"
            )
        return IidModel(probs)
    if kind in ("markov", "hmm"):
        with open(rest, encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("type") != kind:
            raise MachineError(
                f"model file {rest!r} holds a {doc.get('type')!r} model, "
                f"but the flag says {kind!r}"
            )
        return model_from_json(doc)
    raise MachineError(f"unknown model kind {kind!r} (want iid/markov/hmm)")


def _load_machine(path: str) -> Machine:
    with open(path, encoding="utf-8") as fh:
        return deserialize(json.load(fh))


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _machine_doc(machine: Machine) -> str:
    return json.dumps(serialize(machine), indent=2) + "\n"


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def cmd_build(args) -> int:
    machine = build_classic(args.algorithm, args.pattern, alphabet=args.alphabet)
    _emit(_machine_doc(machine), args.out)
    return EXIT_OK


def cmd_export(args) -> int:
    machine = _load_machine(args.machine)
    if args.format == "json":
        _emit(_machine_doc(machine), args.out)
    else:
        _emit(dot_export(machine), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    machine = _load_machine(args.machine)
    if args.mode == "theorem":
        verdict = check_validity_standard(machine)
        if verdict:
            print("valid")
            return EXIT_OK
        print(f"invalid: {verdict.condition} — {verdict.witness}")
        return EXIT_NEGATIVE
    verdict = validate_bruteforce(
        machine,
        exhaustive_len=args.exhaustive_len,
        random_trials=args.trials,
        seed=args.seed,
    )
    if verdict.ok:
        print("valid (no counterexample found)")
        return EXIT_OK
    print(
        f"invalid on text {verdict.text!r}: expected occurrences "
        f"{list(verdict.expected)}, reported {list(verdict.got)}"
        + (f" ({verdict.reason})" if verdict.reason else "")
    )
    return EXIT_NEGATIVE


def cmd_speed(args) -> int:
    machine = _load_machine(args.machine)
    model = parse_model_spec(args.model, machine.alphabet)
    analytic = asymptotic_speed(machine, model, exact=args.exact)
    if args.exact:
        print(f"analytic {analytic} = {float(analytic):.10f}")
    else:
        print(f"analytic {float(analytic):.10f}")
    if args.empirical:
        text_len, reps = int(args.empirical[0]), int(args.empirical[1])
        seed = int(args.empirical[2]) if len(args.empirical) > 2 else args.seed
        est = empirical_speed(machine, model, text_len=text_len, reps=reps, seed=seed)
        print(f"empirical {est.mean:.10f} ± {est.std_error:.10f}")
    return EXIT_OK


_STAGES = ("expand", "compact", "standardize", "positify", "canonicalize")


def cmd_pipeline(args) -> int:
    machine = _load_machine(args.machine)
    if args.stage == "expand":
        expanded = expand(machine)
        _emit(json.dumps(serialize_expanded(expanded), indent=2) + "\n", args.out)
        _say(args, f"expanded: {machine.n_states} -> {expanded.machine.n_states} states")
        return EXIT_OK
    if args.stage == "compact":
        result = compact(machine)
    elif args.stage == "standardize":
        result = standardize(machine)
    elif args.stage == "positify":
        result = positify(machine)
    else:
        model = parse_model_spec(args.model, machine.alphabet)
        result = canonicalize(machine, model)
        before = float(asymptotic_speed(machine, model))
        after = float(asymptotic_speed(result, model))
        _say(args, f"speed {before:.6f} -> {after:.6f}")
    _emit(_machine_doc(result), args.out)
    _say(args, f"{args.stage}: {machine.n_states} -> {result.n_states} states")
    return EXIT_OK


def cmd_optimize(args) -> int:
    alphabet = Alphabet("".join(sorted(set(args.pattern) | set(args.alphabet or ""))))
    model = parse_model_spec(args.model, alphabet)
    config = SearchConfig(
        strategy=args.strategy,
        restarts=args.restarts,
        seed=args.seed,
        assembly_cap=args.assembly_cap,
    )
    if args.strategy == "exhaustive":
        result = optimize_exhaustive(args.pattern, args.order, model, config, alphabet)
    else:
        result = optimize_hill_climb(args.pattern, args.order, model, config, alphabet)
    doc = {"machine": serialize(result.machine), "provenance": result.provenance}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    _say(args, f"speed {result.speed:.6f} "
               f"({result.provenance['assemblies_examined']} assemblies)")
    return EXIT_OK


def _optimal_machine(w: str, order: int, model, restarts: int, cap: int, seed: int):
    """The table's optimal column: exhaustive search when it fits the cap,
    otherwise hill climbing with the configured restarts."""
    try:
        cfg = SearchConfig(strategy="exhaustive", assembly_cap=cap, seed=seed)
        return optimize_exhaustive(w, order, model, cfg)
    except CapExceeded:
        cfg = SearchConfig(
            strategy="hill_climb", restarts=restarts, assembly_cap=cap, seed=seed
        )
        return optimize_hill_climb(w, order, model, cfg)


def cmd_table(spec: TableSpec, out: str | None = None, *,
              invocation: str = "", seed: int = 0) -> str:
    """Render the speed table: one row per pattern, one column per algorithm
    (analytic speed of the canonicalized classic machine, 4 decimals), plus
    an optimal column when requested.  Returns the TSV text."""
    model = spec.model
    if not isinstance(model, IidModel):
        raise MachineError("speed tables require an iid model")
    alphabet = Alphabet("".join(model.symbols))
    header = ["pattern", *spec.algorithms]
    if spec.optimal_order is not None:
        header.append("optimal")
    lines = []
    if invocation:
        lines.append(f"# {invocation}")
    lines.append("\t".join(header))
    for w in spec.patterns:
        cells = [w]
        for alg in spec.algorithms:
            machine = build_classic(alg, w, alphabet=alphabet)
            canonical = canonicalize(machine, model)
            cells.append(f"{float(asymptotic_speed(canonical, model)):.4f}")
        if spec.optimal_order is not None:
            result = _optimal_machine(
                w, spec.optimal_order, model, spec.restarts, spec.assembly_cap, seed
            )
            cells.append(f"{result.speed:.4f}")
        lines.append("\t".join(cells))
    text = "\n".join(lines) + "\n"
    _emit(text, out)
    return text


def _table_patterns(args) -> tuple[str, ...]:
    if args.patterns:
        return tuple(p for p in args.patterns.split(",") if p)
    if args.length is None:
        raise MachineError("give either --patterns or --length")
    alpha = args.alphabet or "ab"
    return tuple(
        "".join(tup) for tup in itertools.product(sorted(alpha), repeat=args.length)
    )


def run_table(args) -> int:
    patterns = _table_patterns(args)
    alpha_syms = sorted(set("".join(patterns)) | set(args.alphabet or ""))
    alphabet = Alphabet("".join(alpha_syms))
    model = parse_model_spec(args.model, alphabet)
    algorithms = tuple(args.algorithms.split(",")) if args.algorithms else tuple(ALGORITHMS)
    spec = TableSpec(
        patterns=patterns,
        algorithms=algorithms,
        model=model,
        optimal_order=args.optimal_order,
        restarts=args.restarts,
        assembly_cap=args.assembly_cap,
    )
    invocation = "automatch " + " ".join(args.raw_argv)
    cmd_table(spec, args.out, invocation=invocation, seed=args.seed)
    return EXIT_OK


def cmd_ingest(args) -> int:
    with open(args.text, encoding="utf-8") as fh:
        data = fh.read()
    fasta = None if args.format == "auto" else (args.format == "fasta")
    text = ingest_text(data, fasta=fasta)
    model = fit_iid(text)
    alphabet = Alphabet("".join(model.symbols))
    with open(args.patterns, encoding="utf-8") as fh:
        patterns = [
            line.strip()
            for line in fh
            if line.strip() and not line.startswith("#")
        ]
    if not patterns:
        raise MachineError(f"no patterns in {args.patterns!r}")
    for w in patterns:
        for ch in w:
            if ch not in set(alphabet):
                raise MachineError(
                    f"pattern {w!r} uses symbol {ch!r} absent from the text alphabet"
                )
    names = args.machines.split(",") if args.machines else list(ALGORITHMS)
    if names == ["classics"]:
        names = list(ALGORITHMS)
    lines = [f"# automatch {' '.join(args.raw_argv)}"]
    header = ["pattern"]
    for name in names:
        header += [f"{name}_analytic", f"{name}_empirical"]
    lines.append("\t".join(header))
    for w in patterns:
        cells = [w]
        for name in names:
            if name == "optimal":
                result = _optimal_machine(
                    w, len(w) - 1, model, args.restarts, args.assembly_cap, args.seed
                )
                machine = result.machine
                analytic = result.speed
            else:
                machine = build_classic(name, w, alphabet=alphabet)
                analytic = float(asymptotic_speed(machine, model))
            est = empirical_speed(machine, text=text)
            cells += [f"{analytic:.4f}", f"{est.mean:.4f}"]
        lines.append("\t".join(cells))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="automatch",
        description="Finite-state pattern-matching machines: build, check, "
                    "measure, transform, optimize.",
    )
    parser.add_argument("--seed", type=int, default=0, help="global random seed")
    parser.add_argument(
        "--threads", type=int, default=1,
        help="reserved for parallel cell evaluation; this build runs sequentially",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress summaries")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="construct a classic machine")
    p.add_argument("algorithm", choices=sorted(set(ALGORITHMS) | {"mp", "kmp", "qs"}))
    p.add_argument("pattern")
    p.add_argument("--alphabet", default=None)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("export", help="re-emit a machine as JSON or DOT")
    p.add_argument("machine")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("validate", help="check that a machine reports exactly "
                                        "the occurrences")
    p.add_argument("machine")
    p.add_argument("--mode", choices=("theorem", "bruteforce"), default="theorem")
    p.add_argument("--exhaustive-len", type=int, default=7)
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("speed", help="analytic (and optionally empirical) speed")
    p.add_argument("machine")
    p.add_argument("--model", required=True,
                   help='"iid:a=0.25,b=0.75", "markov:FILE", or "hmm:FILE"')
    p.add_argument("--empirical", nargs="+", default=None,
                   metavar=("LEN", "REPS"),
                   help="text length and repetitions (optional third value: seed)")
    p.add_argument("--exact", action="store_true",
                   help="rational arithmetic end to end (iid only)")
    p.set_defaults(func=cmd_speed)

    p = sub.add_parser("pipeline", help="apply one transformation stage")
    p.add_argument("machine")
    p.add_argument("--stage", choices=_STAGES, required=True)
    p.add_argument("--model", default="iid:",
                   help="model for canonicalize (default: uniform)")
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("optimize", help="search for the fastest machine of a "
                                        "given order")
    p.add_argument("pattern")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--strategy", choices=("exhaustive", "hill_climb"),
                   default="exhaustive")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--assembly-cap", type=int, default=10_000_000)
    p.add_argument("--alphabet", default=None)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("table", help="speed table: patterns × algorithms")
    p.add_argument("--patterns", default=None, help="comma-separated list")
    p.add_argument("--length", type=int, default=None,
                   help="instead: all patterns of this length")
    p.add_argument("--alphabet", default=None)
    p.add_argument("--algorithms", default=None,
                   help=f"comma-separated subset of {','.join(ALGORITHMS)}")
    p.add_argument("--model", required=True)
    p.add_argument("--optimal-order", type=int, default=None)
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--assembly-cap", type=int, default=10_000_000)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=run_table)

    p = sub.add_parser("ingest", help="fit a model to a text file and compare "
                                      "analytic vs empirical speeds")
    p.add_argument("text")
    p.add_argument("--format", choices=("auto", "plain", "fasta"), default="auto")
    p.add_argument("--patterns", required=True, help="file, one pattern per line")
    p.add_argument("--machines", default=None,
                   help='comma-separated algorithms, "classics", or "optimal"')
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--assembly-cap", type=int, default=10_000_000)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_ingest)

    return parser


def main(argv: list[str] | None = None) -> int:
    raw = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(raw)
    args.raw_argv = raw
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (PreconditionError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MachineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
