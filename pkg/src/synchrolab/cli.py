"""Command-line front end.

Exit codes: 0 clean, 1 violations found, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import driver
from .bounds import bound_report, dstar_bruteforce, dstar_table
from .core import FIXTURES, Automaton, AutomatonFormatError, fixture, format_word
from .genx import GenerationPlan, run_plan
from .search import (
    SubsetGuardError,
    greedy_compress_worst,
    is_synchronizing,
    rank,
    reset_word,
)
from .structure import (
    SEMIGROUP_MAX_N,
    is_bidirectional_path,
    is_irreducibly_synchronizing,
    is_kari_like,
    is_permutation_automaton,
    is_strongly_connected,
    semigroup_scan,
    weak_components,
)
from .verify import CAMPAIGNS, GRID_CAMPAIGNS

EXIT_OK, EXIT_VIOLATIONS, EXIT_USAGE = 0, 1, 2
FILTERS = ("sc", "irreducible")


class UsageError(Exception):
    pass


def classify_summary(A: Automaton) -> dict:
    """Every classifier on one automaton; None where a property does not apply."""
    sync = is_synchronizing(A)
    scan = semigroup_scan(A) if A.n <= SEMIGROUP_MAX_N else None
    return {
        "n": A.n,
        "k": A.k,
        "synchronizing": sync,
        "strongly_connected": is_strongly_connected(A),
        "irreducibly_synchronizing": is_irreducibly_synchronizing(A) if sync else None,
        "aperiodic": None if scan is None else scan.aperiodic,
        # the scan stops at the first periodic element, so a size is known only when aperiodic
        "semigroup_size": scan.size if scan is not None and scan.aperiodic else None,
        "bidirectional_path": is_bidirectional_path(A),
        "permutation_automaton": is_permutation_automaton(A),
        "kari_like": is_kari_like(A),
        "weak_components": weak_components(A),
    }


def analyze(A: Automaton) -> dict:
    props = classify_summary(A)
    w = reset_word(A)
    props["reset_length"] = None if w is None else len(w)
    props["reset_word"] = None if w is None else format_word(w)
    props["rank"] = rank(A)
    try:
        props["greedy_compress_worst"] = greedy_compress_worst(A)
    except SubsetGuardError:
        props["greedy_compress_worst"] = None
    props["best_reset_bound"] = bound_report(A).best()
    return props


# -- input helpers ----------------------------------------------------------------------

def _lines(args) -> list[tuple[int, str]]:
    if args.input is not None:
        text = sys.stdin.read() if args.input == "-" else Path(args.input).read_text()
        out = [(i, ln) for i, ln in enumerate(text.splitlines(), 1)]
    elif args.line:
        out = [(1, " ".join(args.line))]
    else:
        raise UsageError("give an automaton line or --input FILE")
    return [(i, ln) for i, ln in out if ln.strip() and not ln.lstrip().startswith("#")]


def _one(args) -> Automaton:
    lines = _lines(args)
    if len(lines) != 1:
        raise UsageError("expected exactly one automaton line")
    return Automaton.parse(lines[0][1])


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w"), True


def _tsv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return str(v)


# -- subcommands --------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    out, close = _open_out(args.out)
    status = EXIT_OK
    header = False
    try:
        for i, text in _lines(args):
            try:
                A = Automaton.parse(text)
            except AutomatonFormatError as e:
                status = EXIT_USAGE
                rec = {"line": i, "input": text, "error": str(e)}
                if args.format == "tsv":
                    print(f"# line {i}: {e}", file=sys.stderr)
                else:
                    out.write(json.dumps(rec, sort_keys=True) + "\n")
                continue
            props = analyze(A)
            if args.format == "tsv":
                keys = sorted(props)
                if not header:
                    out.write("\t".join(["a"] + keys) + "\n")
                    header = True
                out.write("\t".join([A.line()] + [_tsv_value(props[k]) for k in keys]) + "\n")
            else:
                out.write(json.dumps({"a": A.line(), "props": props}, sort_keys=True) + "\n")
    finally:
        if close:
            out.close()
    return status


def cmd_classify(args) -> int:
    print(json.dumps(classify_summary(_one(args)), sort_keys=True))
    return EXIT_OK


def cmd_bounds(args) -> int:
    print(bound_report(_one(args), budget=args.budget).to_json())
    return EXIT_OK


def cmd_fixture(args) -> int:
    print(fixture(args.name, args.size).line())
    return EXIT_OK


def cmd_dstar(args) -> int:
    if args.m < 2:
        raise UsageError("m must be at least 2")
    table = dstar_table(args.m)
    rows = []
    for k in range(1, args.m):
        brute = dstar_bruteforce(args.m, k)
        rows.append({"m": args.m, "k": k, "cyclotomic": table[k], "bruteforce": brute, "agree": table[k] == brute})
    if args.format == "jsonl":
        for r in rows:
            print(json.dumps(r, sort_keys=True))
    else:
        print("m\tk\tcyclotomic\tbruteforce\tagree")
        for r in rows:
            print(f"{r['m']}\t{r['k']}\t{r['cyclotomic']}\t{r['bruteforce']}\t{str(r['agree']).lower()}")
    return EXIT_OK if all(r["agree"] for r in rows) else EXIT_VIOLATIONS


def _filters(text) -> set[str]:
    if not text:
        return set()
    got = {f.strip() for f in text.split(",") if f.strip()}
    bad = got - set(FILTERS)
    if bad:
        raise UsageError(f"unknown filters {sorted(bad)}; choose from {', '.join(FILTERS)}")
    return got


def cmd_generate(args) -> int:
    f = _filters(args.filters)
    plan = GenerationPlan(
        n=args.n, k=args.k, threshold=args.threshold,
        strongly_connected="sc" in f, irreducible="irreducible" in f,
        dedupe_letters=not args.keep_letter_orders, chunk_size=args.chunk_size,
    )
    out, close = _open_out(args.out)
    try:
        for A in run_plan(plan):
            out.write(A.line() + "\n")
    finally:
        if close:
            out.close()
    return EXIT_OK


def cmd_campaign(args) -> int:
    name = args.name
    if name in GRID_CAMPAIGNS:
        grid = GRID_CAMPAIGNS[name]
        if not args.allow_grid:
            msg = {"grid": name, **grid, "note": "disabled; rerun with --allow-grid to attempt it"}
            print(json.dumps(msg, sort_keys=True, indent=2))
            return EXIT_USAGE
        if isinstance(grid["n"], list):
            raise UsageError(f"{name} spans several sizes; run campaign {grid['campaign']} per n instead")
        name, args.n, args.k = grid["campaign"], grid["n"], grid["k"]
    if name not in CAMPAIGNS:
        raise UsageError(f"unknown campaign {name!r}; choose from {', '.join([*CAMPAIGNS, *GRID_CAMPAIGNS])}")
    if args.n is None or args.k is None:
        raise UsageError("campaign needs --n and --k")
    if args.filters:
        raise UsageError("campaign classes are fixed per campaign; --filters applies to generate")

    def progress(done, total):
        if args.progress:
            print(f"chunk {done}/{total}", file=sys.stderr)

    outcome = driver.run(
        name, args.n, args.k,
        workers=args.workers, chunk_size=args.chunk_size, checkpoint=args.checkpoint,
        stream=args.stream, stream_format=args.format, stop_after=args.stop_after, progress=progress,
    )
    report = outcome.result.to_json()
    if args.out is None or args.out == "-":
        sys.stdout.write(report)
    else:
        Path(args.out).write_text(report)
    if not outcome.complete:
        print(f"stopped after chunk {outcome.cursor} of {outcome.total}; rerun with the same checkpoint to resume",
              file=sys.stderr)
    return EXIT_VIOLATIONS if outcome.result.violation_count else EXIT_OK


# -- parser -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="synchrolab", description="Exact analysis of synchronizing automata.")
    sub = p.add_subparsers(dest="command", required=True)

    def line_args(sp):
        sp.add_argument("line", nargs="*", help="automaton line, e.g. '4 2 : 1 2 3 0 ; 1 1 2 3'")
        sp.add_argument("--input", help="file of automaton lines ('-' for stdin)")

    sp = sub.add_parser("analyze", help="reset length, rank, classifiers and bounds per automaton")
    line_args(sp)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=["jsonl", "tsv"], default="jsonl")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("classify", help="all classifiers for one automaton")
    line_args(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("bounds", help="every applicable upper bound for one automaton")
    line_args(sp)
    sp.add_argument("--budget", type=int, default=20000, help="search budget for Frankl-Pin sequences")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("fixture", help="print a named automaton")
    sp.add_argument("name", choices=sorted(FIXTURES))
    sp.add_argument("size", nargs="?", type=int)
    sp.set_defaults(func=cmd_fixture)

    sp = sub.add_parser("dstar", help="D*(m, k) by both methods")
    sp.add_argument("m", type=int)
    sp.add_argument("--format", choices=["jsonl", "tsv"], default="tsv")
    sp.set_defaults(func=cmd_dstar)

    sp = sub.add_parser("generate", help="isomorph-free automata, one line each")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--filters", help=f"comma list of {', '.join(FILTERS)}")
    sp.add_argument("--threshold", type=int, help="drop branches whose reset lengths all stay below this")
    sp.add_argument("--keep-letter-orders", action="store_true",
                    help="list automata differing only by a renaming of letters separately")
    sp.add_argument("--chunk-size", type=int, default=1)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("campaign", help="run a verification campaign")
    sp.add_argument("name", help=f"one of {', '.join(CAMPAIGNS)} or a grid campaign")
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--filters", help=argparse.SUPPRESS)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--chunk-size", type=int, default=1)
    sp.add_argument("--checkpoint", help="checkpoint file; an existing one is resumed")
    sp.add_argument("--out", help="final report path (default stdout)")
    sp.add_argument("--stream", help="per-automaton record stream path")
    sp.add_argument("--format", choices=["jsonl", "tsv"], default="jsonl", help="stream format")
    sp.add_argument("--stop-after", type=int, help="stop after this many chunks (resume later)")
    sp.add_argument("--allow-grid", action="store_true", help="attempt a disabled grid-scale campaign")
    sp.add_argument("--progress", action="store_true")
    sp.set_defaults(func=cmd_campaign)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ValueError, driver.CheckpointError, OSError) as e:
        print(f"synchrolab: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
