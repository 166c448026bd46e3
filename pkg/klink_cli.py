# klink_cli.py
#
# Command-line front end of the linkage toolkit. Subcommands generate and inspect
# tournaments, run the staged linker, verify linkages, search anchored pairs,
# test k-linkedness exhaustively and run seeded sweeps of the whole pipeline.
# Machine output (JSON, or the sweep table) goes to stdout; logs go to stderr.
#
# Exit codes: 0 success / affirmative, 1 negative result, 2 invalid input,
# 3 an enforced inequality or the anchoring lemma failed (trace written first).

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional

from dotenv import load_dotenv

from anchoring import AnchorOutcome, LemmaViolation, find_anchored_pair, lemma_order
from connectivity import vertex_connectivity
from exact_linkage import BudgetExhausted, Linkage, is_k_linked_bruteforce
from genverify import (choose_terminals, paley_tournament, random_tournament, rotational_tournament,
                       verify_linkage)
from linker import (AssertionViolation, LinkerError, PreconditionViolation, check_preconditions, link,
                    outdegree_threshold, strength_threshold)
from tournament import TournamentInputError, read_trn1, write_trn1

# --- Load Environment Variables ---
load_dotenv()

# --- Configuration Constants ---
EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INVALID = 2
EXIT_VIOLATION = 3
DEFAULT_ANCHOR_BUDGET = 5_000_000
DEFAULT_VIOLATION_TRACE = "assertion_violation_trace.json"


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return int(value)
    except ValueError:
        logging.warning(f"Ignoring non-integer {name}={value!r}; using {default}")
        return default


def _id_list(text: str) -> List[int]:
    try:
        ids = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated vertex ids, got {text!r}") from None
    if not ids:
        raise argparse.ArgumentTypeError("vertex list is empty")
    return ids


def _emit(data: Dict) -> None:
    print(json.dumps(data, indent=2))


def _write_trace(trace, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(trace.to_json())
    logging.info(f"Trace written to '{path}'")


# --- Subcommands ---

def cmd_gen(args) -> int:
    if args.kind == "random":
        tournament = random_tournament(args.n, args.seed)
    elif args.kind == "rotational":
        symbols = args.symbols if args.symbols is not None else range(1, (args.n - 1) // 2 + 1)
        tournament = rotational_tournament(args.n, symbols)
    else:
        tournament = paley_tournament(args.n)
    write_trn1(tournament, args.out)
    degrees = list(tournament.out_degrees.values())
    _emit({"n": tournament.n, "min_out_degree": min(degrees), "max_out_degree": max(degrees), "out": args.out})
    return EXIT_OK


def cmd_info(args) -> int:
    tournament = read_trn1(args.file)
    info = {
        "n": tournament.n,
        "min_out_degree": tournament.min_out_degree(),
        "min_in_degree": tournament.min_in_degree(),
        "vertex_connectivity": vertex_connectivity(tournament) if tournament.n >= 2 else None,
    }
    code = EXIT_OK
    if args.k is not None:
        report = check_preconditions(tournament, args.k)
        info.update(
            k=args.k,
            strength_threshold=strength_threshold(args.k),
            outdegree_threshold=outdegree_threshold(args.k),
            k_strong=report.k_strong,
            outdegree_ok=report.outdegree_ok,
            thresholds_met=report.passed,
        )
        code = EXIT_OK if report.passed else EXIT_NEGATIVE
    _emit(info)
    return code


def cmd_link(args) -> int:
    tournament = read_trn1(args.file)
    budget = args.budget if args.budget is not None else _env_int("KLINK_ANCHOR_BUDGET", DEFAULT_ANCHOR_BUDGET)
    try:
        linkage, trace = link(tournament, args.sources, args.sinks, mode=args.mode, anchor_budget=budget)
    except PreconditionViolation as e:
        logging.error(f"Preconditions not met: {e}")
        _emit({"error": "PreconditionViolation", "reasons": e.report.reasons(), "report": e.report.to_dict()})
        return EXIT_NEGATIVE
    except (AssertionViolation, LemmaViolation) as e:
        path = args.trace or os.getenv("KLINK_VIOLATION_TRACE", DEFAULT_VIOLATION_TRACE)
        if e.trace is not None:
            _write_trace(e.trace, path)
        logging.error(f"{type(e).__name__}: {e}")
        _emit({"error": type(e).__name__, "message": str(e), "trace": path})
        return EXIT_VIOLATION
    except (LinkerError, BudgetExhausted) as e:
        logging.error(f"{type(e).__name__}: {e}")
        _emit({"error": type(e).__name__, "message": str(e), "diagnostic": getattr(e, "diagnostic", None)})
        return EXIT_NEGATIVE

    if args.trace:
        _write_trace(trace, args.trace)
    _emit(linkage.to_dict())
    return EXIT_OK


def cmd_verify(args) -> int:
    tournament = read_trn1(args.file)
    try:
        with open(args.linkage, "r", encoding="utf-8") as f:
            document = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise TournamentInputError(f"Linkage file is not JSON: {e}") from None
    linkage = Linkage.from_dict(document)
    sources = [s for s, _ in linkage.pairs]
    sinks = [t for _, t in linkage.pairs]
    report = verify_linkage(tournament, sources, sinks, linkage)
    if not report.ok:
        logging.info(f"Linkage rejected: {report.violation}")
    _emit(report.to_dict())
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_anchors(args) -> int:
    tournament = read_trn1(args.file)
    budget = args.budget if args.budget is not None else _env_int("KLINK_ANCHOR_BUDGET", DEFAULT_ANCHOR_BUDGET)
    search = find_anchored_pair(tournament, args.p, budget=budget)
    result = search.to_dict()
    result["lemma_order"] = lemma_order(args.p)
    _emit(result)
    if search.outcome is AnchorOutcome.FOUND:
        return EXIT_OK
    if search.outcome is AnchorOutcome.LEMMA_VIOLATION:
        return EXIT_VIOLATION
    return EXIT_NEGATIVE


def cmd_klinked(args) -> int:
    tournament = read_trn1(args.file)
    linked, witness = is_k_linked_bruteforce(tournament, args.k, force=args.force)
    _emit({"k": args.k, "k_linked": linked, "witness": [list(pair) for pair in witness] if witness else None})
    return EXIT_OK if linked else EXIT_NEGATIVE


def run_trial(n: int, k: int, seed: int, mode: str, budget: int, trace_path: str) -> Dict:
    """One sweep trial: seeded tournament, seeded terminals, full pipeline, independent verification."""
    result = {"seed": seed, "preconditions": None, "outcome": None, "assertions": 0, "detail": ""}
    try:
        tournament = random_tournament(n, seed)
        sources, sinks = choose_terminals(n, k, seed)
        linkage, trace = link(tournament, sources, sinks, mode=mode, anchor_budget=budget)
        result["preconditions"] = trace.preconditions.passed
        result["assertions"] = len(trace.assertions)
        report = verify_linkage(tournament, sources, sinks, linkage)
        result["outcome"] = "linked" if report.ok else "verify_failed"
        result["detail"] = report.violation or ""
    except PreconditionViolation as e:
        result["preconditions"] = False
        result["outcome"] = "precondition_failed"
        result["detail"] = str(e)
    except (AssertionViolation, LemmaViolation) as e:
        result["outcome"] = "assertion_violation"
        result["detail"] = str(e)
        if e.trace is not None:
            root, ext = os.path.splitext(trace_path)
            _write_trace(e.trace, f"{root}.seed{seed}{ext or '.json'}")
            result["preconditions"] = e.trace.preconditions.passed
            result["assertions"] = len(e.trace.assertions)
    except (LinkerError, BudgetExhausted) as e:
        result["outcome"] = type(e).__name__
        result["detail"] = str(e)
    except Exception as e:
        logging.error(f"Trial with seed {seed} crashed: {e}", exc_info=True)
        result["outcome"] = "crashed"
        result["detail"] = str(e)
    return result


def cmd_sweep(args) -> int:
    budget = args.budget if args.budget is not None else _env_int("KLINK_ANCHOR_BUDGET", DEFAULT_ANCHOR_BUDGET)
    trace_path = os.getenv("KLINK_VIOLATION_TRACE", DEFAULT_VIOLATION_TRACE)
    if args.count < 1 or args.n < 2 * args.k:
        raise TournamentInputError(f"Sweep needs count >= 1 and n >= 2k, got count={args.count}, n={args.n}.")
    seeds = [args.seed + t for t in range(args.count)]
    jobs = [(args.n, args.k, s, args.mode, budget, trace_path) for s in seeds]
    logging.info(f"--- Sweep: {args.count} trials, n={args.n}, k={args.k}, {args.workers} worker(s) ---")

    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(run_trial, *zip(*jobs)))
    else:
        results = [run_trial(*job) for job in jobs]

    print("trial\tseed\tpreconditions\toutcome\tassertions\tdetail")
    for t, r in enumerate(results):
        print(f"{t}\t{r['seed']}\t{r['preconditions']}\t{r['outcome']}\t{r['assertions']}\t{r['detail']}")

    summary = {
        "trials": len(results),
        "preconditions_passed": sum(1 for r in results if r["preconditions"]),
        "linked": sum(1 for r in results if r["outcome"] == "linked"),
        "assertion_failures": sum(1 for r in results if r["outcome"] == "assertion_violation"),
    }
    print()
    for key, value in summary.items():
        print(f"{key}\t{value}")
    logging.info(f"Sweep complete: {summary}")
    return EXIT_VIOLATION if summary["assertion_failures"] else EXIT_OK


# --- Argument parsing ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="klink",
                                     description="Disjoint-path linkages in highly connected tournaments.")
    parser.add_argument("--log-level", default=os.getenv("KLINK_LOG_LEVEL", "INFO").upper(), type=str.upper,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Log verbosity (stderr).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="Generate a tournament and write it as TRN1.")
    p.add_argument("--kind", required=True, choices=["random", "rotational", "paley"])
    p.add_argument("--n", type=int, required=True, help="Vertex count (the prime q for paley).")
    p.add_argument("--seed", type=int, default=_env_int("KLINK_SEED", 0))
    p.add_argument("--symbols", type=_id_list, help="Rotational symbol set, comma-separated.")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("info", help="Degrees, connectivity and linkage thresholds of a tournament.")
    p.add_argument("file")
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("link", help="Run the staged linker.")
    p.add_argument("file")
    p.add_argument("--sources", type=_id_list, required=True)
    p.add_argument("--sinks", type=_id_list, required=True)
    p.add_argument("--mode", choices=["strict", "unchecked"], default="strict")
    p.add_argument("--trace", help="Write the trace JSON here.")
    p.add_argument("--budget", type=int, help="Node-visit budget for the anchored-pair search.")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("verify", help="Check a linkage JSON file against a tournament.")
    p.add_argument("file")
    p.add_argument("--linkage", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("anchors", help="Search an anchored pair of size p.")
    p.add_argument("file")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--budget", type=int)
    p.set_defaults(func=cmd_anchors)

    p = sub.add_parser("klinked", help="Exhaustive k-linkedness test.")
    p.add_argument("file")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--force", action="store_true", help="Ignore the size guard.")
    p.set_defaults(func=cmd_klinked)

    p = sub.add_parser("sweep", help="Seeded trials of the full pipeline.")
    p.add_argument("--kind", choices=["random"], default="random")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=_env_int("KLINK_SEED", 0))
    p.add_argument("--mode", choices=["strict", "unchecked"], default="strict")
    p.add_argument("--budget", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_INVALID

    logging.basicConfig(
        level=args.log_level,
        format='%(asctime)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        stream=sys.stderr,
    )
    logging.getLogger().setLevel(args.log_level)

    try:
        return args.func(args)
    except TournamentInputError as e:
        logging.error(f"Invalid input: {e}")
        return EXIT_INVALID
    except OSError as e:
        logging.error(f"Cannot access file: {e}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
