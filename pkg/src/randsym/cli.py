"""Command-line front end: ``randsym <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 guard violation.
Data goes to ``--output`` (default stdout); a JSON manifest goes next to it
as ``<output>.manifest.json`` (stderr when writing to stdout). One-line
summaries are printed on stderr.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile
import time
from fractions import Fraction
from functools import partial
from typing import Callable, Sequence

from . import __version__
from ._parallel import CLASSIFY_DOMAIN, parallel_map
from .chain import (ChainTrace, IncrementRow, LawRow, SurveyRow, XRow, _exhaustive, chain_seed,
                    conditional_increment_means, conditional_increment_stats, run_chain,
                    survey_singularity, x_decay_estimate)
from .concentration import FAMILIES, decoupling_sweep, lo_experiment, random_events
from .errors import CapabilityError, GuardError
from .linalg import DEFAULT_PRIMES, certify_rank
from .matrix import EntryDistribution, derive_seed, sample_symmetric
from .report import (ChainStepRecord, ClassifyRecord, ConcentrationRow, DecouplingRow, OracleRow,
                     RunManifest, chain_records, concentration_row, render_table, witness_text)
from .structure import CIRCUIT_GUARD, StructureTag, classify, compute_N

EXIT_OK, EXIT_CONFIG, EXIT_GUARD = 0, 2, 3


class ConfigError(ValueError):
    pass


def int_list(text: str) -> list[int]:
    """Parse ``"3"``, ``"2,4,6"``, ``"1..4"`` or mixtures such as ``"1..3,8"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise argparse.ArgumentTypeError(f"empty item in {text!r}")
        try:
            if ".." in part:
                lo, hi = (int(x) for x in part.split(".."))
                if hi < lo:
                    raise argparse.ArgumentTypeError(f"empty range {part!r}")
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None
    return out


def distribution(text: str) -> EntryDistribution:
    try:
        return EntryDistribution.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(values: Sequence[int], flag: str):
    if any(v < 1 for v in values):
        raise ConfigError(f"{flag} values must be positive")


def _need_seed(args):
    if args.seed is None:
        raise ConfigError(f"`{args.command}` is randomized and needs an explicit --seed")


# ------------------------------------------------------------------ commands
# Each returns (records, record type, summary dict, total trials, message).

def cmd_survey(args):
    ns = args.n
    _positive(ns, "--n")
    if not args.exhaustive:
        _need_seed(args)
    rows = survey_singularity(ns, args.trials, args.dist, seed=args.seed or 0,
                              exhaustive=args.exhaustive, threads=args.threads,
                              diagonal=args.diag_dist)
    summary = {f"p_{r.n}": r.p_hat for r in rows}
    msg = "; ".join(f"p_{r.n} = {r.p_hat}" for r in rows)
    return rows, SurveyRow, summary, sum(r.trials for r in rows), msg


def cmd_oracle(args):
    _positive(args.n, "--n")
    rows = []
    for n in args.n:
        total, singular, _ = _exhaustive(n, args.dist)
        rows.append(OracleRow(n, args.dist.spec(), total, singular, Fraction(singular, total)))
    msg = "; ".join(f"p_{r.n} = {r.p_exact}" for r in rows)
    return rows, OracleRow, {f"p_{r.n}": r.p_exact for r in rows}, sum(r.matrices for r in rows), msg


def _chain_for_seed(n_max, dist, epsilon, classify_up_to, classify_dims, diagonal, laws, seed) -> ChainTrace:
    return run_chain(n_max, dist, seed, epsilon, classify_up_to, classify_dims, diagonal, laws)


def cmd_chain(args):
    if args.n_max < 1:
        raise ConfigError("--n-max must be at least 1")
    if args.seeds is not None:
        seeds = args.seeds
    else:
        _need_seed(args)
        if args.chains < 1:
            raise ConfigError("--chains must be at least 1")
        seeds = [chain_seed(args.seed, i) for i in range(args.chains)]
    if args.classify_up_to > CIRCUIT_GUARD:
        raise GuardError(f"--classify-up-to {args.classify_up_to} exceeds the circuit search guard of {CIRCUIT_GUARD}")
    laws = frozenset(StructureTag) if args.table == "laws" else frozenset()
    dims = None if args.classify_dims is None else frozenset(args.classify_dims)
    job = partial(_chain_for_seed, args.n_max, args.dist, args.epsilon, args.classify_up_to,
                  dims, args.diag_dist, laws)
    traces = parallel_map(job, seeds, args.threads)
    if args.table == "steps":
        records, kind = chain_records(traces), ChainStepRecord
    elif args.table == "increments":
        records, kind = conditional_increment_stats(traces).rows(), IncrementRow
    elif args.table == "laws":
        records, kind = conditional_increment_means(traces), LawRow
    else:
        records, kind = x_decay_estimate(traces), XRow
    deficits = sum(1 for t in traces for s in t.steps if s.rank < s.n)
    summary = {"chains": len(traces), "steps": len(traces) * args.n_max, "singular_steps": deficits}
    return records, kind, summary, len(traces), f"{len(traces)} chains to n={args.n_max}; all increments in 0..2"


def _classify_unit(n, dist, epsilon, seed, primes, t) -> ClassifyRecord:
    s = derive_seed(seed, CLASSIFY_DOMAIN, n, t)
    A = sample_symmetric(n, dist, s)
    cert = certify_rank(A, primes)
    thr = compute_N(n, epsilon)
    cls = classify(A, thr, rank=cert.rank)
    return ClassifyRecord(t, s, n, thr.N, cert.rank, cls.tag.value, witness_text(cls))


def cmd_classify(args):
    _need_seed(args)
    _positive(args.n, "--n")
    big = [n for n in args.n if n > CIRCUIT_GUARD]
    if big:
        raise GuardError(f"exact classification is limited to n <= {CIRCUIT_GUARD}; got {big}")
    records = []
    for n in args.n:
        job = partial(_classify_unit, n, args.dist, args.epsilon, args.seed, tuple(args.primes))
        records.extend(parallel_map(job, range(args.trials), args.threads))
    summary: dict = {}
    for r in records:
        summary[r.cls] = summary.get(r.cls, 0) + 1
    msg = ", ".join(f"{k}: {v}" for k, v in sorted(summary.items()))
    return records, ClassifyRecord, summary, len(records), msg


def cmd_concentration(args):
    _positive(args.sizes, "--sizes")
    if max(args.sizes) > args.exact_max_n:
        _need_seed(args)
    reports = lo_experiment(args.family, args.sizes, trials=args.trials, seed=args.seed or 0,
                            dist=args.dist, exact_max_n=args.exact_max_n,
                            bound_constant=args.bound_constant, threads=args.threads)
    rows = [concentration_row(r) for r in reports]
    summary = {f"max_atom_{r.n}": r.probability for r in rows}
    mc = sum(args.trials for r in rows if r.method == "MonteCarlo")
    msg = "; ".join(f"m={r.n}: {float(r.probability):.6g}" for r in rows)
    return rows, ConcentrationRow, summary, mc, msg


def cmd_decoupling(args):
    if args.exhaustive_bits is None and args.random_events is None:
        raise ConfigError("give --exhaustive-bits or --random-events")
    rows = []
    if args.exhaustive_bits is not None:
        res = decoupling_sweep(args.exhaustive_bits)
        rows.append(DecouplingRow(",".join(map(str, res.bits)), len(res.bits), res.events, res.holds, res.all_hold))
    if args.random_events is not None:
        _need_seed(args)
        bits = args.bits
        ev = random_events(bits, args.random_events, args.seed)
        res = decoupling_sweep(bits, ev)
        rows.append(DecouplingRow(",".join(map(str, res.bits)), len(res.bits), res.events, res.holds, res.all_hold))
    msgs = []
    for r in rows:
        msgs.append(f"all {r.events} events hold" if r.all_hold else f"{r.holds} of {r.events} events hold")
    summary = {r.bits: {"events": r.events, "holds": r.holds} for r in rows}
    return rows, DecouplingRow, summary, sum(r.events for r in rows), "; ".join(msgs)


COMMANDS: dict[str, Callable] = {
    "survey": cmd_survey, "chain": cmd_chain, "classify": cmd_classify,
    "concentration": cmd_concentration, "decoupling": cmd_decoupling, "oracle": cmd_oracle,
}

DEFAULT_FORMAT = {"chain": "jsonl", "classify": "jsonl"}


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, help="master seed (required by randomized commands)")
    shared.add_argument("--trials", type=int, default=10_000)
    shared.add_argument("--dist", type=distribution, default=EntryDistribution.bernoulli01(),
                        help="bernoulli01 | rademacher | custom:v:p,v:p,...")
    shared.add_argument("--epsilon", type=float, default=0.1)
    shared.add_argument("--threads", type=int, default=1, help="worker processes")
    shared.add_argument("--output", default="-", help="output path, '-' for stdout")
    shared.add_argument("--format", choices=("csv", "jsonl"))
    shared.add_argument("--exhaustive", action="store_true", help="enumerate instead of sampling")

    p = argparse.ArgumentParser(prog="randsym", description="Random symmetric matrix experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("survey", parents=[shared], help="singularity frequency and log-determinant growth")
    s.add_argument("--n", type=int_list, required=True)
    s.add_argument("--diag-dist", type=distribution, help="separate diagonal distribution")

    s = sub.add_parser("oracle", parents=[shared], help="exact singular fraction by enumeration")
    s.add_argument("--n", type=int_list, default=int_list("1..6"))

    s = sub.add_parser("chain", parents=[shared], help="nested random chains")
    s.add_argument("--n-max", type=int, required=True)
    s.add_argument("--chains", type=int, default=1, help="number of chains derived from --seed")
    s.add_argument("--seeds", type=int_list, help="explicit per-chain seeds")
    s.add_argument("--classify-up-to", type=int, default=16)
    s.add_argument("--classify-dims", type=int_list)
    s.add_argument("--diag-dist", type=distribution)
    s.add_argument("--table", choices=("steps", "increments", "laws", "x"), default="steps")

    s = sub.add_parser("classify", parents=[shared], help="structural classes of sampled matrices")
    s.add_argument("--n", type=int_list, required=True)
    s.add_argument("--primes", type=int_list, default=list(DEFAULT_PRIMES))

    s = sub.add_parser("concentration", parents=[shared], help="largest point atom of a form family")
    s.add_argument("--family", choices=sorted(FAMILIES), default="ones-offdiag")
    s.add_argument("--sizes", type=int_list, required=True)
    s.add_argument("--exact-max-n", type=int, default=16)
    s.add_argument("--bound-constant", type=float)

    s = sub.add_parser("decoupling", parents=[shared], help="decoupling inequality checks")
    s.add_argument("--exhaustive-bits", type=int_list, help="bits per variable, all events swept")
    s.add_argument("--random-events", type=int, help="number of random events to check")
    s.add_argument("--bits", type=int_list, default=[1, 1, 1], help="bits per variable for random events")
    return p


def _validate(args):
    if args.trials < 1:
        raise ConfigError("--trials must be at least 1")
    if not 0 < args.epsilon < 1:
        raise ConfigError("--epsilon must lie in (0, 1)")
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        raise ConfigError("--seed must be an unsigned 64-bit integer")
    if args.exhaustive and args.command not in ("survey", "oracle"):
        raise ConfigError(f"--exhaustive is not available for `{args.command}`")


def _write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".randsym-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _config_echo(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if isinstance(v, EntryDistribution):
            v = v.spec()
        out[k] = v
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        _validate(args)
        records, kind, summary, trials, message = COMMANDS[args.command](args)
        fmt = args.format or DEFAULT_FORMAT.get(args.command, "csv")
        text = render_table(records, fmt, kind)
    except GuardError as exc:
        print(f"randsym {args.command}: guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except CapabilityError as exc:
        print(f"randsym {args.command}: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ConfigError, ValueError) as exc:
        print(f"randsym {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    manifest = RunManifest(args.command, _config_echo(args), __version__,
                           round(time.perf_counter() - start, 3), trials, summary)
    if args.output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        sys.stderr.write(manifest.to_json())
    else:
        _write_atomic(args.output, text)
        _write_atomic(args.output + ".manifest.json", manifest.to_json())
    print(message, file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
