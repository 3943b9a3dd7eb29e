"""Command-line entry point: ``cminhash <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 refused because the
computation exceeds its resource budget.
"""

import argparse
import csv
import logging
import os
import sys
from dataclasses import dataclass

from .errors import BudgetExceededError, CMinHashError
from .estimators import estimate_jaccard, exact_pair_stats
from .experiments import (
    MaeResultRow,
    McResultRow,
    SyntheticPairSpec,
    mae_all_pairs,
    mc_bias_mse,
    mc_per_k_curve,
    synth_dataset,
    synth_pair,
)
from .io import (
    TheoryMeanRow,
    TheoryPerKRow,
    format_sparse_dataset,
    load_sparse_dataset,
    write_results_csv,
    write_sparse_dataset,
)
from .permute import Hasher, Scheme
from . import theory

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _int_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("values must be positive integers")
    return vals


def _scheme_list(text):
    try:
        return [Scheme.parse(t) for t in text.split(",") if t.strip()]
    except CMinHashError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _default_threads():
    try:
        return max(1, int(os.environ.get("CMH_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class RunConfig:
    kind: str
    seed: int
    schemes: list
    K_grid: list
    trials: int = 0
    reps: int = 0
    out: str = "-"
    threads: int = 1

    def validate(self, dim):
        for K in self.K_grid:
            if K < 1:
                raise UsageError(f"K must be >= 1, got {K}")
            if any(s.circulant for s in self.schemes) and K > dim:
                raise UsageError(f"K={K} exceeds D={dim} for a circulant scheme")
        if self.kind in ("mc",) and self.trials < 1:
            raise UsageError("--trials must be >= 1")
        if self.kind == "mae" and self.reps < 1:
            raise UsageError("--reps must be >= 1")
        if self.threads < 1:
            raise UsageError("--threads must be >= 1")


def _add_common(p, seed=True, out=True, threads=False):
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master seed (all randomness derives from it)")
    if out:
        p.add_argument("--out", default="-", help="output file ('-' for stdout)")
    if threads:
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: $CMH_THREADS or 1); never changes output")


def _add_pair_source(p):
    g = p.add_argument_group("pair source (synthetic spec or dataset vectors)")
    g.add_argument("--D", type=int)
    g.add_argument("--f", type=int)
    g.add_argument("--a", type=int)
    g.add_argument("--placement", choices=["random", "structured"], default="random")
    g.add_argument("--placement-seed", type=int, default=None,
                   help="seed for random placement (default: --seed)")
    g.add_argument("--dataset", help="sparse dataset file")
    g.add_argument("--ids", type=_int_list, help="two vector ids (file line numbers)")


def build_parser():
    parser = _Parser(prog="cminhash", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("hash", help="sketch every vector of a dataset file")
    p.add_argument("dataset")
    p.add_argument("--scheme", type=Scheme.parse, default=Scheme.PI_PI)
    p.add_argument("--K", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("estimate", help="estimate J between two dataset vectors")
    p.add_argument("dataset")
    p.add_argument("--ids", type=_int_list, required=True)
    p.add_argument("--scheme", type=Scheme.parse, default=Scheme.PI_PI)
    p.add_argument("--K", type=int, required=True)
    _add_common(p)

    for name, help_text in (("theory", "exact C-MinHash-(pi,pi) mean and bias^2"),
                            ("oracle", "brute-force expectation over all D! permutations (D <= 10)")):
        p = sub.add_parser(name, help=help_text)
        _add_pair_source(p)
        p.add_argument("--K", type=int, required=True)
        p.add_argument("--per-k", action="store_true", help="one row per shift k = 1..K")
        if name == "theory":
            p.add_argument("--exact", action="store_true", help="rational arithmetic (small D)")
            p.add_argument("--budget", type=int, default=theory.DEFAULT_BUDGET,
                           help="refuse evaluations with more (j, Z) terms than this")
        _add_common(p, threads=name == "theory")

    p = sub.add_parser("mc", help="Monte Carlo bias/variance/MSE or per-k collision rates")
    _add_pair_source(p)
    p.add_argument("--scheme", type=_scheme_list, default=[Scheme.PI_PI])
    p.add_argument("--K", type=_int_list, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--mode", choices=["bias-mse", "per-k"], default="bias-mse")
    _add_common(p, threads=True)

    p = sub.add_parser("mae", help="mean absolute error over all pairs of a dataset")
    p.add_argument("dataset")
    p.add_argument("--K", type=_int_list, required=True)
    p.add_argument("--schemes", type=_scheme_list, default=[Scheme.PI_PI, Scheme.SIGMA_PI])
    p.add_argument("--reps", type=int, default=10)
    _add_common(p)

    p = sub.add_parser("synth", help="write a synthetic dataset file")
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--n", type=int, help="number of vectors (mixed-density dataset)")
    p.add_argument("--density-lo", type=float, default=0.02)
    p.add_argument("--density-hi", type=float, default=0.5)
    p.add_argument("--f", type=int, help="write one (v, w) pair with these counts instead")
    p.add_argument("--a", type=int)
    p.add_argument("--placement", choices=["random", "structured"], default="random")
    _add_common(p)
    return parser


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _emit(rows, path, row_type):
    fh, close = _open_out(path)
    try:
        write_results_csv(rows, fh, row_type=row_type)
    finally:
        if close:
            fh.close()


def _pair_from_args(args):
    if args.dataset:
        if args.ids is None or len(args.ids) != 2:
            raise UsageError("--dataset needs --ids with exactly two line numbers")
        ds = load_sparse_dataset(args.dataset)
        try:
            return ds.by_id(args.ids[0]), ds.by_id(args.ids[1])
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
    if None in (args.D, args.f, args.a):
        raise UsageError("give either --D/--f/--a or --dataset/--ids")
    seed = args.seed if args.placement_seed is None else args.placement_seed
    return synth_pair(SyntheticPairSpec(args.D, args.f, args.a, args.placement, seed))


def _location_from_args(args):
    if args.dataset:
        v, w = _pair_from_args(args)
        return theory.location_vector(v, w)
    if None in (args.D, args.f, args.a):
        raise UsageError("give either --D/--f/--a or --dataset/--ids")
    seed = args.seed if args.placement_seed is None else args.placement_seed
    return SyntheticPairSpec(args.D, args.f, args.a, args.placement, seed).location_vector()


def _threads(args):
    return args.threads if getattr(args, "threads", None) else _default_threads()


def cmd_hash(args):
    ds = load_sparse_dataset(args.dataset)
    hasher = Hasher(args.scheme, ds.dim, args.K, args.seed)
    fh, close = _open_out(args.out)
    try:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["id"] + [f"h{k}" for k in range(1, args.K + 1)])
        for line, v in zip(ds.ids, ds.vectors):
            if v.nnz == 0:
                raise CMinHashError(f"line {line}: empty vector cannot be hashed")
            out.writerow([line] + [int(h) for h in hasher.sketch(v).values])
    finally:
        if close:
            fh.close()


def cmd_estimate(args):
    if len(args.ids) != 2:
        raise UsageError("--ids needs exactly two line numbers")
    ds = load_sparse_dataset(args.dataset)
    try:
        v, w = ds.by_id(args.ids[0]), ds.by_id(args.ids[1])
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    hasher = Hasher(args.scheme, ds.dim, args.K, args.seed)
    est = estimate_jaccard(hasher.sketch(v), hasher.sketch(w))
    J = exact_pair_stats(v, w).jaccard
    fh, close = _open_out(args.out)
    try:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["id_v", "id_w", "scheme", "K", "estimate", "J"])
        out.writerow([args.ids[0], args.ids[1], args.scheme.value, args.K,
                      format(est, ".17g"), format(J, ".17g")])
    finally:
        if close:
            fh.close()


def _expectation_rows(x, K, per_k, values):
    """CSV rows from per-k expectations (floats or Fractions)."""
    if per_k:
        return [TheoryPerKRow(k, float(e)) for k, e in enumerate(values, start=1)], TheoryPerKRow
    mean = sum(values) / K
    J = x.J if all(not isinstance(e, float) for e in values) else float(x.J)
    return [TheoryMeanRow(K, float(mean), float((mean - J) ** 2))], TheoryMeanRow


def cmd_theory(args):
    x = _location_from_args(args)
    if not 1 <= args.K <= x.dim:
        raise UsageError(f"K={args.K} outside [1, D={x.dim}]")
    vals = theory.per_k_expectations(x, args.K, exact=args.exact, budget=args.budget, threads=_threads(args))
    rows, rt = _expectation_rows(x, args.K, args.per_k, vals)
    _emit(rows, args.out, rt)


def cmd_oracle(args):
    x = _location_from_args(args)
    if not 1 <= args.K <= x.dim:
        raise UsageError(f"K={args.K} outside [1, D={x.dim}]")
    vals = [theory.bruteforce_collision_expectation_k(x, k) for k in range(1, args.K + 1)]
    rows, rt = _expectation_rows(x, args.K, args.per_k, vals)
    _emit(rows, args.out, rt)


def cmd_mc(args):
    v, w = _pair_from_args(args)
    cfg = RunConfig("mc", args.seed, args.scheme, args.K, trials=args.trials,
                    out=args.out, threads=_threads(args))
    cfg.validate(v.dim)
    if args.mode == "per-k":
        if len(args.scheme) != 1 or len(args.K) != 1:
            raise UsageError("--mode per-k takes one scheme and one K")
        rows = mc_per_k_curve(v, w, args.K[0], args.scheme[0], args.trials, args.seed, cfg.threads)
        _emit(rows, args.out, type(rows[0]))
        return
    rows = []
    for s in args.scheme:
        rows.extend(mc_bias_mse(v, w, args.K, s, args.trials, args.seed, cfg.threads))
    _emit(rows, args.out, McResultRow)


def cmd_mae(args):
    ds = load_sparse_dataset(args.dataset)
    cfg = RunConfig("mae", args.seed, args.schemes, args.K, reps=args.reps, out=args.out)
    cfg.validate(ds.dim)
    rows = mae_all_pairs(ds, args.K, args.schemes, args.reps, args.seed)
    _emit(rows, args.out, MaeResultRow)


def cmd_synth(args):
    if args.f is not None or args.a is not None:
        if args.f is None or args.a is None:
            raise UsageError("--f and --a go together")
        vectors = synth_pair(SyntheticPairSpec(args.D, args.f, args.a, args.placement, args.seed))
    else:
        if args.n is None:
            raise UsageError("synth needs --n (dataset) or --f/--a (pair)")
        vectors = synth_dataset(args.n, args.D, args.density_lo, args.density_hi, args.seed)
    if args.out in (None, "-"):
        sys.stdout.write(format_sparse_dataset(vectors, args.D))
    else:
        write_sparse_dataset(vectors, args.out, args.D)


COMMANDS = {
    "hash": cmd_hash, "estimate": cmd_estimate, "theory": cmd_theory, "oracle": cmd_oracle,
    "mc": cmd_mc, "mae": cmd_mae, "synth": cmd_synth,
}


def cli_dispatch(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0; everything else argparse rejects is a usage error
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"cminhash {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceededError as exc:
        print(f"cminhash {args.command}: refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (CMinHashError, OSError) as exc:
        print(f"cminhash {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(cli_dispatch(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
