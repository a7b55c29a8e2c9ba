"""Command-line front end.

Human-readable summaries go to stdout; structured artifacts are written to
``--out`` (JSON, or CSV for ``sweep``).  Exit codes: 0 all checks passed,
1 a check failed, 2 usage or input error.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .analysis import DEFAULT_K, DEFAULT_N, theorem3_sweep, universality_report
from .bounds import bound_table
from .compiler import DEGENERACY_TOL, compile_strategy
from .errors import SchmidtForgeError, StateFormatError
from .executor import execute_exact, sample, success_count
from .io import (
    dumps,
    histogram_csv,
    load_json_arg,
    matrix_from_json,
    state_from_dict,
    strategy_from_dict,
    strategy_to_dict,
    sweep_csv,
)
from .states import NORM_TOL, RANK_TOL, entropy_of_entanglement, schmidt_decompose
from .symmetry import necessity_report, transfer_bob_to_alice
from .verification import run_suite

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2
SEED_ENV = "SCHMIDT_FORGE_SEED"
CHECK_TOL = 1e-8
PROP1_TOL = 1e-9
NECESSITY_TOL = 1e-10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser():
    tol = argparse.ArgumentParser(add_help=False)
    tol.add_argument("--norm-tol", type=float, default=NORM_TOL, help="normalization tolerance (default %(default)g)")
    tol.add_argument("--degen-tol", type=float, default=DEGENERACY_TOL, help="absolute degeneracy tolerance (default %(default)g)")
    tol.add_argument("--rank-tol", type=float, default=RANK_TOL, help="relative rank cutoff (default %(default)g)")

    state = argparse.ArgumentParser(add_help=False)
    state.add_argument("--state", help="state JSON, inline or a file path")
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", help="write the machine-readable artifact here")

    p = _Parser(prog="schmidt-forge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sub.add_parser("schmidt", parents=[state, out, tol], help="ordered Schmidt coefficients and entropy")

    s = sub.add_parser("pmax", parents=[state, out, tol], help="bound table and optimal probability")
    s.add_argument("--m", type=_positive)

    s = sub.add_parser("compile", parents=[state, out, tol], help="compile the optimal strategy")
    s.add_argument("--m", type=_positive)

    s = sub.add_parser("run", parents=[state, out, tol], help="execute a compiled strategy")
    s.add_argument("--strategy", help="strategy JSON produced by 'compile'")
    s.add_argument("--shots", type=_positive, help="also sample this many outcomes")
    s.add_argument("--seed", type=int, help=f"sampling seed (falls back to ${SEED_ENV}, then 0)")
    s.add_argument("--hist-out", help="CSV histogram of sampled branch labels")
    s.add_argument("--jobs", type=_positive, default=1)

    s = sub.add_parser("verify", parents=[out, tol], help="invariant suite over a random corpus")
    s.add_argument("--corpus", choices=["random"], default="random")
    s.add_argument("--n", type=_positive, default=200, help="number of states (default %(default)s)")
    s.add_argument("--seed", type=int, help=f"corpus seed (falls back to ${SEED_ENV}, then 7)")
    s.add_argument("--max-rank", type=_positive, default=8)

    s = sub.add_parser("sweep", parents=[state, out, tol], help="many-copy probability grid (CSV)")
    s.add_argument("--n-values", type=_ints, default=list(DEFAULT_N))
    s.add_argument("--k-values", type=_floats, default=list(DEFAULT_K))
    s.add_argument("--jobs", type=_positive, default=1)

    s = sub.add_parser("prop1", parents=[state, out, tol], help="move a Bob operator to Alice")
    s.add_argument("--bob-op", help="operator JSON: rows of numbers or of [re, im] pairs")

    s = sub.add_parser("necessity", parents=[out], help="causality check for the two-term example")
    s.add_argument("--a2", type=float, help="squared larger coefficient, 1/2 < a2 < 1")

    sub.add_parser("universality", parents=[state, out, tol], help="non-universality gap for three terms")
    return p


def _require(args, name):
    value = getattr(args, name.replace("-", "_"), None)
    if value is None:
        raise UsageError(f"--{name} is required for '{args.command}'")
    return value


def _state(args):
    return state_from_dict(load_json_arg(_require(args, "state")), args.norm_tol)


def _seed(args, default):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return default
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"${SEED_ENV} must be an integer, got {env!r}") from None


def _write(path, text):
    if path is None:
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _fmt(values):
    return "[" + ", ".join(f"{float(v):.12g}" for v in values) + "]"


def _operator(text):
    doc = load_json_arg(text)
    arr = np.asarray(doc, dtype=object)
    if arr.ndim == 3:
        return matrix_from_json(doc, "bob-op")
    try:
        mat = np.asarray(doc, dtype=complex)
    except (TypeError, ValueError):
        raise StateFormatError("bob-op", "expected a square numeric matrix") from None
    if mat.ndim != 2:
        raise StateFormatError("bob-op", "expected a square numeric matrix")
    return mat


# ---------------------------------------------------------------------------
# commands


def cmd_schmidt(args):
    sd = schmidt_decompose(_state(args), args.rank_tol)
    ent = entropy_of_entanglement(sd)
    print(f"lambdas {_fmt(sd.lambdas)}")
    print(f"rank {sd.rank}")
    print(f"entropy {ent:.12g}")
    _write(args.out, dumps({"lambdas": sd.lambdas.tolist(), "rank": sd.rank, "entropy": ent}))
    return EXIT_OK


def cmd_pmax(args):
    sd = schmidt_decompose(_state(args), args.rank_tol)
    table = bound_table(sd.lambdas, _require(args, "m"))
    print(f"m {table.m}")
    print(f"b_values {_fmt(table.b_values)}")
    print(f"r1 {table.r1}")
    print(f"lambda_max {table.lambda_max:.12g}")
    print(f"p_max {table.p_max:.12g}")
    _write(args.out, dumps(table.as_dict()))
    return EXIT_OK


def cmd_compile(args):
    strat = compile_strategy(_state(args), _require(args, "m"), args.degen_tol, args.rank_tol)
    doc = dumps(strategy_to_dict(strat))
    print(f"m {strat.m}")
    print(f"branches {len(strat.branches)}")
    print(f"p_success {strat.success_probability:.12g}")
    print(f"completeness_residual {strat.completeness_residual():.3e}")
    if args.out is None:
        sys.stdout.write(doc)
    _write(args.out, doc)
    return EXIT_OK


def cmd_run(args):
    strat = strategy_from_dict(load_json_arg(_require(args, "strategy")))
    state = _state(args) if args.state is not None else strat.reference_state()
    rep = execute_exact(strat, state, args.rank_tol)
    print(f"m {rep.m}")
    print(f"total_success {rep.total_success:.12g}")
    print(f"total_probability {rep.total_probability:.12g}")
    print(f"verified {rep.all_verified}")
    _write(args.out, dumps(rep.as_dict()))
    ok = rep.all_verified and abs(rep.total_probability - 1.0) < CHECK_TOL
    if args.shots is not None:
        hist = sample(strat, state, args.shots, _seed(args, 0), args.jobs)
        hits = success_count(hist, strat)
        print(f"sampled_success {hits}/{args.shots} = {hits / args.shots:.6f}")
        _write(args.hist_out, histogram_csv(hist))
    return EXIT_OK if ok else EXIT_CHECK


def cmd_verify(args):
    tally = run_suite(args.n, _seed(args, 7), args.max_rank, args.degen_tol, args.rank_tol)
    for name, doc in tally.as_dict()["checks"].items():
        print(f"{name:30s} passed {doc['passed']:6d} failed {doc['failed']:6d}")
    for line in tally.examples:
        print(f"FAIL {line}")
    print("verify: ok" if tally.ok else "verify: FAILED")
    _write(args.out, dumps(tally.as_dict()))
    return EXIT_OK if tally.ok else EXIT_CHECK


def cmd_sweep(args):
    sd = schmidt_decompose(_state(args), args.rank_tol)
    points = theorem3_sweep(sd.lambdas, args.n_values, args.k_values, args.jobs)
    text = sweep_csv(points)
    print(f"points {len(points)} entropy {entropy_of_entanglement(sd):.12g}")
    if args.out is None:
        sys.stdout.write(text)
    _write(args.out, text)
    return EXIT_OK


def cmd_prop1(args):
    state = _state(args)
    op = _operator(_require(args, "bob-op"))
    if op.shape != (state.dim_b, state.dim_b):
        raise StateFormatError("bob-op", f"shape {op.shape} does not match dim_b = {state.dim_b}")
    res = transfer_bob_to_alice(state, op, args.rank_tol)
    doc = res.as_dict()
    gap = np.max(np.abs(np.subtract(*_padded(doc["spectrum_bob"], doc["spectrum_alice"]))))
    print(f"residual_error {res.residual_error:.3e}")
    print(f"spectrum_bob {_fmt(doc['spectrum_bob'])}")
    print(f"spectrum_alice {_fmt(doc['spectrum_alice'])}")
    _write(args.out, dumps(doc))
    return EXIT_OK if res.residual_error < PROP1_TOL and gap < PROP1_TOL else EXIT_CHECK


def _padded(a, b):
    n = max(len(a), len(b))
    return np.pad(a, (0, n - len(a))), np.pad(b, (0, n - len(b)))


def cmd_necessity(args):
    rep = necessity_report(_require(args, "a2"))
    print(f"success_probability {rep.success_probability:.12g}")
    print(f"rho_sum_error {rep.rho_sum_error:.3e}")
    print(f"support_fidelity {rep.support_fidelity:.12g}")
    _write(args.out, dumps(rep.as_dict()))
    ok = rep.rho_sum_error < NECESSITY_TOL and rep.support_fidelity_positive
    return EXIT_OK if ok else EXIT_CHECK


def cmd_universality(args):
    sd = schmidt_decompose(_state(args), args.rank_tol)
    rep = universality_report(sd.lambdas)
    print(f"p2_initial {rep.p2_initial:.12g}")
    print(f"p3_extracted {rep.p3_extracted:.12g}")
    print(f"residual_normalized {_fmt(rep.residual_normalized)}")
    print(f"p2_after_optimal_3 {rep.p2_after_optimal_3:.12g}")
    _write(args.out, dumps(rep.as_dict()))
    return EXIT_OK


COMMANDS = {
    "schmidt": cmd_schmidt,
    "pmax": cmd_pmax,
    "compile": cmd_compile,
    "run": cmd_run,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "prop1": cmd_prop1,
    "necessity": cmd_necessity,
    "universality": cmd_universality,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"schmidt-forge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StateFormatError as exc:
        print(f"schmidt-forge: invalid input in field '{exc.field}': {exc.message}", file=sys.stderr)
        return EXIT_USAGE
    except SchmidtForgeError as exc:
        print(f"schmidt-forge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
