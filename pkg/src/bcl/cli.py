"""Command-line entry point: ``bcl {norm,oracle,estimates,spreading,krivine}``.

Exit codes: 0 success, 1 input error, 2 budget or search grid exhausted,
3 no answer exists (``p`` in F).  Every output embeds a run manifest and is
byte-identical for identical inputs, seed and version.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from typing import Optional, Sequence

from . import __version__
from .engine import BudgetExceeded, norm
from .engine.core import DEFAULT_BUDGET, DEFAULT_TOL
from .engine.oracle import MAX_DEPTH, OracleGuardError, brute_force_norm
from .functionals import SparseVector, functional_to_json
from .krivine import OUTSIDE, GridExhausted, PInFError, compute_constants, locate_gap, verify_constants
from .parallel import ordered_map
from .sequences import (
    BlockSequence,
    SequenceError,
    cascade_blocks,
    check_general_estimate,
    estimate_growth_exponent,
    leading_indices,
    random_block_sequence,
    spread_indices,
)
from .space import SpaceParams, as_exponent, format_exponent

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_NO_ANSWER = 0, 1, 2, 3


class InputError(Exception):
    """Unreadable or invalid input file or flag."""


# -- helpers ------------------------------------------------------------------

def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _load_space(path: str) -> SpaceParams:
    try:
        return SpaceParams.from_json(_load_json(path))
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{path}: invalid space: {exc}") from None


def _load_vector(path: str) -> SparseVector:
    obj = _load_json(path)
    try:
        return SparseVector.from_json(obj)
    except (ValueError, TypeError, KeyError) as exc:
        raise InputError(f"{path}: invalid vector: {exc}") from None


def _manifest(args: argparse.Namespace, inputs: Sequence[str], **extra) -> dict:
    out = {
        "command": args.command,
        "space": args.space,
        "inputs": list(inputs),
        "seed": getattr(args, "seed", None),
        "tol": getattr(args, "tol", None),
        "budget": getattr(args, "budget", None),
        "output": args.out,
        "version": __version__,
    }
    out.update(extra)
    return out


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj: dict) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _csv_text(manifest: dict, header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    for key, value in manifest.items():
        buf.write(f"# {key}: {json.dumps(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(v: float) -> str:
    return repr(float(v))


# -- commands -----------------------------------------------------------------

def cmd_norm(args: argparse.Namespace) -> int:
    params = _load_space(args.space)
    x = _load_vector(args.vector)
    manifest = _manifest(args, [args.vector])
    try:
        cert = norm(x, params, tol=args.tol, budget=args.budget)
    except BudgetExceeded as exc:
        _emit(args, _dump({"manifest": manifest, "error": "budget exceeded", "message": str(exc),
                           "best_lower": exc.lower, "interval": list(exc.interval),
                           "witness": functional_to_json(exc.witness)}))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    _emit(args, _dump({"manifest": manifest, "certificate": cert.to_json(timing=args.timing)}))
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    params = _load_space(args.space)
    x = _load_vector(args.vector)
    try:
        value = brute_force_norm(x, params, max_depth=args.depth, max_size=args.maxsize)
    except OracleGuardError as exc:
        raise InputError(str(exc)) from None
    manifest = _manifest(args, [args.vector], depth=args.depth, maxsize=args.maxsize)
    _emit(args, _dump({"manifest": manifest, "value": value}))
    return EXIT_OK


def _estimate_trial(job: tuple) -> list:
    params_json, trial, m_max, seed, tol, budget = job
    params = SpaceParams.from_json(params_json)
    rng = random.Random(f"estimates:{seed}:{trial}")
    m = rng.randint(1, m_max)
    profile = "squared" if trial % 2 else "tight"
    seq = random_block_sequence(params, m, profile, seed=rng.randrange(2**32), tol=tol)
    lambdas = [0.0 if rng.random() < 0.1 else rng.uniform(-2.0, 2.0) for _ in range(m)]
    rep = check_general_estimate(seq, lambdas, params, tol=tol, budget=budget)
    return [trial, m, _fmt(rep.lower_bound), _fmt(rep.value), _fmt(rep.upper_bound),
            int(rep.passed)]


def cmd_estimates(args: argparse.Namespace) -> int:
    params = _load_space(args.space)
    if args.trials < 1:
        raise InputError("--trials must be >= 1")
    if args.m < 1:
        raise InputError("--m must be >= 1")
    jobs = [(params.to_json(), t, args.m, args.seed, args.tol, args.budget)
            for t in range(args.trials)]
    try:
        rows = ordered_map(_estimate_trial, jobs)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    manifest = _manifest(args, [], trials=args.trials, m=args.m)
    _emit(args, _csv_text(manifest, ["trial", "m", "lower_bound", "norm", "upper_bound", "pass"],
                          rows))
    return EXIT_OK if all(r[-1] == 1 for r in rows) else EXIT_INPUT


def _parse_ks(text: str) -> list[int]:
    try:
        Ks = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise InputError(f"--Ks must be comma-separated integers, got {text!r}") from None
    if len(Ks) < 2:
        raise InputError("--Ks needs at least two values to fit an exponent")
    if any(k < 1 for k in Ks) or Ks != sorted(set(Ks)):
        raise InputError("--Ks must be positive and strictly ascending")
    return Ks


def spreading_sequence(params: SpaceParams, mode: str, Ks: Sequence[int]):
    """The block sequence and index selection used by each spreading mode."""
    top = max(Ks)
    if mode == "basis":
        seq = BlockSequence(tuple(SparseVector.basis(j) for j in range(1, 3 * top + 1)))
        return seq, spread_indices
    seq, _ = cascade_blocks(params, 2 * top - 1)
    return seq, leading_indices


def cmd_spreading(args: argparse.Namespace) -> int:
    params = _load_space(args.space)
    Ks = _parse_ks(args.Ks)
    seq, select = spreading_sequence(params, args.mode, Ks)
    try:
        fit = estimate_growth_exponent(seq, Ks, params, select=select, tol=args.tol,
                                       budget=args.budget)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    manifest = _manifest(args, [], mode=args.mode, Ks=Ks)
    rows = [[K, _fmt(v), _fmt(fit.exponent_hat), _fmt(fit.residual)]
            for K, v in zip(fit.Ks, fit.norms)]
    _emit(args, _csv_text(manifest, ["K", "norm", "exponent_hat", "residual"], rows))
    return EXIT_OK


def cmd_krivine(args: argparse.Namespace) -> int:
    params = _load_space(args.space)
    try:
        p = as_exponent(args.p)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(f"--p: {exc}") from None
    manifest = _manifest(args, [], p=format_exponent(p))
    try:
        k = locate_gap(p, params)
    except PInFError as exc:
        _emit(args, _dump({"manifest": manifest, "result": "p in F", "message": str(exc)}))
        print(f"no constants: {exc}", file=sys.stderr)
        return EXIT_NO_ANSWER
    if k == OUTSIDE:
        _emit(args, _dump({"manifest": manifest, "result": OUTSIDE,
                           "message": "p lies outside [p_1, p_xi0]; the block-sequence "
                                      "envelope already excludes l_p"}))
        return EXIT_OK
    try:
        c = compute_constants(p, params)
    except GridExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    report = verify_constants(c, params)
    checks = [{"name": ch.name, "lhs": ch.lhs, "rhs": ch.rhs, "margin": ch.margin,
               "passed": ch.passed} for ch in report.checks]
    _emit(args, _dump({"manifest": manifest, "constants": c.to_json(), "checks": checks}))
    print(report.table(), file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_BUDGET


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bcl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("space", help="space JSON, e.g. {\"theta\": \"1/4\", \"ps\": [\"1\", \"inf\"]}")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="node cap per norm")
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("norm", help="certified norm of a vector")
    common(p)
    p.add_argument("vector", help="vector JSON {\"coords\": [{\"i\": 1, \"v\": 0.5}, ...]}")
    p.add_argument("--timing", action="store_true", help="include wall time (not reproducible)")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("oracle", help="brute-force norm for tiny supports")
    common(p)
    p.add_argument("vector")
    p.add_argument("--depth", type=int, default=MAX_DEPTH)
    p.add_argument("--maxsize", type=int, default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("estimates", help="sweep the block-sequence envelope")
    common(p)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--m", type=int, default=8, help="maximal block-sequence length")
    p.set_defaults(func=cmd_estimates)

    p = sub.add_parser("spreading", help="fit growth exponents of spread sums")
    common(p)
    p.add_argument("--mode", choices=("basis", "average-cascade"), default="basis")
    p.add_argument("--Ks", default="2,4,8,16")
    p.set_defaults(func=cmd_spreading)

    p = sub.add_parser("krivine", help="constants excluding l_p for p outside F")
    common(p)
    p.add_argument("--p", required=True, help="exponent, e.g. 2, 3/2 or inf")
    p.set_defaults(func=cmd_krivine)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, SequenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
