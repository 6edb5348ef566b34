"""Command-line interface.

Subcommands::

    gridlocal route2d   --in pairing.json --out paths.json [--stats s.json] [--figure f.png]
    gridlocal route3d   --in pairing.json --out paths.json [--stats s.json] [--figure f.png]
    gridlocal localize  --in circuit.json --mode 2d|3d --out localized.json
    gridlocal verify    --in circuit.json --localized localized.json --out verdict.json
    gridlocal ft-plan   --mode 3d|quasi2d --n N --out plan.json [--in circuit.json]
    gridlocal montecarlo (--plan plan.json | --gadget swap|teleport|iid) --p P
                         --trials T --seed S --out results.csv [--figure f.png]

Every command writes ``<out>.manifest.json`` with the package version, the
echoed configuration and SHA-256 digests of inputs and outputs. Exit codes:
0 pass, 1 statistical failure, 2 parse error, 3 precondition failure,
4 internal assertion.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .circuit import AdaptiveCircuit, CircuitFormatError
from .ftarch import (
    STAGES,
    BusParameterError,
    FTPlan,
    PlanError,
    ft_localize,
    ft_plan_for_n,
    normalize_mode,
    plan_report,
    stage_bound,
    surrogate_failure_batch,
)
from .localize import LocalizationError, locality_check, localize_ideal
from .noise import (
    ThresholdExceeded,
    estimate_ls_bound,
    sample_burst_batch,
    sample_iid_batch,
    spawn_generators,
    strength_entanglement_swap,
    strength_teleport,
    swap_chain_model,
    teleport_model,
)
from .routing import (
    PairingFormatError,
    RoutingPreconditionError,
    load_pairing,
    paths_to_json,
    route_2d,
    route_3d,
    route_stats,
)
from .stabsim import BranchBudgetExceeded, NonCliffordError, exact_distribution

EXIT_PASS, EXIT_FAIL, EXIT_PARSE, EXIT_PRECONDITION, EXIT_INTERNAL = 0, 1, 2, 3, 4
BLOCK_TRIALS = 10_000


class ParseError(ValueError):
    """An input file could not be parsed."""


# --------------------------------------------------------------------------
# file helpers


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _load_json(path: str) -> dict:
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc}") from exc


def _load_circuit(path: str) -> AdaptiveCircuit:
    try:
        return AdaptiveCircuit.from_json(_read(path))
    except CircuitFormatError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _write(path: str, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(args: argparse.Namespace, inputs: Sequence[str], outputs: Sequence[str]) -> None:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    doc = {
        "version": __version__,
        "command": args.command,
        "config": config,
        "inputs": {p: _digest(p) for p in inputs if p},
        "outputs": {p: _digest(p) for p in outputs if p and Path(p).exists()},
    }
    _write(args.out + ".manifest.json", json.dumps(doc, indent=1, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# commands


def cmd_route(args: argparse.Namespace) -> int:
    try:
        L, pairs = load_pairing(_read(args.in_path))
    except PairingFormatError as exc:
        raise ParseError(str(exc)) from exc
    paths = route_2d(L, pairs) if args.command == "route2d" else route_3d(L, pairs)
    _write(args.out, paths_to_json(paths))
    stats = route_stats(paths)
    stats["L"] = L
    stats["length_bound"] = 2 * L if args.command == "route2d" else 10 * L
    outputs = [args.out]
    if args.stats:
        _write(args.stats, json.dumps(stats, indent=1, sort_keys=True) + "\n")
        outputs.append(args.stats)
    if args.figure:
        from .plotting import plot_paths

        verts = [p.vertices for p in paths]
        plot_paths(verts, L, args.figure)
        outputs.append(args.figure)
    _write_manifest(args, [args.in_path], outputs)
    return EXIT_PASS


def cmd_localize(args: argparse.Namespace) -> int:
    circ = _load_circuit(args.in_path)
    lc = localize_ideal(circ, args.mode)
    problems = locality_check(lc)
    if problems:
        raise AssertionError(f"localized circuit is not local: {problems[0]}")
    lc.circuit.meta.update(lc.stats())
    _write(args.out, lc.circuit.to_json())
    _write_manifest(args, [args.in_path], [args.out])
    return EXIT_PASS


def cmd_verify(args: argparse.Namespace) -> int:
    src = _load_circuit(args.in_path)
    loc = _load_circuit(args.localized)
    ids = src.outcome_ids()
    missing = sorted(set(ids) - set(loc.outcome_ids()))
    checks = []
    if missing:
        checks.append({"check": "outcome_ids", "passed": False, "missing": missing})
    else:
        d_src = exact_distribution(src, ids)
        d_loc = exact_distribution(loc, ids)
        tvd = d_src.total_variation(d_loc)
        diff = d_src.first_difference(d_loc)
        checks.append({"check": "outcome_ids", "passed": True, "missing": []})
        checks.append({"check": "marginal_distribution", "passed": diff is None and tvd == 0,
                       "method": "exact", "outcomes": len(ids), "rank_source": d_src.rank,
                       "rank_localized": d_loc.rank, "total_variation": str(tvd),
                       "failing_outcome_ids": diff or []})
    passed = all(c["passed"] for c in checks)
    verdict = {"verdict": "PASS" if passed else "FAIL", "checks": checks}
    _write(args.out, json.dumps(verdict, indent=1, sort_keys=True) + "\n")
    _write_manifest(args, [args.in_path, args.localized], [args.out])
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_ft_plan(args: argparse.Namespace) -> int:
    mode = normalize_mode(args.mode)
    if args.in_path:
        circ = _load_circuit(args.in_path)
        loc = ft_localize(circ, mode)
        plan = loc.layers[0] if loc.layers else ft_plan_for_n(loc.n, mode)[0]
    else:
        if args.n is None:
            raise PlanError("ft-plan needs --n or --in")
        plan, loc = ft_plan_for_n(args.n, mode)
    _write(args.out, plan_report(plan, loc) + "\n")
    _write_manifest(args, [args.in_path] if args.in_path else [], [args.out])
    return EXIT_PASS


def _load_plan(path: str) -> FTPlan:
    doc = _load_json(path)
    try:
        return FTPlan.from_dict(doc["plan"] if "plan" in doc else doc)
    except PlanError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _gadget_sampler(args: argparse.Namespace):
    """Noise model, width and strength bound for a stand-alone gadget run."""
    p = args.p
    sampler = sample_burst_batch if args.noise == "burst" else sample_iid_batch
    if args.gadget == "swap":
        model = swap_chain_model(args.k, args.ell)
        return (lambda t, rng: model.effective_batch(*sampler(model.n, p, t, rng))), strength_entanglement_swap(p, args.k)
    if args.gadget == "teleport":
        model = teleport_model(args.ell)
        return (lambda t, rng: model.effective_batch(*sampler(model.n, p, t, rng))), strength_teleport(p)
    width = 2 * args.k * args.ell
    return (lambda t, rng: sampler(width, p, t, rng)), p


def cmd_montecarlo(args: argparse.Namespace) -> int:
    if (args.plan is None) == (args.gadget is None):
        raise PlanError("montecarlo needs exactly one of --plan or --gadget")
    if args.trials < 1:
        raise PlanError("--trials must be positive")
    inputs = []
    if args.plan:
        plan = _load_plan(args.plan)
        inputs.append(args.plan)
        strength = stage_bound(plan, args.p, args.stage)

        def draw(t, rng):
            return surrogate_failure_batch(plan, args.p, t, rng, args.stage)
    else:
        draw, strength = _gadget_sampler(args)
    if args.claimed_bound is not None:
        strength = args.claimed_bound
    blocks = -(-args.trials // BLOCK_TRIALS)
    rngs = spawn_generators(args.seed, blocks + 1)
    xs, zs = [], []
    for b in range(blocks):
        t = min(BLOCK_TRIALS, args.trials - b * BLOCK_TRIALS)
        x, z = draw(t, rngs[b])
        xs.append(x)
        zs.append(z)
    x, z = np.concatenate(xs), np.concatenate(zs)
    if x.shape[1] == 0:
        raise PlanError("the selected model has no output qubits")
    report = estimate_ls_bound((x, z), args.p, args.max_subset, args.subsets, rngs[blocks],
                               sigma=args.sigma, bound=lambda s: strength**s)
    _write(args.out, report.to_csv())
    outputs = [args.out]
    if args.figure:
        from .plotting import plot_ls_report

        plot_ls_report(report, args.figure, f"p = {args.p}, {args.trials} trials")
        outputs.append(args.figure)
    _write_manifest(args, inputs, outputs)
    return EXIT_PASS if report.passed else EXIT_FAIL


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridlocal", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("route2d", "route3d"):
        p = sub.add_parser(name, help=f"route a pairing file ({name[-2:]})")
        p.add_argument("--in", dest="in_path", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--stats")
        p.add_argument("--figure", help="optional PNG of the routed paths")
        p.set_defaults(func=cmd_route)

    p = sub.add_parser("localize", help="make a circuit geometrically local")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("2d", "3d"), default="2d")
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("verify", help="compare outcome distributions of a circuit and its localization")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--localized", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ft-plan", help="plan the fault-tolerant bus architecture")
    p.add_argument("--mode", choices=("3d", "quasi2d"), required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--in", dest="in_path")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ft_plan)

    p = sub.add_parser("montecarlo", help="check local stochastic bounds by sampling")
    p.add_argument("--plan")
    p.add_argument("--gadget", choices=("swap", "teleport", "iid"))
    p.add_argument("--stage", choices=STAGES, default="bus")
    p.add_argument("--noise", choices=("iid", "burst"), default="iid")
    p.add_argument("--k", type=int, default=4, help="Bell pairs per swap chain")
    p.add_argument("--ell", type=int, default=1, help="parallel gadget instances")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sigma", type=float, default=3.0)
    p.add_argument("--max-subset", dest="max_subset", type=int, default=3)
    p.add_argument("--subsets", type=int, default=200, help="random subsets per size")
    p.add_argument("--claimed-bound", dest="claimed_bound", type=float,
                   help="override the strength whose powers are checked")
    p.add_argument("--out", required=True)
    p.add_argument("--figure", help="optional PNG of empirical against bound")
    p.set_defaults(func=cmd_montecarlo)
    return parser


def _diagnose(kind: str, exc: BaseException, code: int) -> int:
    doc = {"error": kind, "message": str(exc), "exit": code}
    for attr in ("pairs", "stage", "index", "min_delta"):
        val = getattr(exc, attr, None)
        if val not in (None, ()):
            doc[attr] = list(val) if isinstance(val, (tuple, list)) else val
    print(json.dumps(doc, sort_keys=True, default=str), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        return _diagnose("parse", exc, EXIT_PARSE)
    except (RoutingPreconditionError, LocalizationError, PlanError, BusParameterError,
            ThresholdExceeded, NonCliffordError, BranchBudgetExceeded) as exc:
        return _diagnose("precondition", exc, EXIT_PRECONDITION)
    except AssertionError as exc:
        return _diagnose("internal", exc, EXIT_INTERNAL)
    except ValueError as exc:
        return _diagnose("precondition", exc, EXIT_PRECONDITION)


if __name__ == "__main__":
    sys.exit(main())
