"""Command-line front end: one JSON object per invocation on stdout.

Exit codes: 0 success, 1 domain error (JSON diagnostics on stderr), 2 usage.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import bloch, continuation, effective, mechanisms, rigidity, secondorder
from .errors import MaxlatError, ParseError
from .lattice import (
    PeriodicLattice,
    build_deformed_two_periodic,
    build_special_two_by_one,
    build_special_two_by_two,
    build_standard_kagome,
    build_twisted_kagome,
    load_lattice,
    save_lattice,
)
from .svg import render_svg


def _default_tol() -> float:
    env = os.environ.get("MAXLAT_TOL")
    return float(env) if env else 1e-9


def _emit(obj: dict, args) -> None:
    text = json.dumps(obj, indent=1)
    if getattr(args, "json", None):
        with open(args.json, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _write_svg(doc: str, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(doc)


def _resolve_lattice(args) -> PeriodicLattice:
    builtin = getattr(args, "builtin", None)
    if builtin:
        if builtin == "standard":
            return build_standard_kagome(args.n, args.m)
        if builtin == "twisted":
            return build_twisted_kagome(args.theta)
        if builtin == "two-periodic":
            return build_deformed_two_periodic(args.theta1, args.theta2, args.theta3)
        if builtin == "2x1":
            return build_special_two_by_one(args.gamma)
        if builtin == "2x2":
            return build_special_two_by_two(args.beta)
        raise ParseError(f"unknown builtin {builtin!r}")
    if getattr(args, "lattice", None):
        return load_lattice(args.lattice)
    raise ParseError("provide --builtin or --lattice")


def _load_mode(path: str, lat: PeriodicLattice) -> np.ndarray:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if isinstance(data, dict) and "field" in data:
        raw = data["field"]
    elif isinstance(data, dict) and "fields" in data:
        raw = data["fields"][0]
    else:
        raise ParseError("mode file needs a 'field' (or 'fields') entry")
    mode = np.asarray(raw, dtype=float)
    if mode.shape != (lat.n_vertices, 2):
        raise ParseError(
            f"mode shape {mode.shape} does not match lattice with "
            f"{lat.n_vertices} vertices"
        )
    return mode


def _add_lattice_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lattice", help="lattice JSON file")
    p.add_argument(
        "--builtin",
        choices=["standard", "twisted", "two-periodic", "2x1", "2x2"],
        help="construct a builtin lattice instead of reading a file",
    )
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--theta", type=float, default=math.pi / 6)
    p.add_argument("--theta1", type=float, default=math.pi / 3)
    p.add_argument("--theta2", type=float, default=math.pi / 3)
    p.add_argument("--theta3", type=float, default=math.pi / 3)
    p.add_argument("--gamma", type=float, default=math.pi / 4)
    p.add_argument("--beta", type=float, default=5 * math.pi / 12)


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="maxlat",
        description="Rigidity and mechanism analysis of periodic spring lattices",
    )
    top.add_argument("--tol", type=float, default=None, help="rank tolerance")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="construct a lattice and emit its JSON")
    _add_lattice_args(p)
    p.add_argument("--out", help="also save to this path")
    p.add_argument("--json")

    for name in ("gh", "selfstress"):
        p = sub.add_parser(name, help=f"compute a {name} basis")
        _add_lattice_args(p)
        p.add_argument("--json")

    p = sub.add_parser("effective", help="effective tensor, rank and kernel")
    _add_lattice_args(p)
    p.add_argument("--out", help="tensor JSON output path")
    p.add_argument("--json")

    p = sub.add_parser("mechanism", help="evaluate a mechanism family")
    p.add_argument(
        "--family",
        required=True,
        choices=["one", "two", "2x1", "2x2", "4x1", "layered"],
    )
    p.add_argument("--theta", type=float, default=math.pi / 6)
    p.add_argument("--theta1", type=float, default=5 * math.pi / 18)
    p.add_argument("--theta2", type=float, default=5 * math.pi / 12)
    p.add_argument("--theta3", type=float, default=math.pi / 6)
    p.add_argument("--gamma", type=float, default=math.pi / 4)
    p.add_argument("--beta", type=float, default=5 * math.pi / 12)
    p.add_argument("--sequence", default="G1,W1,G2,W2", help="layer word")
    p.add_argument("--open-chain", action="store_true", help="non-periodic sequence")
    p.add_argument("--t-samples", type=int, default=21)
    p.add_argument("--svg", help="render the end state")
    p.add_argument("--json")

    p = sub.add_parser("second-order", help="second-order mechanism test of a mode")
    _add_lattice_args(p)
    p.add_argument("--mode", required=True, help="mode JSON file")
    p.add_argument("--json")

    p = sub.add_parser("fh", help="Bloch-boundary mode families and classification")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--t2", type=float, default=0.0)
    p.add_argument("--classify", action="store_true")
    p.add_argument("--svg")
    p.add_argument("--json")

    p = sub.add_parser("continue", help="continue a lone GH mode into a mechanism")
    _add_lattice_args(p)
    p.add_argument("--mode", required=True)
    p.add_argument("--tmax", type=float, default=0.3)
    p.add_argument("--steps", type=int, default=60)
    p.add_argument("--force", action="store_true")
    p.add_argument("--json")

    p = sub.add_parser("render", help="render a lattice (optionally with a mode)")
    _add_lattice_args(p)
    p.add_argument("--mode")
    p.add_argument("--tile", type=int, default=1)
    p.add_argument("--no-shade", action="store_true")
    p.add_argument("--svg", required=True)
    p.add_argument("--json")

    return top


def _mechanism_path(args) -> mechanisms.MechanismPath:
    if args.family == "one":
        return mechanisms.one_periodic_mechanism(args.theta)
    if args.family == "two":
        return mechanisms.two_periodic_mechanism(args.theta1, args.theta2, args.theta3)
    if args.family == "2x1":
        return mechanisms.two_by_one_mechanism(args.gamma)
    if args.family == "2x2":
        return mechanisms.two_by_two_mechanism(args.beta)
    if args.family == "4x1":
        return mechanisms.four_by_one_mechanism(args.theta)
    seq = mechanisms.LayerSequence(
        tuple(args.sequence.split(",")), periodic=not args.open_chain
    )
    return mechanisms.layered_mechanism(seq, args.theta)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    tol = args.tol if args.tol is not None else _default_tol()
    try:
        return _run(args, tol)
    except MaxlatError as exc:
        json.dump(
            {"error": type(exc).__name__, "message": str(exc)},
            sys.stderr,
        )
        sys.stderr.write("\n")
        return 1


def _run(args, tol: float) -> int:
    if args.command == "build":
        lat = _resolve_lattice(args)
        if args.out:
            save_lattice(lat, args.out)
        _emit(lat.to_dict(), args)
        return 0

    if args.command in ("gh", "selfstress"):
        lat = _resolve_lattice(args)
        basis = (
            rigidity.gh_modes(lat, tol)
            if args.command == "gh"
            else rigidity.self_stresses(lat, tol)
        )
        out = basis.to_dict()
        out["dimension"] = basis.dimension
        _emit(out, args)
        return 0

    if args.command == "effective":
        lat = _resolve_lattice(args)
        tensor = effective.effective_tensor(lat, tol)
        out = tensor.to_dict()
        if args.out:
            with open(args.out, "w") as fh:
                json.dump(out, fh, indent=1)
                fh.write("\n")
        _emit(out, args)
        return 0

    if args.command == "mechanism":
        path = _mechanism_path(args)
        samples = []
        for t in path.sample_ts(args.t_samples):
            f, _ = path.evaluate(t)
            energy, strain = path.energy(t)
            samples.append(
                {
                    "t": float(t),
                    "F": [list(row) for row in f],
                    "energy": energy,
                    "max_strain": strain,
                }
            )
        out = {
            "family": path.family,
            "params": path.params,
            "t_end": path.t_end,
            "samples": samples,
        }
        if args.svg:
            _write_svg(render_svg(path.deformed_lattice(path.t_end)), args.svg)
        _emit(out, args)
        return 0

    if args.command == "second-order":
        lat = _resolve_lattice(args)
        mode = _load_mode(args.mode, lat)
        verdict = secondorder.necessary_condition_test(lat, mode)
        out = verdict.to_dict()
        try:
            _, sums = secondorder.consistency_condition_kagome(lat, mode)
            out["line_sums"] = sums
        except MaxlatError:
            out["line_sums"] = None
        _emit(out, args)
        return 0

    if args.command == "fh":
        u1, u2 = bloch.fh_modes(args.s, args.N)
        out = {
            "s": args.s,
            "N": args.N,
            "u1": [list(v) for v in u1.field_values],
            "u2": [list(v) for v in u2.field_values],
        }
        if args.classify:
            out["t1"], out["t2"] = args.t1, args.t2
            out["verdict"] = bloch.classify_fh_combination(
                args.s, args.N, args.t1, args.t2
            )
        if args.svg:
            combo = args.t1 * u1.field_values + args.t2 * u2.field_values
            _write_svg(render_svg(u1.cell, mode=combo), args.svg)
        _emit(out, args)
        return 0

    if args.command == "continue":
        lat = _resolve_lattice(args)
        mode = _load_mode(args.mode, lat)
        result = continuation.continue_mechanism(
            lat, mode, args.tmax, args.steps, force=args.force
        )
        out = {
            "converged": result.converged,
            "max_energy": result.max_energy,
            "ts": [float(t) for t in result.ts],
            "xi2": [[x.xx, x.yy, x.xy] for x in result.xi2_of_t],
            "newton_iterations": list(result.newton_iterations),
            "positions": [
                [list(v) for v in result.path.evaluate(t)[1]] for t in result.ts
            ],
        }
        _emit(out, args)
        return 0

    if args.command == "render":
        lat = _resolve_lattice(args)
        mode = _load_mode(args.mode, lat) if args.mode else None
        doc = render_svg(lat, mode=mode, tile=args.tile, shade=not args.no_shade)
        _write_svg(doc, args.svg)
        _emit({"svg": args.svg, "vertices": lat.n_vertices, "edges": lat.n_edges}, args)
        return 0

    raise ParseError(f"unknown command {args.command!r}")


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
