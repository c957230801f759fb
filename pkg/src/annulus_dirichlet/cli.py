"""Command-line entry point.

Reports go to stdout as JSON (sorted keys, no timestamps) and, with
``--out DIR``, to files in DIR.  Wall-clock time goes to stderr only.

Exit codes: 0 ok, 2 bad input, 3 optimizer did not converge,
4 certificate violated beyond tolerance.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import closedform as cf
from .certificates import certify
from .errors import AnnulusError
from .figure import render_svg
from .mapio import MapFormatError, load_map, save_map, to_csv
from .optimizer import MODES, OptimizerConfig, initialize, minimize
from .polargrid import DiscreteMap, PolarGrid, dirichlet_energy, sample_map

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_CERTIFICATE = 4

NAMED_MAPS = ("g_circ", "g_diamond", "power")


class InputError(Exception):
    pass


# ---------------------------------------------------------------- helpers


def _problem(args) -> cf.ProblemSpec:
    if args.problem:
        try:
            return cf.ProblemSpec.from_json(Path(args.problem).read_text())
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read problem file {args.problem}: {exc}") from exc
    missing = [f"--{k}" for k in ("b", "d", "j") if getattr(args, k) is None]
    if missing:
        raise InputError("missing " + ", ".join(missing) + " (or pass --problem FILE)")
    return cf.normalize_problem(args.a, args.b, args.c, args.d, args.j)


def _bound_label(spec: cf.ProblemSpec) -> str:
    rhs = cf.nitsche_rhs(spec.r, spec.j)
    if math.isclose(spec.R, rhs, rel_tol=cf.BOUND_RTOL):
        return "critical"
    return "above" if spec.R > rhs else "below"


def _analytic_map(name: str, spec: cf.ProblemSpec, grid: PolarGrid) -> DiscreteMap:
    if name == "power":
        return initialize(spec, grid, "power_map")
    above = cf.is_above_bound(spec)
    if name == "g_circ" and not above:
        raise InputError("g_circ only exists at or above the Nitsche bound")
    if name == "g_diamond" and above:
        raise InputError("g_diamond only exists below the Nitsche bound")
    return sample_map(
        lambda z: cf.eval_minimizer(spec, z),
        grid,
        spec.R,
        spec.j,
        derivatives=lambda z: cf.minimizer_derivatives(spec, z),
    )


def _load(args, spec: cf.ProblemSpec) -> DiscreteMap:
    name = args.map or ("g_circ" if cf.is_above_bound(spec) else "g_diamond")
    if name in NAMED_MAPS:
        return _analytic_map(name, spec, PolarGrid.for_spec(spec, args.nr, args.nt))
    try:
        return load_map(name, spec.R, spec.j)
    except (OSError, MapFormatError) as exc:
        raise InputError(f"cannot read map {name}: {exc}") from exc


def _emit(report: dict, args, filename: str) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / filename).write_text(text + "\n")


def _outdir(args) -> Optional[Path]:
    if not args.out:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --------------------------------------------------------------- commands


def cmd_solve(args) -> int:
    spec = _problem(args)
    mz = cf.minimizer(spec)
    p = mz.profile
    E = cf.energy_closed(spec)
    report = {
        "problem": spec.to_dict(),
        "r": spec.r,
        "R": spec.R,
        "bound": _bound_label(spec),
        "nitsche_rhs": cf.nitsche_rhs(spec.r, spec.j),
        "critical_radius": cf.critical_radius(spec.R, spec.j),
        "minimizer": mz.kind,
        "regime": p.regime.value,
        "A": p.A,
        "B": p.B,
        "c1": p.c1,
        "energy": E.value,
        "energy_original": E.original,
    }
    if isinstance(mz, cf.Hybrid):
        report["r_crit"] = mz.r_crit
        report["rho"] = mz.rho
    _emit(report, args, "solve.json")
    return EXIT_OK


def cmd_minimize(args) -> int:
    spec = _problem(args)
    grid = PolarGrid.for_spec(spec, args.nr, args.nt)
    cfg = OptimizerConfig(max_iters=args.iters, tol_energy=args.tol, seed=args.seed)
    m, rep = minimize(spec, grid, cfg, mode=args.init)
    report = {"problem": spec.to_dict(), "grid": [args.nr, args.nt], "init": args.init, **rep.to_dict()}
    _emit(report, args, "minimize.json")
    out = _outdir(args)
    if out is not None:
        save_map(m, out / "map.bin")
        if args.format == "csv":
            save_map(m, out / "map.csv")
        elif args.format == "svg":
            (out / "map.svg").write_text(render_svg(m))
    return EXIT_OK if rep.converged else EXIT_NOT_CONVERGED


def cmd_certify(args) -> int:
    spec = _problem(args)
    m = _load(args, spec)
    rep = certify(m, spec, exact=args.exact, tolerance=args.tol)
    report = {"problem": spec.to_dict(), "map": args.map or "minimizer", **rep.to_dict()}
    _emit(report, args, "certify.json")
    return EXIT_OK if rep.ok else EXIT_CERTIFICATE


def cmd_energy(args) -> int:
    spec = _problem(args)
    m = _load(args, spec)
    E = dirichlet_energy(m, exact=args.exact)
    oracle = cf.energy_closed(spec).value
    report = {
        "problem": spec.to_dict(),
        "map": args.map or "minimizer",
        "grid": list(m.w.shape),
        "energy": E,
        "oracle_energy": oracle,
        "gap_rel": (E - oracle) / oracle,
    }
    _emit(report, args, "energy.json")
    return EXIT_OK


def cmd_figure(args) -> int:
    spec = _problem(args)
    m = _load(args, spec)
    svg = render_svg(m, args.rings, args.rays, title=f"j={spec.j} r={spec.r:g} R={spec.R:g}")
    out = _outdir(args) or Path(".")
    (out / "figure.svg").write_text(svg)
    (out / "figure.csv").write_text(to_csv(m))
    print(json.dumps({"svg": str(out / "figure.svg"), "csv": str(out / "figure.csv")}, sort_keys=True))
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "minimize": cmd_minimize,
    "certify": cmd_certify,
    "energy": cmd_energy,
    "figure": cmd_figure,
}


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("problem")
    g.add_argument("--a", type=float, default=1.0, help="inner radius of the domain annulus")
    g.add_argument("--b", type=float, help="outer radius of the domain annulus")
    g.add_argument("--c", type=float, default=1.0, help="inner radius of the target annulus")
    g.add_argument("--d", type=float, help="outer radius of the target annulus")
    g.add_argument("--j", type=int, help="degree")
    g.add_argument("--problem", metavar="FILE", help='JSON {"a","b","c","d","j"} instead of flags')
    common.add_argument("--nr", type=int, default=128, help="radial nodes")
    common.add_argument("--nt", type=int, default=256, help="angular nodes (even)")
    common.add_argument("--out", metavar="DIR", help="also write outputs into DIR")
    common.add_argument("-v", "--verbose", action="store_true")

    maps = argparse.ArgumentParser(add_help=False)
    maps.add_argument("--map", metavar="{g_circ,g_diamond,power,FILE}", help="analytic map name or a saved map (default: the closed-form minimizer)")
    maps.add_argument("--exact", action="store_true", help="use analytic derivatives of g_circ / g_diamond instead of finite differences")

    parser = argparse.ArgumentParser(prog="annulus-dirichlet", description="Degree-j Dirichlet energy minimization between annuli.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="closed-form minimizer and minimum energy")
    p = sub.add_parser("minimize", parents=[common], help="numerical minimization on a polar grid")
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-10, help="relative energy-change tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init", choices=MODES, default="perturbed")
    p.add_argument("--format", choices=("json", "csv", "svg"), default="json", help="extra map artifact in --out besides map.bin")
    p = sub.add_parser("certify", parents=[common, maps], help="lower-bound certificate for a map")
    p.add_argument("--tol", type=float, default=1e-3)
    sub.add_parser("energy", parents=[common, maps], help="discrete Dirichlet energy of a map")
    p = sub.add_parser("figure", parents=[common, maps], help="SVG image of a polar grid under a map")
    p.add_argument("--rings", type=int, help="rings to draw (default nr/8)")
    p.add_argument("--rays", type=int, help="rays to draw (default nt/16)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        code = COMMANDS[args.command](args)
    except (InputError, AnnulusError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    print(f"{args.command}: {time.perf_counter() - t0:.3f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
