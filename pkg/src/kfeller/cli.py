"""Command-line front end: ``kfeller {green,solve,validate,mc,pde,stationary}``.

Curves go out as CSV with a ``#`` header holding everything needed to rerun
them; validation reports go out as JSON.  A ``--config`` file, or the name of a
packaged preset, supplies ``key = value`` lines mirroring the long flags;
explicit flags override it.

Exit codes: 0 success, 2 invalid input, 3 validation failure, 4 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .cauchy import solve as cauchy_solve
from .green import green, stationary_density, stationary_mode
from .initial import DiracAt, cell_averages, parse_phi
from .laplace import InversionAccuracyError
from .mc import MCConfig, empirical_distribution
from .params import ModelError, ModelParams, SeriesConfig, SeriesConvergenceError
from .pde import GridConfig, PDEInstabilityError, dirac_profile, solve_pde
from .quadrature import QuadratureError
from .validation import SUITES, run_suite

EXIT_OK, EXIT_INPUT, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3, 4
OUT_DIR_ENV = "KFELLER_OUT_DIR"
META_KEYS = {"name", "version", "description"}


class InputError(Exception):
    pass


def parse_grid(spec: str) -> np.ndarray:
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as e:
        raise InputError(f"grid must be 'start:stop:n', got {spec!r}") from e
    if n < 1 or a < 0 or b < a or not (math.isfinite(a) and math.isfinite(b)):
        raise InputError(f"grid needs 0 <= start <= stop and n >= 1, got {spec!r}")
    return np.linspace(a, b, n)


def parse_floats(spec: str) -> list[float]:
    try:
        vals = [float(s) for s in str(spec).split(",") if s.strip()]
    except ValueError as e:
        raise InputError(f"expected comma-separated numbers, got {spec!r}") from e
    if not vals:
        raise InputError("empty number list")
    return vals


def load_config(path: str) -> dict:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    text = _read_config_text(path)
    out = {}
    for i, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{i}: expected 'key = value'")
        key, _, val = line.partition("=")
        out[key.strip().replace("_", "-")] = val.strip()
    return out


def _read_config_text(path: str) -> str:
    p = Path(path)
    if p.is_file():
        return p.read_text()
    name = path if path.endswith(".cfg") else f"{path}.cfg"
    res = resources.files("kfeller.presets").joinpath(name)
    if res.is_file():
        return res.read_text()
    raise InputError(f"config {path!r} not found (neither a file nor a packaged preset)")


def list_presets() -> list[str]:
    return sorted(p.name[:-4] for p in resources.files("kfeller.presets").iterdir()
                  if p.name.endswith(".cfg"))


def _config_tokens(cfg: dict, known: set[str]) -> list[str]:
    toks = []
    for key, val in cfg.items():
        if key in META_KEYS:
            continue
        if key not in known:
            raise InputError(f"config key {key!r} is not an option of this command")
        toks += [f"--{key}", val]
    return toks


def _common(p: argparse.ArgumentParser, phi=False, t_list=True, grid=True):
    g = p.add_argument_group("model")
    g.add_argument("--beta", type=float, default=1.0, help="degradation rate (default 1)")
    g.add_argument("--lambda", dest="lam", type=float, help="burst rate")
    g.add_argument("--alpha", type=float, help="lambda/beta; alternative to --lambda")
    g.add_argument("--k", type=float, default=1.0, help="inverse mean burst size (default 1)")
    if t_list:
        p.add_argument("--t", default="1", help="time, or comma-separated times")
    if grid:
        p.add_argument("--grid", default="0:20:201", help="x grid 'start:stop:n'")
    if phi:
        p.add_argument("--phi", default="gamma:a=1,b=1",
                       help="initial density, e.g. dirac:y=1, gamma:a=1,b=1, "
                            "step:breaks=0|2,values=0.5")
    p.add_argument("--out", help=f"output file (relative paths resolve against ${OUT_DIR_ENV})")
    p.add_argument("--config", help="key = value file or packaged preset name")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kfeller", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"kfeller {__version__}")
    ap.add_argument("--list-presets", action="store_true", help="print packaged presets")
    sub = ap.add_subparsers(dest="command")

    p = sub.add_parser("green", help="Green's function on a grid")
    _common(p)
    p.add_argument("--y", type=float, default=0.0, help="start point")
    p.add_argument("--tol", type=float, default=1e-12, help="series relative tolerance")
    p.add_argument("--max-terms", type=int, default=100_000, help="series term budget")

    p = sub.add_parser("solve", help="density for initial data phi, one block per t")
    _common(p, phi=True)
    p.add_argument("--tol", type=float, default=1e-12, help="series relative tolerance")
    p.add_argument("--max-terms", type=int, default=100_000, help="series term budget")
    p.add_argument("--method", choices=("auto", "quadrature", "closed"), default="auto")

    p = sub.add_parser("mc", help="Monte Carlo ECDF (or raw samples without --grid)")
    _common(p, phi=True, grid=False)
    p.add_argument("--grid", help="x grid for the ECDF; omit to dump sorted samples")
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("pde", help="finite-volume reference solution")
    _common(p, phi=True, grid=False)
    p.add_argument("--grid", help="accepted for preset compatibility; the PDE uses its own cells")
    p.add_argument("--cells", type=int, default=2048)
    p.add_argument("--x-max", type=float, help="domain length (default (alpha+40)/k)")
    p.add_argument("--cfl", type=float, default=0.9)

    p = sub.add_parser("stationary", help="stationary gamma density and its mode")
    _common(p, t_list=False)

    p = sub.add_parser("validate", help="run a validation suite, JSON report")
    p.add_argument("--suite", choices=SUITES + ("all",), default="series-vs-closed")
    p.add_argument("--alphas", help="comma-separated alphas for the suite")
    p.add_argument("--paths", type=int, help="Monte Carlo paths (mc suite)")
    p.add_argument("--seed", type=int, help="Monte Carlo seed (mc suite)")
    p.add_argument("--tol", type=float, help="override the suite's main tolerance")
    p.add_argument("--out")
    p.add_argument("--config")
    return ap


def _params(args) -> ModelParams:
    if args.lam is not None and args.alpha is not None:
        raise InputError("give --lambda or --alpha, not both")
    if args.lam is None and args.alpha is None:
        raise InputError("one of --lambda or --alpha is required")
    lam = args.lam if args.lam is not None else args.alpha * args.beta
    return ModelParams(beta=args.beta, lam=lam, k=args.k)


def _times(args) -> list[float]:
    ts = parse_floats(args.t)
    if any(not (t >= 0 and math.isfinite(t)) for t in ts):
        raise InputError("times must be finite and >= 0")
    return ts


def _series_cfg(args) -> SeriesConfig:
    return SeriesConfig(rel_tol=args.tol, max_terms=args.max_terms)


def _header(args, params: ModelParams | None, extra: dict | None = None) -> str:
    rec = {k: v for k, v in sorted(vars(args).items()) if k not in ("argv", "list_presets")}
    lines = [f"# kfeller {__version__}", f"# command: {args.command}",
             f"# argv: {json.dumps(args.argv)}", f"# args: {json.dumps(rec)}"]
    if params is not None:
        lines.append(f"# params: {json.dumps(params.as_dict())}")
    for k, v in (extra or {}).items():
        lines.append(f"# {k}: {json.dumps(v)}")
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    return repr(float(v))


def cmd_green(args, out):
    p = _params(args)
    x = parse_grid(args.grid)
    cfg = _series_cfg(args)
    out.write(_header(args, p))
    out.write("t,x,g_regular,atom_location,atom_mass,atom_in_grid\n")
    for t in _times(args):
        g = green(p, t, x, args.y, cfg)
        inside = x[0] <= g.atom_location <= x[-1]
        for xi, gi in zip(x, np.atleast_1d(g.regular)):
            out.write(f"{_fmt(t)},{_fmt(xi)},{_fmt(gi)},{_fmt(g.atom_location)},"
                      f"{_fmt(g.atom_amplitude)},{int(inside)}\n")


def cmd_solve(args, out):
    p = _params(args)
    x = parse_grid(args.grid)
    phi = parse_phi(args.phi)
    cfg = _series_cfg(args)
    out.write(_header(args, p, {"phi": phi.describe()}))
    out.write("t,x,density\n")
    for t in _times(args):
        sol = cauchy_solve(p, phi, t, x, cfg, method=args.method)
        out.write(f"# block t={t!r} method={sol.method} atoms={json.dumps(sol.atoms)} "
                  f"discontinuities={json.dumps(sol.discontinuities)} "
                  f"quad_error={sol.quad_error!r}\n")
        for xi, v in zip(x, sol.regular_values):
            out.write(f"{_fmt(t)},{_fmt(xi)},{_fmt(v)}\n")


def cmd_mc(args, out):
    p = _params(args)
    phi = parse_phi(args.phi)
    ts = _times(args)
    if len(ts) != 1:
        raise InputError("mc takes a single --t")
    if args.paths < 1:
        raise InputError("--paths must be >= 1")
    emp = empirical_distribution(p, MCConfig(args.paths, ts[0], seed=args.seed, initial=phi))
    summary = {"mean": emp.mean, "se_mean": emp.se_mean, "variance": emp.variance,
               "zero_jump_fraction": emp.atom_candidate_mass, "n_paths": emp.n_paths}
    out.write(_header(args, p, {"phi": phi.describe(), "summary": summary}))
    if args.grid:
        x = parse_grid(args.grid)
        out.write("x,ecdf\n")
        for xi, f in zip(x, emp.ecdf(x)):
            out.write(f"{_fmt(xi)},{_fmt(f)}\n")
    else:
        out.write("sample\n")
        out.write("\n".join(_fmt(s) for s in emp.samples) + "\n")


def cmd_pde(args, out):
    p = _params(args)
    phi = parse_phi(args.phi)
    ts = _times(args)
    out.write(_header(args, p, {"phi": phi.describe()}))
    out.write("t,x,density,j_field\n")
    for t in ts:
        g = GridConfig.for_params(p, args.cells, t, cfl=args.cfl, x_max=args.x_max)
        if isinstance(phi, DiracAt):
            if phi.y >= g.x_max:
                raise InputError("Dirac start lies outside the PDE domain")
            init = dirac_profile(phi.y, g.edges)
        else:
            init = cell_averages(phi, g.edges)
            # mass beyond x_max is cut off; renormalize what the grid can hold
            init = init / float(np.dot(g.widths, init))
        st = solve_pde(p, init, g)
        out.write(f"# block t={t!r} cells={g.n_cells} dt={g.dt!r} mass_drift={st.mass_drift!r} "
                  f"max_cfl={st.max_cfl!r}\n")
        for xi, v, j in zip(st.x, st.values, st.j_values):
            out.write(f"{_fmt(t)},{_fmt(xi)},{_fmt(v)},{_fmt(j)}\n")


def cmd_stationary(args, out):
    p = _params(args)
    x = parse_grid(args.grid)
    mode = stationary_mode(p)
    out.write(_header(args, p, {"mode": mode, "mode_at_origin": p.alpha <= 1}))
    out.write("x,density,mode\n")
    for xi, v in zip(x, np.atleast_1d(stationary_density(p, x))):
        out.write(f"{_fmt(xi)},{_fmt(v)},{_fmt(mode)}\n")


def cmd_validate(args, out):
    kw = {}
    if args.alphas:
        if args.suite == "all":
            raise InputError("--alphas applies to a single suite")
        if args.suite == "mc":
            raise InputError("the mc suite takes a single parameter set")
        kw["alphas"] = tuple(parse_floats(args.alphas))
    if args.suite == "mc":
        if args.paths is not None:
            kw["n_paths"] = args.paths
        if args.seed is not None:
            kw["seed"] = args.seed
    if args.tol is not None and args.suite != "all":
        key = {"series-vs-closed": "tol", "laplace": "tol", "mc": "ks_tol",
               "pde": "stationary_tol"}[args.suite]
        kw[key] = args.tol
    rep = run_suite(args.suite, **kw)
    out.write(rep.to_json() + "\n")
    return EXIT_OK if rep.passed else EXIT_VALIDATION


COMMANDS = {"green": cmd_green, "solve": cmd_solve, "mc": cmd_mc, "pde": cmd_pde,
            "stationary": cmd_stationary, "validate": cmd_validate}


def _resolve_out(path: str) -> Path:
    p = Path(path)
    if not p.is_absolute() and os.environ.get(OUT_DIR_ENV):
        p = Path(os.environ[OUT_DIR_ENV]) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _subparser_options(ap: argparse.ArgumentParser, command: str) -> set[str]:
    sub = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction))
    opts = set()
    for a in sub.choices[command]._actions:
        opts.update(o[2:] for o in a.option_strings if o.startswith("--"))
    return opts - {"help", "config"}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.list_presets:
        print("\n".join(list_presets()))
        return EXIT_OK
    if args.command is None:
        ap.print_help(sys.stderr)
        return EXIT_INPUT
    try:
        if args.config:
            cfg = load_config(args.config)
            i = argv.index(args.command)
            toks = _config_tokens(cfg, _subparser_options(ap, args.command))
            try:
                args = ap.parse_args(argv[:i + 1] + toks + argv[i + 1:])
            except SystemExit as e:
                return int(e.code or EXIT_INPUT)
        args.argv = argv
        buf = io.StringIO()
        code = COMMANDS[args.command](args, buf) or EXIT_OK
    except (InputError, ModelError) as e:
        print(f"kfeller: invalid input: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (SeriesConvergenceError, QuadratureError, InversionAccuracyError,
            PDEInstabilityError) as e:
        print(f"kfeller: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    text = buf.getvalue()
    if args.out:
        _resolve_out(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
