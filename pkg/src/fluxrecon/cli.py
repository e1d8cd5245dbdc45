"""Command-line entry point.

Exit status: 0 on success, 2 for configuration or input problems, 3 for
numerical failures.  Errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .catalog import DEFAULT_RECT, get_pair
from .errors import ConfigError, FluxReconError, ProfileGapError, ProfileParseError, StepFailure
from .flux import linf_errors

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _floats(text, n, name):
    try:
        vals = [float(x) for x in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"--{name}: expected {n} comma-separated numbers, got {text!r}", field=name) from None
    if len(vals) != n or not all(np.isfinite(vals)):
        raise ConfigError(f"--{name}: expected {n} finite numbers, got {text!r}", field=name)
    return vals


def _rect(args):
    if args.rect is None:
        if args.flux not in DEFAULT_RECT:
            raise ConfigError("--rect is required for this flux", field="rect")
        return DEFAULT_RECT[args.flux]
    r = _floats(args.rect, 4, "rect")
    if not r[0] < r[1]:
        raise ConfigError(f"rect: u_star {r[0]} must be below u_sup {r[1]}", field="rect")
    if not r[2] < r[3]:
        raise ConfigError(f"rect: v_star {r[2]} must be below v_sup {r[3]}", field="rect")
    return tuple(r)


def _positive(value, name):
    if not value > 0:
        raise ConfigError(f"--{name} must be positive, got {value}", field=name)
    return value


def _out(args):
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _emit(args, name, text):
    if args.out is None:
        sys.stdout.write(text)
    else:
        io.write_text(_out(args) / name, text)


# subcommands

def cmd_solve(args):
    from .riemann import classify_region, solve_riemann
    fp = get_pair(args.flux)
    tol = _positive(args.tol, "tol")
    if args.random_count:
        rng = np.random.default_rng(args.seed)
        u_lo, u_hi, v_lo, v_hi = _rect(args)
        sols = []
        for _ in range(args.random_count):
            L = [rng.uniform(u_lo, u_hi), rng.uniform(v_lo, v_hi)]
            R = [np.clip(L[0] + rng.uniform(-args.max_jump, args.max_jump), u_lo, u_hi),
                 np.clip(L[1] + rng.uniform(-args.max_jump, args.max_jump), v_lo, v_hi)]
            try:
                sol = solve_riemann(fp, L, R, tol=tol)
                d = sol.to_json()
                d["region"] = classify_region(fp, L, R, sol)
            except FluxReconError as exc:
                d = {"left": L, "right": R, "error": type(exc).__name__, "message": str(exc)}
            sols.append(d)
        _emit(args, "solutions.json", io.dumps({"flux": args.flux, "seed": args.seed, "solutions": sols}))
        return
    if args.left is None or args.right is None:
        raise ConfigError("--left and --right are required", field="left")
    L, R = _floats(args.left, 2, "left"), _floats(args.right, 2, "right")
    sol = solve_riemann(fp, L, R, tol=tol)
    d = sol.to_json()
    d["region"] = classify_region(fp, L, R, sol)
    _emit(args, "solution.json", io.dumps(d))


def cmd_observe(args):
    from .profile import observe
    from .reconstruct import ForwardObserver, GridSpec
    from .riemann import solve_riemann
    fp = get_pair(args.flux)
    T = _positive(args.T, "T")
    if args.all_steps:
        if args.out is None:
            raise ConfigError("--all-steps needs --out", field="out")
        grid = GridSpec.from_rect(_rect(args), args.m)
        obs = ForwardObserver(fp, T=T, samples_per_fan=args.samples)
        obs.check_grid(grid)
        io.save_profiles(_out(args), obs, grid, args.flux)
        return
    if args.left is None or args.right is None:
        raise ConfigError("--left and --right are required (or use --all-steps)", field="left")
    sol = solve_riemann(fp, _floats(args.left, 2, "left"), _floats(args.right, 2, "right"), tol=args.tol)
    p = observe(sol, T, args.samples)
    if args.out is None:
        sys.stdout.write(p.to_csv())
        return
    d = _out(args)
    io.write_text(d / "profile.csv", p.to_csv())
    io.write_json(d / "profile.json", p.to_json())


def _anchors(args, pair, grid):
    a = str(args.anchors).strip().lower()
    if a == "unknown":
        return "unknown"
    if a == "known":
        if pair is None:
            raise ConfigError("known anchors need an analytic flux", field="anchors")
        return (float(pair.f1.value(grid.v_star)), float(pair.f2.value(grid.u_star)))
    return tuple(_floats(args.anchors, 2, "anchors"))


def cmd_reconstruct(args):
    from .reconstruct import GridSpec, reconstruct_all
    T = _positive(args.T, "T")
    if Path(args.flux).is_dir():
        src = io.load_profiles(args.flux)
        pair = None
        grid = src.grid
        if args.rect is not None or grid is None:
            grid = GridSpec.from_rect(_rect(args), args.m if args.m is not None else grid.m)
        elif args.m is not None and args.m != grid.m:
            raise ConfigError(f"--m {args.m} disagrees with the recorded grid m={grid.m}", field="m")
        if src.T is not None:
            T = src.T
    else:
        pair = get_pair(args.flux)
        src = pair
        grid = GridSpec.from_rect(_rect(args), 4 if args.m is None else args.m)
    rep = reconstruct_all(src, grid, T, _anchors(args, pair, grid))
    out = rep.to_json()
    if pair is not None:
        e1 = linf_errors(rep.interpolants[0], pair.f1)
        e2 = linf_errors(rep.interpolants[1], pair.f2)
        out["errors"] = {"f1": list(e1), "f2": list(e2)}
    if args.out is None:
        sys.stdout.write(io.dumps(out))
        return
    d = _out(args)
    io.write_json(d / "report.json", out)
    io.write_text(d / "nodal.csv", rep.nodal_csv())


def _m_range(args):
    if args.m_min > args.m_max:
        raise ConfigError("--m-min must not exceed --m-max", field="m-min")
    return list(range(args.m_min, args.m_max + 1))


def cmd_convergence(args):
    from .convergence import run_convergence
    pair = get_pair(args.flux)
    tab = run_convergence((pair.f1, pair.f2), _rect(args), _positive(args.T, "T"), _m_range(args))
    _emit(args, "convergence.csv", tab.to_csv())


def cmd_stability(args):
    from .convergence import DEFAULT_INITIAL, stability_experiment
    pair = get_pair(args.flux)
    rect = _rect(args)
    results = []
    for m in _m_range(args):
        r = stability_experiment((pair.f1, pair.f2), rect, _positive(args.T, "T"), m, DEFAULT_INITIAL,
                                 cells0=args.cells, cfl=args.cfl, max_levels=args.max_levels)
        results.append(r.to_json())
    ratios = [a["L1_distance"] / b["L1_distance"] if b["L1_distance"] > 0 else None
              for a, b in zip(results, results[1:])]
    _emit(args, "stability.json", io.dumps({"flux": args.flux, "rows": results, "ratios": ratios}))


def cmd_euler(args):
    from .euler import gamma_law, recover_pressure
    law = gamma_law(_positive(args.gamma, "gamma"), _positive(args.kappa, "kappa"))
    v_range = _floats(args.v_range, 2, "v-range")
    if not v_range[0] < v_range[1]:
        raise ConfigError("v-range must be increasing", field="v-range")
    rows, last = [], None
    for m in _m_range(args):
        rec = recover_pressure(law, v_range=v_range, m=m, T=_positive(args.T, "T"))
        sub = law.as_flux().restrict(*v_range)
        ev, ed = linf_errors(rec.p_m, sub)
        d = rec.report.grid.eta
        rows.append((m, d, ev, ed, rec.L_p * d * d, 3 * rec.L_p * d, rec.f2_residual))
        last = rec
    lines = ["m,delta,err_value,err_deriv,bound_value,bound_deriv,f2_residual"]
    lines += [",".join([str(r[0])] + [repr(float(x)) for x in r[1:]]) for r in rows]
    csv_text = "\n".join(lines) + "\n"
    law_json = {"gamma": law.gamma, "kappa": law.kappa, "v_range": v_range,
                "p_m": last.p_m.to_json(), "L_p": last.L_p}
    if args.out is None:
        sys.stdout.write(csv_text)
        return
    d = _out(args)
    io.write_text(d / "pressure_convergence.csv", csv_text)
    io.write_json(d / "recovered_law.json", law_json)


def build_parser():
    p = _Parser(prog="fluxrecon", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="flat key=value file; command-line flags win")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, flux_default="exp-pair"):
        sp.add_argument("--flux", default=flux_default)
        sp.add_argument("--rect", help="u_star,u_sup,v_star,v_sup")
        sp.add_argument("--T", type=float, default=1.0)
        sp.add_argument("--out", help="output directory (default: stdout)")
        sp.add_argument("--config", default=argparse.SUPPRESS)

    sp = sub.add_parser("solve-riemann")
    common(sp)
    sp.add_argument("--left")
    sp.add_argument("--right")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--random-count", type=int, default=0)
    sp.add_argument("--max-jump", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("observe")
    common(sp)
    sp.add_argument("--left")
    sp.add_argument("--right")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--samples", type=int, default=512)
    sp.add_argument("--all-steps", action="store_true")
    sp.add_argument("--m", type=int, default=4)
    sp.set_defaults(func=cmd_observe)

    sp = sub.add_parser("reconstruct")
    common(sp)
    sp.add_argument("--m", type=int)
    sp.add_argument("--anchors", default="unknown", help="c1,c2 | known | unknown")
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("convergence")
    common(sp)
    sp.add_argument("--m-min", type=int, default=3)
    sp.add_argument("--m-max", type=int, default=6)
    sp.set_defaults(func=cmd_convergence)

    sp = sub.add_parser("stability")
    common(sp)
    sp.add_argument("--m-min", type=int, default=3)
    sp.add_argument("--m-max", type=int, default=5)
    sp.add_argument("--cells", type=int, default=200)
    sp.add_argument("--cfl", type=float, default=0.9)
    sp.add_argument("--max-levels", type=int, default=5)
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("euler-demo")
    common(sp, flux_default="psystem-gamma")
    sp.add_argument("--gamma", type=float, default=1.4)
    sp.add_argument("--kappa", type=float, default=1.0)
    sp.add_argument("--v-range", default="0.8,2.0")
    sp.add_argument("--m-min", type=int, default=3)
    sp.add_argument("--m-max", type=int, default=5)
    sp.set_defaults(func=cmd_euler)
    return p


def read_config(path):
    """Parse a key=value file into argparse destinations."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}", field="config") from exc
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value", field="config")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.lstrip("-").replace("-", "_")] = v
    return out


def _apply_config(parser, argv, cfg):
    """Re-parse with config values as defaults of the chosen subcommand."""
    ns = parser.parse_args(argv)
    sp = parser._subparsers._group_actions[0].choices[ns.command]
    known = {a.dest: a for a in sp._actions}
    flags = []
    for k, v in cfg.items():
        if k not in known or k in ("help", "config"):
            raise ConfigError(f"unknown config key {k!r} for {ns.command}", field=k)
        act = known[k]
        if isinstance(act, argparse._StoreTrueAction):
            if v.lower() in ("1", "true", "yes"):
                flags.append(act.option_strings[0])
            continue
        flags += [act.option_strings[0], v]
    # config first, then the user's flags so the latter win
    cmd_at = argv.index(ns.command)
    return parser.parse_args(_glue_lists(argv[:cmd_at + 1] + flags + argv[cmd_at + 1:]))


LIST_FLAGS = ("--rect", "--left", "--right", "--anchors", "--v-range")


def _glue_lists(argv):
    """Turn ``--rect -1,1,0,1`` into ``--rect=-1,1,0,1`` so argparse keeps the value."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in LIST_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") \
                and not argv[i + 1].startswith("--"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def run(argv=None) -> int:
    argv = _glue_lists(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            args = _apply_config(parser, argv, read_config(args.config))
        args.func(args)
        return EXIT_OK
    except (ConfigError, ProfileGapError, ProfileParseError, FileNotFoundError) as exc:
        _report(exc)
        return EXIT_CONFIG
    except StepFailure as exc:
        _report(exc, step=exc.step, cause=type(exc.cause).__name__)
        return EXIT_CONFIG if isinstance(exc.cause, (ProfileGapError, ProfileParseError)) else EXIT_NUMERIC
    except (FluxReconError, FloatingPointError, ArithmeticError) as exc:
        _report(exc)
        return EXIT_NUMERIC


def _report(exc, **extra):
    d = {"error": type(exc).__name__, "message": str(exc)}
    field = getattr(exc, "field", None)
    if field is not None:
        d["field"] = field
    step = getattr(exc, "step", None)
    if step is not None:
        d["step"] = step
    d.update(extra)
    sys.stderr.write(json.dumps(d) + "\n")


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
