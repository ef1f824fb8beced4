"""Command-line driver: single runs, convergence studies, and entropy traces.

Artifacts are plain CSV and JSON with shortest-round-trip decimal
formatting, so repeated runs on one platform produce byte-identical
files and downstream order computations lose no precision.  A run
writes ``fields_<t>.csv`` (final state, plus intermediates at the dump
cadence), ``entropy.csv`` (the per-step total-entropy trace), and
``run.json`` (configuration echo and summary statistics).  Convergence
studies fan out across processes when ``SWMHD_THREADS`` is set above 1;
each worker owns its grid.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .errors import SWMHDError
from .problems import get_problem, registry
from .solver import SchemeConfig, l1_error, linf_error, run, total_entropy

__all__ = ["main"]

_SCHEMES = ("ec", "es", "es-pp", "lf")
_FIELDS = ("h", "vx", "vy", "Bx", "By")

_INT_KEYS = ("nx", "ny", "p", "k")
_FLOAT_KEYS = ("mu", "t_end", "dump_every", "eps")
_STR_KEYS = ("problem", "scheme", "out", "dt_rule")


def _fmt(x) -> str:
    """Shortest decimal that round-trips to the same float."""
    return repr(float(x))


def _primitives(grid) -> list:
    u = grid.Uin
    h = u[0]
    return [h, u[1] / h, u[2] / h, u[3] / h, u[4] / h]


def _load_config(path: str) -> dict:
    """Flat key=value lines; '#' starts a comment; blank lines ignored."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {text!r}")
            key, _, val = text.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _merge_config(args: argparse.Namespace) -> dict:
    cfg = {}
    if getattr(args, "config", None):
        raw = _load_config(args.config)
        for key, val in raw.items():
            if key in _INT_KEYS:
                cfg[key] = int(val)
            elif key in _FLOAT_KEYS:
                cfg[key] = float(val)
            elif key in _STR_KEYS:
                cfg[key] = val
            else:
                raise ValueError(f"unknown config key {key!r}")
    for key in _INT_KEYS + _FLOAT_KEYS + _STR_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _scheme_config(cfg: dict, problem) -> SchemeConfig:
    return SchemeConfig(
        g=problem.g,
        mu=cfg.get("mu", 0.5),
        p=cfg.get("p", 3),
        k=cfg.get("k", 5),
        variant=cfg.get("scheme", "es"),
        bc=problem.bc,
        eps=cfg.get("eps", 1e-13),
        dt_rule=cfg.get("dt_rule", "standard"),
    )


def _resolutions(cfg: dict, problem):
    nx = cfg.get("nx")
    if nx is None:
        raise ValueError("nx is required (flag --nx or config key nx)")
    if nx <= 0:
        raise ValueError(f"nx must be positive, got {nx}")
    if problem.dims == 1:
        return nx, None
    ny = cfg.get("ny", nx)
    if ny <= 0:
        raise ValueError(f"ny must be positive, got {ny}")
    return nx, ny


def _write_fields(path: str, grid) -> None:
    prim = _primitives(grid)
    b = grid.bin
    with open(path, "w", newline="\n") as fh:
        if grid.dims == 1:
            fh.write("x,h,vx,vy,Bx,By,b\n")
            for i, xi in enumerate(grid.x):
                row = [xi] + [p[i] for p in prim] + [b[i]]
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        else:
            fh.write("x,y,h,vx,vy,Bx,By,b\n")
            x, y = grid.x, grid.y
            for j, yj in enumerate(y):
                for i, xi in enumerate(x):
                    row = [xi, yj] + [p[j, i] for p in prim] + [b[j, i]]
                    fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_entropy(path: str, trace) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("t,total_entropy\n")
        for t, s in zip(trace.t, trace.total_entropy):
            fh.write(f"{_fmt(t)},{_fmt(s)}\n")


def _coords(grid):
    if grid.dims == 1:
        return (grid.x,)
    return np.meshgrid(grid.x, grid.y)


def _errors_vs_exact(grid, problem, t: float) -> dict:
    exact = problem.exact(*_coords(grid), t)
    prim = _primitives(grid)
    out = {"l1": {}, "linf": {}}
    for name, num, ref in zip(_FIELDS, prim, exact):
        ref = np.broadcast_to(ref, num.shape)
        out["l1"][name] = l1_error(num, ref)
        out["linf"][name] = linf_error(num, ref)
    return out


def _fields_name(t: float) -> str:
    return f"fields_{t:.12g}.csv"


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _merge_config(args)
    if "problem" not in cfg:
        raise ValueError("problem is required (flag --problem or config key problem)")
    problem = get_problem(cfg["problem"])
    nx, ny = _resolutions(cfg, problem)
    scheme = _scheme_config(cfg, problem)
    t_end = cfg.get("t_end", problem.t_end)
    out_dir = cfg.get("out", ".")
    os.makedirs(out_dir, exist_ok=True)

    dump_every = cfg.get("dump_every")
    dumped = set()

    def dump(t, grid):
        name = _fields_name(t)
        if name not in dumped:
            _write_fields(os.path.join(out_dir, name), grid)
            dumped.add(name)

    on_step = None
    if dump_every is not None:
        if dump_every <= 0:
            raise ValueError(f"dump_every must be positive, got {dump_every}")
        next_dump = [dump_every]

        def on_step(steps, t, grid):
            if t >= next_dump[0] - 1e-12 * max(1.0, t_end):
                dump(t, grid)
                while next_dump[0] <= t + 1e-12 * max(1.0, t_end):
                    next_dump[0] += dump_every

    from .solver import make_grid
    dump(0.0, make_grid(problem, nx, ny))
    result = run(problem, scheme, nx, ny, t_end=t_end, on_step=on_step)
    dump(t_end, result.grid)
    _write_entropy(os.path.join(out_dir, "entropy.csv"), result.trace)

    summary = {
        "problem": problem.name,
        "nx": nx,
        "ny": ny,
        "scheme": scheme.variant,
        "p": scheme.p,
        "k": scheme.k,
        "mu": scheme.mu,
        "dt_rule": scheme.dt_rule,
        "t_end": t_end,
        "steps": result.steps,
        "wall_time_s": result.wall_time,
        "min_h": result.min_h,
        "final_entropy": result.trace.total_entropy[-1],
    }
    if problem.exact is not None:
        summary["errors"] = _errors_vs_exact(result.grid, problem, t_end)
    with open(os.path.join(out_dir, "run.json"), "w", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"{problem.name}: {result.steps} steps to t={t_end:g}, "
          f"min h={result.min_h:.3e}, wrote {out_dir}/run.json")
    return 0


def _convergence_worker(task):
    name, cfg_kwargs, nx, ny, t_end = task
    problem = get_problem(name)
    scheme = SchemeConfig(**cfg_kwargs)
    result = run(problem, scheme, nx, ny, t_end=t_end)
    grid = result.grid
    exact = problem.exact(*_coords(grid), t_end)
    idx = _FIELDS.index(problem.error_var)
    num = _primitives(grid)[idx]
    ref = np.broadcast_to(exact[idx], num.shape)
    return nx, l1_error(num, ref), linf_error(num, ref)


def _parse_resolutions(text: str) -> list:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"bad resolution list {text!r}; expected e.g. 10,20,40")
    if not values or any(v <= 0 for v in values):
        raise ValueError(f"resolutions must be positive integers, got {text!r}")
    return values


def cmd_convergence(args: argparse.Namespace) -> int:
    cfg = _merge_config(args)
    if "problem" not in cfg:
        raise ValueError("problem is required")
    problem = get_problem(cfg["problem"])
    if problem.exact is None:
        raise ValueError(f"problem {problem.name!r} has no exact solution to converge against")
    resolutions = _parse_resolutions(args.resolutions)
    # Exact-solution studies default to the fixed-exponent accuracy time
    # step so the spatial error stays dominant.
    cfg.setdefault("dt_rule", "accuracy")
    scheme = _scheme_config(cfg, problem)
    t_end = cfg.get("t_end", problem.t_end)
    tasks = [
        (problem.name, _scheme_kwargs(scheme), n,
         None if problem.dims == 1 else n, t_end)
        for n in resolutions
    ]
    workers = int(os.environ.get("SWMHD_THREADS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_convergence_worker, tasks))
    else:
        rows = [_convergence_worker(t) for t in tasks]

    lines = ["N,l1_error,l1_order,linf_error,linf_order"]
    print(f"{problem.name} ({scheme.variant}), error in {problem.error_var} at t={t_end:g}")
    print(f"{'N':>6} {'l1_error':>14} {'order':>6} {'linf_error':>14} {'order':>6}")
    prev = None
    for n, e1, einf in rows:
        o1 = oinf = ""
        if prev is not None and e1 > 0 and einf > 0:
            o1 = _fmt(np.log2(prev[1] / e1))
            oinf = _fmt(np.log2(prev[2] / einf))
        lines.append(f"{n},{_fmt(e1)},{o1},{_fmt(einf)},{oinf}")
        print(f"{n:>6} {e1:>14.6e} {o1[:5]:>6} {einf:>14.6e} {oinf[:5]:>6}")
        prev = (n, e1, einf)
    out_dir = cfg.get("out", ".")
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"convergence_{problem.name}_{scheme.variant}.csv")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return 0


def _scheme_kwargs(scheme: SchemeConfig) -> dict:
    return {
        "g": scheme.g,
        "mu": scheme.mu,
        "p": scheme.p,
        "k": scheme.k,
        "variant": scheme.variant,
        "bc": scheme.bc,
        "eps": scheme.eps,
        "dt_rule": scheme.dt_rule,
    }


def cmd_entropy_trace(args: argparse.Namespace) -> int:
    cfg = _merge_config(args)
    if "problem" not in cfg:
        raise ValueError("problem is required")
    problem = get_problem(cfg["problem"])
    resolutions = _parse_resolutions(args.resolutions)
    scheme = _scheme_config(cfg, problem)
    t_end = cfg.get("t_end", problem.t_end)
    out_dir = cfg.get("out", ".")
    os.makedirs(out_dir, exist_ok=True)
    for n in resolutions:
        ny = None if problem.dims == 1 else n
        result = run(problem, scheme, n, ny, t_end=t_end)
        path = os.path.join(out_dir, f"entropy_{problem.name}_{n}.csv")
        _write_entropy(path, result.trace)
        ent = np.array(result.trace.total_entropy)
        rise = float(np.max(np.diff(ent))) if len(ent) > 1 else 0.0
        print(f"N={n}: {result.steps} steps, entropy {ent[0]:.8e} -> {ent[-1]:.8e}, "
              f"max step increase {rise:.3e}, wrote {path}")
    return 0


def cmd_list_problems(args: argparse.Namespace) -> int:
    problems = registry()
    width = max(len(name) for name in problems)
    for name in sorted(problems):
        p = problems[name]
        dims = f"{p.dims}D"
        print(f"{name:<{width}}  {dims}  t_end={p.t_end:<6g} g={p.g:<6g} "
              f"bc={p.bc:<8} {p.description}")
    return 0


def _add_scheme_flags(sub: argparse.ArgumentParser, need_problem: bool = True) -> None:
    sub.add_argument("--problem", help="registered problem name")
    sub.add_argument("--config", help="key=value config file; flags override it")
    sub.add_argument("--nx", type=int, help="cells in x")
    sub.add_argument("--ny", type=int, help="cells in y (2D; defaults to nx)")
    sub.add_argument("--scheme", choices=_SCHEMES, help="flux variant (default es)")
    sub.add_argument("--p", type=int, help="half-width of the conservative part (order 2p)")
    sub.add_argument("--k", type=int, help="dissipation reconstruction order")
    sub.add_argument("--mu", type=float, help="Courant number (default 0.5)")
    sub.add_argument("--t-end", dest="t_end", type=float, help="override problem end time")
    sub.add_argument("--out", help="output directory (default .)")
    sub.add_argument("--dt-rule", dest="dt_rule", choices=("standard", "accuracy"),
                     help="time-step rule")
    sub.add_argument("--eps", type=float, help="dry-state tolerance for es-pp")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swmhd",
        description="High-order entropy-stable well-balanced schemes for "
                    "shallow water magnetohydrodynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one problem and dump artifacts")
    _add_scheme_flags(p_run)
    p_run.add_argument("--dump-every", dest="dump_every", type=float,
                       help="also dump fields every this much simulated time")
    p_run.set_defaults(func=cmd_run)

    p_conv = sub.add_parser("convergence", help="error/order table over resolutions")
    _add_scheme_flags(p_conv)
    p_conv.add_argument("--resolutions", required=True,
                        help="comma-separated cell counts, e.g. 10,20,40,80")
    p_conv.set_defaults(func=cmd_convergence)

    p_ent = sub.add_parser("entropy-trace", help="total-entropy time series per resolution")
    _add_scheme_flags(p_ent)
    p_ent.add_argument("--resolutions", required=True,
                       help="comma-separated cell counts, e.g. 100,200")
    p_ent.set_defaults(func=cmd_entropy_trace)

    p_list = sub.add_parser("list-problems", help="show the problem registry")
    p_list.set_defaults(func=cmd_list_problems)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (KeyError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SWMHDError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
