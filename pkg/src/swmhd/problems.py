"""Benchmark problem registry: initial data, topography, exact solutions.

Each problem bundles a domain, gravity constant, default boundary
condition and final time with vectorized callables for the initial
primitive fields and the bottom topography.  Problems with a known
closed-form solution also carry `exact`, and `error_var` names the
field whose convergence the problem is meant to measure.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .solver import SchemeConfig, run
from .state import Primitive

__all__ = [
    "ProblemSpec",
    "VortexParams",
    "registry",
    "get_problem",
    "vortex_exact",
    "reference_solution",
]


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    dims: int
    xlim: tuple
    g: float
    bc: str
    t_end: float
    init: Callable      # (x[, y]) -> 5 primitive component arrays
    topo: Callable      # (x[, y]) -> bottom topography
    ylim: Optional[tuple] = None
    exact: Optional[Callable] = None  # (x[, y], t) -> 5 primitive component arrays
    error_var: str = "h"
    description: str = ""


class VortexParams(NamedTuple):
    g: float = 1.0
    h_max: float = 1.0
    v_max: float = 0.2
    B_max: float = 0.1


def _wrap(u, lo, hi):
    return (u - lo) % (hi - lo) + lo


def vortex_exact(x, y, t, params: VortexParams) -> Primitive:
    """Translating vortex: a steady co-moving profile advected with speed (1, 1).

    The azimuthal velocity and magnetic field share the envelope
    r * exp(0.5 (1 - r^2)); radial momentum balance then fixes the height
    through g dh/dr = (v_theta^2 - B_theta^2) / r, giving the closed form
    below.  Coordinates are wrapped back into the periodic box.
    """
    xr = _wrap(np.asarray(x) - t, -8.0, 8.0)
    yr = _wrap(np.asarray(y) - t, -8.0, 8.0)
    r2 = xr * xr + yr * yr
    env = np.exp(0.5 * (1.0 - r2))
    h = params.h_max - (params.v_max ** 2 - params.B_max ** 2) * np.exp(1.0 - r2) / (2.0 * params.g)
    return Primitive(
        h,
        1.0 - params.v_max * env * yr,
        1.0 + params.v_max * env * xr,
        -params.B_max * env * yr,
        params.B_max * env * xr,
    )


def _flat(x, *rest):
    return np.zeros_like(np.asarray(x, dtype=float))


def _acc1d() -> ProblemSpec:
    def init(x):
        s = np.sin(2.0 * np.pi * x)
        one = np.ones_like(x)
        return (one, 0.0 * x, s, one, s)

    def exact(x, t):
        s = np.sin(2.0 * np.pi * (x + t))
        one = np.ones_like(x)
        return (one, 0.0 * x, s, one, s)

    return ProblemSpec(
        "acc1d", 1, (0.0, 1.0), 1.0, "periodic", 1.0, init, _flat,
        exact=exact, error_var="vy",
        description="smooth traveling transverse wave on a flat bottom",
    )


def _smooth_b_1d(x):
    return 0.2 * np.exp(-0.5 * (x + 1.0) ** 2) + 0.3 * np.exp(-((x - 1.5) ** 2))


def _disc_b_1d(x):
    return np.where(np.abs(x) <= 4.0, 0.5, 0.0)


def _lake_at_rest_1d(name, topo, description) -> ProblemSpec:
    def init(x):
        b = topo(x)
        z = np.zeros_like(b)
        return (1.0 - b, z, z, z, z)

    def exact(x, t):
        return init(x)

    return ProblemSpec(name, 1, (-10.0, 10.0), 1.0, "outflow", 10.0, init, topo,
                       exact=exact, description=description)


def _steady_wavy() -> ProblemSpec:
    def init(x):
        z = np.zeros_like(x)
        return (1.0 + z, 1.0 + z,
                z, np.where(x < 0.0, 0.05, 0.1), np.where(x < 0.0, 0.0, 0.1))

    return ProblemSpec(
        "steady_wavy", 1, (-10.0, 10.0), 9.812, "outflow", 10.0, init, _smooth_b_1d,
        description="piecewise-constant inflow settling over a wavy bottom",
    )


def _hump_b(x):
    return np.where((x > 1.4) & (x < 1.6),
                    0.25 * (np.cos(10.0 * np.pi * (x - 1.5)) + 1.0), 0.0)


def _perturb1d(name, eps, with_B, description) -> ProblemSpec:
    def init(x):
        b = _hump_b(x)
        h = np.where((x > 1.1) & (x < 1.2), 1.0 - b + eps, 1.0 - b)
        z = np.zeros_like(x)
        Bx = 1.0 / h if with_B else z
        return (h, z, z, Bx, z)

    return ProblemSpec(name, 1, (0.0, 2.0), 9.812, "outflow", 0.2, init, _hump_b,
                       description=description)


def _rp1() -> ProblemSpec:
    def init(x):
        left = x < 0.0
        z = np.zeros_like(x)
        return (np.where(left, 1.0, 2.0), z, z,
                np.where(left, 1.0, 0.5), np.where(left, 0.0, 1.0))

    return ProblemSpec(
        "rp1", 1, (-1.0, 1.0), 1.0, "outflow", 0.4, init, _flat,
        description="Riemann problem: two magnetogravity and two Alfven waves",
    )


def _vortex(name, params: VortexParams, description) -> ProblemSpec:
    def init(x, y):
        return vortex_exact(x, y, 0.0, params)

    def exact(x, y, t):
        return vortex_exact(x, y, t, params)

    return ProblemSpec(name, 2, (-8.0, 8.0), params.g, "periodic", 16.0, init,
                       _flat, ylim=(-8.0, 8.0), exact=exact, error_var="h",
                       description=description)


def _smooth_b_2d(x, y):
    return 0.8 * np.exp(-5.0 * (x - 0.9) ** 2 - 50.0 * (y - 0.5) ** 2)


def _disc_b_2d(x, y):
    inside = (x >= 0.5) & (x <= 1.5) & (y >= 0.25) & (y <= 0.75)
    return np.where(inside, 0.5, 0.0)


def _lake_at_rest_2d(name, topo, description) -> ProblemSpec:
    def init(x, y):
        b = topo(x, y)
        z = np.zeros_like(b)
        return (1.0 - b, z, z, z, z)

    def exact(x, y, t):
        return init(x, y)

    return ProblemSpec(name, 2, (0.0, 2.0), 1.0, "outflow", 1.0, init, topo,
                       ylim=(0.0, 1.0), exact=exact, description=description)


def _perturb2d() -> ProblemSpec:
    def init(x, y):
        b = _smooth_b_2d(x, y)
        h = np.where((x > 0.05) & (x < 0.15), 1.01 - b, 1.0 - b)
        z = np.zeros_like(b)
        return (h, z, z, z, z)

    return ProblemSpec(
        "perturb2d", 2, (0.0, 2.0), 9.812, "outflow", 0.6, init, _smooth_b_2d,
        ylim=(0.0, 1.0),
        description="right-going surface disturbance passing a submerged hump",
    )


def _orszag_tang() -> ProblemSpec:
    def init(x, y):
        return (np.full_like(x, 25.0 / 9.0), -np.sin(y), np.sin(x),
                -np.sin(y), np.sin(2.0 * x))

    two_pi = 2.0 * np.pi
    return ProblemSpec(
        "orszag_tang", 2, (0.0, two_pi), 1.0, "periodic", 2.0, init, _flat,
        ylim=(0.0, two_pi),
        description="smooth vortical data developing a turbulent shock pattern",
    )


def _rotor() -> ProblemSpec:
    def init(x, y):
        r = np.sqrt(x * x + y * y)
        disk = r < 0.1
        h = np.where(disk, 10.0, 1.0)
        return (h, np.where(disk, -y, 0.0), np.where(disk, x, 0.0),
                1.0 / h, np.zeros_like(h))

    return ProblemSpec(
        "rotor", 2, (-1.0, 1.0), 1.0, "outflow", 0.2, init, _flat,
        ylim=(-1.0, 1.0),
        description="dense spinning disk in a light ambient fluid, h Bx = 1",
    )


_NEARDRY_HMAX = 1e-6 + (0.2 ** 2 - 0.1 ** 2) * np.e / 2.0


def registry() -> dict:
    """All registered problems, keyed by name."""
    problems = [
        _acc1d(),
        _lake_at_rest_1d("wb1d_smooth", _smooth_b_1d, "lake at rest over two smooth bumps"),
        _lake_at_rest_1d("wb1d_disc", _disc_b_1d, "lake at rest over a rectangular step"),
        _steady_wavy(),
        _perturb1d("perturb1d_large", 0.2, False, "0.2 pulse on a lake at rest, no magnetic field"),
        _perturb1d("perturb1d_small", 0.001, False, "0.001 pulse on a lake at rest, no magnetic field"),
        _perturb1d("perturb1d_mhd_large", 0.2, True, "0.2 pulse on a lake at rest, h Bx = 1"),
        _perturb1d("perturb1d_mhd_small", 0.001, True, "0.001 pulse on a lake at rest, h Bx = 1"),
        _rp1(),
        _vortex("vortex", VortexParams(), "translating vortex, exact solution known"),
        _vortex("vortex_neardry", VortexParams(h_max=_NEARDRY_HMAX),
                "translating vortex with lowest height 1e-6"),
        _lake_at_rest_2d("wb2d_smooth", _smooth_b_2d, "lake at rest over an elliptic bump"),
        _lake_at_rest_2d("wb2d_disc", _disc_b_2d, "lake at rest over a rectangular plateau"),
        _perturb2d(),
        _orszag_tang(),
        _rotor(),
    ]
    return {p.name: p for p in problems}


def get_problem(name: str) -> ProblemSpec:
    problems = registry()
    if name not in problems:
        known = ", ".join(sorted(problems))
        raise KeyError(f"unknown problem {name!r}; known problems: {known}")
    return problems[name]


def reference_solution(problem: ProblemSpec, resolution: int, scheme: str = "lf",
                       t_end: Optional[float] = None):
    """Fine-grid reference run for problems without a closed-form solution.

    scheme="lf" integrates the first-order Lax-Friedrichs scheme with
    forward Euler; scheme="es" uses the fifth-order entropy-stable one.
    Returns the final grid; sample its interior fields to compare
    against coarse runs.
    """
    cfg = SchemeConfig(g=problem.g, variant=scheme, bc=problem.bc)
    ny = None if problem.dims == 1 else resolution
    return run(problem, cfg, resolution, ny=ny, t_end=t_end).grid
