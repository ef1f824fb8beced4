"""Grid containers, semi-discrete right-hand sides, and time integration.

Storage is structure-of-arrays: U has shape (5, nx + 2G) in one
dimension and (5, ny + 2G, nx + 2G) in two, with x on the fastest axis
and G = 3 ghost layers per side.  Two-dimensional right-hand sides are
assembled dimension by dimension; the y sweep reuses the x-direction
kernels on component-swapped, axis-swapped views (a strided access
pattern, no data reshuffling beyond the component permutation).  Ghost
filling is done by apply_bc; the rhs functions assume it has happened.
"""

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import InvalidLF, NonPositiveHeight, UnsupportedOrder
from .flux_ec import (EcFluxStencil, _SWAP, combination_coeffs,
                      high_order_ec_flux, high_order_source_mean)
from .flux_es import es_flux, lf_flux
from .positivity import limit_flux, limit_source_mean, pp_theta
from .state import Conserved, Primitive, cons_to_prim, entropy, prim_to_cons

__all__ = [
    "NGHOST",
    "Grid",
    "SchemeConfig",
    "EntropyTrace",
    "RunResult",
    "make_grid",
    "apply_bc",
    "rhs_1d",
    "rhs_2d",
    "compute_dt",
    "ssp_rk3",
    "ssp_rk3_step",
    "euler_step",
    "total_entropy",
    "l1_error",
    "linf_error",
    "run",
]

NGHOST = 3

# Courant cap protecting fixed-exponent accuracy-test time steps on coarse
# grids; inside the SSP-RK3 imaginary-axis stability interval (sqrt(3)).
ACCURACY_COURANT_CAP = 1.2

_VARIANTS = ("ec", "es", "es-pp", "lf")
_BCS = ("periodic", "outflow")


@dataclass(frozen=True)
class SchemeConfig:
    g: float = 1.0
    mu: float = 0.5
    p: int = 3
    k: int = 5
    variant: str = "es"
    bc: str = "periodic"
    eps: float = 1e-13
    dt_rule: str = "standard"

    def __post_init__(self):
        if self.g <= 0.0:
            raise ValueError(f"g must be positive, got {self.g}")
        if not 0.0 < self.mu <= 1.0:
            raise ValueError(f"mu must lie in (0, 1], got {self.mu}")
        if self.variant not in _VARIANTS:
            raise ValueError(f"variant must be one of {_VARIANTS}, got {self.variant!r}")
        if self.bc not in _BCS:
            raise ValueError(f"bc must be one of {_BCS}, got {self.bc!r}")
        if self.eps <= 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.dt_rule == "accuracy_test":
            object.__setattr__(self, "dt_rule", "accuracy")
        if self.dt_rule not in ("standard", "accuracy"):
            raise ValueError(f"dt_rule must be 'standard' or 'accuracy', got {self.dt_rule!r}")
        combination_coeffs(self.p)  # raises UnsupportedOrder for bad p
        if self.variant in ("es", "es-pp") and (self.k != 5 or self.p != 3):
            raise UnsupportedOrder(
                f"entropy-stable variants support (p, k) = (3, 5), got ({self.p}, {self.k})")


@dataclass
class Grid:
    dims: int
    nx: int
    dx: float
    xmin: float
    U: np.ndarray            # (5, [ny + 2G,] nx + 2G) conserved fields
    b: np.ndarray            # ([ny + 2G,] nx + 2G) topography
    ny: Optional[int] = None
    dy: Optional[float] = None
    ymin: Optional[float] = None
    ghost: int = NGHOST

    @property
    def x(self) -> np.ndarray:
        return self.xmin + np.arange(self.nx) * self.dx

    @property
    def y(self) -> np.ndarray:
        return self.ymin + np.arange(self.ny) * self.dy

    @property
    def interior(self):
        G = self.ghost
        return (slice(None),) + (slice(G, -G),) * self.dims

    @property
    def Uin(self) -> np.ndarray:
        return self.U[self.interior]

    @property
    def bin(self) -> np.ndarray:
        return self.b[self.interior[1:]]


@dataclass
class EntropyTrace:
    t: list = field(default_factory=list)
    total_entropy: list = field(default_factory=list)

    def append(self, t: float, s: float) -> None:
        self.t.append(t)
        self.total_entropy.append(s)


@dataclass
class RunResult:
    grid: Grid
    trace: EntropyTrace
    steps: int
    min_h: float
    wall_time: float


def make_grid(problem, nx: int, ny: Optional[int] = None) -> Grid:
    """Evaluate a problem's initial data and topography on uniform nodes.

    Nodes sit at xmin + i dx for i < nx, so refinements nest: every node
    of an N-grid is a node of the 2N-grid (on periodic domains the last
    node is the periodic image of xmin + L, not a duplicate of it).
    """
    G = NGHOST
    xmin, xmax = problem.xlim
    dx = (xmax - xmin) / nx
    x = xmin + np.arange(nx) * dx
    if problem.dims == 1:
        U = np.zeros((5, nx + 2 * G))
        b = np.zeros(nx + 2 * G)
        u = prim_to_cons(Primitive(*problem.init(x)))
        for c in range(5):
            U[c, G:-G] = np.broadcast_to(u[c], x.shape)
        b[G:-G] = np.broadcast_to(problem.topo(x), x.shape)
        grid = Grid(dims=1, nx=nx, dx=dx, xmin=xmin, U=U, b=b)
    else:
        ny = nx if ny is None else ny
        ymin, ymax = problem.ylim
        dy = (ymax - ymin) / ny
        y = ymin + np.arange(ny) * dy
        X, Y = np.meshgrid(x, y)
        U = np.zeros((5, ny + 2 * G, nx + 2 * G))
        b = np.zeros((ny + 2 * G, nx + 2 * G))
        u = prim_to_cons(Primitive(*problem.init(X, Y)))
        for c in range(5):
            U[c, G:-G, G:-G] = np.broadcast_to(u[c], X.shape)
        b[G:-G, G:-G] = np.broadcast_to(problem.topo(X, Y), X.shape)
        grid = Grid(dims=2, nx=nx, dx=dx, xmin=xmin, U=U, b=b, ny=ny, dy=dy, ymin=ymin)
    return apply_bc(grid, problem.bc)


def _fill_last(A: np.ndarray, bc: str) -> None:
    """Fill ghost entries along the last axis in place."""
    G = NGHOST
    n = A.shape[-1] - 2 * G
    if bc == "periodic":
        A[..., :G] = A[..., n:n + G]
        A[..., n + G:] = A[..., G:2 * G]
    elif bc == "outflow":
        A[..., :G] = A[..., G:G + 1]
        A[..., n + G:] = A[..., n + G - 1:n + G]
    else:
        raise ValueError(f"bc must be one of {_BCS}, got {bc!r}")


def apply_bc(grid: Grid, bc: str) -> Grid:
    """Fill ghost layers of the conserved fields and topography in place."""
    _fill_last(grid.U, bc)
    _fill_last(grid.b, bc)
    if grid.dims == 2:
        _fill_last(grid.U.swapaxes(1, 2), bc)
        _fill_last(grid.b.T, bc)
    return grid


def _pp_lam(cfg: SchemeConfig, dt: Optional[float], dh: float, dims: int) -> Optional[float]:
    if cfg.variant != "es-pp":
        return None
    if dt is None:
        raise ValueError("the positivity-limited variant needs dt to form the flux limiter")
    # the d-dimensional update splits into 2d per-interface pieces
    return dims * dt / dh


def _sweep(Up: np.ndarray, bp: np.ndarray, dh: float, cfg: SchemeConfig,
           lam: Optional[float]) -> np.ndarray:
    """RHS contribution of one direction, along the last axis of Up.

    Up, bp are ghost-filled; the return value covers interior nodes only.
    """
    G = NGHOST
    n = Up.shape[-1] - 2 * G
    w = cons_to_prim(Conserved(*Up))
    p = 1 if cfg.variant == "lf" else cfg.p

    def win(a):
        # nodal windows at offsets -(p-1)..p around the left node of each face
        return [a[..., G - 1 + o: G + n + o] for o in range(-(p - 1), p + 1)]

    cw = [win(c) for c in w]
    W = [Primitive(*(cw[c][o] for c in range(5))) for o in range(2 * p)]
    bW = win(bp)
    stencil = EcFluxStencil(W, bW)
    c0 = p - 1  # window position of the face's left node

    if cfg.variant == "ec":
        F = high_order_ec_flux(stencil, p, cfg.g)
    elif cfg.variant == "es":
        F = es_flux(stencil, p, cfg.k, cfg.g)
    elif cfg.variant == "lf":
        F = lf_flux(W[0], W[1], bW[0], bW[1], cfg.g)
    else:  # es-pp
        F = es_flux(stencil, p, cfg.k, cfg.g)
    thB = high_order_source_mean([Wo.h * Wo.Bx for Wo in W], p)
    tb = high_order_source_mean(bW, p)

    if cfg.variant == "es-pp":
        Flf = lf_flux(W[c0], W[c0 + 1], bW[c0], bW[c0 + 1], cfg.g)
        hl, hr = W[c0].h, W[c0 + 1].h
        theta = np.minimum(
            pp_theta(hl - 2.0 * lam * Flf[0], hl - 2.0 * lam * F[0], cfg.eps),
            pp_theta(hr + 2.0 * lam * Flf[0], hr + 2.0 * lam * F[0], cfg.eps),
        )
        F = limit_flux(F, Flf, theta)
        thB = limit_source_mean(thB, 0.5 * (hl * W[c0].Bx + hr * W[c0 + 1].Bx), theta)
        tb = limit_source_mean(tb, 0.5 * (bW[c0] + bW[c0 + 1]), theta)

    inner = slice(G, G + n)
    h_i = w.h[..., inner]
    vx_i = w.vx[..., inner]
    vy_i = w.vy[..., inner]
    dF = (F[..., 1:] - F[..., :-1]) / dh
    dhB = (thB[..., 1:] - thB[..., :-1]) / dh
    db = (tb[..., 1:] - tb[..., :-1]) / dh
    out = np.empty_like(dF)
    out[0] = -dF[0]
    out[1] = -dF[1] - cfg.g * h_i * db
    out[2] = -dF[2]
    out[3] = -dF[3] - vx_i * dhB
    out[4] = -dF[4] - vy_i * dhB
    return out


def rhs_1d(grid: Grid, cfg: SchemeConfig, dt: Optional[float] = None) -> np.ndarray:
    """Semi-discrete tendency of the interior nodes of a 1D grid."""
    return _sweep(grid.U, grid.b, grid.dx, cfg, _pp_lam(cfg, dt, grid.dx, 1))


def rhs_2d(grid: Grid, cfg: SchemeConfig, dt: Optional[float] = None) -> np.ndarray:
    """Semi-discrete tendency of the interior nodes of a 2D grid.

    The y sweep runs the x kernels on swapped components (vx <-> vy,
    Bx <-> By): the scheme is invariant under that relabeling, which
    also carries the dissipation and source structure to y.
    """
    G = NGHOST
    U, b = grid.U, grid.b
    perm = list(_SWAP)
    out = _sweep(U[:, G:-G, :], b[G:-G, :], grid.dx, cfg, _pp_lam(cfg, dt, grid.dx, 2))
    Us = U[perm][:, :, G:-G].swapaxes(1, 2)
    bs = b[:, G:-G].T
    outy = _sweep(Us, bs, grid.dy, cfg, _pp_lam(cfg, dt, grid.dy, 2))
    out += outy.swapaxes(1, 2)[perm]
    return out


def _max_speeds(grid: Grid, g: float):
    w = cons_to_prim(Conserved(*grid.Uin))
    ax = float(np.max(np.abs(w.vx) + np.sqrt(g * w.h + w.Bx * w.Bx)))
    if grid.dims == 1:
        return ax, None
    ay = float(np.max(np.abs(w.vy) + np.sqrt(g * w.h + w.By * w.By)))
    return ax, ay


def compute_dt(grid: Grid, cfg: SchemeConfig) -> float:
    """Time step from the CFL rule, or from the fixed-exponent accuracy rule.

    The accuracy rule uses dt = mu * dx**(2p/3) for the entropy-conservative
    variant and mu * dx**(k/3) otherwise, so that the O(dt^3) integrator
    error refines at least as fast as the spatial error.  It is capped by
    a Courant bound (and, for the limited variant, by the half CFL that
    the positivity proof needs) so coarse grids stay stable.
    """
    ax, ay = _max_speeds(grid, cfg.g)
    rate = ax / grid.dx if grid.dims == 1 else ax / grid.dx + ay / grid.dy
    dt = cfg.mu / rate
    if cfg.dt_rule == "accuracy":
        q = 2.0 * cfg.p / 3.0 if cfg.variant == "ec" else cfg.k / 3.0
        dt = min(cfg.mu * grid.dx ** q, ACCURACY_COURANT_CAP / rate)
    if cfg.variant == "es-pp":
        dt = min(dt, min(cfg.mu, 0.5) / rate)
    return dt


def ssp_rk3(u, L: Callable, dt: float):
    """One strong-stability-preserving RK3 step for du/dt = L(u)."""
    u1 = u + dt * L(u)
    u2 = 0.75 * u + 0.25 * (u1 + dt * L(u1))
    return u / 3.0 + (2.0 / 3.0) * (u2 + dt * L(u2))


def _make_tendency(grid: Grid, cfg: SchemeConfig, dt: Optional[float]) -> Callable:
    G = NGHOST

    def L(U: np.ndarray) -> np.ndarray:
        stage = replace(grid, U=U)
        apply_bc(stage, cfg.bc)
        dU = np.zeros_like(U)
        if grid.dims == 1:
            dU[:, G:-G] = rhs_1d(stage, cfg, dt)
        else:
            dU[:, G:-G, G:-G] = rhs_2d(stage, cfg, dt)
        return dU

    return L


def _check_heights(grid: Grid, U: np.ndarray) -> None:
    hmin = float(np.min(U[grid.interior][0]))
    if hmin <= 0.0:
        raise NonPositiveHeight(f"min height {hmin:.6e} <= 0 after update")


def ssp_rk3_step(grid: Grid, cfg: SchemeConfig, dt: float) -> Grid:
    """Advance one SSP-RK3 step; returns a new grid at t + dt."""
    U = ssp_rk3(grid.U, _make_tendency(grid, cfg, dt), dt)
    out = replace(grid, U=U)
    _check_heights(out, U)
    return out


def euler_step(grid: Grid, cfg: SchemeConfig, dt: float) -> Grid:
    """Advance one forward Euler step (used for the first-order LF reference)."""
    U = grid.U + dt * _make_tendency(grid, cfg, dt)(grid.U)
    out = replace(grid, U=U)
    _check_heights(out, U)
    return out


def total_entropy(grid: Grid, g: float) -> float:
    """Entropy integral over the interior, sum(eta) * dx [* dy]."""
    s = float(np.sum(entropy(Conserved(*grid.Uin), grid.bin, g)))
    vol = grid.dx if grid.dims == 1 else grid.dx * grid.dy
    return s * vol


def l1_error(a, b) -> float:
    return float(np.mean(np.abs(np.asarray(a) - np.asarray(b))))


def linf_error(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def run(problem, cfg: SchemeConfig, nx: int, ny: Optional[int] = None,
        t_end: Optional[float] = None, on_step: Optional[Callable] = None) -> RunResult:
    """Integrate a registered problem to t_end.

    The final step is clipped to land exactly on t_end.  On an InvalidLF
    abort the offending step is retried once with dt halved; a second
    failure propagates.  Lower-level errors are re-raised with the step
    index and time attached.
    """
    grid = make_grid(problem, nx, ny)
    if t_end is None:
        t_end = problem.t_end
    stepper = euler_step if cfg.variant == "lf" else ssp_rk3_step
    trace = EntropyTrace()
    t = 0.0
    steps = 0
    min_h = float(np.min(grid.Uin[0]))
    trace.append(t, total_entropy(grid, cfg.g))
    t_tol = 1e-12 * max(1.0, abs(t_end))
    wall0 = time.perf_counter()
    while t_end - t > t_tol:
        dt = min(compute_dt(grid, cfg), t_end - t)
        try:
            try:
                grid = stepper(grid, cfg, dt)
            except InvalidLF:
                dt *= 0.5
                grid = stepper(grid, cfg, dt)
        except (NonPositiveHeight, InvalidLF) as e:
            raise type(e)(f"step {steps} (t = {t:.6g}, dt = {dt:.4g}): {e}") from None
        t += dt
        steps += 1
        min_h = min(min_h, float(np.min(grid.Uin[0])))
        trace.append(t, total_entropy(grid, cfg.g))
        if on_step is not None:
            on_step(steps, t, grid)
    apply_bc(grid, cfg.bc)
    return RunResult(grid, trace, steps, min_h, time.perf_counter() - wall0)
