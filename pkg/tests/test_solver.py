import numpy as np
import pytest
from scipy.optimize import brentq

from swmhd.errors import NonPositiveHeight
from swmhd.problems import get_problem
from swmhd.solver import (NGHOST, Grid, SchemeConfig, apply_bc, compute_dt,
                          l1_error, linf_error, make_grid, rhs_1d, rhs_2d, run,
                          ssp_rk3, ssp_rk3_step, total_entropy)
from swmhd.state import Primitive, prim_to_cons


def test_ssp_rk3_scalar_oracle():
    # u' = -u, u0 = 1, dt = 0.1: one step gives
    # 1 - dt + dt^2/2 - dt^3/6 = 0.9048333...
    u = ssp_rk3(np.array(1.0), lambda v: -v, 0.1)
    assert float(u) == pytest.approx(0.90483333333333333, abs=1e-10)


def test_ssp_rk3_linear_stage_combination():
    # For linear L the step equals the cubic Taylor polynomial of exp.
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    dt = 0.05
    u = np.array([1.0, 0.0])
    got = ssp_rk3(u, lambda v: A @ v, dt)
    R = np.eye(2) + dt * A + dt ** 2 / 2 * A @ A + dt ** 3 / 6 * A @ A @ A
    np.testing.assert_allclose(got, R @ u, rtol=1e-14)


def test_config_validation():
    with pytest.raises(ValueError):
        SchemeConfig(mu=0.0)
    with pytest.raises(ValueError):
        SchemeConfig(variant="superbee")
    with pytest.raises(ValueError):
        SchemeConfig(bc="reflecting")
    with pytest.raises(Exception):
        SchemeConfig(variant="es", p=2)  # dissipation tabulated for (3, 5) only
    cfg = SchemeConfig(dt_rule="accuracy_test")  # legacy alias
    assert cfg.dt_rule == "accuracy"


def test_make_grid_shapes_and_coordinates():
    prob = get_problem("acc1d")
    grid = make_grid(prob, 16)
    assert grid.U.shape == (5, 16 + 2 * NGHOST)
    # Vertex registration: first node on xmin, last one spacing short of
    # the far end, so refinements share nodes.
    assert grid.x[0] == pytest.approx(0.0, abs=1e-15)
    assert grid.x[-1] == pytest.approx(1.0 - grid.dx)
    prob2 = get_problem("wb2d_smooth")
    grid2 = make_grid(prob2, 12, 8)
    assert grid2.U.shape == (5, 8 + 2 * NGHOST, 12 + 2 * NGHOST)
    assert grid2.Uin.shape == (5, 8, 12)
    assert grid2.dx == pytest.approx(2.0 / 12)
    assert grid2.dy == pytest.approx(1.0 / 8)


def test_apply_bc_periodic_and_outflow():
    prob = get_problem("acc1d")
    grid = make_grid(prob, 16)
    G = NGHOST
    np.testing.assert_allclose(grid.U[:, :G], grid.U[:, -2 * G:-G], rtol=1e-14)
    np.testing.assert_allclose(grid.U[:, -G:], grid.U[:, G:2 * G], rtol=1e-14)
    grid.U[0, G] = 7.0
    apply_bc(grid, "outflow")
    np.testing.assert_allclose(grid.U[0, :G], 7.0)


def lake_at_rest_max_rhs(name, variant, p, k=5):
    prob = get_problem(name)
    cfg = SchemeConfig(g=prob.g, p=p, k=k, variant=variant, bc=prob.bc)
    if prob.dims == 1:
        grid = make_grid(prob, 40)
        return float(np.max(np.abs(rhs_1d(grid, cfg))))
    grid = make_grid(prob, 24, 16)
    return float(np.max(np.abs(rhs_2d(grid, cfg))))


@pytest.mark.parametrize("name", ["wb1d_smooth", "wb1d_disc"])
def test_lake_at_rest_rhs_vanishes_1d(name):
    for p in (1, 2, 3):
        assert lake_at_rest_max_rhs(name, "ec", p) < 1e-13
    assert lake_at_rest_max_rhs(name, "es", 3) < 1e-13


@pytest.mark.parametrize("name", ["wb2d_smooth", "wb2d_disc"])
def test_lake_at_rest_rhs_vanishes_2d(name):
    for p in (1, 2, 3):
        assert lake_at_rest_max_rhs(name, "ec", p) < 1e-13
    assert lake_at_rest_max_rhs(name, "es", 3) < 1e-13


def test_moving_equilibrium_rhs_vanishes_p1():
    # A discrete moving steady state: h v ladder constant across node
    # pairs and v^2/2 + g(h+b) constant at nodes make the p=1
    # entropy-conservative tendency vanish identically.
    prob = get_problem("wb1d_smooth")
    g = prob.g
    n = 16
    grid = make_grid(prob, n)
    b = grid.bin.copy()
    C2 = 22.06605
    h = np.empty(n)
    v = np.empty(n)
    h[0] = 2.0
    v[0] = np.sqrt(2.0 * (C2 - g * (h[0] + b[0])))
    C1 = h[0] * v[0]
    for i in range(1, n):
        def res(hn):
            vn = 4.0 * C1 / (h[i - 1] + hn) - v[i - 1]
            return 0.5 * vn * vn + g * (hn + b[i]) - C2
        scan = np.linspace(0.3, 5.0, 400)
        vals = np.array([res(s) for s in scan])
        sign = np.sign(vals)
        flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
        assert flips.size, "no bracket for the equilibrium ladder"
        j = flips[np.argmin(np.abs(scan[flips] - h[i - 1]))]
        h[i] = brentq(res, scan[j], scan[j + 1], xtol=1e-15, rtol=8.9e-16)
        v[i] = 4.0 * C1 / (h[i - 1] + h[i]) - v[i - 1]
    z = np.zeros(n)
    u = prim_to_cons(Primitive(h, v, z, z, z))
    G = NGHOST
    for c in range(5):
        grid.U[c, G:-G] = u[c]
    # The ladder is built on the interior; outflow ghosts copy the edge
    # nodes, which breaks the pairwise relation there, so test the
    # interior away from the boundary stencil.
    apply_bc(grid, prob.bc)
    cfg = SchemeConfig(g=g, p=1, variant="ec", bc=prob.bc)
    r = rhs_1d(grid, cfg)
    assert float(np.max(np.abs(r[:, 2:-2]))) < 1e-12


def test_mass_conservation_periodic():
    prob = get_problem("acc1d")
    cfg = SchemeConfig(g=prob.g, variant="es", bc=prob.bc)
    grid = make_grid(prob, 32)
    m0 = float(np.sum(grid.Uin[0]))
    for _ in range(5):
        grid = ssp_rk3_step(grid, cfg, compute_dt(grid, cfg))
    assert float(np.sum(grid.Uin[0])) == pytest.approx(m0, rel=1e-14)


def test_y_sweep_matches_x_sweep_on_rotated_data():
    # Data varying only along y, with swapped components, must produce the
    # x-sweep tendency with rows and components swapped back.
    prob = get_problem("acc1d")
    n = 24
    grid1 = make_grid(prob, n)
    cfg = SchemeConfig(g=prob.g, variant="es", bc="periodic")
    r1 = rhs_1d(grid1, cfg)

    G = NGHOST
    U2 = np.zeros((5, n + 2 * G, n + 2 * G))
    perm = [0, 2, 1, 4, 3]
    for c in range(5):
        U2[perm[c]] = grid1.U[c][:, None]  # vary along y, uniform in x
    b2 = np.tile(grid1.b[:, None], (1, n + 2 * G))
    grid2 = Grid(dims=2, nx=n, dx=grid1.dx, xmin=0.0, U=U2, b=b2,
                 ny=n, dy=grid1.dx, ymin=0.0)
    apply_bc(grid2, "periodic")
    r2 = rhs_2d(grid2, cfg)
    np.testing.assert_allclose(r2[perm][:, :, 0], r1, rtol=1e-12, atol=1e-13)


def test_compute_dt_rules():
    prob = get_problem("acc1d")
    grid = make_grid(prob, 40)
    # Max speed for h=1, |vy| <= 1, vx=0, Bx=1, g=1: sqrt(2) in x.
    cfg = SchemeConfig(g=1.0, mu=0.5, variant="ec", bc="periodic")
    assert compute_dt(grid, cfg) == pytest.approx(0.5 * grid.dx / np.sqrt(2.0), rel=1e-12)
    acc = SchemeConfig(g=1.0, mu=0.5, variant="ec", bc="periodic", dt_rule="accuracy")
    assert compute_dt(grid, acc) == pytest.approx(0.5 * grid.dx ** 2, rel=1e-12)
    acc_es = SchemeConfig(g=1.0, mu=0.5, variant="es", bc="periodic", dt_rule="accuracy")
    assert compute_dt(grid, acc_es) == pytest.approx(0.5 * grid.dx ** (5.0 / 3.0), rel=1e-12)


def test_accuracy_rule_is_courant_capped_on_coarse_grids():
    prob = get_problem("acc1d")
    grid = make_grid(prob, 2)  # dx = 0.5: mu dx^2 would be huge in Courant units
    cfg = SchemeConfig(g=1.0, mu=0.5, variant="ec", bc="periodic", dt_rule="accuracy")
    dt = compute_dt(grid, cfg)
    rate = np.sqrt(2.0) / grid.dx
    assert dt <= 1.2 / rate + 1e-15


def test_run_lands_exactly_on_t_end():
    prob = get_problem("acc1d")
    cfg = SchemeConfig(g=prob.g, variant="ec", bc=prob.bc)
    res = run(prob, cfg, 16, t_end=0.1)
    assert res.trace.t[-1] == pytest.approx(0.1, abs=1e-12)
    assert res.steps == len(res.trace.t) - 1
    assert res.min_h > 0.0


def test_run_reports_failure_step():
    # A deliberately hostile state: deep dry pocket that the unlimited
    # scheme cannot survive.
    prob = get_problem("vortex_neardry")
    cfg = SchemeConfig(g=prob.g, variant="es", bc=prob.bc, dt_rule="accuracy")
    with pytest.raises(NonPositiveHeight) as err:
        run(prob, cfg, 20, 20)
    assert "step" in str(err.value)


def test_total_entropy_matches_direct_sum():
    prob = get_problem("wb1d_smooth")
    grid = make_grid(prob, 20)
    from swmhd.state import Conserved, entropy
    direct = float(np.sum(entropy(Conserved(*grid.Uin), grid.bin, prob.g))) * grid.dx
    assert total_entropy(grid, prob.g) == pytest.approx(direct, rel=1e-14)


def test_error_norms():
    a = np.array([1.0, 2.0, 3.0])
    b = np.array([1.0, 1.0, 5.0])
    assert l1_error(a, b) == pytest.approx(1.0)
    assert linf_error(a, b) == pytest.approx(2.0)


def test_entropy_decays_for_es_on_discontinuous_data():
    prob = get_problem("rp1")
    cfg = SchemeConfig(g=prob.g, variant="es", bc=prob.bc)
    res = run(prob, cfg, 100, t_end=0.1)
    ent = np.array(res.trace.total_entropy)
    assert float(np.max(np.diff(ent))) <= 1e-12


def test_entropy_flat_for_ec_on_smooth_data():
    # The semi-discrete scheme conserves entropy exactly; what remains is
    # the O(dt^3) Runge-Kutta drift, about 1e-9 relative on this run.
    prob = get_problem("acc1d")
    cfg = SchemeConfig(g=prob.g, variant="ec", bc=prob.bc, dt_rule="accuracy")
    res = run(prob, cfg, 32, t_end=0.2)
    ent = np.array(res.trace.total_entropy)
    assert float(np.max(np.abs(ent - ent[0]))) < 1e-8 * abs(ent[0])
