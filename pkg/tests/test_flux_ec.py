import numpy as np
import pytest

from swmhd.errors import UnsupportedOrder
from swmhd.flux_ec import (EcFluxStencil, combination_coeffs, ec_flux_x,
                           ec_flux_y, high_order_ec_flux,
                           high_order_source_mean, numerical_entropy_flux)
from swmhd.state import (Primitive, entropy_potential, entropy_vars, phi,
                         physical_flux)


def random_primitive(rng, n):
    return Primitive(
        rng.uniform(0.1, 10.0, n),
        rng.uniform(-5.0, 5.0, n),
        rng.uniform(-5.0, 5.0, n),
        rng.uniform(-5.0, 5.0, n),
        rng.uniform(-5.0, 5.0, n),
    )


def entropy_condition_residual(wl, wr, bl, br, g, axis):
    """[[V]] . F* - ([[psi]] - [[phi]] <h B_ax> + g [[h b v_ax]] - g [[h v_ax]] <b>)."""
    flux = (ec_flux_x, ec_flux_y)[axis]
    f = flux(wl, wr, bl, br, g)
    vl = np.array(entropy_vars(wl, bl, g))
    vr = np.array(entropy_vars(wr, br, g))
    lhs = np.einsum("c...,c...->...", vr - vl, f)
    v_ax = lambda w: (w.vx, w.vy)[axis]
    B_ax = lambda w: (w.Bx, w.By)[axis]
    jump_psi = entropy_potential(wr, g, axis) - entropy_potential(wl, g, axis)
    jump_phi = phi(entropy_vars(wr, br, g)) - phi(entropy_vars(wl, bl, g))
    mean_hB = 0.5 * (wl.h * B_ax(wl) + wr.h * B_ax(wr))
    jump_hbv = wr.h * br * v_ax(wr) - wl.h * bl * v_ax(wl)
    jump_hv = wr.h * v_ax(wr) - wl.h * v_ax(wl)
    mean_b = 0.5 * (np.asarray(bl) + np.asarray(br))
    rhs = jump_psi - jump_phi * mean_hB + g * jump_hbv - g * jump_hv * mean_b
    return lhs - rhs


def test_entropy_condition_x_and_y():
    rng = np.random.default_rng(10)
    n = 10_000
    wl, wr = random_primitive(rng, n), random_primitive(rng, n)
    bl, br = rng.uniform(-1.0, 1.0, n), rng.uniform(-1.0, 1.0, n)
    for axis in (0, 1):
        res = entropy_condition_residual(wl, wr, bl, br, 1.0, axis)
        assert float(np.max(np.abs(res))) < 1e-12


def test_two_point_consistency():
    w = Primitive(2.3, 0.7, -1.1, 0.4, 0.9)
    f = ec_flux_x(w, w, 0.3, 0.3, 1.4)
    np.testing.assert_allclose(f, physical_flux(w, 1.4, 0), rtol=1e-14, atol=1e-14)
    f = ec_flux_y(w, w, 0.3, 0.3, 1.4)
    np.testing.assert_allclose(f, physical_flux(w, 1.4, 1), rtol=1e-14, atol=1e-14)


def test_two_point_symmetry():
    rng = np.random.default_rng(11)
    wl, wr = random_primitive(rng, 100), random_primitive(rng, 100)
    bl, br = rng.uniform(-1, 1, 100), rng.uniform(-1, 1, 100)
    np.testing.assert_allclose(ec_flux_x(wl, wr, bl, br, 1.0),
                               ec_flux_x(wr, wl, br, bl, 1.0), rtol=1e-13, atol=1e-13)


def test_flat_bottom_drops_topography_terms():
    # With b=0 on both sides the momentum flux is plain mean-of-products.
    wl = Primitive(1.0, 1.0, 0.0, 0.0, 0.0)
    wr = Primitive(3.0, 2.0, 0.0, 0.0, 0.0)
    f = ec_flux_x(wl, wr, 0.0, 0.0, 2.0)
    # <h><vx> = 2 * 1.5 = 3; <h><vx>^2 + g <h^2>/2 = 2*2.25 + 5 = 9.5
    np.testing.assert_allclose(f[:2], [3.0, 9.5], rtol=1e-14)


def test_combination_coeff_moments():
    # sum_r alpha_r r^(2j+1) = delta_{j0}: consistency plus cancellation of
    # every odd-power error through order 2p.
    for p in (1, 2, 3):
        alpha = combination_coeffs(p).alpha
        for j in range(p):
            moment = sum(a * (r + 1) ** (2 * j + 1) for r, a in enumerate(alpha))
            assert moment == pytest.approx(1.0 if j == 0 else 0.0, abs=1e-14)


def test_combination_coeffs_unsupported():
    with pytest.raises(UnsupportedOrder):
        combination_coeffs(4)


def test_high_order_flux_consistency():
    w = Primitive(1.7, -0.4, 0.8, 1.1, -0.6)
    for p in (1, 2, 3):
        st = EcFluxStencil([w] * (2 * p), [0.25] * (2 * p))
        f = high_order_ec_flux(st, p, 1.0)
        np.testing.assert_allclose(f, physical_flux(w, 1.0, 0), rtol=1e-13, atol=1e-13)


def test_high_order_flux_rejects_bad_window():
    w = Primitive(1.0, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        high_order_ec_flux(EcFluxStencil([w] * 4, [0.0] * 4), 3, 1.0)


def test_interior_order_of_flux_difference():
    # On smooth periodic data the flux difference over dx approximates
    # d(F)/dx to order 2p.
    g = 1.0
    errs = {p: [] for p in (1, 2, 3)}
    ns = (16, 32, 64, 128)
    for n in ns:
        x = (np.arange(n) + 0.5) / n
        dx = 1.0 / n
        w = Primitive(2.0 + 0.1 * np.sin(2 * np.pi * x),
                      0.3 * np.cos(2 * np.pi * x),
                      0.2 * np.sin(2 * np.pi * x),
                      1.0 + 0.1 * np.cos(2 * np.pi * x),
                      0.1 * np.sin(2 * np.pi * x))
        b = np.zeros(n)
        k = 2 * np.pi * np.fft.fftfreq(n, d=dx)
        f = physical_flux(w, g, 0)
        dfdx = np.real(np.fft.ifft(1j * k * np.fft.fft(f, axis=-1), axis=-1))
        for p in (1, 2, 3):
            roll = lambda a, s: Primitive(*[np.roll(c, -s) for c in a])
            win = [roll(w, s) for s in range(-(p - 1), p + 1)]
            bwin = [np.roll(b, -s) for s in range(-(p - 1), p + 1)]
            fr = high_order_ec_flux(EcFluxStencil(win, bwin), p, g)
            fl = np.roll(fr, 1, axis=-1)
            errs[p].append(float(np.max(np.abs((fr - fl) / dx - dfdx))))
    for p in (1, 2, 3):
        order = np.log2(errs[p][-2] / errs[p][-1])
        assert order > 2 * p - 0.3, (p, errs[p])


def test_source_mean_consistency_and_window():
    vals = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    for p in (1, 2, 3):
        m = high_order_source_mean([2.5] * (2 * p), p)
        assert m == pytest.approx(2.5, rel=1e-14)
    with pytest.raises(ValueError):
        high_order_source_mean(vals, 2)


def test_source_mean_matches_flux_combination_structure():
    # alpha-weighted pair means: p=2 on window (a,b,c,d) gives
    # 4/3 * (b+c)/2 - 1/6 * ((a+c)/2 + (b+d)/2) / ... one mean per shift.
    a, b, c, d = 1.0, 2.0, 4.0, 8.0
    m = high_order_source_mean([a, b, c, d], 2)
    expected = 4.0 / 3.0 * (b + c) / 2.0 - 1.0 / 6.0 * ((b + d) / 2.0 + (a + c) / 2.0)
    assert m == pytest.approx(expected, rel=1e-14)


def test_numerical_entropy_flux_telescopes():
    # The local entropy identity: V_i . (F*(i,i+1) - F*(i-1,i)) plus the
    # matched source terms telescopes to Q(i,i+1) - Q(i-1,i); here check
    # the x-direction identity on random triples.
    rng = np.random.default_rng(12)
    g = 1.0
    n = 2000
    w = [random_primitive(rng, n) for _ in range(3)]
    b = [rng.uniform(-1, 1, n) for _ in range(3)]
    fL = ec_flux_x(w[0], w[1], b[0], b[1], g)
    fR = ec_flux_x(w[1], w[2], b[1], b[2], g)
    qL = numerical_entropy_flux(w[0], w[1], b[0], b[1], g)
    qR = numerical_entropy_flux(w[1], w[2], b[1], b[2], g)
    v1 = np.array(entropy_vars(w[1], b[1], g))
    phi1 = phi(entropy_vars(w[1], b[1], g))
    hB = w[1].h * w[1].Bx
    hv = w[1].h * w[1].vx
    hbv = w[1].h * b[1] * w[1].vx
    # Source contributions at node 1 use the two-point interface means.
    def mean(f, wl, wr, bl, br):
        return 0.5 * (f(wl, bl) + f(wr, br))
    dhB = mean(lambda w_, b_: w_.h * w_.Bx, w[1], w[2], b[1], b[2]) \
        - mean(lambda w_, b_: w_.h * w_.Bx, w[0], w[1], b[0], b[1])
    db = mean(lambda w_, b_: np.asarray(b_), w[1], w[2], b[1], b[2]) \
        - mean(lambda w_, b_: np.asarray(b_), w[0], w[1], b[0], b[1])
    lhs = np.einsum("c...,c...->...", v1, fR - fL) + phi1 * dhB + g * hv * db
    rhs = qR - qL
    assert float(np.max(np.abs(lhs - rhs))) < 1e-11
