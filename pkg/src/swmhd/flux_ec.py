"""Entropy-conservative two-point fluxes and their high-order combinations.

The two-point flux below satisfies the discrete entropy condition

    [[V]] . F = [[psi]] - [[phi]] <hBx> + g [[h b vx]] - g [[h vx]] <b>

for every pair of admissible states ([[.]] jump, <.> arithmetic mean),
which makes the plain flux-difference scheme conserve total entropy
semi-discretely when paired with the matching source-term averages.
Linear combinations over wider stencils raise the order to 2p while
keeping the entropy condition, provided the source averages use the
same combination coefficients.

Averages of products (<h^2>, <h b>, <h Bx>) are formed from nodal
products, never from products of averages; the distinction is what
makes the entropy condition hold exactly.
"""

from typing import NamedTuple, Sequence

import numpy as np

from .errors import UnsupportedOrder
from .state import Primitive, entropy_vars, entropy_potential, phi

__all__ = [
    "CombinationCoeffs",
    "EcFluxStencil",
    "combination_coeffs",
    "ec_flux_x",
    "ec_flux_y",
    "high_order_ec_flux",
    "high_order_source_mean",
    "numerical_entropy_flux",
]

# alpha_r^p solving sum_r alpha_r r^(2j+1) = delta_{j0} for j < p, so that
# the stride-r sub-scheme errors (odd powers of r) cancel through order 2p.
_COEFFS = {
    1: (1.0,),
    2: (4.0 / 3.0, -1.0 / 6.0),
    3: (3.0 / 2.0, -3.0 / 10.0, 1.0 / 30.0),
}

# y-direction quantities follow from the x-direction ones by swapping
# (vx, Bx) <-> (vy, By) and permuting equations the same way.
_SWAP = (0, 2, 1, 4, 3)


class CombinationCoeffs(NamedTuple):
    p: int
    alpha: tuple


class EcFluxStencil(NamedTuple):
    """Symmetric interface window: 2p states and topography values.

    Window position p-1 is the node left of the interface, position p the
    node right of it.  Entries broadcast, so a stencil may describe one
    interface or a whole line of interfaces at once.
    """
    w: Sequence[Primitive]
    b: Sequence


def combination_coeffs(p: int) -> CombinationCoeffs:
    if p not in _COEFFS:
        raise UnsupportedOrder(f"no combination coefficients for p={p} (supported: 1, 2, 3)")
    return CombinationCoeffs(p, _COEFFS[p])


def _swap_state(w: Primitive) -> Primitive:
    return Primitive(w.h, w.vy, w.vx, w.By, w.Bx)


def ec_flux_x(wl: Primitive, wr: Primitive, bl, br, g: float) -> np.ndarray:
    """Entropy-conservative x-flux of a state pair, stacked (5, ...)."""
    hm = 0.5 * (wl.h + wr.h)
    vxm = 0.5 * (wl.vx + wr.vx)
    vym = 0.5 * (wl.vy + wr.vy)
    Bxm = 0.5 * (wl.Bx + wr.Bx)
    Bym = 0.5 * (wl.By + wr.By)
    h2m = 0.5 * (wl.h * wl.h + wr.h * wr.h)
    hBxm = 0.5 * (wl.h * wl.Bx + wr.h * wr.Bx)
    hbm = 0.5 * (wl.h * bl + wr.h * br)
    bm = 0.5 * (np.asarray(bl) + np.asarray(br))
    hv = hm * vxm
    return np.stack(np.broadcast_arrays(
        hv,
        hv * vxm + 0.5 * g * h2m - hBxm * Bxm + g * (hbm - hm * bm),
        hv * vym - hBxm * Bym,
        hv * Bxm - hBxm * vxm,
        hv * Bym - hBxm * vym,
    ))


def ec_flux_y(wl: Primitive, wr: Primitive, bl, br, g: float) -> np.ndarray:
    f = ec_flux_x(_swap_state(wl), _swap_state(wr), bl, br, g)
    return f[list(_SWAP)]


def high_order_ec_flux(stencil: EcFluxStencil, p: int, g: float) -> np.ndarray:
    """Order-2p entropy-conservative interface flux.

    Combines two-point fluxes over node pairs (i-s, i-s+r) for strides
    r <= p and shifts s < r, weighted by the tabulated coefficients.
    """
    w, b = stencil
    alpha = combination_coeffs(p).alpha
    if len(w) != 2 * p or len(b) != 2 * p:
        raise ValueError(f"stencil needs 2p={2 * p} entries, got {len(w)} states / {len(b)} topo")
    c = p - 1  # window position of node i
    flux = None
    for r, a_r in enumerate(alpha, start=1):
        for s in range(r):
            f = ec_flux_x(w[c - s], w[c - s + r], b[c - s], b[c - s + r], g)
            flux = a_r * f if flux is None else flux + a_r * f
    return flux


def high_order_source_mean(values: Sequence, p: int):
    """Interface average of a nodal quantity, matched to the order-2p flux.

    Same stride/shift structure and the same coefficients as the flux
    combination; the pairing is what keeps well-balance and the entropy
    condition at high order.
    """
    alpha = combination_coeffs(p).alpha
    if len(values) != 2 * p:
        raise ValueError(f"window needs 2p={2 * p} entries, got {len(values)}")
    c = p - 1
    out = None
    for r, a_r in enumerate(alpha, start=1):
        for s in range(r):
            m = 0.5 * (np.asarray(values[c - s]) + np.asarray(values[c - s + r]))
            out = a_r * m if out is None else out + a_r * m
    return out


def numerical_entropy_flux(wl: Primitive, wr: Primitive, bl, br, g: float):
    """Numerical entropy flux consistent with q; the entropy-conservative
    scheme satisfies a local entropy identity with exactly this flux."""
    f = ec_flux_x(wl, wr, bl, br, g)
    vl = entropy_vars(wl, bl, g)
    vr = entropy_vars(wr, br, g)
    vm = [0.5 * (a + c) for a, c in zip(vl, vr)]
    vdotf = sum(vm_k * f_k for vm_k, f_k in zip(vm, f))
    phim = 0.5 * (phi(vl) + phi(vr))
    hBxm = 0.5 * (wl.h * wl.Bx + wr.h * wr.Bx)
    psim = 0.5 * (entropy_potential(wl, g, 0) + entropy_potential(wr, g, 0))
    hvxm = 0.5 * (wl.h * wl.vx + wr.h * wr.vx)
    bm = 0.5 * (np.asarray(bl) + np.asarray(br))
    hbvxm = 0.5 * (wl.h * bl * wl.vx + wr.h * br * wr.vx)
    return vdotf + phim * hBxm - psim + g * hvxm * bm - g * hbvxm
