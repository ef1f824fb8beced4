"""Variable systems and the entropy pair of shallow water magnetohydrodynamics.

The conserved state is U = (h, h vx, h vy, h Bx, h By): water column
height, momentum, and magnetic flux per unit area (B carries velocity
units).  Bottom topography b(x, y) enters through the momentum source
g h grad(b) and through the entropy

    eta = 0.5 h (|v|^2 + |B|^2) + 0.5 g h^2 + g h b,

the total energy.  Its gradient with respect to U,

    V = (g (h + b) - 0.5 (|v|^2 + |B|^2), vx, vy, Bx, By),

symmetrizes the system once the non-conservative coupling term
(0, 0, 0, vx, vy) * div(h B) is included (the divergence of h B is zero
analytically but not discretely).

All functions broadcast: a "state" may hold single samples or whole
grids, with component arrays of any common shape.
"""

from typing import NamedTuple

import numpy as np

from .errors import NonPositiveHeight

__all__ = [
    "Conserved",
    "Primitive",
    "EntropyVars",
    "cons_to_prim",
    "prim_to_cons",
    "entropy",
    "entropy_vars",
    "entropy_flux",
    "entropy_potential",
    "physical_flux",
    "phi",
]


class Conserved(NamedTuple):
    h: np.ndarray   # water column height
    mx: np.ndarray  # x momentum h*vx
    my: np.ndarray  # y momentum h*vy
    px: np.ndarray  # magnetic flux h*Bx
    py: np.ndarray  # magnetic flux h*By


class Primitive(NamedTuple):
    h: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    Bx: np.ndarray
    By: np.ndarray


class EntropyVars(NamedTuple):
    v1: np.ndarray  # g*(h + b) - 0.5*(|v|^2 + |B|^2)
    v2: np.ndarray  # vx
    v3: np.ndarray  # vy
    v4: np.ndarray  # Bx
    v5: np.ndarray  # By


def _require_positive(h) -> None:
    if not np.all(np.asarray(h) > 0.0):
        raise NonPositiveHeight(f"min height {np.min(h):.6e} <= 0")


def cons_to_prim(u: Conserved) -> Primitive:
    """Divide out the height.  Raises NonPositiveHeight unless h > 0 everywhere."""
    h, mx, my, px, py = u
    _require_positive(h)
    return Primitive(h, mx / h, my / h, px / h, py / h)


def prim_to_cons(w: Primitive) -> Conserved:
    h, vx, vy, Bx, By = w
    return Conserved(h, h * vx, h * vy, h * Bx, h * By)


def entropy(u: Conserved, b, g: float):
    """Total energy density 0.5 h (|v|^2 + |B|^2) + 0.5 g h^2 + g h b."""
    h, mx, my, px, py = u
    _require_positive(h)
    return 0.5 * (mx * mx + my * my + px * px + py * py) / h + 0.5 * g * h * h + g * h * b


def entropy_vars(w: Primitive, b, g: float) -> EntropyVars:
    """Gradient of the entropy with respect to the conserved state."""
    h, vx, vy, Bx, By = w
    return EntropyVars(
        g * (h + b) - 0.5 * (vx * vx + vy * vy + Bx * Bx + By * By),
        vx, vy, Bx, By,
    )


def phi(v: EntropyVars):
    """Coefficient v . B of the magnetic coupling term, written in entropy variables."""
    return v.v2 * v.v4 + v.v3 * v.v5


def entropy_flux(w: Primitive, b, g: float, axis: int):
    """Entropy flux q_axis = (0.5(|v|^2+|B|^2) + g h + g b) h v_axis - h B_axis (v . B)."""
    h, vx, vy, Bx, By = w
    vdotB = vx * Bx + vy * By
    kin = 0.5 * (vx * vx + vy * vy + Bx * Bx + By * By)
    if axis == 0:
        return (kin + g * h + g * b) * h * vx - h * Bx * vdotB
    if axis == 1:
        return (kin + g * h + g * b) * h * vy - h * By * vdotB
    raise ValueError(f"axis must be 0 or 1, got {axis}")


def entropy_potential(w: Primitive, g: float, axis: int):
    """Entropy potential psi_axis = V . F_axis + phi * h B_axis - q_axis = 0.5 g h^2 v_axis."""
    h = w.h
    v_ax = (w.vx, w.vy)[axis]
    return 0.5 * g * h * h * v_ax


def physical_flux(w: Primitive, g: float, axis: int) -> np.ndarray:
    """Flux of the conservative part, stacked as a (5, ...) array."""
    h, vx, vy, Bx, By = w
    ph = 0.5 * g * h * h
    zero = 0.0 * np.asarray(h)
    if axis == 0:
        return np.stack(np.broadcast_arrays(
            h * vx,
            h * vx * vx - h * Bx * Bx + ph,
            h * vx * vy - h * Bx * By,
            zero,
            h * (vx * By - Bx * vy),
        ))
    if axis == 1:
        return np.stack(np.broadcast_arrays(
            h * vy,
            h * vx * vy - h * Bx * By,
            h * vy * vy - h * By * By + ph,
            h * (vy * Bx - By * vx),
            zero,
        ))
    raise ValueError(f"axis must be 0 or 1, got {axis}")
