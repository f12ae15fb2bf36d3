"""Curvature of the ansatz metric and of its principal orbits.

All Ricci values are reported in unit frames: ``nu = d/dt``, ``zeta = d_z / H``
and a unit horizontal ``E``. Curvature has units of length^-2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .profiles import AnsatzParams, ProfileGrid, derivative, node_derivatives, value


@dataclass(frozen=True)
class ShapeDiag:
    """Eigenvalues of the shape operator ``L_t`` and its traces.

    ``dl_fiber`` and ``dl_base`` are the t-derivatives of the two eigenvalues,
    so ``g(L' X, X)`` is available for unit ``X``.
    """

    l_fiber: float
    l_base: float
    tr: float
    tr_sq: float
    tr_prime: float
    dl_fiber: float
    dl_base: float
    n: int


class RicciDiag(NamedTuple):
    rc_normal: float
    rc_fiber: float
    rc_base: float


class SubmersionCurvature(NamedTuple):
    K_fiber_plane: float
    rc_zeta: float
    rc_offset: float
    phi_sectional: float


class HyperbolicCurvature(NamedTuple):
    sec: float
    rc_unit: float


def _require_regular(H: float, F: float, t: float) -> None:
    if not (H > 0 and F > 0):
        raise ValueError(f"singular orbit at t = {t}: H = {H}, F = {F}")


def _profile_at(grid: ProfileGrid, t: float, fields_orders) -> dict:
    out = {}
    for name, order in fields_orders:
        if order == 0:
            out[name] = value(grid, name, t)
        else:
            out[name + "'" * order] = derivative(grid, name, order, t)
    return out


def shape_operator(grid: ProfileGrid, t: float, n: int) -> ShapeDiag:
    """Shape operator of the orbit at ``t``: ``(H'/H) d_z (x) eta + (F'/F) Id``."""
    p = _profile_at(grid, t, [("H", 0), ("F", 0), ("H", 1), ("F", 1), ("H", 2), ("F", 2)])
    _require_regular(p["H"], p["F"], t)
    return shape_from_values(n, p["H"], p["H'"], p["H''"], p["F"], p["F'"], p["F''"])


def shape_from_values(n, H, H1, H2, F, F1, F2) -> ShapeDiag:
    r = 2 * n - 2
    lf, lb = H1 / H, F1 / F
    dlf = H2 / H - lf**2
    dlb = F2 / F - lb**2
    return ShapeDiag(
        l_fiber=lf,
        l_base=lb,
        tr=lf + r * lb,
        tr_sq=lf**2 + r * lb**2,
        tr_prime=H2 / H + r * F2 / F - lf**2 - r * lb**2,
        dl_fiber=dlf,
        dl_base=dlb,
        n=n,
    )


def ricci_from_shape(rc_t_diag: tuple[float, float], shape: ShapeDiag) -> RicciDiag:
    """Ricci of ``dt^2 + g_t`` from the slice Ricci and the shape operator.

    Uses ``Rc(N,N) = -tr L' - tr L^2`` and
    ``Rc(X,X) = Rc_t(X,X) - tr(L) g(LX,X) - g(L'X,X)`` on unit vectors. The
    mixed term ``Rc(X,N)`` vanishes for this ansatz since ``tr L`` and ``L``
    are constant along each orbit.
    """
    rc_t_fiber, rc_t_base = rc_t_diag
    return RicciDiag(
        rc_normal=-shape.tr_prime - shape.tr_sq,
        rc_fiber=rc_t_fiber - shape.tr * shape.l_fiber - shape.dl_fiber,
        rc_base=rc_t_base - shape.tr * shape.l_base - shape.dl_base,
    )


def ricci_terms(n, k, q, H, H1, H2, F, F1, F2):
    """Closed-form unit-frame Ricci entries; broadcasts over numpy arrays."""
    r = 2 * n - 2
    twist = H**2 * q**2 / F**4
    rc_normal = -H2 / H - r * F2 / F
    rc_fiber = r * twist - H2 / H - r * (F1 / F) * (H1 / H)
    rc_base = k / F**2 - 2 * twist - F2 / F - (F1 / F) * (H1 / H) - (r - 1) * (F1 / F) ** 2
    return rc_normal, rc_fiber, rc_base


def ricci_ansatz(params: AnsatzParams, grid: ProfileGrid, t: float) -> RicciDiag:
    """Diagonal Ricci curvature of the ansatz metric at ``t`` (unit frame)."""
    p = _profile_at(grid, t, [("H", 0), ("F", 0), ("H", 1), ("F", 1), ("H", 2), ("F", 2)])
    _require_regular(p["H"], p["F"], t)
    return RicciDiag(
        *(
            float(v)
            for v in ricci_terms(
                params.n, params.k, params.q, p["H"], p["H'"], p["H''"], p["F"], p["F'"], p["F''"]
            )
        )
    )


def oneill_A(params: AnsatzParams, H: float, F: float) -> float:
    """Coefficient ``Hq/F^2`` of the O'Neill tensor: ``A_X zeta = -(Hq/F^2) J X``."""
    if F == 0:
        raise ValueError("F = 0: O'Neill tensor undefined on a collapsed base")
    return H * params.q / F**2


def submersion_curvature(
    params: AnsatzParams, H: float, F: float, base_hol_sec: float
) -> SubmersionCurvature:
    """Curvature of the orbit ``(P, g_t)`` as a Riemannian submersion over ``N``.

    ``base_hol_sec`` is the holomorphic sectional curvature of ``(N, g_N)``.
    The fiber-plane term is ``H^2 q^2 / F^4``; the base has complex dimension
    ``n - 1``.
    """
    if F == 0:
        raise ValueError("F = 0: submersion curvature undefined")
    twist = H**2 * params.q**2 / F**4
    return SubmersionCurvature(
        K_fiber_plane=twist,
        rc_zeta=2 * (params.n - 1) * twist,
        rc_offset=-2 * twist,
        phi_sectional=base_hol_sec / F**2 - 3 * twist,
    )


def slice_ricci(params: AnsatzParams, H: float, F: float) -> tuple[float, float]:
    """Unit-frame Ricci ``(fiber, base)`` of the orbit metric ``g_t``."""
    sub = submersion_curvature(params, H, F, 0.0)
    return sub.rc_zeta, params.k / F**2 + sub.rc_offset


def kahler_residual(grid: ProfileGrid, q: int, t: float) -> float:
    """``F F' - q H``; zero exactly where the structure is almost Kahler."""
    p = _profile_at(grid, t, [("H", 0), ("F", 0), ("F", 1)])
    return p["F"] * p["F'"] - q * p["H"]


def hyperbolic_curvature(a_slope: float, H: float, n: int) -> HyperbolicCurvature:
    """Curvature of the slice ``H^2 dz^2 + exp(2 a z) g_flat`` of dimension ``2n - 1``."""
    if H <= 0:
        raise ValueError("H must be positive")
    sec = -((a_slope / H) ** 2)
    return HyperbolicCurvature(sec=sec + 0.0, rc_unit=2 * (n - 1) * sec + 0.0)


def curvature_table(params: AnsatzParams, grid: ProfileGrid) -> np.ndarray:
    """Rows ``t, rc_normal, rc_fiber, rc_base, kahler_residual`` at interior nodes."""
    mask = grid.interior_mask()
    d = {(name, o): node_derivatives(grid, name, o) for name in ("H", "F") for o in (1, 2)}
    H, F = grid.H[mask], grid.F[mask]
    rc = ricci_terms(
        params.n,
        params.k,
        params.q,
        H,
        d["H", 1][mask],
        d["H", 2][mask],
        F,
        d["F", 1][mask],
        d["F", 2][mask],
    )
    kr = F * d["F", 1][mask] - params.q * H
    return np.column_stack([grid.t[mask], *rc, kr])
