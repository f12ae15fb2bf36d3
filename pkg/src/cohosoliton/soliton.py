"""Gradient Ricci soliton equations for the ansatz and their solutions.

The soliton equation ``Rc + Hess f = lam g`` with ``f = f(t)`` reduces to
three scalar ODEs (normal, fiber and base directions). In the almost-Kahler
case ``F F' = q H`` the change of variables ``ds = F F' dt`` linearizes the
system: ``beta = 2s + beta0``, ``phi = (B/q) s + C`` and ``alpha`` solves

    q^2 alpha' = k - lam beta - 2 (n-1) q^2 alpha / beta + q B alpha,

which is integrated in closed form with the factor
``mu(s) = beta^(n-1) exp(-s B / q)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ._numerics import adaptive_simpson, fornberg_weights
from .curvature import hyperbolic_curvature, ricci_from_shape, shape_from_values
from .exceptions import ProfileError, QuadratureError
from .profiles import (
    AnsatzParams,
    ProfileGrid,
    SProfile,
    build_grid,
    derivative,
    from_s,
    hyperbolic_profile,
    node_derivatives,
    value,
)

log = logging.getLogger(__name__)

RESIDUAL_COLUMNS = ("r_normal", "r_fiber", "r_base", "r_kahler", "r_killing")
CLOSURE_MODES = ("fiber-collapse", "full-collapse", "none")
EXACT_TOLERANCE = 1e-7
FD_TOLERANCE = 1e-5


@dataclass(frozen=True)
class SolitonResidual:
    r_normal: float
    r_fiber: float
    r_base: float
    r_kahler: float
    r_killing: float

    def as_tuple(self) -> tuple[float, ...]:
        return (self.r_normal, self.r_fiber, self.r_base, self.r_kahler, self.r_killing)

    def max_abs(self) -> float:
        return max(abs(v) for v in self.as_tuple())


@dataclass(frozen=True)
class Defect:
    """One closure condition: ``measured`` must equal (or exceed) ``required``."""

    name: str
    measured: float
    required: float
    tolerance: float
    relation: str = "eq"

    @property
    def ok(self) -> bool:
        if self.relation == "gt":
            return self.measured > self.required
        return abs(self.measured - self.required) <= self.tolerance

    def as_tuple(self) -> tuple:
        return (self.name, self.measured, self.required, self.tolerance)


@dataclass(frozen=True)
class ClosureReport:
    mode: str
    defects: tuple[Defect, ...] = ()

    @property
    def passed(self) -> bool:
        return all(d.ok for d in self.defects)

    def failed(self) -> list[Defect]:
        return [d for d in self.defects if not d.ok]

    def defect(self, name: str) -> Defect:
        for d in self.defects:
            if d.name == name:
                return d
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "pass": bool(self.passed),
            "defects": [
                {
                    "name": d.name,
                    "measured": float(d.measured),
                    "required": float(d.required),
                    "tolerance": float(d.tolerance),
                    "relation": d.relation,
                    "ok": bool(d.ok),
                }
                for d in self.defects
            ],
        }


# ---------------------------------------------------------------------------
# residuals


def residual_terms(n, k, lam, q, H, H1, H2, F, F1, F2, f1, f2):
    """Soliton residuals, broadcasting over arrays.

    Each of the first three entries is ``lam`` minus one line of the reduced
    system in a unit frame.
    """
    r = 2 * n - 2
    twist = H**2 * q**2 / F**4
    hh, ff = H1 / H, F1 / F
    normal = -H2 / H - r * F2 / F + f2
    fiber = r * twist - H2 / H - r * hh * ff + f1 * hh
    base = k / F**2 - 2 * twist - F2 / F - (r - 1) * ff**2 - hh * ff + f1 * ff
    return (
        lam - normal,
        lam - fiber,
        lam - base,
        F * F1 - q * H,
        f2 * H - f1 * H1,
    )


def _local(grid: ProfileGrid, t: float) -> dict:
    vals = {name: value(grid, name, t) for name in ("H", "F")}
    if not (vals["H"] > 0 and vals["F"] > 0):
        raise ValueError(f"singular orbit at t = {t}")
    for name, order in (("H", 1), ("H", 2), ("F", 1), ("F", 2), ("f", 1), ("f", 2)):
        vals[name + str(order)] = derivative(grid, name, order, t)
    return vals


def residual_full(params: AnsatzParams, grid: ProfileGrid, t: float) -> SolitonResidual:
    """Defect of the full soliton system at an interior ``t``."""
    v = _local(grid, t)
    terms = residual_terms(
        params.n, params.k, params.lam, params.q,
        v["H"], v["H1"], v["H2"], v["F"], v["F1"], v["F2"], v["f1"], v["f2"],
    )
    return SolitonResidual(*(float(x) for x in terms))


def residual_kahler(params: AnsatzParams, grid: ProfileGrid, t: float) -> tuple[float, float]:
    """Defect of the almost-Kahler reduced system ``(qH - FF', lam - base line)``."""
    if params.q == 0:
        raise ValueError("q = 0: the almost-Kahler reduction needs a twisted fiber")
    v = _local(grid, t)
    F, F1 = v["F"], v["F1"]
    rA = params.q * v["H"] - F * F1
    rB = params.lam - (
        params.k / F**2 - 2 * params.n * (F1 / F) ** 2 - 2 * v["F2"] / F + v["f1"] * F1 / F
    )
    return float(rA), float(rB)


def residual_table(params: AnsatzParams, grid: ProfileGrid) -> np.ndarray:
    """Rows ``t, r_normal, r_fiber, r_base, r_kahler, r_killing`` at interior nodes."""
    mask = grid.interior_mask()
    d = {
        (name, o): node_derivatives(grid, name, o)[mask]
        for name in ("H", "F", "f")
        for o in (1, 2)
    }
    terms = residual_terms(
        params.n, params.k, params.lam, params.q,
        grid.H[mask], d["H", 1], d["H", 2], grid.F[mask], d["F", 1], d["F", 2], d["f", 1], d["f", 2],
    )
    return np.column_stack([grid.t[mask], *terms])


# ---------------------------------------------------------------------------
# almost-Kahler quadrature


def _check_q(params: AnsatzParams) -> None:
    if params.q == 0:
        raise ValueError("q = 0: the quadrature path is disabled; use the product path")


def alpha_rate(params: AnsatzParams, B: float, s, alpha, beta):
    """``d alpha / ds`` from the linear first-order ODE."""
    n, k, lam, q = params.n, params.k, params.lam, params.q
    return (k - lam * beta) / q**2 - 2 * (n - 1) * alpha / beta + (B / q) * alpha


def _alpha_derivatives(params: AnsatzParams, B: float, alpha, beta, alpha_dot):
    """Second and third ``s``-derivatives of ``alpha`` implied by the ODE."""
    n, lam, q = params.n, params.lam, params.q
    m = 2 * (n - 1)
    lin = alpha_dot * beta - 2 * alpha
    a2 = -2 * lam / q**2 - m * lin / beta**2 + (B / q) * alpha_dot
    a3 = -m * (a2 / beta - 4 * lin / beta**3) + (B / q) * a2
    return a2, a3


def _validate_quadrature_range(beta0, s0, s_end, alpha0, count):
    if count < 5:
        raise ValueError("count must be at least 5")
    if not s_end > s0:
        raise ValueError("s_end must exceed s0")
    b_start, b_end = 2 * s0 + beta0, 2 * s_end + beta0
    if b_start < 0 or b_end <= 0:
        raise ValueError("beta = 2s + beta0 must be positive on the range")
    if b_start == 0 and alpha0 != 0:
        raise ValueError("beta(s0) = 0 requires alpha(s0) = 0")


def solve_quadrature(
    params: AnsatzParams,
    beta0: float,
    B: float,
    C: float,
    alpha_init: tuple[float, float],
    s_end: float,
    count: int,
    rtol: float = 1e-10,
) -> SProfile:
    """Solve the almost-Kahler system on ``count`` equispaced ``s`` samples.

    ``alpha`` is propagated node to node by the integrating-factor identity

        alpha(s_i) = alpha(s_{i-1}) mu(s_{i-1}) / mu(s_i)
                     + int_{s_{i-1}}^{s_i} mu(x) / mu(s_i) g(x) dx,

    ``g = (k - lam beta) / q^2``, which equals the global closed form but
    never forms ``mu`` itself (it over- or underflows on long ranges). Each
    segment integral uses adaptive Simpson at relative tolerance ``rtol``.

    A start at ``beta(s0) = 0`` (a point orbit) is admitted when
    ``alpha(s0) = 0``; ``mu(s0)`` then vanishes.
    """
    _check_q(params)
    s0, alpha0 = alpha_init
    _validate_quadrature_range(beta0, s0, s_end, alpha0, count)
    n, k, lam, q = params.n, params.k, params.lam, params.q

    s = np.linspace(s0, s_end, int(count))
    beta = 2 * s + beta0

    def log_mu(x):
        with np.errstate(divide="ignore"):
            return (n - 1) * np.log(2 * x + beta0) - x * B / q

    lm = log_mu(s)

    def integrand(x, idx):
        ratio = np.exp(log_mu(x) - lm[idx + 1])
        return ratio * (k - lam * (2 * x + beta0)) / q**2

    seg = adaptive_simpson(integrand, s[:-1], s[1:], rtol=rtol)
    carry = np.exp(lm[:-1] - lm[1:])

    alpha = np.empty_like(s)
    alpha[0] = alpha0
    for i in range(1, len(s)):
        alpha[i] = alpha[i - 1] * carry[i - 1] + seg[i - 1]

    with np.errstate(divide="ignore", invalid="ignore"):
        alpha_dot = alpha_rate(params, B, s, alpha, beta)
    if beta[0] == 0:
        # limit of the ODE at a point orbit: n q^2 alpha' = k
        alpha_dot[0] = k / (n * q**2)

    phi = (B / q) * s + C
    log.debug("quadrature: n=%s k=%s lam=%s q=%s beta0=%s B=%s on [%s, %s]", n, k, lam, q, beta0, B, s0, s_end)
    return SProfile(
        s=s,
        alpha=alpha,
        beta=beta,
        phi=phi,
        constants={"A": float(beta0), "B": float(B), "C": float(C), "D": float(k - lam * beta0)},
        alpha_dot=alpha_dot,
        q=q,
    )


def _rk4(params, beta0, B, s0, alpha0, s_end, steps):
    s = np.linspace(s0, s_end, steps + 1)
    h = (s_end - s0) / steps
    out = np.empty_like(s)
    out[0] = a = alpha0

    def rhs(x, y):
        return alpha_rate(params, B, x, y, 2 * x + beta0)

    for i in range(steps):
        x = s[i]
        k1 = rhs(x, a)
        k2 = rhs(x + h / 2, a + h / 2 * k1)
        k3 = rhs(x + h / 2, a + h / 2 * k2)
        k4 = rhs(x + h, a + h * k3)
        a = a + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = a
    return s, out


def oracle_integrate(
    params: AnsatzParams,
    beta0: float,
    B: float,
    alpha_init: tuple[float, float],
    s_end: float,
    step: float,
    C: float = 0.0,
    halving_tol: float = 1e-4,
) -> SProfile:
    """Fixed-step classical RK4 solution of the same ODE.

    Independent of :func:`solve_quadrature`; it exists to cross-check it.
    The step must divide the range into an integer number of steps. A rerun
    at half the step must agree to ``halving_tol`` or the step is rejected.
    """
    _check_q(params)
    s0, alpha0 = alpha_init
    if 2 * s0 + beta0 <= 0 or 2 * s_end + beta0 <= 0:
        raise ValueError("the RK4 oracle needs beta > 0 on the closed range")
    steps = int(round((s_end - s0) / step))
    if steps < 1 or not math.isclose(steps * step, s_end - s0, rel_tol=1e-9):
        raise ValueError("step must divide the range into whole steps")
    s, alpha = _rk4(params, beta0, B, s0, alpha0, s_end, steps)
    _, fine = _rk4(params, beta0, B, s0, alpha0, s_end, 2 * steps)
    gap = float(np.max(np.abs(fine[::2] - alpha) / (1 + np.abs(alpha))))
    if gap > halving_tol:
        raise QuadratureError(f"RK4 step {step} too large: step-halving disagreement {gap:.3g}")
    beta = 2 * s + beta0
    return SProfile(
        s=s,
        alpha=alpha,
        beta=beta,
        phi=(B / params.q) * s + C,
        constants={"A": float(beta0), "B": float(B), "C": float(C)},
        alpha_dot=alpha_rate(params, B, s, alpha, beta),
        q=params.q,
    )


def profile_from_quadrature(
    sprofile: SProfile, params: AnsatzParams, t_anchor: float = 0.0
) -> ProfileGrid:
    """Map an ODE-produced ``s`` profile to ``t`` with exact node derivatives.

    With ``d/dt = q H d/ds``, ``H = sqrt(alpha)``, ``F = sqrt(beta)`` and
    ``f' = B H`` every t-derivative up to third order follows from ``alpha``
    and the ODE.
    """
    if sprofile.alpha_dot is None:
        raise ValueError("sprofile carries no ODE derivative data")
    q = params.q
    B = sprofile.constants["B"]
    grid = from_s(sprofile, q, t_anchor)
    alpha, beta = sprofile.alpha, sprofile.beta
    a1 = np.array(sprofile.alpha_dot)
    with np.errstate(divide="ignore", invalid="ignore"):
        a2, a3 = _alpha_derivatives(params, B, alpha, beta, a1)
    H, F = grid.H, grid.F
    with np.errstate(divide="ignore", invalid="ignore"):
        table = {
            ("H", 1): q * a1 / 2,
            ("H", 2): q**2 * H * a2 / 2,
            ("H", 3): q**3 * (a1 * a2 / 4 + alpha * a3 / 2),
            ("F", 1): q * H / F,
            ("F", 2): q**2 * (a1 / (2 * F) - alpha / F**3),
            ("F", 3): q**3 * H * (a2 / (2 * F) - 1.5 * a1 / F**3 + 3 * alpha / F**5),
            ("f", 1): B * H,
            ("f", 2): B * q * a1 / 2,
            ("f", 3): B * q**2 * H * a2 / 2,
        }
    return ProfileGrid(
        t=grid.t,
        H=grid.H,
        F=grid.F,
        f=grid.f,
        derivative_source="sampled-exact",
        node_derivatives=table,
    )


# ---------------------------------------------------------------------------
# closure at singular orbits


def _taylor_at_start(t, y, orders, degree, window):
    x = t - t[0]
    keep = x <= window
    deg = min(degree, int(keep.sum()) - 2)
    series = np.polynomial.Chebyshev.fit(x[keep], y[keep], deg, domain=[0.0, window])
    return {j: float(series.deriv(j)(0.0)) for j in orders}


def smoothness_defects(
    t: np.ndarray,
    H: np.ndarray,
    F: np.ndarray,
    mode: str,
    tol: float = 1e-6,
    window: float | None = None,
    degree: int = 8,
) -> list[Defect]:
    """Slope and parity conditions at ``t[0]`` from a polynomial fit.

    A smooth closure needs ``H`` odd with ``H'(0) = 1``; ``F`` is even for
    a collapsing fiber and odd with ``F'(0) = 1`` at a point orbit. The fit
    runs over ``[t0, t0 + window]``; by default ``window = 0.1``, widened to
    hold 12 samples on sparse grids. Slope conditions use ``tol`` directly;
    a vanishing ``j``-th derivative is compared in Taylor-term units, i.e.
    against ``tol * j! * sup|X| / window^j``.
    """
    t = np.asarray(t, dtype=float)
    if window is None:
        half = 0.5 * (t[-1] - t[0])
        # widen past 0.1 only when sampling near the orbit is sparse
        window = min(max(0.1, t[min(11, len(t) - 1)] - t[0]), half)
    in_window = (t - t[0]) <= window
    if in_window.sum() < 8:
        raise ValueError("too few samples near the singular orbit for a closure fit")
    sup = {"H": float(np.max(np.abs(H[in_window]))), "F": float(np.max(np.abs(F[in_window])))}
    fits = {
        "H": _taylor_at_start(t, H, (1, 2, 4), degree, window),
        "F": _taylor_at_start(t, F, (1, 2, 3, 4), degree, window),
    }

    def vanish(name, j):
        scale = math.factorial(j) * max(sup[name], 1e-300) / window**j
        return Defect(f"{name}{chr(39) * j}(0)", fits[name][j], 0.0, tol * scale)

    defects = [
        Defect("H(0)", float(H[0]), 0.0, tol * max(1.0, sup["H"])),
        Defect("H'(0)", fits["H"][1], 1.0, tol),
        vanish("H", 2),
        vanish("H", 4),
    ]
    if mode == "fiber-collapse":
        defects += [
            Defect("F(0)", float(F[0]), 0.0, 0.0, relation="gt"),
            vanish("F", 1),
            vanish("F", 3),
        ]
    elif mode == "full-collapse":
        defects += [
            Defect("F(0)", float(F[0]), 0.0, tol * max(1.0, sup["F"])),
            Defect("F'(0)", fits["F"][1], 1.0, tol),
            vanish("F", 2),
            vanish("F", 4),
        ]
    else:
        raise ValueError(f"no smoothness conditions for mode {mode!r}")
    return defects


def closure_check_grid(grid: ProfileGrid, mode: str, tol: float = 1e-6) -> ClosureReport:
    """Closure conditions at the first sample of a t-profile."""
    if mode not in CLOSURE_MODES:
        raise ValueError(f"unknown closure mode {mode!r}")
    if mode == "none":
        return ClosureReport(mode, (Defect("min H", float(grid.H.min()), 0.0, 0.0, "gt"),
                                    Defect("min F", float(grid.F.min()), 0.0, 0.0, "gt")))
    if mode == "fiber-collapse" and grid.F[0] <= 0:
        raise ValueError("fiber-collapse mode needs F(0) > 0")
    if mode == "full-collapse" and grid.F[0] > tol * max(1.0, float(grid.F.max())):
        raise ValueError("full-collapse mode needs F(0) = 0")
    return ClosureReport(mode, tuple(smoothness_defects(grid.t, grid.H, grid.F, mode, tol)))


def _start_slope(sprofile: SProfile) -> float:
    if sprofile.alpha_dot is not None:
        return float(sprofile.alpha_dot[0])
    w = fornberg_weights(sprofile.s[0], sprofile.s[:6], 1)
    return float(w @ sprofile.alpha[:6])


def _positive_prefix(sprofile: SProfile) -> SProfile | None:
    """Restrict to the neighbourhood of ``s[0]`` where ``alpha`` stays positive."""
    bad = np.nonzero(sprofile.alpha[1:] <= 0)[0]
    stop = len(sprofile.s) if bad.size == 0 else int(bad[0]) + 1
    if stop < 12:
        return None
    sl = slice(0, stop)
    return SProfile(
        s=sprofile.s[sl],
        alpha=sprofile.alpha[sl],
        beta=sprofile.beta[sl],
        phi=sprofile.phi[sl],
        constants=sprofile.constants,
        alpha_dot=None if sprofile.alpha_dot is None else sprofile.alpha_dot[sl],
        q=sprofile.q,
    )


def _resolve_near_start(sprofile, params, slope, window, count=4001):
    """Dense re-solve of an ODE profile over the first ``window`` of arclength."""
    c = sprofile.constants
    # near a collapsing fiber t ~ 2 sqrt(sigma / alpha'), so sigma ~ alpha' t^2 / 4
    sigma = min(1.5 * slope * window**2 / 4, sprofile.s[-1] - sprofile.s[0])
    s0 = float(sprofile.s[0])
    return solve_quadrature(
        params, c["A"], c["B"], c["C"], (s0, float(sprofile.alpha[0])), s0 + sigma, count
    )


def closure_check(
    sprofile: SProfile,
    params: AnsatzParams,
    mode: str,
    tol: float = 1e-6,
    constraint_tol: float = 1e-8,
) -> ClosureReport:
    """Check smooth closure of the metric at ``s* = s[0]``.

    Fiber collapse needs ``alpha(s*) = 0``, ``beta(s*) > 0`` and
    ``alpha'(s*) = 2``, which through the ODE is ``k - lam beta(s*) = 2``.
    A point orbit needs ``alpha = beta = 0``, ``alpha' = 2`` and ``k = 2n``.
    Parity of ``H`` and ``F`` is checked after mapping back to ``t``.
    """
    if mode not in CLOSURE_MODES:
        raise ValueError(f"unknown closure mode {mode!r}")
    a_star, b_star = float(sprofile.alpha[0]), float(sprofile.beta[0])
    if mode == "none":
        return ClosureReport(mode, (
            Defect("min alpha", float(sprofile.alpha.min()), 0.0, 0.0, "gt"),
            Defect("min beta", float(sprofile.beta.min()), 0.0, 0.0, "gt"),
        ))
    if mode == "fiber-collapse":
        if params.q != 1:
            raise ValueError("fiber-collapse closure is defined for q = 1")
        if b_star <= 0:
            raise ValueError("fiber-collapse mode needs beta(s*) > 0")
    if mode == "full-collapse" and b_star > tol:
        raise ValueError("full-collapse mode needs beta(s*) = 0")

    slope = _start_slope(sprofile)
    defects = [
        Defect("alpha(s*)", a_star, 0.0, tol * max(1.0, b_star)),
        Defect("alpha_dot(s*)", slope, 2.0, tol),
    ]
    if mode == "fiber-collapse":
        defects.append(
            Defect("k - lambda*beta(s*)", params.k - params.lam * b_star, 2.0, constraint_tol)
        )
    else:
        defects.append(Defect("beta(s*)", b_star, 0.0, tol))
        defects.append(Defect("k", float(params.k), 2.0 * params.n, constraint_tol * max(1.0, abs(params.k))))

    collapsing = abs(a_star) <= tol * max(1.0, b_star) and slope > 0
    near = None
    if collapsing:
        if sprofile.alpha_dot is not None and "A" in sprofile.constants:
            near = _positive_prefix(_resolve_near_start(sprofile, params, slope, 0.1))
        else:
            near = _positive_prefix(sprofile)
    if near is None:
        defects.append(Defect("alpha > 0 near s*", 0.0, 0.0, 0.0, "gt"))
    else:
        grid = from_s(near, params.q, 0.0)
        defects += [
            d for d in smoothness_defects(grid.t, grid.H, grid.F, mode, tol)
            if d.name not in ("H(0)", "F(0)")
        ]
    return ClosureReport(mode, tuple(defects))


# ---------------------------------------------------------------------------
# hyperbolic product branch


@dataclass(frozen=True)
class HyperbolicBranch:
    grid: ProfileGrid
    lam: float
    a_slope: float
    H0: float
    metadata: dict = field(default_factory=dict)


def hyperbolic_lambda(a_slope: float, H0: float, n: int) -> float:
    return -2.0 * (n - 1) * (a_slope / H0) ** 2 + 0.0


def hyperbolic_solve(
    params: AnsatzParams,
    a_slope: float,
    H0: float,
    c0: float = 0.0,
    c1: float = 0.0,
    interval: tuple[float, float] = (0.0, 1.0),
    count: int = 101,
) -> HyperbolicBranch:
    """Soliton on a line times a hyperbolic slice ``H0^2 dz^2 + exp(2 a z) g_flat``.

    The slope ``a`` and ``H`` are constant and ``lam = -2 (n-1) (a/H0)^2`` is
    forced; the potential is ``lam t^2 / 2 + c1 t + c0``. ``params`` supplies
    ``n``; its ``lam`` is ignored.
    """
    if H0 <= 0:
        raise ValueError("H0 must be positive")
    lam = hyperbolic_lambda(a_slope, H0, params.n)
    grid = build_grid(hyperbolic_profile(H0, lam, c0, c1), interval, count)
    meta = {
        "branch": "hyperbolic-product",
        "lambda": lam,
        "a_slope": a_slope,
        "H0": H0,
        "almost_kahler": a_slope == 0,
        "note": "the product metric is not almost Kahler unless the slice is flat",
    }
    return HyperbolicBranch(grid=grid, lam=lam, a_slope=a_slope, H0=H0, metadata=meta)


def residual_hyperbolic(branch: HyperbolicBranch, n: int, t: float) -> SolitonResidual:
    """Soliton defect of the product branch, assembled from the slice curvature.

    Uses the general reduction ``Rc = Rc_t - tr(L) L - L'`` with the
    hyperbolic slice Ricci in place of the submersion one. ``r_kahler`` is
    half the ``dz ^ omega`` coefficient of ``d omega``, i.e. ``a``.
    """
    grid = branch.grid
    v = _local(grid, t)
    shape = shape_from_values(n, v["H"], v["H1"], v["H2"], v["F"], v["F1"], v["F2"])
    rc_unit = hyperbolic_curvature(branch.a_slope, v["H"], n).rc_unit
    rc = ricci_from_shape((rc_unit, rc_unit), shape)
    return SolitonResidual(
        r_normal=branch.lam - (rc.rc_normal + v["f2"]),
        r_fiber=branch.lam - (rc.rc_fiber + v["f1"] * shape.l_fiber),
        r_base=branch.lam - (rc.rc_base + v["f1"] * shape.l_base),
        r_kahler=float(branch.a_slope),
        r_killing=v["f2"] * v["H"] - v["f1"] * v["H1"],
    )


# ---------------------------------------------------------------------------
# orchestration


@dataclass
class Construction:
    """Bundle produced by :func:`construct`."""

    grid: ProfileGrid
    sprofile: SProfile | None
    residuals: np.ndarray
    closure: ClosureReport
    tolerance: float
    metadata: dict = field(default_factory=dict)
    checked: tuple[str, ...] = RESIDUAL_COLUMNS

    @property
    def max_residual(self) -> float:
        """Largest residual over the columns that are required to vanish."""
        if self.residuals.size == 0:
            return 0.0
        cols = [1 + RESIDUAL_COLUMNS.index(c) for c in self.checked]
        return float(np.max(np.abs(self.residuals[:, cols])))

    @property
    def residual_pass(self) -> bool:
        return self.max_residual <= self.tolerance

    @property
    def ok(self) -> bool:
        return self.residual_pass and self.closure.passed


def construct(
    params: AnsatzParams,
    *,
    branch: str = "kahler",
    closure_mode: str = "none",
    beta0: float = 0.0,
    B: float = 0.0,
    C: float = 0.0,
    s0: float = 0.0,
    alpha0: float = 0.0,
    s_end: float = 1.0,
    count: int = 1001,
    tolerance: float | None = None,
    derivatives: str = "exact",
    t_anchor: float = 0.0,
    a_slope: float = 1.0,
    H0: float = 1.0,
    c0: float = 0.0,
    c1: float = 0.0,
    interval: Sequence[float] = (0.0, 1.0),
) -> Construction:
    """Run the pipeline: quadrature, map to ``t``, residuals, closure.

    ``derivatives='exact'`` differentiates through the ODE; ``'fd'`` uses
    finite differences on the mapped samples. ``branch='hyperbolic'``
    delegates to :func:`hyperbolic_solve`.
    """
    if branch == "hyperbolic":
        hb = hyperbolic_solve(params, a_slope, H0, c0, c1, tuple(interval), count)
        rows = [
            (t, *residual_hyperbolic(hb, params.n, float(t)).as_tuple())
            for t in hb.grid.t[1:-1]
        ]
        tol = EXACT_TOLERANCE if tolerance is None else tolerance
        # r_kahler and r_killing describe the structure here, they need not vanish
        return Construction(
            hb.grid, None, np.array(rows), ClosureReport("none"), tol, dict(hb.metadata),
            checked=RESIDUAL_COLUMNS[:3],
        )
    if branch != "kahler":
        raise ValueError(f"unknown branch {branch!r}")
    if derivatives not in ("exact", "fd"):
        raise ValueError("derivatives must be 'exact' or 'fd'")

    sp = solve_quadrature(params, beta0, B, C, (s0, alpha0), s_end, count)
    if np.any(sp.alpha[1:] <= 0):
        raise ProfileError("alpha leaves the positive range; shorten s_end")
    if derivatives == "exact":
        grid = profile_from_quadrature(sp, params, t_anchor)
        tol = EXACT_TOLERANCE if tolerance is None else tolerance
    else:
        grid = from_s(sp, params.q, t_anchor)
        tol = FD_TOLERANCE if tolerance is None else tolerance
    res = residual_table(params, grid)
    closure = closure_check(sp, params, closure_mode)
    meta = {"branch": "kahler", "D": sp.constants["D"], "derivatives": derivatives}
    return Construction(grid, sp, res, closure, tol, meta)
