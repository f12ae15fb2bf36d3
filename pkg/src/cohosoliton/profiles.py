"""Profile functions of the cohomogeneity-one ansatz.

The metric on ``I x P`` is ``dt^2 + H(t)^2 eta*eta + F(t)^2 pi^* g_N`` with a
potential ``f(t)``. This module stores sampled profiles, differentiates them,
and converts between the arclength ``t`` and the coordinate ``s`` defined by
``ds = F F' dt``, in which ``alpha = H^2``, ``beta = F^2`` and ``phi = f``.

Dimension convention used throughout the package: the total space has real
dimension ``2n``, the base ``N`` has complex dimension ``n - 1`` and principal
orbits have dimension ``2n - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson

from ._numerics import fornberg_weights
from .exceptions import ProfileError

FIELDS = ("H", "F", "f")
BASE_KINDS = ("cp", "flat", "hyperbolic-base")
FIBER_KINDS = ("line", "circle")
DERIVATIVE_SOURCES = ("finite-difference", "analytic-callback", "sampled-exact")


@dataclass(frozen=True)
class AnsatzParams:
    """Discrete and continuous data fixing the ansatz.

    ``lam`` is the soliton constant; ``k`` the Einstein constant of the base
    (``Rc_N = k Id``); ``q`` the bundle charge in ``d eta = q pi^* omega_N``.
    """

    n: int
    k: float
    lam: float
    q: int = 1
    base_kind: str | None = None
    fiber_kind: str = "circle"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if int(self.q) != self.q:
            raise ValueError(f"q must be an integer, got {self.q!r}")
        if self.base_kind is None:
            kind = "cp" if self.k > 0 else ("flat" if self.k == 0 else "hyperbolic-base")
            object.__setattr__(self, "base_kind", kind)
        if self.base_kind not in BASE_KINDS:
            raise ValueError(f"unknown base_kind {self.base_kind!r}")
        if self.fiber_kind not in FIBER_KINDS:
            raise ValueError(f"unknown fiber_kind {self.fiber_kind!r}")
        expected = {"cp": self.k > 0, "flat": self.k == 0, "hyperbolic-base": self.k < 0}
        if not expected[self.base_kind]:
            raise ValueError(
                f"base_kind {self.base_kind!r} is inconsistent with k = {self.k}"
            )

    @property
    def main_theorem_setting(self) -> bool:
        """Advisory flag: a non-negative soliton constant over a compact base."""
        return self.lam >= 0 and self.base_kind == "cp"


@dataclass(frozen=True)
class AnalyticProfile:
    """Closed-form profiles with optional derivative callbacks.

    ``derivatives`` maps a field name to a sequence of up to three callables
    giving the first, second and third derivative. Every callable must accept
    numpy arrays.
    """

    H: Callable[[np.ndarray], np.ndarray]
    F: Callable[[np.ndarray], np.ndarray]
    f: Callable[[np.ndarray], np.ndarray]
    derivatives: Mapping[str, Sequence[Callable]] = field(default_factory=dict)


def _const(c: float) -> Callable:
    return lambda t: np.full_like(np.asarray(t, dtype=float), c)


def gaussian_profile(lam: float) -> AnalyticProfile:
    """Flat space in polar form, ``H = F = t`` with ``f = lam t^2 / 2``."""
    one, zero = _const(1.0), _const(0.0)
    return AnalyticProfile(
        H=lambda t: np.asarray(t, dtype=float),
        F=lambda t: np.asarray(t, dtype=float),
        f=lambda t: 0.5 * lam * np.asarray(t, dtype=float) ** 2,
        derivatives={
            "H": (one, zero, zero),
            "F": (one, zero, zero),
            "f": (lambda t: lam * np.asarray(t, dtype=float), _const(lam), zero),
        },
    )


def hyperbolic_profile(H0: float, lam: float, c0: float = 0.0, c1: float = 0.0) -> AnalyticProfile:
    """Product branch profile: constant fiber, quadratic potential.

    The base scale of the hyperbolic slice is ``exp(a z)`` and is carried by
    the slice curvature, so ``F`` is held at one here.
    """
    zero = _const(0.0)
    return AnalyticProfile(
        H=_const(H0),
        F=_const(1.0),
        f=lambda t: 0.5 * lam * np.asarray(t, dtype=float) ** 2 + c1 * np.asarray(t, dtype=float) + c0,
        derivatives={
            "H": (zero, zero, zero),
            "F": (zero, zero, zero),
            "f": (lambda t: lam * np.asarray(t, dtype=float) + c1, _const(lam), zero),
        },
    )


@dataclass(frozen=True, eq=False)
class ProfileGrid:
    """Sampled ``(t, H, F, f)`` with a derivative source.

    ``callbacks`` holds analytic derivative callables (``analytic-callback``);
    ``node_derivatives`` holds exact derivative values at the sample nodes
    keyed by ``(field, order)`` (``sampled-exact``).
    """

    t: np.ndarray
    H: np.ndarray
    F: np.ndarray
    f: np.ndarray
    derivative_source: str = "finite-difference"
    callbacks: Mapping[str, Sequence[Callable]] | None = None
    node_derivatives: Mapping[tuple[str, int], np.ndarray] | None = None
    functions: Mapping[str, Callable] | None = None

    def __post_init__(self):
        arrays = {}
        for name in ("t",) + FIELDS:
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise ProfileError(f"{name} must be one-dimensional")
            arr.setflags(write=False)
            arrays[name] = arr
            object.__setattr__(self, name, arr)
        size = len(arrays["t"])
        if any(len(a) != size for a in arrays.values()):
            raise ProfileError("t, H, F, f must have equal length")
        if not np.all(np.isfinite(np.column_stack(list(arrays.values())))):
            raise ProfileError("profile samples must be finite")
        if size >= 2 and np.any(np.diff(arrays["t"]) <= 0):
            raise ProfileError("non-monotone samples: t must be strictly increasing")
        if size < 5:
            raise ProfileError(f"need at least 5 samples, got {size}")
        interior = slice(1, size - 1)
        for name in ("H", "F"):
            if np.any(arrays[name][interior] <= 0):
                raise ProfileError(f"non-positive interior {name}")
            if np.any(arrays[name][[0, -1]] < 0):
                raise ProfileError(f"negative boundary {name}")
        if self.derivative_source not in DERIVATIVE_SOURCES:
            raise ProfileError(f"unknown derivative_source {self.derivative_source!r}")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])

    def values(self, name: str) -> np.ndarray:
        if name not in FIELDS:
            raise ValueError(f"unknown field {name!r}")
        return getattr(self, name)

    def interior_mask(self) -> np.ndarray:
        """Nodes strictly inside the grid where ``H`` and ``F`` are positive."""
        mask = (self.H > 0) & (self.F > 0)
        mask[[0, -1]] = False
        return mask


@dataclass(frozen=True, eq=False)
class SProfile:
    """Profiles over the ``s`` coordinate.

    ``constants`` holds ``A`` (offset in ``beta = 2s + A``), ``B`` and ``C``
    (``phi = (B/q) s + C``). ``alpha_dot`` is the exact ``d alpha / ds`` when
    the profile was produced by the ODE solver, else ``None``.
    """

    s: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    phi: np.ndarray
    constants: Mapping[str, float]
    alpha_dot: np.ndarray | None = None
    q: int = 1

    def __post_init__(self):
        for name in ("s", "alpha", "beta", "phi", "alpha_dot"):
            value = getattr(self, name)
            if value is None:
                continue
            arr = np.array(value, dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if len({len(self.s), len(self.alpha), len(self.beta), len(self.phi)}) != 1:
            raise ProfileError("s, alpha, beta, phi must have equal length")
        if np.any(np.diff(self.s) <= 0):
            raise ProfileError("s must be strictly increasing")
        object.__setattr__(self, "constants", dict(self.constants))

    def __len__(self) -> int:
        return len(self.s)


def build_grid(
    source: AnalyticProfile | Sequence[Sequence[float]],
    interval: tuple[float, float] | None = None,
    count: int | None = None,
) -> ProfileGrid:
    """Sample an analytic profile, or validate sampled ``(t, H, F, f)`` arrays."""
    if isinstance(source, AnalyticProfile):
        if interval is None or count is None:
            raise ValueError("analytic profiles need an interval and a count")
        if count < 5:
            raise ProfileError(f"need at least 5 samples, got {count}")
        t0, t1 = interval
        if not t1 > t0:
            raise ProfileError("non-monotone interval")
        t = np.linspace(t0, t1, int(count))
        return ProfileGrid(
            t=t,
            H=source.H(t),
            F=source.F(t),
            f=source.f(t),
            derivative_source="analytic-callback",
            callbacks=dict(source.derivatives),
            functions={"H": source.H, "F": source.F, "f": source.f},
        )
    t, H, F, f = (np.asarray(col, dtype=float) for col in source)
    return ProfileGrid(t=t, H=H, F=F, f=f)


def _stencil(t: np.ndarray, x: float, order: int) -> tuple[slice, np.ndarray]:
    """Pick stencil nodes around ``x``: central at interior nodes, one-sided at the edges."""
    size = len(t)
    half = (order + 3) // 2
    i = int(np.searchsorted(t, x))
    at_node = i < size and t[i] == x
    if at_node and half <= i <= size - 1 - half:
        lo, hi = i - half, i + half + 1
    else:
        width = order + 4
        centre = i if at_node else i - 0.5
        lo = int(round(centre - (width - 1) / 2))
        lo = min(max(lo, 0), size - width)
        hi = lo + width
    nodes = t[lo:hi]
    return slice(lo, hi), fornberg_weights(x, nodes, order)


def _check_order(order: int) -> None:
    if order not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order}")


def _clamp_to_span(grid: ProfileGrid, t: float) -> float:
    t0, t1 = grid.span
    slack = 1e-12 * max(1.0, abs(t0), abs(t1))
    if not (t0 - slack <= t <= t1 + slack):
        raise ValueError(f"t = {t} outside grid span [{t0}, {t1}]")
    return min(max(t, t0), t1)


def value(grid: ProfileGrid, field: str, t: float) -> float:
    """Value of ``field`` at ``t``: exact at nodes and for analytic grids, else
    fifth-order Lagrange interpolation."""
    if field not in FIELDS:
        raise ValueError(f"unknown field {field!r}")
    t = _clamp_to_span(grid, t)
    i = int(np.searchsorted(grid.t, t))
    if i < len(grid.t) and grid.t[i] == t:
        return float(grid.values(field)[i])
    if grid.functions and field in grid.functions:
        return float(grid.functions[field](np.asarray(t, dtype=float)))
    lo = min(max(i - 3, 0), len(grid.t) - 6)
    w = fornberg_weights(t, grid.t[lo : lo + 6], 0)
    return float(w @ grid.values(field)[lo : lo + 6])


def derivative(grid: ProfileGrid, field: str, order: int, t: float) -> float:
    """``order``-th derivative of ``field`` at ``t``.

    Analytic callbacks are used when the grid carries them; exact node tables
    are used at sample nodes; otherwise a fourth-order finite-difference
    stencil is applied.
    """
    _check_order(order)
    if field not in FIELDS:
        raise ValueError(f"unknown field {field!r}")
    t = _clamp_to_span(grid, t)

    if grid.callbacks:
        funcs = grid.callbacks.get(field, ())
        if len(funcs) >= order:
            return float(funcs[order - 1](np.asarray(t, dtype=float)))
    if grid.node_derivatives and (field, order) in grid.node_derivatives:
        i = int(np.searchsorted(grid.t, t))
        if i < len(grid.t) and grid.t[i] == t:
            return float(grid.node_derivatives[(field, order)][i])

    if len(grid.t) < order + 4:
        raise ProfileError(f"finite differences of order {order} need {order + 4} samples")
    sl, w = _stencil(grid.t, t, order)
    return float(w @ grid.values(field)[sl])


def node_derivatives(grid: ProfileGrid, field: str, order: int) -> np.ndarray:
    """Derivative of ``field`` at every sample node (vectorized :func:`derivative`)."""
    _check_order(order)
    if grid.callbacks:
        funcs = grid.callbacks.get(field, ())
        if len(funcs) >= order:
            return np.broadcast_to(funcs[order - 1](grid.t), grid.t.shape).astype(float)
    if grid.node_derivatives and (field, order) in grid.node_derivatives:
        return np.array(grid.node_derivatives[(field, order)], dtype=float)
    return fd_node_derivatives(grid.t, grid.values(field), order)


def fd_node_derivatives(t: np.ndarray, y: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference derivative at every node of ``t``."""
    size = len(t)
    if size < order + 4:
        raise ProfileError(f"finite differences of order {order} need {order + 4} samples")
    h = np.diff(t)
    out = np.empty(size)
    half = (order + 3) // 2
    uniform = np.allclose(h, h[0], rtol=1e-9, atol=0.0)
    if uniform and size > 2 * half:
        # one set of central weights serves every interior node
        w = fornberg_weights(0.0, h[0] * np.arange(-half, half + 1), order)
        inner = np.zeros(size - 2 * half)
        for j, wj in enumerate(w):
            inner += wj * y[j : size - 2 * half + j]
        out[half : size - half] = inner
        edge = list(range(half)) + list(range(size - half, size))
    else:
        edge = range(size)
    for i in edge:
        sl, w = _stencil(t, float(t[i]), order)
        out[i] = w @ y[sl]
    return out


def to_s(grid: ProfileGrid, q: int, s_anchor: float = 0.0) -> SProfile:
    """Map a profile to the ``s`` coordinate, ``ds = F F' dt``.

    ``s`` is integrated with composite Simpson from ``s(t0) = s_anchor``.
    The constants are least-squares fits: ``A`` from ``beta - 2s``, ``B/q``
    and ``C`` from a line through ``phi(s)``.
    """
    if q == 0:
        raise ValueError("q = 0: the s coordinate is undefined (F F' = q H vanishes)")
    F1 = node_derivatives(grid, "F", 1)
    integrand = grid.F * F1
    if np.any(integrand[1:-1] <= 0) or np.any(integrand[[0, -1]] < 0):
        raise ProfileError("non-monotone coordinate: F F' must be positive on the interior")
    s = s_anchor + cumulative_simpson(integrand, x=grid.t, initial=0.0)
    alpha = grid.H**2
    beta = grid.F**2
    phi = np.array(grid.f)
    A = float(np.mean(beta - 2.0 * s))
    slope, C = np.polyfit(s, phi, 1)
    return SProfile(
        s=s,
        alpha=alpha,
        beta=beta,
        phi=phi,
        constants={"A": A, "B": float(q * slope), "C": float(C)},
        q=q,
    )


def from_s(sprofile: SProfile, q: int, t_anchor: float) -> ProfileGrid:
    """Recover ``(t, H, F, f)`` from an ``s`` profile.

    Uses the almost-Kahler relation ``F F' = q H`` so ``dt = ds / (q sqrt(alpha))``.
    A vanishing ``alpha`` at the first sample (a collapsing fiber) is an
    integrable ``1/sqrt`` singularity; it is removed by integrating in
    ``u = sqrt(s - s0)``.
    """
    if q == 0:
        raise ValueError("q = 0: the s coordinate is undefined")
    if q < 0:
        raise ValueError("q must be positive so that t increases with s")
    s, alpha = sprofile.s, sprofile.alpha
    if np.any(alpha[1:] <= 0):
        raise ProfileError("alpha must be positive on the integration interior")
    if alpha[0] < 0:
        raise ProfileError("alpha must be non-negative")
    if np.any(sprofile.beta[1:] <= 0) or sprofile.beta[0] < 0:
        raise ProfileError("beta must be positive on the interior")

    if alpha[0] > 0:
        t = t_anchor + cumulative_simpson(1.0 / (q * np.sqrt(alpha)), x=s, initial=0.0)
    else:
        sigma = s - s[0]
        u = np.sqrt(sigma)
        w = np.empty_like(s)
        w[1:] = np.sqrt(sigma[1:] / alpha[1:])
        if sprofile.alpha_dot is not None and sprofile.alpha_dot[0] > 0:
            w[0] = 1.0 / math.sqrt(sprofile.alpha_dot[0])
        else:
            # quadratic extrapolation of the smooth factor sqrt(sigma / alpha)
            w[0] = float(np.polyval(np.polyfit(sigma[1:4], w[1:4], 2), 0.0))
        t = t_anchor + cumulative_simpson(2.0 * w / q, x=u, initial=0.0)

    return ProfileGrid(
        t=t,
        H=np.sqrt(alpha),
        F=np.sqrt(sprofile.beta),
        f=np.array(sprofile.phi),
    )
