"""Almost contact metric structures on principal orbits and level sets.

Orbit tensors live in the frame ``{d_z, E_1, ..., E_{2n-2}}`` where the
metric is diagonal (``H^2`` on the fiber, ``F^2`` on the base). Column ``j``
of a matrix is the image of frame vector ``j``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .profiles import ProfileGrid, derivative, value

MODEL_KINDS = ("flat-sasakian", "sphere-sasakian", "hyperbolic-sasakian", "hyperbolic", "product")
ACMS_TOLERANCE = 1e-12


def _base_complex_structure(m: int) -> np.ndarray:
    """Block matrix sending ``E_{2i-1}`` to ``E_{2i}`` on a base of real dimension ``m``."""
    j = np.zeros((m, m))
    for i in range(0, m, 2):
        j[i + 1, i] = 1.0
        j[i, i + 1] = -1.0
    return j


@dataclass(frozen=True, eq=False)
class FramedOrbit:
    """Diagonal orbit metric and the lifted base complex structure."""

    metric: np.ndarray
    j_base: np.ndarray

    def __post_init__(self):
        metric = np.asarray(self.metric, dtype=float)
        j_base = np.asarray(self.j_base, dtype=float)
        if metric.ndim != 1 or metric.size < 3 or metric.size % 2 == 0:
            raise ValueError("orbit metric must be a diagonal of odd length >= 3")
        if np.any(metric <= 0) or not np.all(np.isfinite(metric)):
            raise ValueError("orbit metric entries must be positive and finite")
        m = metric.size - 1
        if j_base.shape != (m, m):
            raise ValueError(f"j_base must be {m}x{m}")
        if not np.allclose(j_base @ j_base, -np.eye(m), atol=1e-12):
            raise ValueError("j_base must square to -Id")
        object.__setattr__(self, "metric", metric)
        object.__setattr__(self, "j_base", j_base)

    @property
    def dim(self) -> int:
        return self.metric.size

    @property
    def gram(self) -> np.ndarray:
        return np.diag(self.metric)

    def with_metric(self, gram: np.ndarray) -> "FramedOrbit":
        off = gram - np.diag(np.diag(gram))
        if np.any(off != 0):
            raise ValueError("deformed metric left the diagonal frame")
        return replace(self, metric=np.diag(gram).copy())


def framed_orbit(n: int, H: float, F: float) -> FramedOrbit:
    """Orbit of complex dimension ``n`` ambient: fiber radius ``H``, base scale ``F``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if H <= 0 or F <= 0:
        raise ValueError("H and F must be positive on a principal orbit")
    m = 2 * n - 2
    metric = np.concatenate([[H * H], np.full(m, F * F)])
    return FramedOrbit(metric, _base_complex_structure(m))


@dataclass(frozen=True, eq=False)
class ContactStructure:
    zeta: np.ndarray
    eta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        zeta = np.asarray(self.zeta, dtype=float)
        eta = np.asarray(self.eta, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        d = zeta.size
        if eta.shape != (d,) or phi.shape != (d, d):
            raise ValueError("zeta, eta and phi dimensions disagree")
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "phi", phi)


@dataclass(frozen=True)
class DeformParams:
    a: float = 1.0
    b: float = 1.0
    sign: int = 1

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("deformation parameters a and b must be positive")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")


def _block_phi(orbit: FramedOrbit) -> np.ndarray:
    phi = np.zeros((orbit.dim, orbit.dim))
    phi[1:, 1:] = orbit.j_base
    return phi


def induce_level_set(orbit: FramedOrbit, H: float, f_prime: float) -> ContactStructure:
    """Structure induced on the level set through an orbit.

    The unit normal is ``V = grad f / |grad f|``; ``zeta = -J V`` and
    ``Phi X = J X - eta(X) V`` restricted to the orbit.
    """
    if f_prime == 0:
        raise ValueError("f' = 0: the orbit lies in a critical level set")
    if H <= 0:
        raise ValueError("H must be positive")
    if not np.isclose(orbit.metric[0], H * H, rtol=1e-12, atol=0.0):
        raise ValueError("H does not match the orbit's fiber metric entry")
    sign = 1.0 if f_prime > 0 else -1.0
    zeta = np.zeros(orbit.dim)
    zeta[0] = sign / H
    eta = orbit.metric * zeta
    # J d_z = H d_t is purely normal and cancels against eta(d_z) V
    return ContactStructure(zeta, eta, _block_phi(orbit))


def acms_residual(orbit: FramedOrbit, cs: ContactStructure) -> tuple[float, float, float]:
    """``(r_phi2, r_metric, r_eta)`` measured in max-norm over the frame."""
    if cs.zeta.size != orbit.dim:
        raise ValueError("structure and orbit dimensions disagree")
    G = orbit.gram
    eye = np.eye(orbit.dim)
    r_phi2 = np.max(np.abs(cs.phi @ cs.phi + eye - np.outer(cs.zeta, cs.eta)))
    r_metric = np.max(np.abs(cs.phi.T @ G @ cs.phi - G + np.outer(cs.eta, cs.eta)))
    r_eta = abs(float(cs.eta @ cs.zeta) - 1.0)
    return float(r_phi2), float(r_metric), r_eta


def _transverse(orbit: FramedOrbit, cs: ContactStructure) -> np.ndarray:
    return orbit.gram - np.outer(cs.eta, cs.eta)


def homothety(orbit: FramedOrbit, cs: ContactStructure, a: float):
    """Transverse ``a``-homothety: ``g -> a g + (a^2 - a) eta (x) eta``."""
    DeformParams(a=a)
    eta = a * cs.eta
    gram = a * _transverse(orbit, cs) + np.outer(eta, eta)
    return orbit.with_metric(gram), ContactStructure(cs.zeta / a, eta, cs.phi.copy())


def pm_deform(orbit: FramedOrbit, cs: ContactStructure, b: float, sign: int = 1):
    """``+-b`` deformation: ``g -> b g + (1 - b) eta (x) eta`` and ``Phi -> sign Phi``."""
    DeformParams(b=b, sign=sign)
    gram = b * _transverse(orbit, cs) + np.outer(cs.eta, cs.eta)
    return orbit.with_metric(gram), ContactStructure(cs.zeta.copy(), cs.eta.copy(), sign * cs.phi)


def compose_deform(orbit: FramedOrbit, cs: ContactStructure, a: float, b: float, sign: int = 1):
    """Homothety by ``a`` followed by the ``+-b`` deformation."""
    o1, c1 = homothety(orbit, cs, a)
    return pm_deform(o1, c1, b, sign)


def compose_deform_direct(orbit: FramedOrbit, cs: ContactStructure, a: float, b: float, sign: int = 1):
    """Closed form of :func:`compose_deform`: ``ab (g - eta eta) + a^2 eta eta``."""
    DeformParams(a=a, b=b, sign=sign)
    eta = a * cs.eta
    gram = (a * b) * _transverse(orbit, cs) + np.outer(eta, eta)
    return orbit.with_metric(gram), ContactStructure(cs.zeta / a, eta, sign * cs.phi)


@dataclass(frozen=True, eq=False)
class ModelSpace:
    kind: str
    n: int
    k: float
    orbit: FramedOrbit
    cs: ContactStructure
    q: int
    base_hol_sec: float
    expected_phi_sec: float
    classification_case: str
    catalog_note: str

    def catalog_entry(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "k": self.k,
            "expected_phi_sec": self.expected_phi_sec,
            "classification_case": self.classification_case,
        }


def model_space(kind: str, n: int, k: float = 0.0) -> ModelSpace:
    """Model orbit with ``H = F = 1`` and its catalogued Phi-sectional value.

    ``expected_phi_sec`` is descriptive metadata; the index convention of
    the catalog formulas is not the one used by :func:`phi_sectional`.
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    if n < 2:
        raise ValueError("n must be >= 2")
    m = n - 1
    if kind == "sphere-sasakian" and not k > 0:
        raise ValueError("sphere-sasakian needs k > 0")
    if kind == "hyperbolic-sasakian" and not k < 0:
        raise ValueError("hyperbolic-sasakian needs k < 0")
    if kind in ("flat-sasakian", "hyperbolic") and k != 0:
        raise ValueError(f"{kind} has a flat base; k must be 0")

    # holomorphic sectional curvature of a Kahler-Einstein base with Rc = k
    base_hol = 2.0 * k / (m + 1)
    if kind == "flat-sasakian":
        expected, case, note, q = -3.0, "i", "flat Sasakian space, Phi-sectional -3", 1
    elif kind == "sphere-sasakian":
        expected, case, note, q = 4.0 * k / (n + 1) - 3.0, "i", "Sasakian sphere over CP", 1
    elif kind == "hyperbolic-sasakian":
        expected, case, note, q = k / (2 * n - 1) - 3.0, "i", "Sasakian disk over the complex ball", 1
    elif kind == "hyperbolic":
        expected, case, note, q = -1.0, "iii", "real hyperbolic space, slope 1", 0
    else:
        expected, case, note, q = base_hol, "ii", "Riemannian product of a line with the base", 0

    orbit = framed_orbit(n, 1.0, 1.0)
    cs = induce_level_set(orbit, 1.0, 1.0)
    return ModelSpace(
        kind=kind,
        n=n,
        k=float(k),
        orbit=orbit,
        cs=cs,
        q=q,
        base_hol_sec=base_hol,
        expected_phi_sec=float(expected),
        classification_case=case,
        catalog_note=note,
    )


def model_catalog(n_values=(2, 3, 4), k_values: dict | None = None) -> list[dict]:
    """Catalog entries for each model kind, ordered by kind then ``n``."""
    k_values = k_values or {
        "flat-sasakian": 0.0,
        "sphere-sasakian": 4.0,
        "hyperbolic-sasakian": -3.0,
        "hyperbolic": 0.0,
        "product": 2.0,
    }
    return [model_space(kind, n, k_values[kind]).catalog_entry() for kind in MODEL_KINDS for n in n_values]


def phi_sectional(
    orbit: FramedOrbit, cs: ContactStructure, base_hol_sec: float, H: float, F: float, q: int
) -> float:
    """Sectional curvature of ``span(X, Phi X)`` for a unit horizontal ``X``.

    The twist correction ``-3 H^2 q^2 / F^4 g(X, J Y)^2`` is evaluated with
    the frame matrices rather than by assuming ``g(X, J Phi X)^2 = 1``.
    """
    if F <= 0:
        raise ValueError("F must be positive")
    G = orbit.gram
    x = np.zeros(orbit.dim)
    x[1] = 1.0 / np.sqrt(G[1, 1])
    y = cs.phi @ x
    J = _block_phi(orbit)
    gxjy = float(x @ G @ (J @ y))
    return base_hol_sec / F**2 - 3.0 * H**2 * q**2 / F**4 * gxjy**2


@dataclass(frozen=True)
class SymmetryResiduals:
    killing_z: float
    killing_Jgradf: float
    lie_f_const: float


def symmetry_residuals(grid: ProfileGrid, t: float) -> SymmetryResiduals:
    """Killing and invariance residuals for ``d_z`` and ``J grad f``.

    ``d_z`` is Killing and ``f`` is ``z``-independent by construction, so
    those entries are exact zeros; only ``f'' H - f' H'`` is computed.
    """
    H = value(grid, "H", t)
    H1 = derivative(grid, "H", 1, t)
    f1 = derivative(grid, "f", 1, t)
    f2 = derivative(grid, "f", 2, t)
    return SymmetryResiduals(0.0, float(f2 * H - f1 * H1), 0.0)


def structure_dump(orbit: FramedOrbit, cs: ContactStructure) -> dict:
    r = acms_residual(orbit, cs)
    return {
        "dim": orbit.dim,
        "metric": orbit.metric.tolist(),
        "zeta": cs.zeta.tolist(),
        "eta": cs.eta.tolist(),
        "phi": cs.phi.reshape(-1).tolist(),
        "residual": {"r_phi2": r[0], "r_metric": r[1], "r_eta": r[2]},
    }


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
