"""Low-level numerical kernels: finite-difference weights and adaptive Simpson."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .exceptions import QuadratureError


def fornberg_weights(x0: float, nodes: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at ``x0``.

    Works on arbitrary (non-uniform) node sets; with ``p`` nodes the stencil
    is exact for polynomials of degree ``p - 1``.
    """
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    c = np.zeros((n, order + 1))
    c1 = 1.0
    c4 = nodes[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def adaptive_simpson(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    a: np.ndarray,
    b: np.ndarray,
    rtol: float = 1e-10,
    max_depth: int = 48,
) -> np.ndarray:
    """Integrate ``func`` over every interval ``[a[i], b[i]]`` at once.

    ``func(x, idx)`` receives evaluation points and the index of the interval
    each point belongs to. Each interval is refined independently until the
    Richardson-corrected Simpson estimate meets ``rtol`` relative to the
    integral of ``|func|`` on that interval.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros_like(a)
    idx = np.arange(len(a))

    m = 0.5 * (a + b)
    fa, fm, fb = func(a, idx), func(m, idx), func(b, idx)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    scale = (b - a) / 6.0 * (np.abs(fa) + 4.0 * np.abs(fm) + np.abs(fb))
    tol = rtol * scale

    for _ in range(max_depth):
        if idx.size == 0:
            return out
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = func(lm, idx), func(rm, idx)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        ok = np.abs(delta) <= 15.0 * tol
        np.add.at(out, idx[ok], (left + right + delta / 15.0)[ok])

        bad = ~ok
        idx = np.concatenate([idx[bad], idx[bad]])
        a, b = np.concatenate([a[bad], m[bad]]), np.concatenate([m[bad], b[bad]])
        fa, fb = np.concatenate([fa[bad], fm[bad]]), np.concatenate([fm[bad], fb[bad]])
        fm = np.concatenate([flm[bad], frm[bad]])
        whole = np.concatenate([left[bad], right[bad]])
        tol = np.concatenate([tol[bad], tol[bad]]) / 2.0
        m = 0.5 * (a + b)

    if idx.size:
        raise QuadratureError(
            f"adaptive Simpson did not converge on {idx.size} subintervals "
            f"after {max_depth} bisections"
        )
    return out
