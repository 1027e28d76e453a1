"""Panel quadrature helpers: Gauss-Legendre panels, dyadic grading, substitutions.

The singular integrals in this package all reduce to composite Gauss-Legendre
on panels graded geometrically into endpoint singularities (inverse square
roots, logs, fourth roots).  Each dyadic panel sees an analytic integrand at a
fixed ellipse ratio, so per-panel accuracy is uniform and the total error is
controlled by the grading depth.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "gauss_legendre",
    "panel_nodes",
    "dyadic_panels",
    "geometric_panels",
    "split_panels",
    "legendre_vandermonde",
    "legendre_diff_matrix",
]


@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def panel_nodes(panels, n: int):
    """Map an n-point Gauss rule onto each (a, b) panel; returns (nodes, weights)."""
    x, w = gauss_legendre(n)
    panels = np.asarray(panels, dtype=float)
    a = panels[:, 0][:, None]
    b = panels[:, 1][:, None]
    nodes = 0.5 * (b - a) * x[None, :] + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w[None, :]
    return nodes.ravel(), weights.ravel()


def dyadic_panels(a: float, b: float, levels: int, into: str = "a"):
    """Panels on (a, b) shrinking geometrically (ratio 2) into one endpoint.

    The innermost gap of relative size 2**-levels is *not* covered; callers
    either accept the (estimable) leftover or append an analytic correction.
    """
    if levels < 1:
        return [(a, b)]
    L = b - a
    cuts = [2.0 ** (-j) for j in range(levels + 1)]
    out = []
    if into == "a":
        for hi, lo in zip(cuts[:-1], cuts[1:]):
            out.append((a + lo * L, a + hi * L))
        out.reverse()
    elif into == "b":
        for hi, lo in zip(cuts[:-1], cuts[1:]):
            out.append((b - hi * L, b - lo * L))
    else:
        raise ValueError("into must be 'a' or 'b'")
    return out


def geometric_panels(a: float, b: float, n_panels: int, ratio: float = 1.6,
                     small_end: str = "a"):
    """n_panels panels on (a, b) with lengths growing geometrically from one end."""
    lengths = ratio ** np.arange(n_panels)
    lengths = lengths / lengths.sum() * (b - a)
    if small_end == "b":
        lengths = lengths[::-1]
    edges = a + np.concatenate(([0.0], np.cumsum(lengths)))
    edges[-1] = b
    return list(zip(edges[:-1], edges[1:]))


def split_panels(panels, max_len):
    """Subdivide panels uniformly so that no piece exceeds max_len(midpoint).

    max_len may be a scalar or a callable of the panel midpoint.
    """
    out = []
    for (a, b) in panels:
        mid = 0.5 * (a + b)
        cap = max_len(mid) if callable(max_len) else max_len
        m = max(1, int(np.ceil((b - a) / cap)))
        edges = np.linspace(a, b, m + 1)
        out.extend(zip(edges[:-1], edges[1:]))
    return out


def legendre_q(u: complex, n: int, side: int = 0) -> np.ndarray:
    """q_m(u) = int_{-1}^{1} P_m(xi)/(u - xi) dxi for m = 0..n-1.

    Principal branch off [-1, 1]; for real u strictly inside, side=+-1 selects
    the limit from u +- i0 (q_m = PV -+ i pi P_m).  Forward recurrence; callers
    keep |u| <~ 2.5 where the recurrence is accurate, and fall back to plain
    node sums farther out.
    """
    u = complex(u)
    out = np.empty(n, dtype=complex)
    on_axis = u.imag == 0.0 and -1.0 < u.real < 1.0
    if on_axis and side != 0:
        q0 = np.log((1.0 + u.real) / (1.0 - u.real)) - 1j * np.pi * side
    else:
        q0 = np.log(u + 1.0) - np.log(u - 1.0)
    out[0] = q0
    if n > 1:
        out[1] = u * q0 - 2.0
    for m in range(1, n - 1):
        out[m + 1] = ((2 * m + 1) * u * out[m] - m * out[m - 1]) / (m + 1)
    return out


@lru_cache(maxsize=16)
def legendre_vandermonde(n: int):
    """Matrix V mapping values at n Gauss nodes to Legendre coefficients."""
    x, w = gauss_legendre(n)
    P = np.polynomial.legendre.legvander(x, n - 1)
    norms = 2.0 / (2.0 * np.arange(n) + 1.0)
    return (P * w[:, None]).T / norms[:, None]


@lru_cache(maxsize=16)
def legendre_diff_matrix(n: int):
    """Spectral differentiation matrix at the n Gauss nodes (reference panel)."""
    x, _ = gauss_legendre(n)
    V = np.polynomial.legendre.legvander(x, n - 1)
    C = np.linalg.inv(V)
    coeffs_d = np.zeros((n, n))
    for j in range(n):
        c = np.zeros(n)
        c[j] = 1.0
        d = np.polynomial.legendre.legder(c)
        coeffs_d[: len(d), j] = d
    Vd = np.polynomial.legendre.legvander(x, n - 1)
    return Vd @ coeffs_d @ C
