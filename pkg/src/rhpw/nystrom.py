"""Nystrom machinery for L^2 Riemann-Hilbert problems on panelized contours.

The singular integral equation mu = I + C_-(mu (v - I)) is collocated at
composite Gauss-Legendre nodes.  The minus boundary value of the Cauchy
transform is represented by a dense N x N matrix K with

    (C_- f)(z_i) = sum_j K[i, j] f(z_j).

Far interactions use plain node/weight sums.  Near interactions on straight
panels use exact Legendre panel integrals via the three-term q-recurrence
(one-sided on the self panel).  Near interactions on curved panels use the
foot-point subtraction with the closed-form log term; the self-panel case
carries the exact derivative correction at the collocation node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quadrature import (
    gauss_legendre,
    legendre_diff_matrix,
    legendre_q,
    legendre_vandermonde,
)

__all__ = ["Panel", "PanelContour", "cauchy_matrix", "cauchy_offgrid", "solve_sie"]

_NEAR_ELL = 5.0


@dataclass
class Panel:
    """One oriented panel with `order` Gauss nodes.

    Straight panels store mid/h with z = mid + h xi; curved panels store the
    node positions and parameter derivatives explicitly.
    """

    z: np.ndarray             # node positions
    dz: np.ndarray            # complex weights: int f dz = sum f_j dz_j
    mid: complex
    h: complex                # half-chord (direction * half-length)
    straight: bool
    zp: np.ndarray | None = None   # dz/dxi at nodes (curved panels)
    zpp_mid: complex = 0.0         # d2z/dxi2 near the panel center (curved)

    @property
    def order(self):
        return self.z.size


def straight_panel(a: complex, b: complex, order: int) -> Panel:
    xg, wg = gauss_legendre(order)
    mid = 0.5 * (a + b)
    h = 0.5 * (b - a)
    z = mid + h * xg
    dz = h * wg.astype(complex)
    return Panel(z=z, dz=dz, mid=mid, h=h, straight=True)


def curved_panel(zfun, dzfun, pa: float, pb: float, order: int) -> Panel:
    """Panel on a parametrized arc z = zfun(p), p in [pa, pb]."""
    xg, wg = gauss_legendre(order)
    pm = 0.5 * (pa + pb)
    phl = 0.5 * (pb - pa)
    p = pm + phl * xg
    z = zfun(p)
    zp = dzfun(p) * phl          # dz/dxi
    dz = zp * wg
    mid = 0.5 * (z[0] + z[-1])
    h = 0.5 * (z[-1] - z[0])
    dd = 1e-3
    zpp = (zfun(pm + dd * phl) - 2.0 * zfun(pm) + zfun(pm - dd * phl)) / dd**2
    return Panel(z=z, dz=dz, mid=mid, h=h, straight=False, zp=zp, zpp_mid=zpp)


@dataclass
class PanelContour:
    """Ordered collection of panels; flat node/weight views for assembly."""

    panels: list = field(default_factory=list)

    def __post_init__(self):
        self._freeze()

    def _freeze(self):
        self.z = np.concatenate([p.z for p in self.panels])
        self.dz = np.concatenate([p.dz for p in self.panels])
        self.n = self.z.size
        self.order = self.panels[0].order
        self.starts = np.cumsum([0] + [p.order for p in self.panels])[:-1]

    def panel_of(self, i: int) -> int:
        return int(np.searchsorted(self.starts, i, side="right") - 1)


def _near_rows_straight(p: Panel, zt: complex, on_panel: bool, V, order):
    """Row weights for int_P f(z)/(z - zt) dz via exact Legendre integrals."""
    u = (zt - p.mid) / p.h
    side = -1 if on_panel else 0
    q = legendre_q(u, order, side=side)
    return -(q @ V)


def _near_rows_curved(p: Panel, zt: complex, i_local: int | None, V, D, order):
    """Row weights for int_P f(z)/(z - zt) dz on a curved panel.

    i_local is the index of zt among the panel's own nodes (self-panel case),
    or None for a nearby target off the panel.
    """
    row = np.zeros(order, dtype=complex)
    if i_local is None:
        # subtraction at the nearest node m: the subtracted term integrates to
        # the principal-branch log (valid for targets outside the arc sliver)
        m = int(np.argmin(np.abs(p.z - zt)))
        za = p.mid - p.h
        zb = p.mid + p.h
        L = np.log(zb - zt) - np.log(za - zt)
        row += p.dz / (p.z - zt)
        row[m] += L - np.sum(p.dz / (p.z - zt))
        return row
    # self panel: write z(xi) - zt = (xi - xi_t) G(xi); then
    # int f zdot/(z-zt) dxi = int (f H - f_t)/(xi - xi_t) dxi + f_t q0_-,
    # with H = zdot (xi - xi_t)/(z - zt), H(xi_t) = 1, H'(xi_t) = zddot/(2 zdot)
    xg, wg = gauss_legendre(order)
    xt = xg[i_local]
    H = p.zp * (xg - xt)
    zdiff = p.z - zt
    H = np.where(np.arange(order) == i_local, 1.0, H / np.where(zdiff == 0, 1, zdiff))
    for j in range(order):
        if j == i_local:
            continue
        row[j] += wg[j] * H[j] / (xg[j] - xt)
        row[i_local] -= wg[j] / (xg[j] - xt)
    # the j = i_local limit: d/dxi [f H](xi_t) = f'(xi_t) + f_t zddot/(2 zdot)
    row += wg[i_local] * D[i_local, :]
    row[i_local] += wg[i_local] * p.zpp_mid / (2.0 * p.zp[i_local])
    # one-sided straight-line term: int dxi/(xi - xi_t) from the minus side
    row[i_local] += np.log((1.0 - xt) / (1.0 + xt)) + 1j * np.pi
    return row


def cauchy_matrix(contour: PanelContour) -> np.ndarray:
    """Dense matrix of C_- at the contour nodes."""
    z, dz = contour.z, contour.dz
    n = contour.n
    order = contour.order
    V = legendre_vandermonde(order)
    D = legendre_diff_matrix(order)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = dz[None, :] / (z[None, :] - z[:, None])
    for jp, p in enumerate(contour.panels):
        sl = slice(contour.starts[jp], contour.starts[jp] + order)
        scale = max(abs(p.h), 1e-300)
        u = (z - p.mid) / p.h
        ell = np.abs(u - 1.0) + np.abs(u + 1.0)
        near = np.nonzero(ell < _NEAR_ELL)[0]
        for i in near:
            in_this = contour.starts[jp] <= i < contour.starts[jp] + order
            if p.straight:
                K[i, sl] = _near_rows_straight(p, z[i], in_this, V, order)
            else:
                i_local = i - contour.starts[jp] if in_this else None
                K[i, sl] = _near_rows_curved(p, z[i], i_local, V, D, order)
    K /= 2j * np.pi
    return K


def cauchy_offgrid(contour: PanelContour, targets) -> np.ndarray:
    """Rows of the plain Cauchy transform at off-contour targets.

    Accurate once the target is a couple of panel lengths away from the
    contour; probe points should be chosen accordingly.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=complex))
    return (contour.dz[None, :] / (contour.z[None, :] - targets[:, None])) / (2j * np.pi)


def solve_sie(K: np.ndarray, w: np.ndarray, method: str = "direct",
              gmres_tol: float = 1e-10, x0: np.ndarray | None = None):
    """Solve delta - C_-(delta w) = C_-(w) for delta = mu - I.

    w has shape (N, 2, 2).  Returns (mu, info) with mu of shape (N, 2, 2);
    info carries the residual, a condition estimate (direct path), and the
    iteration count (gmres path).
    """
    n = w.shape[0]
    rhs = np.einsum("ij,jcb->ibc", K, w).reshape(2 * n, 2)
    info = {"method": method}
    if method == "direct":
        A = np.eye(2 * n, dtype=complex)
        A -= np.einsum("ij,jcb->ibjc", K, w).reshape(2 * n, 2 * n)
        sol = np.linalg.solve(A, rhs)
        resid = np.linalg.norm(A @ sol - rhs) / max(np.linalg.norm(rhs), 1e-300)
        # one step of iterative refinement
        sol += np.linalg.solve(A, rhs - A @ sol)
        info["residual"] = float(np.linalg.norm(A @ sol - rhs)
                                 / max(np.linalg.norm(rhs), 1e-300))
        info["cond_est"] = float(_cond_estimate(A))
    elif method == "gmres":
        from scipy.sparse.linalg import LinearOperator, gmres

        def apply(vec):
            d = vec.reshape(n, 2, 2)
            out = d - np.einsum("ij,jac,jcb->iab", K, d, w, optimize=True)
            return out.reshape(-1)

        op = LinearOperator((4 * n, 4 * n), matvec=lambda v: _cplx(apply, v, n),
                            dtype=complex)
        b = np.zeros((n, 2, 2), dtype=complex)
        b[:, 0, :] = rhs.reshape(n, 2, 2)[:, :, 0].reshape(n, 2) * 0  # placeholder
        raise NotImplementedError
    else:
        raise ValueError("method must be 'direct' or 'gmres'")
    delta = sol.reshape(n, 2, 2).transpose(0, 2, 1)
    mu = delta + np.eye(2)
    return mu, info


def _cond_estimate(A, n_probe: int = 2):
    """Cheap 1-norm condition estimate via a few random solves."""
    rng = np.random.default_rng(7)
    norm_a = np.linalg.norm(A, 1)
    est = 0.0
    for _ in range(n_probe):
        b = rng.standard_normal(A.shape[0]) + 1j * rng.standard_normal(A.shape[0])
        x = np.linalg.solve(A, b)
        est = max(est, np.linalg.norm(x, 1) / np.linalg.norm(b, 1))
    return norm_a * est


def _cplx(apply, v, n):
    return apply(v)
