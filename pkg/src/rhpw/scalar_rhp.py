"""Scalar D-function: Cauchy-integral exponent, value at infinity, and the
regularized limit D_b at k0.

D(zeta, k) = exp( X(k)/(2 pi i) * [ (int_{-inf}^{E1} + int_{E2}^{k0})
                 ln(1-|r|^2)/(X(s)(s-k)) ds
                 + int_{E1}^{E2} i arg r(s)/(X_+(s)(s-k)) ds ] )

Quadrature layout: s = E_i -+ tau^2 substitutions absorb the 1/X inverse
square roots; panels are graded dyadically into the endpoint log
singularities, deep enough that the uncovered innermost gap sits below the
evaluation tolerances.  Integrands at substituted nodes are assembled in the
tau variable (the s-image of the innermost nodes collapses onto the endpoint
in floating point).  Cauchy kernels at targets near the contour are handled
by exact Legendre panel integrals (three-term q-recurrence), and boundary
values on the axis by the explicit one-sided limits, never epsilon offsets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import (
    dyadic_panels,
    gauss_legendre,
    geometric_panels,
    legendre_q,
    legendre_vandermonde,
    panel_nodes,
    split_panels,
)
from .spectral_core import BranchCutError, critical_points, eval_X
from .spectral_data import SpectralData

__all__ = ["DFunctionContext", "DbValue", "plane_wave_damping"]

# panels whose Bernstein-ellipse sum |u-1|+|u+1| is below this use exact
# Legendre panel integrals; beyond it plain node sums are already spectral
_NEAR_ELL = 5.0


@dataclass(frozen=True)
class DbValue:
    """Regularized boundary limit D_b(zeta, k0) and the exponent nu."""

    nu: float
    value: complex
    direction: str = "real-axis-right"


class _Region:
    """One integration interval, either straight in s ('line') or the image
    of a tau-panel family under s = E + sigma tau^2 ('sqrt')."""

    def __init__(self, a, b, kind, order, pmid, ph, gpan, s, w, x, num,
                 E=0.0, sigma=+1, tau=None, wt=None):
        self.a, self.b = float(a), float(b)
        self.kind = kind
        self.order = order
        self.pmid = pmid          # parameter-space panel midpoints
        self.ph = ph              # parameter-space panel half-lengths
        self.gpan = gpan          # (n_panels, order) integrand values
        self.s = s                # flat s nodes (parameter order)
        self.w = w                # flat weights in s measure
        self.x = x                # X(s) at nodes
        self.num = num            # numerator values at nodes
        self.g = num / x
        self.mass = self.g * self.w
        self.E = E
        self.sigma = sigma
        self.tau = tau            # flat parameter nodes (sqrt regions)
        self.wt = wt              # flat parameter weights (sqrt regions)
        self.coef = legendre_vandermonde(order) @ gpan.T  # (order, n_panels)

    def cauchy(self, k: complex, side: int = 0) -> complex:
        """int_a^b g(s)/(s-k) ds with exact handling of panels near k."""
        if self.kind == "line":
            u = (k - self.pmid) / self.ph
            ell = np.abs(u - 1.0) + np.abs(u + 1.0)
            near = ell < _NEAR_ELL
            total = self._far_sum(k, near)
            for j in np.nonzero(near)[0]:
                q = legendre_q(u[j], self.order, side=side)
                total -= np.dot(self.coef[:, j], q)
            return total
        # sqrt panels: s - k = sigma (tau^2 - c^2); the kernel (with jacobian)
        # splits into the tau-poles +-c.  Each pole goes through the exact
        # q-recurrence only when near its panel; far poles use plain parameter
        # sums (the forward recurrence diverges at distant poles).
        c = np.sqrt(self.sigma * (k - self.E) + 0j)
        sq = side * self.sigma
        total = 0.0 + 0.0j
        any_near = np.zeros(self.pmid.size, dtype=bool)
        for pole, sd in ((c, sq), (-c, -sq)):
            u = (pole - self.pmid) / self.ph
            near = (np.abs(u - 1.0) + np.abs(u + 1.0)) < _NEAR_ELL
            any_near |= near
            for j in np.nonzero(near)[0]:
                q = legendre_q(u[j], self.order, side=sd)
                total -= np.dot(self.coef[:, j], q)
        # panels with neither pole near: one plain s-space sum
        neither = ~any_near
        sel = np.repeat(neither, self.order)
        total += np.sum(self.mass[sel] / (self.s[sel] - k))
        # panels with at least one near pole: plain parameter sums for the
        # poles that are far on those panels
        for pole, _ in ((c, 0), (-c, 0)):
            u = (pole - self.pmid) / self.ph
            far_here = any_near & ~((np.abs(u - 1.0) + np.abs(u + 1.0)) < _NEAR_ELL)
            if far_here.any():
                sel = np.repeat(far_here, self.order)
                total += self.sigma * np.sum(
                    self.g[sel] * self.wt[sel] / (self.tau[sel] - pole)
                )
        return total

    def _far_sum(self, k, near_mask):
        if not near_mask.any():
            return np.sum(self.mass / (self.s - k))
        keep = ~np.repeat(near_mask, self.order)
        return np.sum(self.mass[keep] / (self.s[keep] - k))


def _sqrt_region(data, E, sigma, tmax, levels, n_base, order, kind,
                 extra_panels=None, stable_zone=None, cut_angle=False):
    """Build a sqrt-substituted region s = E + sigma tau^2, tau in (0, tmax)."""
    bp = data.bp
    width = bp.width
    tp = dyadic_panels(0.0, tmax, levels, into="a")
    tp = split_panels(tp, tmax / n_base)
    if extra_panels:
        tp = tp + extra_panels
    xg, wg = gauss_legendre(order)
    pmid = np.array([0.5 * (p[0] + p[1]) for p in tp])
    ph = np.array([0.5 * (p[1] - p[0]) for p in tp])
    tau = (pmid[:, None] + ph[:, None] * xg[None, :]).ravel()
    wt = (ph[:, None] * wg[None, :]).ravel()
    s = E + sigma * tau**2
    if cut_angle:
        A = np.sqrt(width - tau**2)
        x = 1j * tau * A
        if sigma > 0:   # from E1 into the cut
            num = 1j * (-1.5 * np.pi + 2.0 * np.arctan(tau / A))
        else:           # from E2 into the cut
            num = 1j * (-0.5 * np.pi - 2.0 * np.arctan(tau / A))
    else:
        A = np.sqrt(width + tau**2)
        x = sigma * tau * A
        num = np.empty_like(tau)
        if sigma > 0:
            lo, hi = stable_zone
            inz = s < hi
            num[inz] = (np.log(4.0) + np.log(tau[inz]) - np.log(A[inz])
                        - 2.0 * np.log1p(tau[inz] / A[inz]))
        else:
            lo, hi = stable_zone
            inz = s > lo
            num[inz] = (np.log(4.0) + np.log(A[inz]) + np.log(tau[inz])
                        - 2.0 * np.log(tau[inz] + A[inz]))
        num[~inz] = data.log_one_minus_r2(s[~inz])
    w = 2.0 * tau * wt  # integrates over increasing s for both orientations
    g = num / x
    # panel q-integrals absorb the jacobian into the split
    # 2 tau/(tau^2 - c^2) = 1/(tau-c) + 1/(tau+c); sign sigma from ds
    gpan = (sigma * g).reshape(len(tp), order)
    t_top = max(p[1] for p in tp)
    lo_s = min(E + sigma * t_top**2, E)
    hi_s = max(E + sigma * t_top**2, E)
    return _Region(lo_s, hi_s, "sqrt", order, pmid, ph, gpan, s, w, x, num,
                   E=E, sigma=sigma, tau=tau, wt=wt)


class DFunctionContext:
    """Frozen quadrature context for D(zeta, .) on one data set.

    All evaluations are pure; a context can be shared across workers.
    """

    def __init__(
        self,
        data: SpectralData,
        zeta: float,
        order: int = 16,
        r_left: float | None = None,
        levels: int = 48,
        k0_levels: int = 22,
        n_base: int = 14,
    ):
        self.data = data
        self.zeta = float(zeta)
        self.order = int(order)
        bp = data.bp
        self.bp = bp
        self.cp = critical_points(data.triple, zeta)
        k0 = self.cp.k0
        width = bp.width
        if r_left is None:
            r_left = 1e3 * width
        self.r_left = float(r_left)
        # integrand ~ |s|^-11 as s -> -inf (r = O(s^-5)); dropped-tail bound
        self.tail_bound = float(abs(self.r_left) ** -5)

        zone_l = (bp.center - data.r_inf.w_in, bp.e1)
        zone_r = (bp.e2, data.r_inf.bump_center - data.r_inf.bump_halfwidth)

        regions = []

        # (-R_left, E1 - w1]: straight geometric panels
        w1 = min(1.0, 0.5 * width)
        pan = geometric_panels(-self.r_left, bp.e1 - w1, 26, ratio=1.6,
                               small_end="b")
        xg, wg = gauss_legendre(order)
        pmid = np.array([0.5 * (p[0] + p[1]) for p in pan])
        ph = np.array([0.5 * (p[1] - p[0]) for p in pan])
        s = (pmid[:, None] + ph[:, None] * xg[None, :]).ravel()
        w = (ph[:, None] * wg[None, :]).ravel()
        x = np.real(eval_X(bp, s + 0j))
        num = data.log_one_minus_r2(s)
        g = num / x
        regions.append(
            _Region(-self.r_left, bp.e1 - w1, "line", order, pmid, ph,
                    g.reshape(len(pan), order), s, w, x, num)
        )

        # [E1 - w1, E1): s = E1 - tau^2
        regions.append(
            _sqrt_region(data, bp.e1, -1, np.sqrt(w1), levels, n_base, order,
                         "left_e1", stable_zone=zone_l)
        )
        # cut halves
        half = np.sqrt(0.5 * width)
        regions.append(
            _sqrt_region(data, bp.e1, +1, half, 30, n_base, order, "cut",
                         cut_angle=True)
        )
        regions.append(
            _sqrt_region(data, bp.e2, -1, half, 30, n_base, order, "cut",
                         cut_angle=True)
        )
        # (E2, k0): s = E2 + tau^2, graded into k0 as well
        t0 = np.sqrt(k0 - bp.e2)
        t_mid = t0 * (1.0 - 2.0 ** -k0_levels)
        extra = split_panels([(0.5 * t0, t_mid)], t0 / (2 * n_base))
        extra += dyadic_panels(t_mid, t0, k0_levels, into="b")
        regions.append(
            _sqrt_region(data, bp.e2, +1, 0.5 * t0, levels, n_base, order,
                         "right", extra_panels=extra, stable_zone=zone_r)
        )
        self._right = regions[-1]
        self.regions = regions
        self.n_nodes = int(sum(r.s.size for r in regions))
        self._d_inf = None
        self._db = None
        self._damping = None

    # -- core Cauchy sum -------------------------------------------------------

    def _bracket(self, k: complex, side: int | None) -> complex:
        """The [...] exponent integral at one target."""
        k = complex(k)
        on_axis = k.imag == 0.0
        total = 0.0 + 0.0j
        for reg in self.regions:
            if on_axis and reg.a < k.real < reg.b:
                if side is None:
                    raise BranchCutError(
                        "target on the integration contour: pass side=+1 or -1"
                    )
                total += reg.cauchy(k, side=side)
            else:
                total += reg.cauchy(k)
        return total

    # -- public API ------------------------------------------------------------

    def eval_D(self, k, side: int | None = None):
        """D(zeta, k) for scalar or array k; side=+-1 selects boundary values
        for real k on (-inf, k0)."""
        ks = np.atleast_1d(np.asarray(k, dtype=complex))
        out = np.empty(ks.shape, dtype=complex)
        flat = out.ravel()
        for i, kk in enumerate(ks.ravel()):
            xk = eval_X(self.bp, kk, side=side)
            flat[i] = np.exp(xk / (2j * np.pi) * self._bracket(kk, side))
        return complex(out[0]) if np.asarray(k).ndim == 0 else out

    def D_infinity(self) -> complex:
        """D(zeta, infinity); |result| = 1."""
        if self._d_inf is None:
            total = sum(np.sum(r.mass) for r in self.regions)
            self._d_inf = complex(np.exp(-total / (2j * np.pi)))
        return self._d_inf

    def Db_k0(self) -> DbValue:
        """Limit D_b(zeta, k0) = lim_{z->k0+} (z-k0)^{-i nu} D(zeta, z).

        The constant part of ln(1-|r|^2) on (E2, k0) integrates in closed form
        and cancels the (z-k0)^{-i nu} factor exactly; the remainder rho is a
        regular integral evaluated at z = k0.
        """
        if self._db is not None:
            return self._db
        k0 = self.cp.k0
        lk0 = float(self.data.log_one_minus_r2(k0))
        nu = -lk0 / (2.0 * np.pi)
        xk0 = float(np.real(eval_X(self.bp, k0 + 0j)))
        total = 0.0 + 0.0j
        for reg in self.regions:
            if reg is self._right:
                rho = reg.num - lk0
                total += np.sum(rho / reg.x * reg.w / (reg.s - k0))
            else:
                total += reg.cauchy(complex(k0))
        right = self._right
        a_const = np.sum((xk0 - right.x) / right.x * right.w / (right.s - k0))
        a_const -= np.log(k0 - self.bp.e2)
        value = np.exp(xk0 / (2j * np.pi) * total + 1j * nu * a_const)
        self._db = DbValue(nu=float(nu), value=complex(value))
        return self._db

    def Db_probe(self, delta: float, angle: float) -> complex:
        """(k-k0)^{-i nu} D(zeta, k) at k = k0 - delta e^{i angle}, an oblique
        approach probe for the D_b limit."""
        k0 = self.cp.k0
        k = k0 - delta * np.exp(1j * angle)
        nu = self.Db_k0().nu
        fac = np.exp(-1j * nu * np.log(k - k0))
        return complex(fac * self.eval_D(k))

    def damping(self) -> complex:
        """Unimodular plane-wave factor exp(-(1/pi i) int_{k0}^{kappa+}
        ln(1-|r|^2)/X ds)."""
        if self._damping is None:
            self._damping = plane_wave_damping(self.data, self.zeta)
        return self._damping


def plane_wave_damping(data: SpectralData, zeta: float, order: int = 16) -> complex:
    """exp(-(1/pi i) int_{k0}^{kappa_plus} ln(1-|r(s)|^2)/X(s) ds); unimodular."""
    bp = data.bp
    k0 = critical_points(data.triple, zeta).k0
    if bp.kappa_plus - k0 < 1e-15:
        return 1.0 + 0.0j
    pan = split_panels([(k0, bp.kappa_plus)], (bp.kappa_plus - k0) / 12.0)
    s, w = panel_nodes(pan, order)
    x = np.real(eval_X(bp, s + 0j))
    val = np.sum(data.log_one_minus_r2(s) / x * w)
    return complex(np.exp(-val / (1j * np.pi)))
