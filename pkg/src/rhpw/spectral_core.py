"""Scalar building blocks on the spectral plane.

Everything here is elementary but branch-sensitive: the square root X with
cut [E1, E2], the fourth root Delta, the phase function g(zeta, k) and its
critical points, and a predictor-corrector tracer for the level curves
Im g = 0 that the jump contour follows off the real axis.

Branch realization: X is computed as sqrt(k - E1) * sqrt(k - E2) with both
factors on the principal branch, so the two spurious half-line cuts cancel
and only [E1, E2] survives.  Boundary values on the open cut are produced by
explicit one-sided formulas, never by epsilon offsets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AdmissibilityError",
    "BranchCutError",
    "SectorError",
    "TracingError",
    "ParameterTriple",
    "BranchPoints",
    "CriticalPoints",
    "Phase",
    "derive_triple",
    "derive_triple_from_alpha",
    "eval_X",
    "eval_Delta",
    "eval_Omega",
    "eval_g",
    "eval_g_prime",
    "critical_points",
    "trace_level_curve",
]


class AdmissibilityError(ValueError):
    """Parameter pair outside the admissible family."""


class BranchCutError(ValueError):
    """Evaluation on the open cut without a side flag."""


class SectorError(ValueError):
    """zeta outside the plane-wave sector [0, 4*beta - 2*alpha)."""


class TracingError(RuntimeError):
    """Level-curve continuation failed to converge."""


@dataclass(frozen=True)
class ParameterTriple:
    """Admissible boundary-data parameters (alpha, omega, c) plus beta.

    Invariants: alpha = sqrt(|omega|/2 - 2 beta^2), c = 2i alpha beta,
    omega = -2 (alpha^2 + 2 beta^2), with -12 beta^2 < omega < -4 beta^2.
    """

    alpha: float
    omega: float
    beta: float
    c: complex

    @property
    def zeta_max(self) -> float:
        """Right edge 4*beta - 2*alpha of the plane-wave sector."""
        return 4.0 * self.beta - 2.0 * self.alpha

    def branch_points(self) -> "BranchPoints":
        e1 = -self.beta - self.alpha
        e2 = -self.beta + self.alpha
        kp = -self.beta / 2.0 + np.sqrt(self.alpha**2 / 2.0 + self.beta**2 / 4.0)
        return BranchPoints(e1=e1, e2=e2, kappa_plus=kp)


@dataclass(frozen=True)
class BranchPoints:
    """Cut endpoints E1 < E2 and the four-domain intersection point kappa_plus."""

    e1: float
    e2: float
    kappa_plus: float

    @property
    def center(self) -> float:
        return 0.5 * (self.e1 + self.e2)

    @property
    def width(self) -> float:
        return self.e2 - self.e1


@dataclass(frozen=True)
class CriticalPoints:
    """Roots k1 < k0 of dg = 4 (k - k1)(k - k0) / X dk, and g's value at infinity."""

    zeta: float
    k0: float
    k1: float
    g_inf: float


@dataclass(frozen=True)
class Phase:
    """Raw oscillatory phase theta(k) = k x + 2 k^2 t."""

    x: float
    t: float

    def theta(self, k):
        k = np.asarray(k, dtype=complex)
        return k * self.x + 2.0 * k * k * self.t


def derive_triple(beta: float, omega: float) -> ParameterTriple:
    """Build the admissible triple from (beta, omega).

    Requires -12 beta^2 < omega < -4 beta^2 (open interval) and beta > 0.
    """
    if beta <= 0.0:
        raise AdmissibilityError(f"beta must be positive, got {beta}")
    lo, hi = -12.0 * beta**2, -4.0 * beta**2
    if not (lo < omega < hi):
        raise AdmissibilityError(
            f"omega={omega} outside the admissible interval "
            f"-12*beta^2 < omega < -4*beta^2 = ({lo}, {hi})"
        )
    alpha = np.sqrt(abs(omega) / 2.0 - 2.0 * beta**2)
    return ParameterTriple(alpha=float(alpha), omega=float(omega), beta=float(beta),
                           c=2j * alpha * beta)


def derive_triple_from_alpha(alpha: float, omega: float) -> ParameterTriple:
    """Build the triple from (alpha, omega) via beta = sqrt(|omega|/4 - alpha^2/2)."""
    if alpha <= 0.0:
        raise AdmissibilityError(f"alpha must be positive, got {alpha}")
    if omega >= 0.0 or alpha**2 >= abs(omega) / 3.0:
        raise AdmissibilityError(
            f"(alpha={alpha}, omega={omega}) not admissible: need omega < 0 and "
            f"alpha^2 < |omega|/3"
        )
    beta = np.sqrt(abs(omega) / 4.0 - alpha**2 / 2.0)
    return derive_triple(float(beta), float(omega))


def _on_cut_mask(bp: BranchPoints, k: np.ndarray) -> np.ndarray:
    return (k.imag == 0.0) & (k.real > bp.e1) & (k.real < bp.e2)


def eval_X(bp: BranchPoints, k, side: int | None = None):
    """X(k) = sqrt((k - E1)(k - E2)) with cut [E1, E2] and X(k) = k + beta + O(1/k).

    For k exactly on the open cut a side flag is required: side=+1 gives the
    boundary value from above, X_+ = i sqrt((s-E1)(E2-s)); side=-1 gives -X_+.
    """
    k = np.asarray(k, dtype=complex)
    scalar = k.ndim == 0
    k = np.atleast_1d(k)
    out = np.sqrt(k - bp.e1) * np.sqrt(k - bp.e2)
    cut = _on_cut_mask(bp, k)
    if np.any(cut):
        if side is None:
            raise BranchCutError("k on the open cut (E1, E2): pass side=+1 or side=-1")
        s = k[cut].real
        out[cut] = side * 1j * np.sqrt((s - bp.e1) * (bp.e2 - s))
    return out[0] if scalar else out


def eval_Delta(bp: BranchPoints, k, side: int | None = None):
    """Delta(k) = ((k - E2)/(k - E1))^(1/4), Delta -> 1 at infinity, cut [E1, E2].

    On the open cut Delta_+(s) = rho e^{i pi/4} and Delta_-(s) = rho e^{-i pi/4}
    with rho = ((E2-s)/(s-E1))^(1/4), so Delta_+/Delta_- = i.
    """
    k = np.asarray(k, dtype=complex)
    scalar = k.ndim == 0
    k = np.atleast_1d(k)
    ratio = (k - bp.e2) / (k - bp.e1)
    out = np.exp(0.25 * np.log(ratio))
    cut = _on_cut_mask(bp, k)
    if np.any(cut):
        if side is None:
            raise BranchCutError("k on the open cut (E1, E2): pass side=+1 or side=-1")
        s = k[cut].real
        rho = ((bp.e2 - s) / (s - bp.e1)) ** 0.25
        out[cut] = rho * np.exp(side * 0.25j * np.pi)
    return out[0] if scalar else out


def eval_Omega(triple: ParameterTriple, k, side: int | None = None):
    """Omega(k) = 2 (k - beta) X(k)."""
    bp = triple.branch_points()
    k = np.asarray(k, dtype=complex)
    return 2.0 * (k - triple.beta) * eval_X(bp, k, side=side)


def eval_g(triple: ParameterTriple, zeta: float, k, side: int | None = None):
    """g(zeta, k) = Omega(k) + zeta X(k) = (2k - 2 beta + zeta) X(k)."""
    bp = triple.branch_points()
    k = np.asarray(k, dtype=complex)
    return (2.0 * k - 2.0 * triple.beta + zeta) * eval_X(bp, k, side=side)


def eval_g_prime(triple: ParameterTriple, zeta: float, k, side: int | None = None):
    """dg/dk = 4 (k - k1)(k - k0) / X(k)."""
    cp = critical_points(triple, zeta)
    bp = triple.branch_points()
    k = np.asarray(k, dtype=complex)
    return 4.0 * (k - cp.k1) * (k - cp.k0) / eval_X(bp, k, side=side)


def critical_points(triple: ParameterTriple, zeta: float) -> CriticalPoints:
    """Closed-form k0(zeta), k1(zeta) and g_inf(zeta) = beta zeta - alpha^2 - 2 beta^2."""
    if not (0.0 <= zeta < triple.zeta_max):
        raise SectorError(
            f"zeta={zeta} outside the plane-wave sector [0, {triple.zeta_max})"
        )
    a, b = triple.alpha, triple.beta
    root = np.sqrt(a**2 / 2.0 + ((4.0 * b - zeta) / 8.0) ** 2)
    base = -(4.0 * b + zeta) / 8.0
    return CriticalPoints(
        zeta=float(zeta),
        k0=float(base + root),
        k1=float(base - root),
        g_inf=float(b * zeta - a**2 - 2.0 * b**2),
    )


def trace_level_curve(
    triple: ParameterTriple,
    zeta: float,
    half_plane: int = +1,
    R: float = 12.0,
    tol: float = 1e-10,
    h_init: float = 1e-3,
    h_max: float = 0.25,
    max_steps: int = 200000,
):
    """Trace the transverse branch of {Im g(zeta, .) = 0} through k0(zeta).

    Predictor-corrector continuation: Euler predictor along the tangent
    conj(g')/|g'|, Newton corrector transverse to the curve, step length
    adapted to the turning rate.  The trace starts at k0 and stops once
    |Im k| >= R.  Returns an array of vertices, first vertex exactly k0.

    half_plane=+1 traces into C+, -1 into C- (the mirror by Schwarz symmetry).
    """
    if half_plane not in (+1, -1):
        raise ValueError("half_plane must be +1 or -1")
    cp = critical_points(triple, zeta)
    bp = triple.branch_points()
    sgn = float(half_plane)

    def gp(k):
        return 4.0 * (k - cp.k1) * (k - cp.k0) / eval_X(bp, k)

    def img(k):
        return float(np.imag(eval_g(triple, zeta, k)))

    pts = [complex(cp.k0)]
    # leave the saddle vertically; the curve through k0 is transverse to R
    k = cp.k0 + sgn * 1j * h_init
    k = _newton_transverse(triple, zeta, k, 1j * sgn, tol)
    pts.append(k)
    h = h_init
    prev_t = 1j * sgn
    for _ in range(max_steps):
        d = gp(k)
        if d == 0.0:
            raise TracingError(f"g' vanished at {k}; cannot continue")
        t = np.conj(d) / abs(d)
        if np.real(np.conj(t) * prev_t) < 0.0:
            t = -t
        k_pred = k + h * t
        try:
            k_new = _newton_transverse(triple, zeta, k_pred, 1j * t, tol)
        except TracingError:
            h *= 0.5
            if h < 1e-13 * max(1.0, abs(k)):
                raise
            continue
        turn = abs(t - prev_t)
        if turn > 0.3 and h > 4.0 * h_init:
            h *= 0.5
            continue
        pts.append(k_new)
        prev_t = t
        k = k_new
        if abs(k.imag) >= R:
            return np.array(pts)
        if turn < 0.05:
            h = min(h * 1.4, h_max)
    raise TracingError(f"level-curve trace did not reach |Im k| = {R}")


def _newton_transverse(triple, zeta, k, normal, tol, max_iter=30):
    """Newton-correct k along the given normal direction onto Im g = 0."""
    for _ in range(max_iter):
        val = float(np.imag(eval_g(triple, zeta, k)))
        if abs(val) < tol:
            return k
        d = eval_g_prime(triple, zeta, k)
        slope = float(np.imag(d * normal))
        if slope == 0.0:
            raise TracingError(f"degenerate transverse direction at {k}")
        k = k - normal * (val / slope)
    raise TracingError(f"transverse Newton stalled near {k} (|Im g|={abs(val):.2e})")
