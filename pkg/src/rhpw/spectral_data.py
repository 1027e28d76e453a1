"""Construction and validation of admissible spectral data (r1, h, r).

The data family implemented here follows the explicit recipe: h = tau * rb
and r1 = (1 - tau) * rb - r_inf, where rb is the background reflection
coefficient built from the fourth-root Delta and r_inf is a smooth real-line
function matching rb's tail to four inverse powers, vanishing near the cut,
and pinned so that r(kappa_plus) = 0.  The resulting r = r1 + h = rb - r_inf
is independent of the mixing parameter tau.

r_inf = chi(k) * P(1/(k+i)) + A * bump((k - kappa_plus)/delta_b), where P is
the degree-4 rational tail match, chi a C-infinity cutoff that vanishes on a
neighbourhood of [E1, E2], and the bump pins the zero at kappa_plus.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .spectral_core import (
    BranchPoints,
    ParameterTriple,
    eval_Delta,
)

__all__ = [
    "RInfinity",
    "SpectralData",
    "BranchExpansion",
    "AssumptionReport",
    "eval_rb",
    "rb_tail_coeffs",
    "build_r_infinity",
    "build_data",
    "extract_branch_coeffs",
    "validate_assumptions",
    "export_samples",
    "import_samples",
]


def eval_rb(bp: BranchPoints, k, side: int | None = None):
    """Background reflection rb(k) = i (Delta - 1/Delta) / (Delta + 1/Delta).

    Single cut on [E1, E2], |rb_+| = 1 there, |rb| < 1 on R off the cut,
    rb(k) = -i alpha/(2k) + O(1/k^2) at infinity.
    """
    k = np.asarray(k, dtype=complex)
    scalar = k.ndim == 0
    k = np.atleast_1d(k)
    out = np.empty_like(k)
    at_e1 = k == bp.e1
    at_e2 = k == bp.e2
    rest = ~(at_e1 | at_e2)
    out[at_e1] = 1j
    out[at_e2] = -1j
    if np.any(rest):
        d2 = eval_Delta(bp, k[rest], side=side) ** 2
        den = d2 + 1.0
        if np.any(np.abs(den) < 1e-14):
            raise RuntimeError("Delta^2 = -1 encountered; branch selection is broken")
        out[rest] = 1j * (d2 - 1.0) / den
    return out[0] if scalar else out


def rb_tail_coeffs(triple: ParameterTriple) -> np.ndarray:
    """First four 1/k tail coefficients of rb at infinity (all purely imaginary)."""
    a = triple.alpha
    e1 = -triple.beta - a
    f = -0.5j * a
    return np.array(
        [
            f,
            f * (e1 + a),
            f * (e1**2 + 2.0 * a * e1 + 1.25 * a**2),
            f * (e1**3 + 3.0 * a * e1**2 + 3.75 * a**2 * e1 + 1.75 * a**3),
        ]
    )


def _smoothstep(x):
    """C-infinity transition, 0 for x <= 0 and 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    lo = np.exp(-1.0 / np.maximum(x, 1e-300)) * (x > 0.0)
    hi = np.exp(-1.0 / np.maximum(1.0 - x, 1e-300)) * (x < 1.0)
    return np.where(x <= 0.0, 0.0, np.where(x >= 1.0, 1.0, lo / (lo + hi)))


def _bump(x):
    """C-infinity bump on (-1, 1) with value 1 at the center."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1.0
    x2 = np.where(inside, x * x, 0.0)
    return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - x2)), 0.0)


@dataclass(frozen=True)
class RInfinity:
    """Smooth tail-matching function r_inf on the real line.

    zero=True gives the identically-zero variant used by negative tests
    (it breaks the r(kappa_plus)=0 clause on purpose).
    """

    bp: BranchPoints
    p: np.ndarray           # rational tail coefficients of P(1/(k+i))
    center: float           # cut midpoint
    w_in: float             # chi == 0 for |k - center| <= w_in
    w_out: float            # chi == 1 for |k - center| >= w_out
    bump_center: float
    bump_halfwidth: float
    bump_amp: complex
    zero: bool = False

    @property
    def cut_clearance(self) -> float:
        """Half-width of the declared neighbourhood of [E1, E2] where r_inf == 0."""
        left = self.w_in - (self.center - self.bp.e1)
        right = self.bump_center - self.bump_halfwidth - self.bp.e2
        return 0.999 * min(left, right)

    def tail(self, k):
        phi = 1.0 / (np.asarray(k, dtype=complex) + 1j)
        return phi * (self.p[0] + phi * (self.p[1] + phi * (self.p[2] + phi * self.p[3])))

    def chi(self, k):
        u = (np.abs(np.asarray(k, dtype=float) - self.center) - self.w_in) / (
            self.w_out - self.w_in
        )
        return _smoothstep(u)

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        if self.zero:
            return np.zeros(k.shape, dtype=complex)
        out = self.chi(k) * self.tail(k)
        out = out + self.bump_amp * _bump((k - self.bump_center) / self.bump_halfwidth)
        return out


def build_r_infinity(triple: ParameterTriple, zero: bool = False) -> RInfinity:
    """Construct r_inf: tail-matched to rb to order 4, zero near the cut,
    pinned to rb at kappa_plus."""
    bp = triple.branch_points()
    c = rb_tail_coeffs(triple)
    # P(phi), phi = 1/(k+i): expand phi^j in powers of 1/k and back-substitute
    p1 = c[0]
    p2 = c[1] + 1j * p1
    p3 = c[2] + p1 + 2j * p2
    p4 = c[3] - 1j * p1 + 3.0 * p2 + 3j * p3
    p = np.array([p1, p2, p3, p4])

    a = triple.alpha
    w_in = max(a, bp.kappa_plus - bp.center) + 0.25 * a
    w_out = w_in + 2.5 * a
    delta_b = 0.4 * (bp.kappa_plus - bp.e2)
    shell = RInfinity(
        bp=bp, p=p, center=bp.center, w_in=w_in, w_out=w_out,
        bump_center=bp.kappa_plus, bump_halfwidth=delta_b,
        bump_amp=0.0, zero=zero,
    )
    amp = eval_rb(bp, bp.kappa_plus) - shell.chi(bp.kappa_plus) * shell.tail(bp.kappa_plus)
    return RInfinity(
        bp=bp, p=p, center=bp.center, w_in=w_in, w_out=w_out,
        bump_center=bp.kappa_plus, bump_halfwidth=delta_b,
        bump_amp=complex(amp), zero=zero,
    )


@dataclass(frozen=True)
class SpectralData:
    """Admissible spectral data (r1, h, r = r1 + h) for one parameter triple.

    r1 lives on R, h on closure(D2) (analytic in D2), and r on (-inf, kappa_plus]
    with the boundary value from above on the cut.  Immutable; all evaluators
    are pure.
    """

    triple: ParameterTriple
    bp: BranchPoints
    tau: float
    r_inf: RInfinity
    decay_coeffs: np.ndarray = field(repr=False)  # tail coefficients h_j of h

    def rb_upper(self, k):
        """rb with the +side boundary value on the cut (k real array)."""
        return eval_rb(self.bp, np.asarray(k, dtype=float), side=+1)

    def r(self, k):
        """r(k) = rb_+(k) - r_inf(k) on (-inf, kappa_plus]; tau-independent."""
        k = np.asarray(k, dtype=float)
        return self.rb_upper(k) - self.r_inf(k)

    def r1(self, k):
        """r1(k) = (1 - tau) rb_+(k) - r_inf(k) on R."""
        k = np.asarray(k, dtype=float)
        return (1.0 - self.tau) * self.rb_upper(k) - self.r_inf(k)

    def h(self, k):
        """h(k) = tau rb(k) on closure(D2); +side values on the cut."""
        k = np.asarray(k, dtype=complex)
        if np.all(k.imag == 0.0):
            return self.tau * self.rb_upper(k.real)
        return self.tau * eval_rb(self.bp, k)

    def h_mirror(self, k):
        """conj(h(conj k)), the entry appearing on the lower curve."""
        return np.conj(self.h(np.conj(np.asarray(k, dtype=complex))))

    def log_one_minus_r2(self, s):
        """ln(1 - |r(s)|^2) for real s < kappa_plus off the cut, evaluated stably.

        Where r coincides with rb (r_inf == 0 near the cut) the closed form
        ln(4a) - 2 ln(1+a), a = |Delta|^2, avoids the 1 - |r|^2 cancellation
        that dominates within ~1e-8 of the endpoints.
        """
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        out = np.empty(s.shape)
        lo = self.bp.center - self.r_inf.w_in
        hi = self.r_inf.bump_center - self.r_inf.bump_halfwidth
        # r coincides with rb on these zones whether or not r_inf is zeroed out
        pure = ((s > lo) & (s < self.bp.e1)) | ((s > self.bp.e2) & (s < hi))
        if np.any(pure):
            sp = s[pure]
            a = np.sqrt(np.abs((sp - self.bp.e2) / (sp - self.bp.e1)))
            out[pure] = np.log(4.0 * a) - 2.0 * np.log1p(a)
        rest = ~pure
        if np.any(rest):
            rv = self.r(s[rest])
            out[rest] = np.log1p(-np.abs(rv) ** 2)
        return out[0] if scalar else out

    def arg_r_cut(self, s):
        """Continuous arg r on [E1, E2] with arg r(E2) in (-pi, pi].

        For this family arg r = -pi/2 - 2 atan(a), a = sqrt((E2-s)/(s-E1)),
        running from -pi/2 at E2 to -3pi/2 at E1.
        """
        s = np.asarray(s, dtype=float)
        a = np.sqrt(np.clip((self.bp.e2 - s) / (s - self.bp.e1), 0.0, np.inf))
        return -0.5 * np.pi - 2.0 * np.arctan(a)


def build_data(triple: ParameterTriple, tau: float, r_inf: str = "auto") -> SpectralData:
    """Assemble SpectralData for the given mixing parameter tau in [0, 1].

    r_inf='zero' builds the non-admissible variant with r_inf == 0 (used to
    exercise validation failures).
    """
    if not (0.0 <= tau <= 1.0):
        raise ValueError(f"tau={tau} outside [0, 1]")
    if r_inf not in ("auto", "zero"):
        raise ValueError("r_inf must be 'auto' or 'zero'")
    rinf = build_r_infinity(triple, zero=(r_inf == "zero"))
    h_coeffs = tau * rb_tail_coeffs(triple)
    return SpectralData(
        triple=triple,
        bp=triple.branch_points(),
        tau=float(tau),
        r_inf=rinf,
        decay_coeffs=h_coeffs,
    )


@dataclass(frozen=True)
class BranchExpansion:
    """Leading fractional-power expansion data of r at a cut endpoint."""

    endpoint: str           # 'E1' or 'E2'
    q: np.ndarray           # q_{i,0..3}
    residual: float         # relative lstsq residual at the finest window
    spread: float           # max coefficient drift across fit windows

    def relations_ok(self, tol: float = 1e-6) -> bool:
        i = 1 if self.endpoint == "E1" else 2
        q0, q1, q2 = self.q[0], self.q[1], self.q[2]
        return (
            abs(abs(q0) - 1.0) < tol
            and abs(q1) > tol
            and ((-1.0) ** i) * q0 * q1 < 0.0
            and abs(2.0 * q0 * q2 - q1**2) < tol * max(1.0, q1**2)
        )


def extract_branch_coeffs(
    data: SpectralData,
    endpoint: str,
    windows=(1e-2, 1e-3, 1e-4),
    n_pts: int = 80,
    n_terms: int = 7,
) -> BranchExpansion:
    """Fit q_{i,0..3} from one-sided samples of r near a cut endpoint.

    Fits r/i against powers x^{l/2} on a geometric sequence of shrinking
    off-cut windows.  The basis carries n_terms > 4 powers so the window-size
    truncation bias falls on the discarded trailing coefficients; the first
    four are accepted when stable across the two finest windows.
    """
    if endpoint not in ("E1", "E2"):
        raise ValueError("endpoint must be 'E1' or 'E2'")
    width = data.bp.width
    results = []
    residual = 0.0
    for w in windows:
        x = np.geomspace(w * width / 256.0, w * width, n_pts)
        if endpoint == "E2":
            ks = data.bp.e2 + x
            signs = np.ones(n_terms)
        else:
            ks = data.bp.e1 - x
            signs = (-1.0) ** np.arange(n_terms)
        vals = np.real(data.r(ks) / 1j)
        cols = np.stack([x ** (l / 2.0) for l in range(n_terms)], axis=1)
        scale = np.linalg.norm(cols, axis=0)
        b, res, *_ = np.linalg.lstsq(cols / scale, vals, rcond=None)
        coeffs = signs * (b / scale)
        results.append(coeffs[:4])
        residual = float(np.sqrt(res[0]) / np.linalg.norm(vals)) if res.size else 0.0
    results = np.array(results)
    spread = float(np.max(np.abs(results[-1] - results[-2]))) if len(results) > 1 else 0.0
    return BranchExpansion(endpoint=endpoint, q=results[-1], residual=residual,
                           spread=spread)


@dataclass
class AssumptionReport:
    """Pass/fail record for every checkable admissibility clause."""

    clauses: list  # (name, passed, value, threshold)

    @property
    def all_passed(self) -> bool:
        return all(ok for _, ok, _, _ in self.clauses)

    def failed(self):
        return [name for name, ok, _, _ in self.clauses if not ok]

    def lines(self):
        out = []
        for name, ok, value, threshold in self.clauses:
            status = "pass" if ok else "FAIL"
            out.append(f"{status:4s}  {name:32s} value={value:.3e} threshold={threshold:.3e}")
        return out


def _fit_slope(xs, ys):
    mask = ys > 0.0
    if mask.sum() < 4:
        return 0.0
    return float(np.polyfit(np.log(xs[mask]), np.log(ys[mask]), 1)[0])


def validate_assumptions(data: SpectralData, n_grid: int = 2000) -> AssumptionReport:
    """Check every admissibility clause on grids; failures are reported, not raised."""
    bp = data.bp
    clauses = []

    pad = 1e-6 * bp.width
    left = np.linspace(-60.0, bp.e1 - pad, n_grid)
    right = np.linspace(bp.e2 + pad, bp.kappa_plus, n_grid)
    off = np.concatenate([left, right])
    max_off = float(np.max(np.abs(data.r(off))))
    clauses.append(("|r| < 1 off cut", max_off < 1.0, max_off, 1.0))

    s = np.linspace(bp.e1 + pad, bp.e2 - pad, n_grid)
    dev = float(np.max(np.abs(np.abs(data.r(s)) - 1.0)))
    clauses.append(("|r| = 1 on cut", dev < 1e-12, dev, 1e-12))

    rk = abs(complex(data.r(bp.kappa_plus)))
    clauses.append(("r(kappa_plus) = 0", rk < 1e-12, rk, 1e-12))

    for name, e in (("E1", bp.e1), ("E2", bp.e2)):
        v = complex(data.r(e))
        d = min(abs(v - 1j), abs(v + 1j))
        clauses.append((f"r({name}) in {{+i,-i}}", d < 1e-10, d, 1e-10))

    interior = np.linspace(bp.e1 + 0.02 * bp.width, bp.e2 - 0.02 * bp.width, n_grid)
    ri = data.r(interior)
    dmin = float(np.min(np.minimum(np.abs(ri - 1j), np.abs(ri + 1j))))
    clauses.append(("r != +-i on open cut", dmin > 1e-3, dmin, 1e-3))

    # fit window capped at 2e3: beyond that the k^-5 remainders sink under the
    # double-precision cancellation floor of the tail sums
    ks = np.geomspace(50.0, 2e3, 60)
    slope_r = _fit_slope(ks, np.abs(data.r(-ks)))
    clauses.append(("r tail order (k -> -inf)", slope_r <= -5.0 + 0.2, slope_r, -4.8))

    inv = 1.0 / ks
    model_p = sum(-data.decay_coeffs[j] * inv ** (j + 1) for j in range(4))
    model_m = sum(-data.decay_coeffs[j] * (-inv) ** (j + 1) for j in range(4))
    rem_p = np.abs(data.r1(ks) - model_p)
    rem_m = np.abs(data.r1(-ks) - model_m)
    slope_r1 = max(_fit_slope(ks, rem_p), _fit_slope(ks, rem_m))
    clauses.append(("r1 tail remainder order", slope_r1 <= -5.0 + 0.2, slope_r1, -4.8))

    model_h = sum(data.decay_coeffs[j] * (-inv) ** (j + 1) for j in range(4))
    rem_h = np.abs(data.h(-ks) - model_h)
    if data.tau == 0.0:
        clauses.append(("h tail remainder order", True, 0.0, -4.8))
    else:
        slope_h = _fit_slope(ks, rem_h)
        clauses.append(("h tail remainder order", slope_h <= -5.0 + 0.2, slope_h, -4.8))

    for endpoint in ("E1", "E2"):
        be = extract_branch_coeffs(data, endpoint)
        ok = be.relations_ok(1e-6) and be.spread < 1e-5
        val = max(abs(abs(be.q[0]) - 1.0), abs(2 * be.q[0] * be.q[2] - be.q[1] ** 2))
        clauses.append((f"branch relations at {endpoint}", ok, val, 1e-6))

    ang = data.arg_r_cut(np.linspace(bp.e1 + pad, bp.e2 - pad, n_grid))
    jump = float(np.max(np.abs(np.diff(ang))))
    a_e2 = float(data.arg_r_cut(bp.e2))
    ok = jump < 0.1 and (-np.pi < a_e2 <= np.pi)
    clauses.append(("arg r continuous, arg r(E2) in (-pi,pi]", ok, jump, 0.1))

    return AssumptionReport(clauses=clauses)


def export_samples(data: SpectralData, path, ks=None):
    """Dump sampled r to CSV (k, Re r, Im r, side) for regression goldens."""
    bp = data.bp
    if ks is None:
        ks = np.concatenate(
            [
                np.linspace(-30.0, bp.e1 - 1e-3, 200),
                np.linspace(bp.e1 + 1e-3, bp.e2 - 1e-3, 200),
                np.linspace(bp.e2 + 1e-3, bp.kappa_plus, 200),
            ]
        )
    ks = np.asarray(ks, dtype=float)
    vals = data.r(ks)
    side = np.where((ks > bp.e1) & (ks < bp.e2), 1, 0)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        fh.write("# schema=1\n")
        writer.writerow(["k", "re_r", "im_r", "side"])
        for k, v, sd in zip(ks, vals, side):
            writer.writerow([repr(k), repr(float(v.real)), repr(float(v.imag)), sd])


def import_samples(path):
    """Read a CSV written by export_samples; returns (k, r, side) arrays."""
    ks, vals, sides = [], [], []
    with open(path) as fh:
        for row in csv.reader(line for line in fh if not line.startswith("#")):
            if row[0] == "k":
                continue
            ks.append(float(row[0]))
            vals.append(float(row[1]) + 1j * float(row[2]))
            sides.append(int(row[3]))
    return np.array(ks), np.array(vals), np.array(sides)
