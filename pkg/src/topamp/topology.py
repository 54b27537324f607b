"""Plane-wave analysis of translationally invariant lattices.

The infinite chain is summarized by two real functions on the Brillouin
zone: the dissipative symbol Gamma(k) and the coherent symbol G(k). The
curve (Gamma(k), G(k)) winding around the origin is the topological
invariant; the symmetry class follows from how the pair transforms under
k -> -k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import GaplessError, ValidationError, WindingIntegralityError
from .model import ChainParams

#: relative gap threshold below which the winding is undefined
GAP_RTOL = 1e-9
#: absolute tolerance for k -> -k function-equality tests
CLASSIFY_TOL = 1e-9
#: tolerated distance of the accumulated winding from an integer
INTEGRALITY_TOL = 0.01


def _check_coeffs(coeffs, name):
    out = []
    for entry in coeffs:
        if len(entry) != 3:
            raise ValidationError(
                f"{name} entries must be (offset, cos_coeff, sin_coeff)")
        d, a, b = entry
        if int(d) != d or d < 0:
            raise ValidationError(f"{name} offsets must be integers >= 0")
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValidationError(f"{name} coefficients must be finite")
        out.append((int(d), float(a), float(b)))
    return tuple(out)


@dataclass(frozen=True)
class BlochModel:
    """Real trigonometric symbols Gamma(k) and G(k).

    Each coefficient triple (d, a, b) contributes a cos(dk) + b sin(dk),
    which keeps both functions exactly real for every k (the plane-wave
    collapse of a Hermitian Toeplitz coupling block).
    """

    gamma_coeffs: tuple[tuple[int, float, float], ...]
    g_coeffs: tuple[tuple[int, float, float], ...]

    def __init__(self, gamma_coeffs, g_coeffs):
        object.__setattr__(self, "gamma_coeffs",
                           _check_coeffs(gamma_coeffs, "gamma_coeffs"))
        object.__setattr__(self, "g_coeffs",
                           _check_coeffs(g_coeffs, "g_coeffs"))

    @staticmethod
    def _eval(coeffs, k):
        k = np.asarray(k, dtype=float)
        out = np.zeros_like(k)
        for d, a, b in coeffs:
            out = out + a * np.cos(d * k) + b * np.sin(d * k)
        return out

    def gamma(self, k):
        return self._eval(self.gamma_coeffs, k)

    def g(self, k):
        return self._eval(self.g_coeffs, k)


def bloch_from_chain(params: ChainParams) -> BlochModel:
    """Symbols of the 1D chain.

    Gamma(k) = gamma_p - 2 t_d + 2 t_d cos k,
    G(k) = 2 t_c cos(k + phi).
    """
    return BlochModel(
        gamma_coeffs=[(0, params.gamma_p - 2.0 * params.t_d, 0.0),
                      (1, 2.0 * params.t_d, 0.0)],
        g_coeffs=[(1, 2.0 * params.t_c * math.cos(params.phi),
                   -2.0 * params.t_c * math.sin(params.phi))],
    )


def _radius_extrema(bloch: BlochModel, k_points: int, refine: bool):
    """(min, max) of sqrt(Gamma^2 + G^2) over the zone.

    The coarse-grid minimum is polished with bounded scalar minimization
    around every coarse local minimum, so boundary cases where the curve
    touches the origin between grid points are still detected.
    """
    k = np.linspace(0.0, 2.0 * math.pi, k_points, endpoint=False)
    r2 = bloch.gamma(k) ** 2 + bloch.g(k) ** 2
    rmax = float(np.sqrt(np.max(r2)))
    rmin2 = float(np.min(r2))
    if not refine or rmax == 0.0:
        return math.sqrt(rmin2), rmax
    if rmin2 > (1e-6 * rmax) ** 2:
        # comfortably gapped; grid resolution is enough
        return math.sqrt(rmin2), rmax

    def f(kk):
        return float(bloch.gamma(kk) ** 2 + bloch.g(kk) ** 2)

    h = 2.0 * math.pi / k_points
    local = np.flatnonzero((r2 <= np.roll(r2, 1)) & (r2 <= np.roll(r2, -1)))
    best = rmin2
    for i in local:
        if r2[i] > 4.0 * rmin2 + (1e-8 * rmax) ** 2:
            continue
        res = minimize_scalar(f, bounds=(k[i] - h, k[i] + h), method="bounded",
                              options={"xatol": 1e-12})
        best = min(best, float(res.fun))
    return math.sqrt(max(best, 0.0)), rmax


def gap_minimum(bloch: BlochModel, k_points: int = 1024) -> float:
    """Minimum distance of the curve (Gamma(k), G(k)) from the origin."""
    rmin, _ = _radius_extrema(bloch, k_points, refine=True)
    return rmin


def winding_number(bloch: BlochModel, k_points: int = 1024) -> int:
    """Unsigned winding of (Gamma(k), G(k)) around the origin.

    Accumulates wrapped angle increments over a uniform closed k-grid and
    rounds; a total further than 0.01 from an integer is rejected. The
    traversal direction only reflects lattice orientation, so the count
    is returned unsigned. Raises "gapless" when the curve approaches the
    origin closer than 1e-9 of its maximum radius (winding undefined at a
    transition).
    """
    if k_points < 16:
        raise ValidationError("need at least 16 k-points")
    rmin, rmax = _radius_extrema(bloch, k_points, refine=True)
    if rmax == 0.0 or rmin <= GAP_RTOL * rmax:
        raise GaplessError(
            f"curve reaches {rmin:.3e} of the origin (max radius {rmax:.3e})")
    k = np.linspace(0.0, 2.0 * math.pi, k_points, endpoint=False)
    z = bloch.gamma(k) + 1j * bloch.g(k)
    steps = np.angle(np.roll(z, -1) * np.conj(z))
    raw = float(np.sum(steps) / (2.0 * math.pi))
    nu = round(raw)
    if abs(raw - nu) >= INTEGRALITY_TOL:
        raise WindingIntegralityError(
            f"accumulated winding {raw:.6f} is not close to an integer; "
            "increase k_points or check the model")
    return abs(int(nu))


def topological_window_1d(t_c: float, t_d: float, gamma_p: float,
                          phi: float) -> bool:
    """Closed-form amplifying window of the chain.

    True iff 2 t_d (1 - sin phi*) < gamma_p < 2 t_d (1 + sin phi*) with
    both inequalities strict and t_c != 0, where phi* is phi folded into
    [0, pi) (the chain at phi + pi is the mirror image, same phase).
    """
    if t_c == 0.0:
        return False
    phi_star = phi % math.pi
    s = math.sin(phi_star)
    return (2.0 * t_d * (1.0 - s) < gamma_p < 2.0 * t_d * (1.0 + s))


@dataclass(frozen=True)
class SymmetryClass:
    """Altland-Zirnbauer label, with the rotation angle for BDI."""

    label: str
    theta: float | None = None


def classify_symmetry(bloch: BlochModel, k_points: int = 1024) -> SymmetryClass:
    """Symmetry class from the k -> -k behavior of (Gamma, G).

    Checked on a symmetric grid with absolute tolerance 1e-9 (scaled by
    the curve amplitude when that exceeds 1): both functions even -> CI;
    both odd -> DIII; else a single rotation angle theta carrying
    (Gamma(k), -G(k)) onto (Gamma(-k), G(-k)) for every k -> BDI(theta);
    anything else -> AIII. More symmetric classes win ties, and any
    magnitude mismatch between k and -k lands in AIII immediately.
    """
    k = np.linspace(0.0, math.pi, k_points // 2 + 1)
    ga, gb = bloch.gamma(k), bloch.g(k)
    ra, rb = bloch.gamma(-k), bloch.g(-k)
    amp = max(1.0, float(np.max(np.sqrt(ga ** 2 + gb ** 2))),
              float(np.max(np.sqrt(ra ** 2 + rb ** 2))))
    tol = CLASSIFY_TOL * amp
    if np.all(np.abs(ga - ra) <= tol) and np.all(np.abs(gb - rb) <= tol):
        return SymmetryClass(label="CI")
    if np.all(np.abs(ga + ra) <= tol) and np.all(np.abs(gb + rb) <= tol):
        return SymmetryClass(label="DIII")
    a = ga - 1j * gb   # (Gamma(k), -G(k)) as a complex number
    b = ra + 1j * rb   # (Gamma(-k), G(-k))
    if np.all(np.abs(np.abs(a) - np.abs(b)) <= tol):
        live = np.abs(a) > tol
        if np.any(live):
            first = int(np.flatnonzero(live)[0])
            theta = float(np.angle(b[first]) - np.angle(a[first]))
            rotated = a * np.exp(1j * theta)
            if np.all(np.abs(rotated[live] - b[live]) <= tol):
                theta = math.remainder(theta, 2.0 * math.pi)
                return SymmetryClass(label="BDI", theta=theta)
        else:
            # identically zero curve: every rotation works
            return SymmetryClass(label="BDI", theta=0.0)
    return SymmetryClass(label="AIII")


def classification_report(bloch: BlochModel, k_points: int = 1024) -> dict:
    """JSON-ready summary: class, theta (BDI), winding or "gapless", gap."""
    cls = classify_symmetry(bloch, k_points)
    out: dict = {"class": cls.label}
    if cls.theta is not None:
        out["theta"] = cls.theta
    try:
        out["winding"] = winding_number(bloch, k_points)
    except GaplessError:
        out["winding"] = "gapless"
    out["gap_min"] = gap_minimum(bloch, k_points)
    return out
