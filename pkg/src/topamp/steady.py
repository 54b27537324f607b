"""Steady-state amplitudes of the driven lattice.

Every route solves H alpha = -eps' for the long-time coherent response;
they differ in reach. The modal sum and the direct solve are exact but
bounded by double precision. The rank-1 edge route and the closed-form
profile stay meaningful deep in the amplifying regime, where the smallest
singular value drops below what a dense SVD resolves, by carrying
magnitudes in the log domain.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    IllConditionedError,
    NoEdgeModeError,
    ParityError,
    SingularFloorError,
    ValidationError,
)
from .model import (
    ChainParams,
    as_drive,
    build_chain,
    coupling_matrix,
    is_parity_symmetric,
    parity_matrix,
)
from .spectral import _as_matrix, log10_smallest_singular, svd

#: relative singular-value floor below which modal coefficients are rounding noise
FLOOR_RTOL = 1e-14
#: condition-number ceiling for the direct solve
COND_MAX = 1e14
#: minimum singular gap, relative to s_{N-1}, for the rank-1 edge route
GAP_RTOL = 0.1
#: condition number up to which `gain` trusts the direct solve
GAIN_DIRECT_COND = 1e12


@dataclass(frozen=True)
class SteadyState:
    """Steady amplitudes with the route that produced them.

    residual is ||H alpha + eps'||_2, or nan when alpha is so large that
    the product H alpha carries no correct digits (rank-1 routes deep in
    the amplifying regime). log10_abs mirrors |alpha_j| in the log domain
    for the routes whose output can overflow; log10_amplification is
    log10(1/s_N) for the edge route; form records which rank-1 variant
    ran; truncated_modes counts dropped modal terms.
    """

    alpha: np.ndarray
    method: str
    residual: float
    log10_abs: np.ndarray | None = None
    log10_amplification: float | None = None
    form: str | None = None
    truncated_modes: int = 0


def _prepare(h, drive):
    m = _as_matrix(h)
    d = as_drive(drive, m.shape[0])
    return m, d.epsilon_prime


def _residual(m: np.ndarray, alpha: np.ndarray, eps_p: np.ndarray) -> float:
    if not np.all(np.isfinite(alpha)):
        return float("nan")
    scale = np.finfo(float).eps * np.linalg.norm(m) * np.linalg.norm(alpha)
    if scale > 0.01 * max(np.linalg.norm(eps_p), np.finfo(float).tiny):
        return float("nan")
    return float(np.linalg.norm(m @ alpha + eps_p))


def steady_state_svd(h, drive, floor_rtol: float = FLOOR_RTOL,
                     truncate: bool = False) -> SteadyState:
    """Modal sum alpha_j = -sum_n v_jn <u_n, eps'> / s_n.

    Singular values below s_1 * floor_rtol carry no signal in double
    precision; hitting one raises SingularFloorError unless ``truncate``
    drops those terms. Truncation discards exactly the strongly amplified
    channel, so for extreme gain use the edge route instead.
    """
    m, eps_p = _prepare(h, drive)
    res = svd(m)
    coeffs = res.u.conj().T @ eps_p
    floor = float(res.s[0]) * floor_rtol
    below = res.s < floor
    dropped = int(np.sum(below))
    if dropped:
        if not truncate:
            raise SingularFloorError(
                f"{dropped} singular value(s) below {floor:.3e}; the modal "
                "sum cannot resolve them (see the edge route)")
        coeffs = np.where(below, 0.0, coeffs)
    safe = np.where(below, 1.0, res.s)
    alpha = -(res.v @ (coeffs / safe))
    return SteadyState(alpha=alpha, method="svd-sum",
                       residual=_residual(m, alpha, eps_p),
                       truncated_modes=dropped)


def steady_state_direct(h, drive, cond_max: float = COND_MAX) -> SteadyState:
    """Dense linear solve of H alpha = -eps'.

    Refuses matrices whose 2-norm condition number exceeds ``cond_max``,
    since the computed amplitudes would have no correct digits.
    """
    m, eps_p = _prepare(h, drive)
    s = np.linalg.svd(m, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    if cond > cond_max:
        raise IllConditionedError(
            f"condition number {cond:.3e} exceeds {cond_max:.1e}",
            estimate=cond)
    alpha = np.linalg.solve(m, -eps_p)
    return SteadyState(alpha=alpha, method="direct",
                       residual=_residual(m, alpha, eps_p))


def edge_rank1(h, drive, form: str = "auto",
               gap_rtol: float = GAP_RTOL) -> SteadyState:
    """Rank-1 response through the smallest singular triple.

    Valid when that triple is isolated: requires s_{N-1} - s_N >
    gap_rtol * s_{N-1}, else NoEdgeModeError. Isolation is judged against
    the next singular value, not s_1: a topological chain keeps
    s_N/s_{N-1} exponentially small while the bulk band above stretches
    to s_1 >> s_{N-1}, and that width is irrelevant to the rank-1
    approximation. The 1/s_N factor is recomputed through the
    determinant, so the route keeps working when the SVD output for s_N
    has hit its floor.

    form="parity" uses alpha_j = -psi (P u*)_j <u, eps'> / s_N, where P
    reverses site order; it requires P H P = H^T (else ParityError). The
    parity image P u* supplies the exponential tail of the left vector
    at full relative accuracy where the dense SVD output has underflowed,
    and the unit phase psi is anchored to the largest entry of the
    computed right vector, which is always well resolved, so alpha keeps
    the physical phase.
    form="general" uses alpha = -v <u, eps'> / s_N and needs no symmetry.
    form="auto" picks parity when the symmetry holds, general otherwise.
    """
    m, eps_p = _prepare(h, drive)
    n = m.shape[0]
    if n < 2:
        raise ValidationError("edge route needs at least two modes")
    res = svd(m)
    gap = float(res.s[-2] - res.s[-1])
    if gap <= gap_rtol * float(res.s[-2]):
        raise NoEdgeModeError(
            f"smallest singular value is not isolated: gap {gap:.3e} <= "
            f"{gap_rtol:g} * s_(N-1) = {gap_rtol * float(res.s[-2]):.3e}")
    if form == "auto":
        form = "parity" if is_parity_symmetric(m) else "general"
    u_n, _, v_n = res.edge_triple()
    if form == "parity":
        if not is_parity_symmetric(m):
            raise ParityError(
                "site reversal does not transpose this matrix; "
                "use form='general'")
        left = parity_matrix(n) @ u_n.conj()
        # the parity image alone carries an arbitrary global phase;
        # anchor it where the right vector is largest, hence reliable
        k = int(np.argmax(np.abs(v_n)))
        ref = v_n[k] * np.conj(left[k])
        if abs(ref) > 0.0:
            left = left * (ref / abs(ref))
    elif form == "general":
        left = v_n
    else:
        raise ValidationError(f"unknown edge form {form!r}")
    log10_s = log10_smallest_singular(m)
    overlap = complex(u_n.conj() @ eps_p)
    with np.errstate(divide="ignore", over="ignore"):
        alpha = -left * overlap * 10.0 ** (-log10_s)
        log10_abs = np.log10(np.abs(left)) + math.log10(max(abs(overlap),
                                                            np.finfo(float).tiny)) - log10_s
    if abs(overlap) == 0.0:
        alpha = np.zeros(n, dtype=complex)
        log10_abs = np.full(n, -np.inf)
    for a in (alpha, log10_abs):
        a.setflags(write=False)
    return SteadyState(alpha=alpha, method="edge-rank1",
                       residual=_residual(m, alpha, eps_p),
                       log10_abs=log10_abs,
                       log10_amplification=-log10_s,
                       form=form)


def gain(h, drive, site: int | None = None,
         direct_cond: float = GAIN_DIRECT_COND) -> tuple[float, int]:
    """(log10 of |alpha|/max|eps|, 1-based site) for the given drive.

    With site=None the maximizing site is found and returned; passing a
    site reads that one. Uses the direct solve while the condition number
    stays below ``direct_cond`` and the log-domain rank-1 edge route
    beyond it, so gains past double-precision range remain representable.
    Returns nan for the value when it is not finite.
    """
    m, eps_p = _prepare(h, drive)
    n = m.shape[0]
    if site is not None and not 1 <= site <= n:
        raise ValidationError(f"site {site} outside 1..{n}")
    eps_scale = float(np.max(np.abs(eps_p)))
    if eps_scale == 0.0:
        raise ValidationError("gain needs a nonzero drive")
    s = np.linalg.svd(m, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")
    if cond <= direct_cond:
        alpha = np.linalg.solve(m, -eps_p)
        idx = int(np.argmax(np.abs(alpha))) if site is None else site - 1
        mag = float(np.abs(alpha[idx]))
        val = math.log10(mag / eps_scale) if mag > 0 else float("nan")
    else:
        ss = edge_rank1(m, drive, form="general")
        idx = int(np.argmax(ss.log10_abs)) if site is None else site - 1
        val = float(ss.log10_abs[idx]) - math.log10(eps_scale)
    if not math.isfinite(val):
        val = float("nan")
    return val, idx + 1


# --- closed forms at the fine-tuned point (t_c = t_d, phi = pi/2) ---


@dataclass(frozen=True)
class SshAnalytics:
    """Closed-form edge-mode quantities at the fine-tuned chain point.

    xi is the localization length in sites, s_edge the predicted smallest
    singular value 2 gamma_p e^{-N/xi} (log10_s_edge never underflows),
    and edge_vector the continuum-normalized profile
    u_j = sqrt(2/xi) e^{-j/xi}, peaked at the driven end.
    """

    xi: float
    s_edge: float
    log10_s_edge: float
    edge_vector: np.ndarray


def _xi_from(t_d: float, gamma_p: float) -> float:
    if t_d <= 0:
        raise ValidationError("closed forms need t_d > 0")
    if not 0.0 < gamma_p < 4.0 * t_d:
        raise ValidationError(
            f"gamma_p = {gamma_p:g} outside the amplifying window "
            f"(0, {4.0 * t_d:g})")
    r = abs(1.0 - gamma_p / (2.0 * t_d))
    if r == 0.0:
        raise ValidationError(
            "gamma_p = 2 t_d is the flat-band point; the localization "
            "length is not defined there")
    return -1.0 / math.log(r)


def ssh_analytics(t_d: float, gamma_p: float, n_sites: int) -> SshAnalytics:
    """Evaluate xi, the predicted s_N, and the edge profile (see type)."""
    if n_sites < 1:
        raise ValidationError("need n_sites >= 1")
    xi = _xi_from(t_d, gamma_p)
    log10_s = math.log10(2.0 * gamma_p) - n_sites / (xi * math.log(10.0))
    j = np.arange(1, n_sites + 1, dtype=float)
    vec = np.sqrt(2.0 / xi) * np.exp(-j / xi)
    vec.setflags(write=False)
    return SshAnalytics(xi=xi, s_edge=10.0 ** log10_s, log10_s_edge=log10_s,
                        edge_vector=vec)


def _warn_if_outside_asymptotics(xi: float, n_sites: int) -> None:
    if not (xi >= 2.0 and n_sites >= 5.0 * xi):
        warnings.warn(
            f"asymptotic closed form assumes N >> xi >> 1 "
            f"(got xi = {xi:.3g}, N = {n_sites}); "
            "expect O(1/N) and O(1/xi) corrections", stacklevel=3)


def ssh_analytic_steady_state(t_d: float, gamma_p: float, n_sites: int,
                              drive) -> SteadyState:
    """Closed-form steady profile at the fine-tuned point.

    alpha_j = (1 / (gamma_p xi)) e^{(j-1)/xi} sum_l e^{-l/xi} eps'_l,
    with |alpha_j| also reported in the log domain so the growth toward
    the output end stays representable at any N.  The overall sign is
    fixed against the exact triangular solve for the orientation
    build_chain uses; with gamma_p < 2 t_d and a real drive at site 1
    the response is +i times a positive profile.
    """
    xi = _xi_from(t_d, gamma_p)
    _warn_if_outside_asymptotics(xi, n_sites)
    d = as_drive(drive, n_sites)
    l = np.arange(1, n_sites + 1, dtype=float)
    src = complex(np.sum(np.exp(-l / xi) * d.epsilon_prime))
    params = ChainParams(t_c=t_d, t_d=t_d, gamma_p=gamma_p,
                         phi=math.pi / 2, n_sites=n_sites)
    m = coupling_matrix(build_chain(params)).h
    if abs(src) == 0.0:
        zero = np.zeros(n_sites, dtype=complex)
        return SteadyState(alpha=zero, method="ssh-analytic", residual=0.0,
                           log10_abs=np.full(n_sites, -np.inf))
    j = np.arange(1, n_sites + 1, dtype=float)
    log10_abs = (math.log10(abs(src) / (gamma_p * xi))
                 + (j - 1.0) / (xi * math.log(10.0)))
    phase = src / abs(src)
    with np.errstate(over="ignore"):
        alpha = phase * 10.0 ** log10_abs
    for a in (alpha, log10_abs):
        a.setflags(write=False)
    return SteadyState(alpha=alpha, method="ssh-analytic",
                       residual=_residual(m, alpha, d.epsilon_prime),
                       log10_abs=log10_abs)
