"""First- and second-moment dynamics and the fluctuation steady state.

Coherences follow d(alpha)/dt = H alpha + eps'. The normally ordered
correlation matrix M_{jl} = <a_j^dag a_l> follows
dM/dt = H* M + M H^T + 2 (Gamma^(p))^T, whose fixed point solves a
continuous Lyapunov-type equation. Both integrators are fixed-step
classical RK4: reproducibility is worth more here than adaptivity, and
for linear systems the RK4 map shares the exact fixed point with the
flow, so long-time integration converges to the algebraic steady state.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DivergenceError, UnstableError, ValidationError
from .model import as_drive
from .spectral import _as_matrix
from .stability import spectrum_numeric

#: Hermiticity tolerance for correlation matrices, relative to max(1, scale)
HERM_TOL = 1e-10
#: eigenvalue floor for correlation matrices, relative to max(1, scale)
PSD_FLOOR = -1e-8
#: relative residual contract for the algebraic steady state
RESIDUAL_RTOL = 1e-9
#: fixed-step guard: dt * (spectral radius of H) must not exceed this
STEP_GUARD = 0.1
#: state magnitude treated as divergence during integration
DIVERGE_LIMIT = 1e150


@dataclass(frozen=True)
class CorrelationMatrix:
    """Normally ordered second moments M_{jl} = <a_j^dag a_l>.

    Construct through `from_matrix`, which enforces Hermiticity (1e-10)
    and positive semidefiniteness (eigenvalues >= -1e-8), both relative
    to max(1, largest entry); the diagonal holds the fluctuation photon
    numbers.
    """

    m: np.ndarray

    @property
    def n(self) -> int:
        return self.m.shape[0]

    @property
    def occupations(self) -> np.ndarray:
        """Fluctuation photon numbers n_j (real diagonal)."""
        return self.m.diagonal().real

    @classmethod
    def from_matrix(cls, m, herm_tol: float = HERM_TOL,
                    psd_floor: float = PSD_FLOOR) -> "CorrelationMatrix":
        arr = np.array(m, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError("correlation matrix must be square")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("correlation matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(arr))) if arr.size else 1.0)
        herm = float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0
        if herm > herm_tol * scale:
            raise ValidationError(
                f"not Hermitian: deviation {herm:.3e} exceeds "
                f"{herm_tol:.1e} * {scale:.3g}")
        arr = (arr + arr.conj().T) / 2.0
        if arr.size:
            lo = float(np.min(scipy.linalg.eigvalsh(arr)))
            if lo < psd_floor * scale:
                raise ValidationError(
                    f"not PSD: eigenvalue {lo:.3e} below "
                    f"{psd_floor:.1e} * {scale:.3g}")
        arr.setflags(write=False)
        return cls(m=arr)


def _spectral_radius(m: np.ndarray) -> float:
    return float(np.max(np.abs(spectrum_numeric(m).eigenvalues)))


def _check_step(dt: float, rho: float) -> None:
    if not dt > 0:
        raise ValidationError("dt must be positive")
    if dt * rho > STEP_GUARD * (1.0 + 1e-12):
        raise ValidationError(
            f"dt = {dt:g} violates the step guard dt * rho <= {STEP_GUARD} "
            f"(spectral radius {rho:.3g}; need dt <= {STEP_GUARD / rho:.3g})")


def _steps(dt: float, t_final: float):
    """Full RK4 steps plus one exact-landing partial step if needed."""
    if t_final < 0:
        raise ValidationError("t_final must be nonnegative")
    n_full = int(np.floor(t_final / dt + 1e-12))
    rest = t_final - n_full * dt
    if rest <= 1e-12 * dt:
        rest = 0.0
    return n_full, rest


@dataclass(frozen=True)
class CoherenceTrajectory:
    """Sampled first-moment evolution: states[i] is alpha at times[i]."""

    times: np.ndarray
    states: np.ndarray


def evolve_coherences(h, drive, alpha0, dt: float, t_final: float) -> CoherenceTrajectory:
    """Fixed-step RK4 integration of d(alpha)/dt = H alpha + eps'.

    Requires dt * rho(H) <= 0.1. Divergence (entries beyond 1e150 or
    non-finite) raises with the time at which it happened. On a stable
    model the endpoint approaches the steady state as e^{max Re lambda t}.
    """
    m = _as_matrix(h)
    n = m.shape[0]
    eps_p = as_drive(drive, n).epsilon_prime
    y = np.array(alpha0, dtype=complex)
    if y.shape != (n,):
        raise ValidationError(f"alpha0 must be a length-{n} vector")
    _check_step(dt, _spectral_radius(m))
    n_full, rest = _steps(dt, t_final)

    def f(a):
        return m @ a + eps_p

    times = [0.0]
    states = [y.copy()]
    t = 0.0
    for k in range(n_full + (1 if rest else 0)):
        step = dt if k < n_full else rest
        k1 = f(y)
        k2 = f(y + 0.5 * step * k1)
        k3 = f(y + 0.5 * step * k2)
        k4 = f(y + step * k3)
        y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += step
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > DIVERGE_LIMIT:
            raise DivergenceError(
                f"state diverged at t = {t:.6g}", time=t)
        times.append(t)
        states.append(y.copy())
    return CoherenceTrajectory(times=np.array(times), states=np.array(states))


@dataclass(frozen=True)
class CorrelationTrajectory:
    """Sampled second-moment evolution with the symmetrization record.

    hermiticity_drift[i] is the max-abs anti-Hermitian defect right
    before the symmetrization of step i+1 (one entry per internal step,
    regardless of sampling).
    """

    times: np.ndarray
    matrices: list[CorrelationMatrix]
    hermiticity_drift: np.ndarray


def evolve_correlations(h, gamma_pump, m0, dt: float, t_final: float,
                        record_every: int = 1) -> CorrelationTrajectory:
    """Fixed-step RK4 integration of dM/dt = H* M + M H^T + 2 Gamma_p^T.

    m0 must be Hermitian PSD. Each step is symmetrized back onto the
    Hermitian manifold and the pre-symmetrization defect recorded.
    ``record_every`` thins the stored samples (the endpoint is always
    kept); the step guard and divergence rules match `evolve_coherences`.
    """
    m = _as_matrix(h)
    gp = _as_matrix(gamma_pump)
    if gp.shape != m.shape:
        raise ValidationError("gamma_pump must match the coupling matrix shape")
    if record_every < 1:
        raise ValidationError("record_every must be >= 1")
    y = CorrelationMatrix.from_matrix(m0).m.copy()
    if y.shape != m.shape:
        raise ValidationError("m0 must match the coupling matrix shape")
    _check_step(dt, _spectral_radius(m))
    n_full, rest = _steps(dt, t_final)
    hc = m.conj()
    ht = m.T
    q = 2.0 * gp.T

    def f(mm):
        return hc @ mm + mm @ ht + q

    times = [0.0]
    samples = [CorrelationMatrix.from_matrix(y)]
    drift = []
    t = 0.0
    total = n_full + (1 if rest else 0)
    for k in range(total):
        step = dt if k < n_full else rest
        k1 = f(y)
        k2 = f(y + 0.5 * step * k1)
        k3 = f(y + 0.5 * step * k2)
        k4 = f(y + step * k3)
        y = y + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > DIVERGE_LIMIT:
            raise DivergenceError(
                f"correlations diverged at t = {t + step:.6g}", time=t + step)
        drift.append(float(np.max(np.abs(y - y.conj().T))))
        y = (y + y.conj().T) / 2.0
        t += step
        if (k + 1) % record_every == 0 or k == total - 1:
            times.append(t)
            samples.append(CorrelationMatrix.from_matrix(y))
    return CorrelationTrajectory(times=np.array(times), matrices=samples,
                                 hermiticity_drift=np.array(drift))


def lyapunov_steady(h, gamma_pump, method: str = "sylvester") -> CorrelationMatrix:
    """Fixed point of the correlation flow: H* M + M H^T = -2 Gamma_p^T.

    Requires a stable H (max Re lambda < 0), else no finite steady state
    exists. method="sylvester" uses the Schur-based dense solver and
    scales to any desk-size N; method="kron" builds the N^2-dimensional
    vectorized system explicitly (N <= 150) and exists as an independent
    cross-check. The residual is checked against
    1e-9 * ||2 Gamma_p||_max; strongly amplifying stable chains can hold
    steady occupations of 1e20 and beyond, where that absolute contract
    is unreachable in double precision even though the backward error is
    tiny, so a violation warns instead of failing.
    """
    m = _as_matrix(h)
    gp = _as_matrix(gamma_pump)
    if gp.shape != m.shape:
        raise ValidationError("gamma_pump must match the coupling matrix shape")
    report = spectrum_numeric(m)
    if not report.stable:
        raise UnstableError(
            f"max Re lambda = {report.max_real:.6g} >= 0: correlations "
            "have no finite steady state")
    q = -2.0 * gp.T
    if method == "sylvester":
        sol = scipy.linalg.solve_sylvester(m.conj(), m.T, q)
    elif method == "kron":
        n = m.shape[0]
        if n > 150:
            raise ValidationError(
                "kron route builds an N^2 x N^2 system; use method='sylvester' "
                f"for N = {n}")
        eye = np.eye(n)
        big = np.kron(eye, m.conj()) + np.kron(m, eye)
        sol = np.linalg.solve(big, q.flatten(order="F")).reshape((n, n), order="F")
    else:
        raise ValidationError(f"unknown method {method!r}")
    resid = float(np.max(np.abs(m.conj() @ sol + sol @ m.T - q)))
    bound = RESIDUAL_RTOL * max(float(np.max(np.abs(q))), np.finfo(float).tiny)
    if resid > bound:
        warnings.warn(
            f"steady-state residual {resid:.3e} exceeds the contract "
            f"{bound:.3e}; the solution scale is ~{np.max(np.abs(sol)):.3e}, "
            "so this is expected deep in the amplifying regime",
            stacklevel=2)
    return CorrelationMatrix.from_matrix((sol + sol.conj().T) / 2.0)
