"""Spectral stability of the first-moment dynamics.

The coherences follow d(alpha)/dt = H alpha + eps', so a finite steady
state exists exactly when every eigenvalue of H has negative real part.
For the 1D chain both the periodic and the open-boundary spectra have
closed forms; for arbitrary matrices a dense eigensolve decides.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import EigenConvergenceError, ValidationError
from .model import ChainParams
from .spectral import _as_matrix

#: golden-ratio bound of the stable/amplifying coexistence region
OVERLAP_BOUND = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SpectrumReport:
    """Full spectrum with the stability verdict max Re < 0 (strict)."""

    eigenvalues: np.ndarray
    max_real: float
    stable: bool


def _report(eigs: np.ndarray) -> SpectrumReport:
    eigs = np.asarray(eigs, dtype=complex)
    eigs.setflags(write=False)
    max_real = float(np.max(eigs.real))
    return SpectrumReport(eigenvalues=eigs, max_real=max_real,
                          stable=max_real < 0.0)


def spectrum_periodic(params: ChainParams, k):
    """Ring-chain eigenvalue branch lambda(k) = Gamma(k) - i G(k).

    Gamma(k) = gamma_p - 2 t_d + 2 t_d cos k and G(k) = 2 t_c cos(k + phi).
    The sign of the imaginary part follows this package's lattice
    orientation; the spectrum as a set (and every real part) is
    orientation-independent. Accepts scalar or array k.
    """
    k = np.asarray(k, dtype=float)
    lam = (params.gamma_p - 2.0 * params.t_d + 2.0 * params.t_d * np.cos(k)
           - 2.0j * params.t_c * np.cos(k + params.phi))
    return complex(lam) if lam.ndim == 0 else lam


def _bond_root(params: ChainParams) -> complex:
    """Principal root of the product of the two directed bond couplings."""
    b = params.t_d - 1j * params.t_c * cmath.exp(1j * params.phi)
    c = params.t_d - 1j * params.t_c * cmath.exp(-1j * params.phi)
    return cmath.sqrt(b * c)


def spectrum_open_analytic(params: ChainParams) -> SpectrumReport:
    """Closed-form open-chain spectrum.

    lambda_n = gamma_p - 2 t_d + 2 sqrt(bond product) cos(n pi / (N+1)),
    n = 1..N, principal square-root branch (the branch choice relabels
    n <-> N+1-n and leaves the multiset unchanged).
    """
    n = params.n_sites
    if n < 2:
        raise ValidationError("analytic open spectrum needs n_sites >= 2")
    root = _bond_root(params)
    grid = np.cos(np.arange(1, n + 1) * math.pi / (n + 1))
    return _report(params.gamma_p - 2.0 * params.t_d + 2.0 * root * grid)


def _tridiagonal_parts(m: np.ndarray):
    n = m.shape[0]
    if n < 2:
        return None
    i, j = np.indices(m.shape, sparse=True)
    if np.any(m[np.abs(i - j) > 1] != 0):
        return None
    return np.diag(m).copy(), np.diag(m, -1).copy(), np.diag(m, 1).copy()


def _tridiagonal_eigs(d, sub, sup) -> np.ndarray:
    """Eigenvalues of a tridiagonal matrix, robust to one-way transport.

    Strong directionality makes the raw eigenproblem hopelessly
    ill-conditioned (plain eigvals is off by O(1) already at N = 100 for
    the amplifying chain), and LAPACK's balancing cannot fix it because
    every row/column norm looks alike. Two exact steps repair it:
    blocks are deflated at bonds where either coupling vanishes (the
    matrix is block-triangular there), and inside each block a diagonal
    similarity equalizes the two bond magnitudes, |b'_k| = |c'_k| =
    sqrt(|b_k c_k|), preserving each product b_k c_k. For the chain the
    balanced block is a normal matrix and the dense solver is then
    accurate to machine precision.
    """
    n = d.shape[0]
    cuts = [k for k in range(n - 1) if sub[k] == 0 or sup[k] == 0]
    out = []
    start = 0
    for stop in [*cuts, n - 1]:
        size = stop + 1 - start
        if size == 1:
            out.append(np.array([d[start]]))
        else:
            b = sub[start:stop]
            c = sup[start:stop]
            g = np.sqrt(np.abs(b) * np.abs(c))
            bb = b / np.abs(b) * g
            cc = c / np.abs(c) * g
            block = (np.diag(d[start:stop + 1])
                     + np.diag(bb, -1) + np.diag(cc, 1))
            out.append(np.linalg.eigvals(block))
        start = stop + 1
    return np.concatenate(out)


def spectrum_numeric(h) -> SpectrumReport:
    """Dense spectrum of an arbitrary coupling matrix.

    Tridiagonal inputs take a balanced path (see `_tridiagonal_eigs`);
    everything else goes straight to the dense solver. Solver
    non-convergence is reported, never silently ignored.
    """
    m = _as_matrix(h)
    if m.shape[0] == 0:
        raise ValidationError("empty matrix has no spectrum")
    try:
        parts = _tridiagonal_parts(m)
        if parts is not None:
            eigs = _tridiagonal_eigs(*parts)
        else:
            eigs = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(f"dense eigensolver failed: {exc}") from exc
    return _report(eigs)


def stability_threshold(t_d: float, phi: float, t_c: float | None = None) -> float:
    """Large-N pump threshold: stable open chain iff gamma_p is below it.

    2 t_d - 2 |Re sqrt(bond product)|; for t_c = t_d this collapses to
    2 t_d (1 - sqrt(|cos phi|)). The bond product is purely imaginary at
    t_c = t_d, so its root always carries a real part of t_d
    sqrt(|cos phi|) regardless of the sign of cos phi.
    """
    if t_c is None:
        t_c = t_d
    root = _bond_root(ChainParams(t_c=t_c, t_d=t_d, gamma_p=0.0,
                                  phi=phi, n_sites=2))
    return 2.0 * t_d - 2.0 * abs(root.real)


def stability_window_1d(t_d: float, gamma_p: float, phi: float) -> bool:
    """True iff gamma_p < 2 t_d (1 - sqrt(|cos phi|)), the t_c = t_d rule.

    Finite chains are slightly more forgiving: the N-site threshold has
    cos(pi/(N+1)) multiplying the square root, approaching this window
    from above as N grows. Use spectrum_open_analytic for exact finite-N
    verdicts.
    """
    return gamma_p < stability_threshold(t_d, phi)


def stable_topological_overlap(phi: float) -> bool:
    """True iff amplifying and stable windows intersect: |cos phi| < (sqrt 5 - 1)/2.

    Intersection requires sin phi > sqrt(|cos phi|) (t_c = t_d), whose
    squared form |cos phi|^2 + |cos phi| - 1 < 0 has the golden-ratio
    bound as its positive root.
    """
    return abs(math.cos(phi)) < OVERLAP_BOUND
