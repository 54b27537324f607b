"""Singular-value machinery and the doubled Hermitian picture.

The SVD H = U diag(s) V^dag organizes the physics: the smallest singular
value s_N is the inverse amplification scale, its singular vectors are the
edge mode, and the gap s_{N-1} - s_N certifies that the edge mode is
isolated. The doubled matrix [[0, H], [H^dag, 0]] is Hermitian with chiral
symmetry; its spectrum is exactly {±s_n}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import CouplingMatrix, LatticeModel, coupling_matrix

#: relative cluster width below which singular values count as degenerate
DEGENERACY_RTOL = 1e-8


def _as_matrix(h) -> np.ndarray:
    if isinstance(h, LatticeModel):
        h = coupling_matrix(h)
    if isinstance(h, CouplingMatrix):
        return np.asarray(h.h, dtype=complex)
    arr = np.asarray(h, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError("expected a square matrix")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("matrix has non-finite entries")
    return arr


@dataclass(frozen=True)
class SvdResult:
    """Deterministic SVD with fixed ordering and phase gauge.

    Singular values descend, so the edge mode (if any) is the last triple.
    In each column of v the largest-magnitude entry is real nonnegative;
    u carries the matching phase so that h = u @ diag(s) @ v^dag holds.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def n(self) -> int:
        return self.s.shape[0]

    def edge_triple(self) -> tuple[np.ndarray, float, np.ndarray]:
        """(u_N, s_N, v_N): the smallest singular triple."""
        return self.u[:, -1], float(self.s[-1]), self.v[:, -1]


def svd(h) -> SvdResult:
    """SVD with deterministic ordering and phases (see :class:`SvdResult`).

    Within-degeneracy ordering is stabilized by sorting each near-equal
    cluster by the row index of the largest |v| entry.
    """
    m = _as_matrix(h)
    u, s, vh = np.linalg.svd(m)
    v = vh.conj().T
    n = s.shape[0]
    scale = float(s[0]) if n and s[0] > 0 else 1.0

    # stabilize ordering inside degenerate clusters
    start = 0
    order = np.arange(n)
    for stop in range(1, n + 1):
        if stop == n or s[stop - 1] - s[stop] > DEGENERACY_RTOL * scale:
            if stop - start > 1:
                cluster = order[start:stop]
                anchors = [int(np.argmax(np.abs(v[:, c]))) for c in cluster]
                order[start:stop] = cluster[np.argsort(anchors, kind="stable")]
            start = stop
    u, s, v = u[:, order], s[order], v[:, order]

    # phase gauge: largest-|.| entry of each v column made real nonnegative
    anchor = np.argmax(np.abs(v), axis=0)
    pivots = v[anchor, np.arange(n)]
    mags = np.abs(pivots)
    phases = np.where(mags > 0, pivots / np.where(mags > 0, mags, 1.0), 1.0)
    v = v * phases.conj()
    u = u * phases.conj()

    for a in (u, s, v):
        a.setflags(write=False)
    return SvdResult(u=u, s=s, v=v)


def log10_smallest_singular(h) -> float:
    """log10 of the smallest singular value, past the SVD's dynamic range.

    Dense SVD cannot resolve s_N below ~eps * s_1. The product of all
    singular values is |det H|, which an LU factorization computes with
    small backward error even when the matrix is this stretched, so

        log10 s_N = log10 |det H| - sum_{n<N} log10 s_n

    stays accurate while the raw SVD output sits on the floor. Returns
    -inf for an exactly singular matrix.
    """
    m = _as_matrix(h)
    sign, logdet = np.linalg.slogdet(m)
    if sign == 0:
        return float("-inf")
    s = np.linalg.svd(m, compute_uv=False)
    return float(logdet / np.log(10.0) - np.sum(np.log10(s[:-1])))


def singular_gap(result: SvdResult) -> float:
    """Gap s_{N-1} - s_N isolating the smallest singular value."""
    if result.n < 2:
        raise ValidationError("singular gap needs at least two singular values")
    return float(result.s[-2] - result.s[-1])


def effective_hamiltonian(h) -> np.ndarray:
    """Doubled Hermitian matrix [[0, H], [H^dag, 0]].

    Basis ordering: N spin-up rows (first block) then N spin-down rows, so
    sigma_z = diag(+1, ..., -1, ...) anticommutes with the result exactly.
    """
    m = _as_matrix(h)
    n = m.shape[0]
    z = np.zeros((n, n), dtype=complex)
    out = np.block([[z, m], [m.conj().T, z]])
    out.setflags(write=False)
    return out


def eigenpairs_from_svd(result: SvdResult, h=None, residual_tol: float = 1e-9):
    """Eigenpairs (±s_n, w) of the doubled matrix from the SVD.

    w_± = (u_n ⊕ ±v_n)/sqrt(2). Every returned pair is checked against the
    eigen-equation; the residual bound scales with max(1, s_1). Pass the
    original matrix as ``h`` to check against it rather than the SVD
    reconstruction.
    """
    n = result.n
    if h is not None:
        heff = effective_hamiltonian(h)
    else:
        recon = result.u @ np.diag(result.s) @ result.v.conj().T
        heff = np.block([
            [np.zeros((n, n), dtype=complex), recon],
            [recon.conj().T, np.zeros((n, n), dtype=complex)],
        ])
    scale = max(1.0, float(result.s[0]) if n else 1.0)
    pairs = []
    for k in range(n):
        u_k, v_k = result.u[:, k], result.v[:, k]
        for sign in (+1.0, -1.0):
            w = np.concatenate([u_k, sign * v_k]) / np.sqrt(2.0)
            lam = sign * float(result.s[k])
            res = float(np.linalg.norm(heff @ w - lam * w))
            if res > residual_tol * scale:
                raise ValidationError(
                    f"eigenpair residual {res:.3e} exceeds {residual_tol:.1e}*{scale:.3g}")
            pairs.append((lam, w))
    return pairs
