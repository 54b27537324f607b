"""Lattice models: validated pump/decay/coherent triples and their couplings.

The first-moment dynamics of a driven bosonic lattice with local/nonlocal
pump ``Gamma^(p)``, decay ``Gamma^(d)`` and coherent hopping ``G`` close on

    d alpha / dt = H alpha + eps',      H = Gamma - i G,

with ``Gamma_{jl} = Gamma^(p)_{jl} - Gamma^(d)_{lj}`` (note the transpose on
the decay matrix) and ``eps' = i eps``. This module builds and validates the
ingredients; everything downstream consumes :class:`LatticeModel` or the
non-Hermitian :class:`CouplingMatrix` derived from it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

HERMITICITY_TOL = 1e-12
PSD_TOL = -1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


def _check_hermitian(a: np.ndarray, name: str) -> None:
    dev = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if dev > HERMITICITY_TOL:
        raise ValidationError(f"{name} is not Hermitian (max deviation {dev:.3e})")


def _check_psd(a: np.ndarray, name: str) -> None:
    if a.size == 0:
        return
    lo = float(np.min(np.linalg.eigvalsh(a)))
    if lo < PSD_TOL:
        raise ValidationError(f"{name} is not positive semidefinite (min eigenvalue {lo:.3e})")


@dataclass(frozen=True)
class ChainParams:
    """Parameters of the 1D non-reciprocal chain.

    t_c : coherent hopping amplitude (>= 0)
    t_d : dissipative hopping amplitude (>= 0)
    gamma_p : net local pump/loss rate (any sign)
    phi : hopping phase, stored in [0, 2*pi)
    n_sites : chain length
    """

    t_c: float
    t_d: float
    gamma_p: float
    phi: float
    n_sites: int

    def __post_init__(self):
        for name in ("t_c", "t_d", "gamma_p", "phi"):
            if not np.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.t_c < 0 or self.t_d < 0:
            raise ValidationError("hopping amplitudes t_c, t_d must be nonnegative")
        if self.n_sites < 1 or self.n_sites != int(self.n_sites):
            raise ValidationError("n_sites must be a positive integer")
        object.__setattr__(self, "phi", float(np.mod(self.phi, 2 * np.pi)))


@dataclass(frozen=True)
class LatticeModel:
    """Validated (Gamma^(p), Gamma^(d), G) triple over N sites."""

    gamma_pump: np.ndarray
    gamma_decay: np.ndarray
    coherent: np.ndarray
    chain: ChainParams | None = None

    @property
    def n_sites(self) -> int:
        return self.gamma_pump.shape[0]


@dataclass(frozen=True)
class CouplingMatrix:
    """Non-Hermitian first-moment generator H = Gamma - iG."""

    h: np.ndarray

    @property
    def n(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True)
class Drive:
    """Coherent drive amplitudes eps (one complex entry per site)."""

    epsilon: np.ndarray

    @property
    def epsilon_prime(self) -> np.ndarray:
        """Transformed drive eps' = i*eps entering the linear system."""
        return 1j * self.epsilon


def drive_at_site(n_sites: int, site: int, amplitude: complex = 1.0) -> Drive:
    """Drive concentrated on one site (1-based, matching lattice labels)."""
    if not 1 <= site <= n_sites:
        raise ValidationError(f"site {site} outside 1..{n_sites}")
    eps = np.zeros(n_sites, dtype=complex)
    eps[site - 1] = amplitude
    return Drive(_frozen(eps))


def as_drive(eps, n_sites: int | None = None) -> Drive:
    """Coerce a Drive or plain vector into a validated Drive; None means no drive."""
    if eps is None:
        if n_sites is None:
            raise ValidationError("cannot infer size of an absent drive")
        return Drive(_frozen(np.zeros(n_sites, dtype=complex)))
    if isinstance(eps, Drive):
        d = eps
    else:
        arr = np.asarray(eps, dtype=complex)
        if arr.ndim != 1:
            raise ValidationError("drive must be a 1-D complex vector")
        d = Drive(_frozen(arr))
    if n_sites is not None and d.epsilon.shape[0] != n_sites:
        raise ValidationError(
            f"drive length {d.epsilon.shape[0]} does not match model size {n_sites}")
    return d


def build_custom(gamma_pump, gamma_decay, coherent) -> LatticeModel:
    """Validate and assemble an arbitrary lattice model.

    All three matrices must be square, same size, Hermitian to 1e-12;
    the two dissipators must be PSD (min eigenvalue >= -1e-10).
    """
    gp = np.asarray(gamma_pump, dtype=complex)
    gd = np.asarray(gamma_decay, dtype=complex)
    g = np.asarray(coherent, dtype=complex)
    shapes = {gp.shape, gd.shape, g.shape}
    if len(shapes) != 1 or gp.ndim != 2 or gp.shape[0] != gp.shape[1]:
        raise ValidationError(f"matrices must be square and same shape, got {shapes}")
    _check_hermitian(gp, "gamma_pump")
    _check_hermitian(gd, "gamma_decay")
    _check_hermitian(g, "coherent")
    _check_psd(gp, "gamma_pump")
    _check_psd(gd, "gamma_decay")
    return LatticeModel(_frozen(gp), _frozen(gd), _frozen(g))


def build_chain(params: ChainParams) -> LatticeModel:
    """Non-reciprocal chain with dissipative and phase-twisted coherent hopping.

    The pump is the tridiagonal matrix with diagonal 2*t_d and off-diagonal
    t_d (always PSD); the decay is local, kappa_a = 4*t_d - gamma_p, so the
    net local rate is gamma_p - 2*t_d. A negative kappa_a is allowed for the
    moment equations but flagged, since it no longer describes a physical
    local loss channel.

    The coherent hopping carries phase +phi on the lower off-diagonal
    (G[j+1, j] = t_c e^{i phi}), which fixes the amplification direction:
    a drive on site 1 is amplified toward site N for phi in (0, pi).
    """
    n = params.n_sites
    if n < 2:
        raise ValidationError("chain needs n_sites >= 2")
    t_c, t_d, gamma_p, phi = params.t_c, params.t_d, params.gamma_p, params.phi

    gp = np.zeros((n, n), dtype=complex)
    idx = np.arange(n - 1)
    gp[idx, idx] = 2 * t_d
    gp[n - 1, n - 1] = 2 * t_d
    gp[idx, idx + 1] = t_d
    gp[idx + 1, idx] = t_d
    _check_psd(gp, "gamma_pump")

    kappa_a = 4 * t_d - gamma_p
    if kappa_a < 0:
        warnings.warn(
            f"kappa_a = 4*t_d - gamma_p = {kappa_a:.6g} < 0: decay channel is "
            "unphysical as a loss rate; moment equations remain valid",
            stacklevel=2,
        )
    gd = kappa_a * np.eye(n, dtype=complex)

    g = np.zeros((n, n), dtype=complex)
    g[idx + 1, idx] = t_c * np.exp(1j * phi)
    g[idx, idx + 1] = t_c * np.exp(-1j * phi)

    return LatticeModel(_frozen(gp), _frozen(gd), _frozen(g), chain=params)


def coupling_matrix(model: LatticeModel) -> CouplingMatrix:
    """H = (Gamma^(p) - Gamma^(d)^T) - i G."""
    h = model.gamma_pump - model.gamma_decay.T - 1j * model.coherent
    return CouplingMatrix(_frozen(h))


def add_diagonal_disorder(model: LatticeModel, sigma: float, seed: int) -> LatticeModel:
    """Gaussian on-site frequency disorder added to the coherent matrix.

    Draws N(0, sigma^2) deviates from a Philox counter-based generator keyed
    by ``seed`` and adds them to the diagonal of G. sigma = 0 returns the
    model unchanged bitwise. The input model is never mutated.
    """
    if sigma < 0:
        raise ValidationError("sigma must be nonnegative")
    if sigma == 0:
        return model
    rng = np.random.Generator(np.random.Philox(seed))
    delta = sigma * rng.standard_normal(model.n_sites)
    g = model.coherent + np.diag(delta)
    return LatticeModel(model.gamma_pump, model.gamma_decay, _frozen(g), chain=None)


def parity_matrix(n: int) -> np.ndarray:
    """Site-reversal permutation (antidiagonal ones)."""
    return np.fliplr(np.eye(n))


def parity_reverse(model: LatticeModel) -> LatticeModel:
    """Conjugate every matrix by the site-reversal permutation."""
    flip = lambda a: np.flip(a, (0, 1))
    return LatticeModel(
        _frozen(flip(model.gamma_pump)),
        _frozen(flip(model.gamma_decay)),
        _frozen(flip(model.coherent)),
        chain=None,
    )


def is_parity_symmetric(h: np.ndarray, tol: float = 1e-12) -> bool:
    """True when flipping both axes equals transposition (Pi H Pi = H^T)."""
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 0.0)
    return bool(np.max(np.abs(np.flip(h, (0, 1)) - h.T)) <= tol * scale)
