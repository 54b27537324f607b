"""Desk-scale experiment drivers: edge profiles, phase diagrams, disorder.

Everything here is data-only. Each driver builds models through the
public constructors, runs the relevant spectral or steady-state
computation per grid point or realization, and returns plain result
records; rendering and file output live with the CLI.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (GaplessError, TopampError, ValidationError,
                     WindingIntegralityError)
from .model import (ChainParams, add_diagonal_disorder, build_chain,
                    coupling_matrix, drive_at_site)
from .spectral import singular_gap, svd
from .stability import spectrum_open_analytic, stability_threshold
from .steady import gain
from .topology import bloch_from_chain, winding_number

#: chain parameters that may serve as phase-diagram axes
AXIS_NAMES = ("t_c", "t_d", "gamma_p", "phi")

#: default per-axis resolution when a spec gives only a range
DEFAULT_GRID = 100

#: sample count for analytic overlay polylines
OVERLAY_SAMPLES = 512


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


# --- edge-mode profile ---


@dataclass(frozen=True)
class EdgeProfile:
    """Site profiles of the smallest singular pair plus the full spectrum.

    sites and orders are 1-based. u_abs peaks at the driven end and
    v_abs at the opposite end whenever the chain is in its amplifying
    phase; outside it both spread over the bulk.
    """

    params: ChainParams
    sites: np.ndarray
    u_abs: np.ndarray
    v_abs: np.ndarray
    orders: np.ndarray
    singular_values: np.ndarray


def edge_profile_experiment(params: ChainParams) -> EdgeProfile:
    """Singular-mode site profiles of the chain at ``params``."""
    result = svd(coupling_matrix(build_chain(params)))
    u_n, _, v_n = result.edge_triple()
    n = result.n
    return EdgeProfile(
        params=params,
        sites=_frozen(np.arange(1, n + 1)),
        u_abs=_frozen(np.abs(u_n)),
        v_abs=_frozen(np.abs(v_n)),
        orders=_frozen(np.arange(1, n + 1)),
        singular_values=_frozen(result.s.copy()))


# --- phase diagram ---


@dataclass(frozen=True)
class PhasePoint:
    """One parameter point: gap, winding, and stability, jointly built.

    winding is None where the symbol curve passes through (or grazes,
    within integrality tolerance) the origin; serializers spell it
    "gapless". max_real is the largest real part of the open-chain
    spectrum at this point's size, so ``stable`` reflects the finite
    chain rather than the asymptotic window.
    """

    params: ChainParams
    delta_s: float
    winding: int | None
    stable: bool
    max_real: float


@dataclass(frozen=True)
class PhaseDiagram:
    """Grid of :class:`PhasePoint` plus analytic boundary overlays.

    points[i][j] sits at (axis1_values[i], axis2_values[j]). overlays
    maps a boundary name to an (m, 2) polyline in (axis1, axis2)
    coordinates; it is populated only when exactly one axis is gamma_p,
    where the amplifying-window edges and the stability threshold are
    single-valued curves over the other axis.
    """

    axis1: str
    axis1_values: np.ndarray
    axis2: str
    axis2_values: np.ndarray
    points: list
    overlays: dict


def _axis(spec) -> tuple[str, np.ndarray]:
    try:
        name, *rest = spec
    except TypeError:
        raise ValidationError("axis spec must be (name, values) or "
                              "(name, lo, hi[, num])") from None
    if name not in AXIS_NAMES:
        raise ValidationError(
            f"unknown axis {name!r}; choose from {', '.join(AXIS_NAMES)}")
    if len(rest) == 1:
        values = np.asarray(rest[0], dtype=float)
    elif len(rest) in (2, 3):
        num = int(rest[2]) if len(rest) == 3 else DEFAULT_GRID
        values = np.linspace(float(rest[0]), float(rest[1]), num)
    else:
        raise ValidationError("axis spec must be (name, values) or "
                              "(name, lo, hi[, num])")
    if values.ndim != 1 or values.size < 2:
        raise ValidationError("axis grids need at least 2 points")
    if not np.all(np.isfinite(values)):
        raise ValidationError("axis grid values must be finite")
    return name, _frozen(values)


def _phase_point(params: ChainParams, k_points: int) -> PhasePoint:
    s = np.linalg.svd(coupling_matrix(build_chain(params)).h,
                      compute_uv=False)
    delta = float(s[-2] - s[-1])
    try:
        w = winding_number(bloch_from_chain(params), k_points=k_points)
    except (GaplessError, WindingIntegralityError):
        w = None
    report = spectrum_open_analytic(params)
    return PhasePoint(params=params, delta_s=delta, winding=w,
                      stable=report.stable, max_real=report.max_real)


def _overlay_polylines(name1, vals1, name2, vals2, fixed: ChainParams) -> dict:
    if (name1 == "gamma_p") == (name2 == "gamma_p"):
        return {}
    other, ovals = (name2, vals2) if name1 == "gamma_p" else (name1, vals1)
    xs = np.linspace(float(ovals[0]), float(ovals[-1]), OVERLAY_SAMPLES)
    lower = np.empty_like(xs)
    upper = np.empty_like(xs)
    thresh = np.empty_like(xs)
    for i, x in enumerate(xs):
        at = {"t_c": fixed.t_c, "t_d": fixed.t_d, "phi": fixed.phi}
        at[other] = float(x)
        sin_star = abs(math.sin(at["phi"]))
        lower[i] = 2.0 * at["t_d"] * (1.0 - sin_star)
        upper[i] = 2.0 * at["t_d"] * (1.0 + sin_star)
        thresh[i] = stability_threshold(at["t_d"], at["phi"], at["t_c"])

    def pack(ys):
        cols = (ys, xs) if name1 == "gamma_p" else (xs, ys)
        return _frozen(np.column_stack(cols))

    overlays = {"stability": pack(thresh)}
    # the amplifying window needs coherent hopping; with t_c pinned at
    # zero its boundary lines are vacuous
    if other == "t_c" or fixed.t_c != 0.0:
        overlays["ti_lower"] = pack(lower)
        overlays["ti_upper"] = pack(upper)
    return overlays


def phase_diagram(axis1_spec, axis2_spec, fixed: ChainParams,
                  n_sites: int = 100, k_points: int = 1024,
                  threads: int = 1) -> PhaseDiagram:
    """Sweep two chain parameters and report gap, winding, stability.

    Axis specs are (name, values) or (name, lo, hi[, num]) with names
    from AXIS_NAMES; remaining parameters come from ``fixed`` and every
    point is rebuilt at ``n_sites``. Grid points are independent, so
    ``threads`` > 1 evaluates them in a thread pool; assembly order is
    fixed either way.
    """
    name1, vals1 = _axis(axis1_spec)
    name2, vals2 = _axis(axis2_spec)
    if name1 == name2:
        raise ValidationError("phase-diagram axes must differ")
    if n_sites < 2:
        raise ValidationError("phase diagram needs n_sites >= 2")

    def at(v1, v2) -> ChainParams:
        kw = {"t_c": fixed.t_c, "t_d": fixed.t_d,
              "gamma_p": fixed.gamma_p, "phi": fixed.phi}
        kw[name1] = float(v1)
        kw[name2] = float(v2)
        return ChainParams(n_sites=n_sites, **kw)

    flat = [at(v1, v2) for v1 in vals1 for v2 in vals2]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda p: _phase_point(p, k_points), flat))
    else:
        results = [_phase_point(p, k_points) for p in flat]
    m = vals2.size
    points = [results[i * m:(i + 1) * m] for i in range(vals1.size)]
    return PhaseDiagram(
        axis1=name1, axis1_values=vals1, axis2=name2, axis2_values=vals2,
        points=points,
        overlays=_overlay_polylines(name1, vals1, name2, vals2, fixed))


# --- disorder robustness ---


@dataclass(frozen=True)
class DisorderStats:
    """Monte Carlo summary at one (sigma, chain length) cell.

    mean_gap and stderr_gap summarize the singular gap s_{N-1} - s_N
    over the realizations; mean_log_gain averages the log10 response at
    the far end under a unit drive at site 1, with realizations whose
    edge route degenerates skipped (nan-aware mean).
    """

    sigma: float
    n_sites: int
    realizations: int
    mean_gap: float
    stderr_gap: float
    mean_log_gain: float


def realization_count(n_sites: int) -> int:
    """Default Monte Carlo budget: round(1e5 / N), at least 1."""
    return max(1, round(1e5 / n_sites))


def realization_seed(master_seed: int, sigma_idx: int, n_sites: int,
                     realization_idx: int) -> int:
    """Per-realization seed from the index tuple.

    Spawned through SeedSequence entropy pooling so neighboring tuples
    give statistically independent streams; independent of evaluation
    order by construction.
    """
    ss = np.random.SeedSequence(
        (master_seed, sigma_idx, n_sites, realization_idx))
    return int(ss.generate_state(1, np.uint64)[0])


def _realize(model0, sigma: float, seed: int, drive) -> tuple[float, float]:
    model = add_diagonal_disorder(model0, sigma, seed)
    h = coupling_matrix(model).h
    # values-only LAPACK drivers can differ from the canonical route in
    # the last ulp; the sigma = 0 row must match the clean gap exactly
    gap = singular_gap(svd(h))
    try:
        log_gain, _ = gain(h, drive, site=h.shape[0])
    except TopampError:
        log_gain = float("nan")
    return gap, log_gain


def disorder_experiment(base: ChainParams, sigma_grid, n_list,
                        master_seed: int, realizations: int | None = None,
                        threads: int = 1) -> list:
    """Disorder-averaged gap and gain over a (sigma, N) product grid.

    For each chain length in ``n_list`` (outer) and each sigma in
    ``sigma_grid`` (inner) this draws round(1e5/N) realizations (or the
    given override) of diagonal frequency disorder, seeded per
    realization from (master_seed, sigma index, N, realization index).
    sigma = 0 realizations are all bitwise identical, so that cell is
    computed once and reported with stderr 0. Returns DisorderStats in
    deterministic order regardless of ``threads``.
    """
    sigmas = [float(s) for s in np.atleast_1d(np.asarray(sigma_grid, float))]
    if any(s < 0 or not math.isfinite(s) for s in sigmas):
        raise ValidationError("sigma values must be finite and >= 0")
    out = []
    for n in n_list:
        n = int(n)
        if n < 2:
            raise ValidationError("disorder experiment needs n_sites >= 2")
        model0 = build_chain(ChainParams(
            t_c=base.t_c, t_d=base.t_d, gamma_p=base.gamma_p,
            phi=base.phi, n_sites=n))
        drive = drive_at_site(n, 1)
        count = realization_count(n) if realizations is None else int(realizations)
        if count < 1:
            raise ValidationError("realization count must be >= 1")
        for sigma_idx, sigma in enumerate(sigmas):
            if sigma == 0.0:
                gap, log_gain = _realize(model0, 0.0, 0, drive)
                out.append(DisorderStats(
                    sigma=0.0, n_sites=n, realizations=count,
                    mean_gap=gap, stderr_gap=0.0, mean_log_gain=log_gain))
                continue
            seeds = [realization_seed(master_seed, sigma_idx, n, r)
                     for r in range(count)]
            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    rows = list(pool.map(
                        lambda sd: _realize(model0, sigma, sd, drive), seeds))
            else:
                rows = [_realize(model0, sigma, sd, drive) for sd in seeds]
            gaps = np.array([r[0] for r in rows])
            gains = np.array([r[1] for r in rows])
            stderr = (float(np.std(gaps, ddof=1) / math.sqrt(count))
                      if count > 1 else 0.0)
            live = gains[np.isfinite(gains)]
            mean_gain = float(np.mean(live)) if live.size else float("nan")
            out.append(DisorderStats(
                sigma=sigma, n_sites=n, realizations=count,
                mean_gap=float(np.mean(gaps)), stderr_gap=stderr,
                mean_log_gain=mean_gain))
    return out
