"""Reproducible file I/O: round-trip CSV tables, canonical JSON, manifests.

Data files must be byte-identical across reruns with the same inputs, so
every float is written in shortest round-trip form (Python repr), CSV
rows go through the stdlib writer with RFC-4180 line endings, and JSON
is emitted with sorted keys. Timestamps live only in the run manifest.
"""

from __future__ import annotations

import csv
import hashlib
import io as _stdio
import json
from dataclasses import dataclass

import numpy as np

from ._version import __version__
from .errors import ValidationError
from .experiments import DisorderStats, EdgeProfile, PhaseDiagram
from .model import ChainParams, Drive, LatticeModel, build_chain, build_custom

#: seed-derivation scheme tag recorded in manifests
PRNG_SCHEME = "philox-seedsequence-v1"


def fmt_value(x) -> str:
    """One CSV cell: shortest round-trip floats, plain ints, bare strings."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    raise TypeError(f"cannot format {type(x).__name__} in a CSV cell")


def _py_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def table_to_csv(header, rows) -> str:
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_value(x) for x in row])
    return buf.getvalue()


def table_to_json(header, rows) -> str:
    payload = {"columns": list(header),
               "rows": [[_py_value(x) for x in row] for row in rows]}
    return canonical_json(payload)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# --- complex payload encoding (JSON carries no complex type) ---


def complex_to_json(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(pair) -> complex:
    if isinstance(pair, (int, float)):
        return complex(pair)
    if (not isinstance(pair, (list, tuple)) or len(pair) != 2
            or not all(isinstance(p, (int, float)) for p in pair)):
        raise ValidationError("complex values are [re, im] pairs")
    return complex(pair[0], pair[1])


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[complex_to_json(z) for z in row] for row in m]


def matrix_from_json(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise ValidationError("matrix payloads are nested [re, im] lists")
    return np.array([[complex_from_json(z) for z in row] for row in rows],
                    dtype=complex)


def vector_from_json(entries) -> np.ndarray:
    if not isinstance(entries, list) or not entries:
        raise ValidationError("vector payloads are lists of [re, im] pairs")
    return np.array([complex_from_json(z) for z in entries], dtype=complex)


# --- model configs ---


def chain_params_to_dict(p: ChainParams) -> dict:
    return {"t_c": p.t_c, "t_d": p.t_d, "gamma_p": p.gamma_p,
            "phi": p.phi, "n_sites": p.n_sites}


def chain_params_from_dict(d: dict) -> ChainParams:
    if not isinstance(d, dict):
        raise ValidationError("chain config must be an object")
    required = {"t_c", "t_d", "gamma_p", "phi", "n_sites"}
    missing = required - d.keys()
    if missing:
        raise ValidationError(
            "chain config missing " + ", ".join(sorted(missing)))
    extra = d.keys() - required
    if extra:
        raise ValidationError(
            "chain config has unknown keys " + ", ".join(sorted(extra)))
    try:
        return ChainParams(t_c=float(d["t_c"]), t_d=float(d["t_d"]),
                           gamma_p=float(d["gamma_p"]), phi=float(d["phi"]),
                           n_sites=int(d["n_sites"]))
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad chain config value: {exc}") from None


def model_to_dict(model: LatticeModel) -> dict:
    """Canonical JSON form; chain models keep their parameters."""
    if model.chain is not None:
        return {"chain": chain_params_to_dict(model.chain)}
    return {"custom": {
        "gamma_pump": matrix_to_json(model.gamma_pump),
        "gamma_decay": matrix_to_json(model.gamma_decay),
        "coherent": matrix_to_json(model.coherent),
    }}


def model_from_dict(cfg: dict) -> LatticeModel:
    if not isinstance(cfg, dict):
        raise ValidationError("model config must be an object")
    if ("chain" in cfg) == ("custom" in cfg):
        raise ValidationError(
            'model config needs exactly one of "chain" or "custom"')
    if "chain" in cfg:
        return build_chain(chain_params_from_dict(cfg["chain"]))
    spec = cfg["custom"]
    if not isinstance(spec, dict):
        raise ValidationError("custom config must be an object")
    for key in ("gamma_pump", "gamma_decay", "coherent"):
        if key not in spec:
            raise ValidationError(f"custom config missing {key}")
    return build_custom(gamma_pump=matrix_from_json(spec["gamma_pump"]),
                        gamma_decay=matrix_from_json(spec["gamma_decay"]),
                        coherent=matrix_from_json(spec["coherent"]))


def model_digest(model: LatticeModel) -> str:
    """Digest of the matrices themselves, stable across config spellings."""
    payload = {"gamma_pump": matrix_to_json(model.gamma_pump),
               "gamma_decay": matrix_to_json(model.gamma_decay),
               "coherent": matrix_to_json(model.coherent)}
    return sha256_hex(canonical_json(payload))


def drive_from_config(cfg, n_sites: int) -> Drive:
    """Drive payload: {"site": j[, "amplitude": [re, im]]} or {"epsilon": [...]}.

    Absent payloads mean no drive (all zeros).
    """
    from .model import as_drive, drive_at_site
    if cfg is None:
        return as_drive(None, n_sites)
    if not isinstance(cfg, dict):
        raise ValidationError("drive config must be an object")
    if ("site" in cfg) == ("epsilon" in cfg):
        raise ValidationError(
            'drive config needs exactly one of "site" or "epsilon"')
    if "site" in cfg:
        amp = complex_from_json(cfg.get("amplitude", 1.0))
        return drive_at_site(n_sites, int(cfg["site"]), amp)
    eps = vector_from_json(cfg["epsilon"])
    if eps.size != n_sites:
        raise ValidationError(
            f"drive has {eps.size} entries for {n_sites} sites")
    return as_drive(eps)


# --- table builders ---


def svd_table(result) -> tuple[list, list]:
    header = ["n", "s_n", "re_u", "im_u", "re_v", "im_v"]
    rows = []
    for n in range(result.n):
        s_n = float(result.s[n])
        for j in range(result.n):
            u = result.u[j, n]
            v = result.v[j, n]
            rows.append([n + 1, s_n, float(u.real), float(u.imag),
                         float(v.real), float(v.imag)])
    return header, rows


def steady_table(state) -> tuple[list, list]:
    header = ["j", "re_alpha", "im_alpha", "log10_abs"]
    alpha = state.alpha
    if state.log10_abs is not None:
        logs = np.asarray(state.log10_abs, dtype=float)
    else:
        with np.errstate(divide="ignore"):
            logs = np.log10(np.abs(alpha))
    rows = [[j + 1, float(alpha[j].real), float(alpha[j].imag),
             float(logs[j])] for j in range(alpha.size)]
    return header, rows


def spectrum_table(report) -> tuple[list, list]:
    header = ["n", "re_lambda", "im_lambda"]
    rows = [[n + 1, float(lam.real), float(lam.imag)]
            for n, lam in enumerate(report.eigenvalues)]
    return header, rows


def lyapunov_table(corr) -> tuple[list, list]:
    header = ["i", "j", "re_m", "im_m"]
    m = corr.m
    rows = [[i + 1, j + 1, float(m[i, j].real), float(m[i, j].imag)]
            for i in range(corr.n) for j in range(corr.n)]
    return header, rows


def coherence_trajectory_table(traj) -> tuple[list, list]:
    n = traj.states.shape[1]
    header = ["t"]
    for j in range(1, n + 1):
        header += [f"re_a{j}", f"im_a{j}"]
    rows = []
    for t, a in zip(traj.times, traj.states):
        row = [float(t)]
        for z in a:
            row += [float(z.real), float(z.imag)]
        rows.append(row)
    return header, rows


def correlation_trajectory_table(traj, diag_only: bool = False):
    n = traj.matrices[0].n
    rows = []
    if diag_only:
        header = ["t"] + [f"n{j}" for j in range(1, n + 1)]
        for t, corr in zip(traj.times, traj.matrices):
            rows.append([float(t)] + [float(x) for x in corr.occupations])
        return header, rows
    header = ["t"]
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            header += [f"re_m{i}{j}", f"im_m{i}{j}"]
    for t, corr in zip(traj.times, traj.matrices):
        row = [float(t)]
        for i in range(n):
            for j in range(n):
                z = corr.m[i, j]
                row += [float(z.real), float(z.imag)]
        rows.append(row)
    return header, rows


def edge_profile_table(profile: EdgeProfile) -> tuple[list, list]:
    header = ["j", "u_abs", "v_abs"]
    rows = [[int(j), float(u), float(v)] for j, u, v in
            zip(profile.sites, profile.u_abs, profile.v_abs)]
    return header, rows


def singular_value_table(profile: EdgeProfile,
                         gamma_p: float | None = None) -> tuple[list, list]:
    if gamma_p is None:
        header = ["n", "s_n"]
        rows = [[int(n), float(s)] for n, s in
                zip(profile.orders, profile.singular_values)]
    else:
        header = ["gamma_p", "n", "s_n"]
        rows = [[float(gamma_p), int(n), float(s)] for n, s in
                zip(profile.orders, profile.singular_values)]
    return header, rows


def phase_diagram_table(diagram: PhaseDiagram) -> tuple[list, list]:
    header = [diagram.axis1, diagram.axis2, "delta_s", "winding",
              "stable", "max_real"]
    rows = []
    for i, v1 in enumerate(diagram.axis1_values):
        for j, v2 in enumerate(diagram.axis2_values):
            pt = diagram.points[i][j]
            winding = "gapless" if pt.winding is None else int(pt.winding)
            rows.append([float(v1), float(v2), pt.delta_s, winding,
                         pt.stable, pt.max_real])
    return header, rows


def overlay_table(diagram: PhaseDiagram) -> tuple[list, list]:
    header = ["boundary", diagram.axis1, diagram.axis2]
    rows = []
    for name in sorted(diagram.overlays):
        for x, y in diagram.overlays[name]:
            rows.append([name, float(x), float(y)])
    return header, rows


def disorder_table(stats: list) -> tuple[list, list]:
    header = ["sigma", "n_sites", "realizations", "mean_gap",
              "stderr_gap", "mean_log_gain"]
    rows = [[s.sigma, s.n_sites, s.realizations, s.mean_gap,
             s.stderr_gap, s.mean_log_gain] for s in stats]
    return header, rows


# --- run manifest ---


@dataclass(frozen=True)
class RunManifest:
    """Provenance sidecar for one CLI run.

    Data files carry no timestamps, so identical inputs rerun to
    identical bytes; wall-clock information lives here instead.
    """

    command: str
    config_digest: str | None
    seeds: list
    version: str
    numpy_version: str
    prng: str
    started_utc: str
    finished_utc: str
    wall_seconds: float

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config_digest": self.config_digest,
            "seeds": list(self.seeds),
            "version": self.version,
            "numpy_version": self.numpy_version,
            "prng": self.prng,
            "started_utc": self.started_utc,
            "finished_utc": self.finished_utc,
            "wall_seconds": self.wall_seconds,
        }


def make_manifest(command: str, config_digest: str | None, seeds,
                  started_utc: str, finished_utc: str,
                  wall_seconds: float) -> RunManifest:
    return RunManifest(command=command, config_digest=config_digest,
                       seeds=list(seeds), version=__version__,
                       numpy_version=np.__version__, prng=PRNG_SCHEME,
                       started_utc=started_utc, finished_utc=finished_utc,
                       wall_seconds=wall_seconds)
