"""Command-line frontend with reproducible file-based I/O.

Every subcommand reads a JSON config, computes through the library, and
emits delimited tables (CSV by default, JSON with --format json) either
to stdout or into --out <dir> together with a manifest.json recording
the command line, config digest, seeds, versions, and wall-clock time.
Exit codes: 0 success, 1 usage or config problem, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import io as tio
from ._version import __version__
from .errors import TopampError, ValidationError
from .experiments import (DEFAULT_GRID, disorder_experiment,
                          edge_profile_experiment, phase_diagram)
from .floquet import (FloquetParams, check_hierarchy, map_params,
                      validate_elimination)
from .model import ChainParams, coupling_matrix
from .moments import evolve_coherences, evolve_correlations, lyapunov_steady
from .spectral import svd
from .stability import spectrum_numeric, spectrum_open_analytic
from .steady import (edge_rank1, ssh_analytic_steady_state,
                     steady_state_direct, steady_state_svd)
from .topology import BlochModel, bloch_from_chain, classification_report, winding_number

#: inset pump values swept by fig1 when the config does not override them
FIG1_INSET_GAMMAS = (0.0, 1.0, 1.5, 2.0)


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage failures exit 1, not 2."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: usage: {message}\n")


def _seed_u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned "
                                         "64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _default_threads() -> int:
    raw = os.environ.get("TOPAMP_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="JSON",
                        help="path to the JSON config")
    common.add_argument("--out", metavar="DIR",
                        help="output directory (tables, figures, manifest)")
    common.add_argument("--seed", type=_seed_u64, default=None,
                        help="master seed for randomized commands")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="table format (default csv)")
    common.add_argument("--threads", type=_positive_int,
                        default=_default_threads(),
                        help="worker cap for grid/Monte Carlo commands "
                             "(default 1, or TOPAMP_THREADS)")

    plot = argparse.ArgumentParser(add_help=False)
    plot.add_argument("--no-plot", action="store_true",
                      help="skip the PNG render")

    parser = _Parser(prog="topamp",
                     description="dissipative-chain amplifier toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("model", parents=[common],
                       help="build or inspect a lattice model")
    p.add_argument("action", choices=("build", "inspect"))

    sub.add_parser("svd", parents=[common],
                   help="singular decomposition of the coupling matrix")

    p = sub.add_parser("steady", parents=[common],
                       help="steady-state coherences under a drive")
    p.add_argument("--method", choices=("svd", "direct", "edge", "ssh"),
                   default="svd")

    p = sub.add_parser("winding", parents=[common],
                       help="winding number of the chain's symbol curve")
    p.add_argument("--k-points", type=_positive_int, default=1024)

    p = sub.add_parser("classify", parents=[common],
                       help="symmetry class, winding, and gap report")
    p.add_argument("--k-points", type=_positive_int, default=1024)

    p = sub.add_parser("stability", parents=[common],
                       help="spectrum and stability verdict")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--analytic", action="store_true",
                   help="closed-form open-chain spectrum (chain configs)")
    g.add_argument("--numeric", action="store_true",
                   help="dense eigensolve (default)")

    p = sub.add_parser("lyapunov", parents=[common],
                       help="steady-state correlation matrix")
    p.add_argument("--solver", choices=("sylvester", "kron"),
                   default="sylvester")

    p = sub.add_parser("evolve", parents=[common],
                       help="time-integrate coherences or correlations")
    p.add_argument("--diag-only", action="store_true",
                   help="record only occupations (correlations)")

    sub.add_parser("fig1", parents=[common, plot],
                   help="edge-mode profile experiment")
    sub.add_parser("fig2", parents=[common, plot],
                   help="two-parameter phase diagram")
    sub.add_parser("fig3", parents=[common, plot],
                   help="disorder-robustness experiment")

    p = sub.add_parser("floquet", parents=[common],
                       help="two-array platform mapping and validation")
    p.add_argument("action", choices=("map", "check", "validate"))

    sub.add_parser("sweep", parents=[common],
                   help="phase-diagram grid without figure output")
    return parser


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds")


class _Run:
    """Output plumbing shared by all subcommands."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.started = _utcnow()
        self.t0 = time.monotonic()
        self.seeds: list = []
        self.out: Path | None = None
        if args.out:
            self.out = Path(args.out)
            self.out.mkdir(parents=True, exist_ok=True)
        self.config = None
        self.config_digest = None
        if args.config:
            text = Path(args.config).read_text(encoding="utf-8")
            try:
                self.config = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"malformed config: {exc}") from None
            if not isinstance(self.config, dict):
                raise ValidationError("config root must be a JSON object")
            self.config_digest = tio.sha256_hex(
                tio.canonical_json(self.config))

    def need_config(self) -> dict:
        if self.config is None:
            raise ValidationError("this command requires --config")
        return self.config

    def table(self, name: str, header, rows) -> None:
        if self.args.format == "json":
            text, ext = tio.table_to_json(header, rows), ".json"
        else:
            text, ext = tio.table_to_csv(header, rows), ".csv"
        if self.out is not None:
            (self.out / (name + ext)).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)

    def text(self, line: str) -> None:
        print(line)

    def json_doc(self, name: str, obj) -> None:
        text = tio.canonical_json(obj)
        if self.out is not None:
            (self.out / (name + ".json")).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)

    def png_path(self, name: str) -> Path | None:
        if getattr(self.args, "no_plot", False):
            return None
        base = self.out if self.out is not None else Path.cwd()
        return base / (name + ".png")

    def finish(self) -> None:
        if self.out is None:
            return
        manifest = tio.make_manifest(
            command="topamp " + " ".join(self.argv),
            config_digest=self.config_digest,
            seeds=self.seeds,
            started_utc=self.started,
            finished_utc=_utcnow(),
            wall_seconds=time.monotonic() - self.t0)
        (self.out / "manifest.json").write_text(
            tio.canonical_json(manifest.to_dict()), encoding="utf-8")


def _chain_params(cfg: dict) -> ChainParams:
    if "chain" not in cfg:
        raise ValidationError('this command needs a "chain" config')
    return tio.chain_params_from_dict(cfg["chain"])


def _model_and_h(cfg: dict):
    model = tio.model_from_dict(cfg)
    return model, coupling_matrix(model).h


# --- subcommand bodies ---


def _cmd_model(run: _Run) -> int:
    cfg = run.need_config()
    model = tio.model_from_dict(cfg)
    if run.args.action == "build":
        doc = tio.model_to_dict(model)
        run.json_doc("model", doc)
    else:
        kind = "chain" if model.chain is not None else "custom"
        doc = {"kind": kind, "n_sites": model.gamma_pump.shape[0],
               "digest": tio.model_digest(model)}
        if model.chain is not None:
            doc["chain"] = tio.chain_params_to_dict(model.chain)
            doc["kappa_a"] = 4.0 * model.chain.t_d - model.chain.gamma_p
        run.json_doc("inspect", doc)
    return 0


def _cmd_svd(run: _Run) -> int:
    _, h = _model_and_h(run.need_config())
    header, rows = tio.svd_table(svd(h))
    run.table("svd", header, rows)
    return 0


def _cmd_steady(run: _Run) -> int:
    cfg = run.need_config()
    method = run.args.method
    if method == "ssh":
        params = _chain_params(cfg)
        drive = tio.drive_from_config(cfg.get("drive"), params.n_sites)
        state = ssh_analytic_steady_state(params.t_d, params.gamma_p,
                                          params.n_sites, drive)
    else:
        model, h = _model_and_h(cfg)
        drive = tio.drive_from_config(cfg.get("drive"), h.shape[0])
        if method == "svd":
            state = steady_state_svd(h, drive)
        elif method == "direct":
            state = steady_state_direct(h, drive)
        else:
            state = edge_rank1(h, drive)
    header, rows = tio.steady_table(state)
    run.table("steady", header, rows)
    return 0


def _bloch_from_config(cfg: dict) -> BlochModel:
    if "bloch" in cfg:
        spec = cfg["bloch"]
        if (not isinstance(spec, dict) or "gamma_coeffs" not in spec
                or "g_coeffs" not in spec):
            raise ValidationError(
                'bloch config needs "gamma_coeffs" and "g_coeffs"')
        return BlochModel(gamma_coeffs=spec["gamma_coeffs"],
                          g_coeffs=spec["g_coeffs"])
    return bloch_from_chain(_chain_params(cfg))


def _cmd_winding(run: _Run) -> int:
    bloch = _bloch_from_config(run.need_config())
    run.text(str(winding_number(bloch, k_points=run.args.k_points)))
    return 0


def _cmd_classify(run: _Run) -> int:
    bloch = _bloch_from_config(run.need_config())
    run.json_doc("classify",
                 classification_report(bloch, k_points=run.args.k_points))
    return 0


def _cmd_stability(run: _Run) -> int:
    cfg = run.need_config()
    if run.args.analytic:
        report = spectrum_open_analytic(_chain_params(cfg))
    else:
        _, h = _model_and_h(cfg)
        report = spectrum_numeric(h)
    header, rows = tio.spectrum_table(report)
    run.table("spectrum", header, rows)
    if run.out is not None:
        run.text(tio.canonical_json(
            {"stable": report.stable, "max_real": report.max_real}).rstrip())
    return 0


def _cmd_lyapunov(run: _Run) -> int:
    model, h = _model_and_h(run.need_config())
    corr = lyapunov_steady(h, model.gamma_pump, method=run.args.solver)
    header, rows = tio.lyapunov_table(corr)
    run.table("lyapunov", header, rows)
    return 0


def _cmd_evolve(run: _Run) -> int:
    cfg = run.need_config()
    kind = cfg.get("kind", "coherences")
    if kind not in ("coherences", "correlations"):
        raise ValidationError('evolve kind must be "coherences" or '
                              '"correlations"')
    try:
        dt = float(cfg["dt"])
        t_final = float(cfg["t_final"])
    except KeyError as exc:
        raise ValidationError(f"evolve config missing {exc.args[0]}") from None
    model, h = _model_and_h(cfg)
    n = h.shape[0]
    if kind == "coherences":
        if run.args.diag_only:
            raise ValidationError("--diag-only applies to correlations")
        drive = tio.drive_from_config(cfg.get("drive"), n)
        if "alpha0" in cfg:
            alpha0 = tio.vector_from_json(cfg["alpha0"])
        else:
            alpha0 = np.zeros(n, dtype=complex)
        traj = evolve_coherences(h, drive, alpha0, dt, t_final)
        header, rows = tio.coherence_trajectory_table(traj)
    else:
        if "m0" in cfg:
            m0 = tio.matrix_from_json(cfg["m0"])
        else:
            m0 = np.zeros((n, n), dtype=complex)
        traj = evolve_correlations(h, model.gamma_pump, m0, dt, t_final,
                                   record_every=int(cfg.get("record_every", 1)))
        header, rows = tio.correlation_trajectory_table(
            traj, diag_only=run.args.diag_only)
    run.table("trajectory", header, rows)
    return 0


def _cmd_fig1(run: _Run) -> int:
    cfg = run.need_config()
    if run.out is None:
        raise ValidationError("fig1 writes multiple files; pass --out")
    params = _chain_params(cfg)
    gammas = [float(g) for g in cfg.get("inset_gamma_p", FIG1_INSET_GAMMAS)]
    profile = edge_profile_experiment(params)
    sweeps = [(g, edge_profile_experiment(replace(params, gamma_p=g)))
              for g in gammas]
    header, rows = tio.edge_profile_table(profile)
    run.table("fig1_profile", header, rows)
    all_rows = []
    for g, prof in sweeps:
        header_s, rows_s = tio.singular_value_table(prof, gamma_p=g)
        all_rows.extend(rows_s)
    run.table("fig1_singular_values", header_s, all_rows)
    target = run.png_path("fig1")
    if target is not None:
        from . import plotting
        plotting.render_edge_profile(profile, sweeps, str(target))
    return 0


def _axis_from_json(spec) -> tuple:
    if not isinstance(spec, dict) or "name" not in spec:
        raise ValidationError('axis specs are {"name": ..., "values": [...]}'
                              ' or {"name": ..., "lo": ..., "hi": ...'
                              '[, "num": ...]}')
    name = spec["name"]
    if "values" in spec:
        return (name, [float(v) for v in spec["values"]])
    try:
        lo, hi = float(spec["lo"]), float(spec["hi"])
    except KeyError:
        raise ValidationError(f'axis "{name}" needs "values" or '
                              '"lo"/"hi"') from None
    return (name, lo, hi, int(spec.get("num", DEFAULT_GRID)))


def _run_phase_diagram(run: _Run):
    cfg = run.need_config()
    try:
        axis1 = _axis_from_json(cfg["axis1"])
        axis2 = _axis_from_json(cfg["axis2"])
    except KeyError as exc:
        raise ValidationError(
            f"phase-diagram config missing {exc.args[0]}") from None
    names = {axis1[0], axis2[0]}
    fixed_cfg = cfg.get("fixed", {})
    if not isinstance(fixed_cfg, dict):
        raise ValidationError('"fixed" must be an object')
    values = {"t_c": 0.0, "t_d": 0.0, "gamma_p": 0.0, "phi": 0.0}
    for key, val in fixed_cfg.items():
        if key not in values:
            raise ValidationError(f'unknown fixed parameter "{key}"')
        values[key] = float(val)
    missing = (set(values) - names) - set(fixed_cfg)
    if missing:
        raise ValidationError(
            "fixed config missing " + ", ".join(sorted(missing)))
    n_sites = int(cfg.get("n_sites", 100))
    fixed = ChainParams(n_sites=max(n_sites, 2), **values)
    return phase_diagram(axis1, axis2, fixed, n_sites=n_sites,
                         k_points=int(cfg.get("k_points", 1024)),
                         threads=run.args.threads)


def _cmd_fig2(run: _Run) -> int:
    if run.out is None:
        raise ValidationError("fig2 writes multiple files; pass --out")
    diagram = _run_phase_diagram(run)
    header, rows = tio.phase_diagram_table(diagram)
    run.table("fig2_grid", header, rows)
    header, rows = tio.overlay_table(diagram)
    run.table("fig2_overlays", header, rows)
    target = run.png_path("fig2")
    if target is not None:
        from . import plotting
        plotting.render_phase_diagram(diagram, str(target))
    return 0


def _cmd_sweep(run: _Run) -> int:
    diagram = _run_phase_diagram(run)
    header, rows = tio.phase_diagram_table(diagram)
    run.table("sweep_grid", header, rows)
    if run.out is not None:
        header, rows = tio.overlay_table(diagram)
        run.table("sweep_overlays", header, rows)
    return 0


def _cmd_fig3(run: _Run) -> int:
    cfg = run.need_config()
    if run.out is None:
        raise ValidationError("fig3 writes multiple files; pass --out")
    base_cfg = cfg.get("base")
    if not isinstance(base_cfg, dict):
        raise ValidationError('fig3 config needs a "base" chain object')
    n_list = [int(n) for n in cfg.get("n_list", (25, 50, 100))]
    sigmas = cfg.get("sigmas")
    if sigmas is None:
        raise ValidationError('fig3 config needs a "sigmas" list')
    base = tio.chain_params_from_dict(
        {"n_sites": n_list[0], **base_cfg})
    master_seed = run.args.seed
    if master_seed is None:
        master_seed = int(cfg.get("master_seed", 0))
    run.seeds = [master_seed]
    realizations = cfg.get("realizations")
    stats = disorder_experiment(
        base, sigmas, n_list, master_seed,
        realizations=None if realizations is None else int(realizations),
        threads=run.args.threads)
    header, rows = tio.disorder_table(stats)
    run.table("fig3_disorder", header, rows)
    target = run.png_path("fig3")
    if target is not None:
        from . import plotting
        plotting.render_disorder(stats, str(target))
    return 0


def _floquet_params(cfg: dict) -> FloquetParams:
    spec = cfg.get("floquet")
    if not isinstance(spec, dict):
        raise ValidationError('floquet commands need a "floquet" object')
    required = ("omega", "delta_omega", "g0", "phi_d", "gbar0",
                "kappa_a", "kappa_b")
    missing = [k for k in required if k not in spec]
    if missing:
        raise ValidationError("floquet config missing " + ", ".join(missing))
    extra = spec.keys() - set(required)
    if extra:
        raise ValidationError(
            "floquet config has unknown keys " + ", ".join(sorted(extra)))
    return FloquetParams(**{k: float(spec[k]) for k in required})


def _cmd_floquet(run: _Run) -> int:
    cfg = run.need_config()
    fp = _floquet_params(cfg)
    action = run.args.action
    if action == "map":
        chain = map_params(fp, int(cfg.get("n_sites", 2)))
        run.json_doc("floquet_map", tio.chain_params_to_dict(chain))
        return 0
    if action == "check":
        report = check_hierarchy(fp)
        run.json_doc("floquet_check", {
            "ratios": {k: v for k, v in report.ratios.items()},
            "passed": report.passed,
            "degenerate": report.degenerate,
            "min_ratio": report.min_ratio})
        return 0
    n_sites = int(cfg.get("n_sites", 10))
    drive_cfg = cfg.get("drive", {"site": 1})
    drive = tio.drive_from_config(drive_cfg, n_sites)
    factors = tuple(int(f) for f in cfg.get("factors", (1, 2, 4, 8)))
    result = validate_elimination(fp, n_sites, drive, factors=factors)
    run.json_doc("floquet_validate",
                 {"error": result.error, "series": result.series})
    return 0


_COMMANDS = {
    "model": _cmd_model,
    "svd": _cmd_svd,
    "steady": _cmd_steady,
    "winding": _cmd_winding,
    "classify": _cmd_classify,
    "stability": _cmd_stability,
    "lyapunov": _cmd_lyapunov,
    "evolve": _cmd_evolve,
    "fig1": _cmd_fig1,
    "fig2": _cmd_fig2,
    "fig3": _cmd_fig3,
    "floquet": _cmd_floquet,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        run = _Run(args, argv)
        code = _COMMANDS[args.command](run)
        run.finish()
        return code
    except ValidationError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except TopampError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: missing-file: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
