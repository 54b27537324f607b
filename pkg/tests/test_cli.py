"""Command-line surface: configs in, delimited tables and figures out."""

import json
import math

import numpy as np
import pytest

from topamp.cli import main


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def chain_cfg(**kw):
    chain = {"t_c": 1.0, "t_d": 1.0, "gamma_p": 0.5, "phi": math.pi / 2,
             "n_sites": 8}
    chain.update(kw)
    return {"chain": chain}


def test_version_flag(capsys):
    assert main(["--version"]) == 0
    out = capsys.readouterr().out.strip()
    assert out and all(part.isdigit() for part in out.split("."))


def test_usage_error_exits_1(capsys):
    assert main(["bogus-command"]) != 0
    assert main([]) != 0


def test_missing_config_file(capsys):
    code = main(["svd", "--config", "/nonexistent/c.json"])
    assert code == 1
    assert "error: missing-file:" in capsys.readouterr().err


def test_malformed_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["svd", "--config", str(bad)]) == 1
    assert "error: invalid-input:" in capsys.readouterr().err


def test_command_requires_config(capsys):
    assert main(["svd"]) == 1
    assert "invalid-input" in capsys.readouterr().err


def test_model_build_round_trip(tmp_path, capsys):
    cfg = write_config(tmp_path, chain_cfg())
    assert main(["model", "build", "--config", cfg]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["chain"]["n_sites"] == 8


def test_model_inspect(tmp_path, capsys):
    cfg = write_config(tmp_path, chain_cfg())
    assert main(["model", "inspect", "--config", cfg]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["kind"] == "chain"
    assert doc["n_sites"] == 8
    assert doc["kappa_a"] == pytest.approx(3.5)
    assert len(doc["digest"]) == 64


def test_svd_stdout_csv(tmp_path, capsys):
    cfg = write_config(tmp_path, chain_cfg(n_sites=4))
    assert main(["svd", "--config", cfg]) == 0
    out = capsys.readouterr().out
    lines = out.split("\r\n")
    assert lines[0] == "n,s_n,re_u,im_u,re_v,im_v"
    assert len(lines) == 18  # header + 16 rows + trailing empty


def test_svd_json_format(tmp_path, capsys):
    cfg = write_config(tmp_path, chain_cfg(n_sites=3))
    assert main(["svd", "--config", cfg, "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["columns"][0] == "n"
    assert len(doc["rows"]) == 9


def test_svd_out_dir_and_manifest(tmp_path):
    cfg = write_config(tmp_path, chain_cfg(n_sites=4))
    out = tmp_path / "run"
    assert main(["svd", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "svd.csv").exists()
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"].startswith("topamp svd")
    assert man["prng"] == "philox-seedsequence-v1"
    assert man["config_digest"]
    # data files carry no timestamps; the manifest does
    assert "T" in man["started_utc"]
    assert man["wall_seconds"] >= 0


@pytest.mark.filterwarnings("ignore::UserWarning")
def test_steady_methods(tmp_path, capsys):
    payload = chain_cfg(gamma_p=0.2, n_sites=12)
    payload["drive"] = {"site": 1}
    cfg = write_config(tmp_path, payload)
    outputs = {}
    for method in ("svd", "direct", "edge", "ssh"):
        assert main(["steady", "--config", cfg, "--method", method]) == 0
        lines = capsys.readouterr().out.strip().split("\r\n")
        assert lines[0] == "j,re_alpha,im_alpha,log10_abs"
        outputs[method] = [line.split(",") for line in lines[1:]]
    assert all(len(rows) == 12 for rows in outputs.values())
    # exact routes agree to serialization precision
    for a, b in zip(outputs["svd"], outputs["direct"]):
        assert float(a[1]) == pytest.approx(float(b[1]), abs=1e-10)
    # closed form tracks the magnitude at the output site
    mag_ssh = 10.0 ** float(outputs["ssh"][-1][3])
    mag_dir = 10.0 ** float(outputs["direct"][-1][3])
    assert mag_ssh == pytest.approx(mag_dir, rel=0.4)


def test_steady_unstable_model_exit_2(tmp_path, capsys):
    payload = {"custom": {
        "gamma_pump": [[[2.0, 0.0]]],
        "gamma_decay": [[[0.5, 0.0]]],
        "coherent": [[[0.0, 0.0]]]}}
    cfg = write_config(tmp_path, payload)
    code = main(["lyapunov", "--config", cfg])
    assert code == 2
    assert "error: unstable-no-steady-state:" in capsys.readouterr().err


def test_winding_prints_integer(tmp_path, capsys):
    cfg = write_config(tmp_path, chain_cfg(gamma_p=1.0))
    assert main(["winding", "--config", cfg]) == 0
    assert capsys.readouterr().out.strip() == "1"
    cfg = write_config(tmp_path, chain_cfg(gamma_p=-1.0), name="c2.json")
    assert main(["winding", "--config", cfg]) == 0
    assert capsys.readouterr().out.strip() == "0"


def test_winding_gapless_exit_2(tmp_path, capsys):
    cfg = write_config(tmp_path, chain_cfg(gamma_p=0.0))
    assert main(["winding", "--config", cfg]) == 2
    assert "error: gapless:" in capsys.readouterr().err


def test_classify_bloch_config(tmp_path, capsys):
    payload = {"bloch": {"gamma_coeffs": [],
                         "g_coeffs": [[1, 0.0, 1.0]]}}
    cfg = write_config(tmp_path, payload)
    assert main(["classify", "--config", cfg]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["class"] == "DIII"


def test_classify_chain(tmp_path, capsys):
    cfg = write_config(tmp_path, chain_cfg(gamma_p=1.0))
    assert main(["classify", "--config", cfg]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["class"] == "BDI"
    assert doc["winding"] == 1
    assert doc["theta"] == pytest.approx(0.0, abs=1e-9)


def test_stability_analytic_vs_numeric(tmp_path, capsys):
    cfg = write_config(tmp_path, chain_cfg(gamma_p=0.2, n_sites=20))
    assert main(["stability", "--config", cfg, "--analytic"]) == 0
    a = capsys.readouterr().out
    assert main(["stability", "--config", cfg, "--numeric"]) == 0
    b = capsys.readouterr().out
    assert a.split("\r\n")[0] == "n,re_lambda,im_lambda"
    re_a = sorted(float(line.split(",")[1]) for line in a.strip().split("\r\n")[1:])
    re_b = sorted(float(line.split(",")[1]) for line in b.strip().split("\r\n")[1:])
    assert np.allclose(re_a, re_b, atol=1e-8)


def test_stability_flags_are_exclusive(tmp_path, capsys):
    cfg = write_config(tmp_path, chain_cfg())
    assert main(["stability", "--config", cfg,
                 "--analytic", "--numeric"]) == 1


def test_stability_verdict_file(tmp_path):
    cfg = write_config(tmp_path, chain_cfg(gamma_p=0.2, n_sites=20))
    out = tmp_path / "stab"
    assert main(["stability", "--config", cfg, "--numeric",
                 "--out", str(out)]) == 0
    assert (out / "spectrum.csv").exists()


def test_lyapunov_solvers_agree(tmp_path, capsys):
    cfg = write_config(tmp_path, chain_cfg(gamma_p=0.2, n_sites=5))
    vals = {}
    for solver in ("sylvester", "kron"):
        assert main(["lyapunov", "--config", cfg, "--solver", solver]) == 0
        lines = capsys.readouterr().out.strip().split("\r\n")[1:]
        vals[solver] = [float(line.split(",")[2]) for line in lines]
    assert np.allclose(vals["sylvester"], vals["kron"], atol=1e-10)


def test_evolve_coherences(tmp_path, capsys):
    payload = chain_cfg(gamma_p=0.2, n_sites=3)
    payload["drive"] = {"site": 1}
    payload["dt"] = 0.05
    payload["t_final"] = 1.0
    cfg = write_config(tmp_path, payload)
    assert main(["evolve", "--config", cfg]) == 0
    lines = capsys.readouterr().out.strip().split("\r\n")
    assert lines[0].split(",")[:3] == ["t", "re_a1", "im_a1"]
    assert len(lines) == 22  # header + 21 samples
    assert float(lines[-1].split(",")[0]) == pytest.approx(1.0)


def test_evolve_correlations_diag_only(tmp_path, capsys):
    payload = chain_cfg(gamma_p=0.2, n_sites=3)
    payload["kind"] = "correlations"
    payload["dt"] = 0.05
    payload["t_final"] = 0.5
    cfg = write_config(tmp_path, payload)
    assert main(["evolve", "--config", cfg, "--diag-only"]) == 0
    lines = capsys.readouterr().out.strip().split("\r\n")
    assert lines[0] == "t,n1,n2,n3"
    # occupations grow from vacuum under pumping
    assert float(lines[-1].split(",")[1]) > 0


def test_evolve_diag_only_rejected_for_coherences(tmp_path, capsys):
    payload = chain_cfg(n_sites=3)
    payload["dt"] = 0.05
    payload["t_final"] = 0.5
    cfg = write_config(tmp_path, payload)
    assert main(["evolve", "--config", cfg, "--diag-only"]) == 1


def test_floquet_map(tmp_path, capsys):
    payload = {"floquet": {"omega": 5800.0, "delta_omega": 35.0, "g0": 4.0,
                           "phi_d": math.pi / 2, "gbar0": 4.0,
                           "kappa_a": 4.0, "kappa_b": 40.0},
               "n_sites": 6}
    cfg = write_config(tmp_path, payload)
    assert main(["floquet", "map", "--config", cfg]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["t_c"] == pytest.approx(2.0)
    assert doc["t_d"] == pytest.approx(0.1)
    assert doc["gamma_p"] == pytest.approx(-3.6)
    assert doc["n_sites"] == 6


def test_floquet_check(tmp_path, capsys):
    payload = {"floquet": {"omega": 5800.0, "delta_omega": 35.0, "g0": 4.0,
                           "phi_d": 0.0, "gbar0": 4.0, "kappa_a": 4.0,
                           "kappa_b": 40.0}}
    cfg = write_config(tmp_path, payload)
    assert main(["floquet", "check", "--config", cfg]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["passed"] is True
    assert doc["ratios"]["kappa_b/gbar0"] == pytest.approx(10.0)
    assert doc["min_ratio"] == 5.0


def test_floquet_validate(tmp_path, capsys):
    payload = {"floquet": {"omega": 5800.0, "delta_omega": 35.0, "g0": 0.5,
                           "phi_d": math.pi / 2, "gbar0": 5.0,
                           "kappa_a": 0.8, "kappa_b": 25.0},
               "n_sites": 6, "factors": [1, 2]}
    cfg = write_config(tmp_path, payload)
    assert main(["floquet", "validate", "--config", cfg]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["series"][1]["error"] < doc["series"][0]["error"]


def test_sweep_to_files(tmp_path):
    payload = {"axis1": {"name": "gamma_p", "lo": 0.0, "hi": 2.0, "num": 3},
               "axis2": {"name": "phi", "lo": 0.5, "hi": 2.5, "num": 3},
               "fixed": {"t_c": 1.0, "t_d": 1.0},
               "n_sites": 10, "k_points": 128}
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    grid = (out / "sweep_grid.csv").read_bytes().decode("utf-8")
    assert grid.startswith("gamma_p,phi,delta_s,winding,stable,max_real")
    assert len(grid.strip().split("\r\n")) == 10
    assert (out / "sweep_overlays.csv").exists()
    assert (out / "manifest.json").exists()


def test_sweep_rejects_unknown_axis(tmp_path, capsys):
    payload = {"axis1": {"name": "volume", "lo": 0.0, "hi": 1.0, "num": 2},
               "axis2": {"name": "phi", "lo": 0.5, "hi": 2.5, "num": 2},
               "fixed": {"t_c": 1.0, "t_d": 1.0, "gamma_p": 1.0}}
    cfg = write_config(tmp_path, payload)
    assert main(["sweep", "--config", cfg]) == 1


def test_fig1_requires_out(tmp_path, capsys):
    cfg = write_config(tmp_path, chain_cfg())
    assert main(["fig1", "--config", cfg]) == 1
    assert "invalid-input" in capsys.readouterr().err


def test_fig1_renders_data_and_png(tmp_path):
    cfg = write_config(tmp_path, chain_cfg(gamma_p=1.0, phi=math.pi / 3,
                                           n_sites=16))
    out = tmp_path / "fig1"
    assert main(["fig1", "--config", cfg, "--out", str(out)]) == 0
    assert (out / "fig1_profile.csv").exists()
    sv = (out / "fig1_singular_values.csv").read_text()
    assert sv.startswith("gamma_p,n,s_n")
    png = (out / "fig1.png").read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_fig2_no_plot_skips_png(tmp_path):
    payload = {"axis1": {"name": "gamma_p", "lo": 0.0, "hi": 2.0, "num": 3},
               "axis2": {"name": "phi", "lo": 0.5, "hi": 2.5, "num": 3},
               "fixed": {"t_c": 1.0, "t_d": 1.0},
               "n_sites": 10, "k_points": 128}
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "fig2"
    assert main(["fig2", "--config", cfg, "--out", str(out), "--no-plot"]) == 0
    assert (out / "fig2_grid.csv").exists()
    assert (out / "fig2_overlays.csv").exists()
    assert not (out / "fig2.png").exists()


def test_fig3_seeded_and_deterministic(tmp_path):
    payload = {"base": {"t_c": 1.0, "t_d": 1.0, "gamma_p": 1.0,
                        "phi": math.pi / 2},
               "sigmas": [0.0, 0.5], "n_list": [10], "realizations": 20}
    cfg = write_config(tmp_path, payload)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    for out in (out_a, out_b):
        assert main(["fig3", "--config", cfg, "--out", str(out), "--seed",
                     "12", "--no-plot"]) == 0
    text_a = (out_a / "fig3_disorder.csv").read_text()
    assert text_a == (out_b / "fig3_disorder.csv").read_text()
    man = json.loads((out_a / "manifest.json").read_text())
    assert man["seeds"] == [12]
    out_c = tmp_path / "c"
    assert main(["fig3", "--config", cfg, "--out", str(out_c), "--seed",
                 "13", "--no-plot"]) == 0
    assert text_a != (out_c / "fig3_disorder.csv").read_text()


def test_fig3_requires_sigmas(tmp_path, capsys):
    payload = {"base": {"t_c": 1.0, "t_d": 1.0, "gamma_p": 1.0,
                        "phi": math.pi / 2}}
    cfg = write_config(tmp_path, payload)
    out = tmp_path / "f3"
    assert main(["fig3", "--config", cfg, "--out", str(out)]) == 1


def test_identical_runs_produce_identical_bytes(tmp_path):
    # no timestamps inside data files: reruns are byte-identical
    cfg = write_config(tmp_path, chain_cfg(n_sites=6))
    out_a, out_b = tmp_path / "ra", tmp_path / "rb"
    for out in (out_a, out_b):
        assert main(["svd", "--config", cfg, "--out", str(out)]) == 0
    assert (out_a / "svd.csv").read_bytes() == (out_b / "svd.csv").read_bytes()
