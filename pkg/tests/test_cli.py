"""End-to-end checks of the command-line surface.

In-process main(argv) calls with capsys keep most cases fast; determinism
and exit-code behavior go through a real subprocess.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

from wignerweyl.cli import RunConfig, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    assert code == 0, captured.err
    return json.loads(captured.out)


def run_cli_err(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    assert code == 2
    payload = json.loads(captured.err)
    assert set(payload) == {"error", "context"}
    return payload


def test_algebra_reports_zero_residual(capsys):
    out = run_cli(capsys, "algebra", "--system", "su:3:1")
    assert out["dimension"] == 3
    assert out["generator_count"] == 8
    assert out["orthogonality_residual"] < 1e-12
    assert out["generators"][0]["dim"] == [3, 3]


def test_kernel_point_evaluation(capsys):
    out = run_cli(
        capsys, "kernel", "--system", "su:2:1", "--side", "wigner",
        "--point", "0.4,0.7",
    )
    assert out["hermiticity_defect"] < 1e-12
    assert out["matrix"]["dim"] == [2, 2]


def test_wigner_sample_and_reconstruct_roundtrip(tmp_path, capsys):
    csv = tmp_path / "f.csv"
    out = run_cli(
        capsys, "wigner", "--system", "su:2:1",
        "--state", "spincoherent:0.3,0.5", "--out", str(csv),
    )
    assert out["integral_residual"] < 1e-10
    out2 = run_cli(
        capsys, "reconstruct", "--system", "su:2:1", "--side", "wigner",
        "--infile", str(csv),
    )
    assert out2["roundtrip_residual"] < 1e-10
    assert out2["hermiticity_defect"] < 1e-10
    A = np.asarray(out2["matrix"]["re"]) + 1j * np.asarray(out2["matrix"]["im"])
    assert abs(np.trace(A) - 1.0) < 1e-10


def test_weyl_sample_reports_origin_residual(capsys):
    out = run_cli(
        capsys, "weyl", "--system", "su:2:1", "--state", "spincoherent:0.4,0.3",
    )
    assert out["origin_residual"] < 1e-10


def test_verify_report(capsys):
    out = run_cli(capsys, "verify", "--system", "su:2:1", "--side", "wigner")
    assert out["passed"] is True
    assert all(c["passed"] for c in out["conditions"])


def test_partition_and_mean_print_residuals(capsys):
    out = run_cli(
        capsys, "partition", "--system", "su:2:1",
        "--beta", "0.7", "--field", "0.2,0.1,0.9",
    )
    assert out["residual"] < 1e-8
    out = run_cli(
        capsys, "mean", "--system", "su:2:1",
        "--beta", "0.7", "--field", "0,0,1", "--observable", "vec:1,0,1",
    )
    assert out["residual"] < 1e-8


def test_freeenergy(capsys):
    out = run_cli(
        capsys, "freeenergy", "--system", "su:2:1",
        "--beta", "2.0", "--field", "0,0,0.5",
    )
    assert out["residual"] < 1e-9


def test_moments_residual(capsys):
    out = run_cli(
        capsys, "moments", "--system", "su:2:1",
        "--state", "spincoherent:0.2,0.4", "--orders", "0,0,1",
    )
    assert out["axes"] == ["phi1", "theta1", "Phi1"]
    assert out["residual"] < 1e-8


def test_moments_hw_symmetric_order(capsys):
    out = run_cli(
        capsys, "moments", "--system", "hw:16",
        "--state", "coherent:0.4+0.2j", "--orders", "1,1",
    )
    assert out["residual"] < 1e-7


def test_autocorr_r0_is_trace(capsys):
    out = run_cli(
        capsys, "autocorr", "--system", "su:2:1", "--state", "random:7",
        "--axis", "theta1", "--samples", "0:1.5:7",
    )
    assert out["r0_trace_residual"] < 1e-10
    assert len(out["values"]) == 7


def test_crosscorr_zero_shift_oracle(capsys):
    out = run_cli(
        capsys, "crosscorr", "--system", "su:2:1",
        "--state", "random:4", "--side", "wigner",
    )
    assert out["shift"] == "zero"
    assert out["residual"] < 1e-10


def test_evolve_reports_drifts(capsys):
    out = run_cli(
        capsys, "evolve", "--system", "su:2:1", "--state", "spincoherent:0.1,0.6",
        "--field", "0,0,1", "--t-final", "0.2", "--dt", "0.01",
    )
    assert out["trace_drift"] < 1e-10
    assert out["propagator_sup_residual"] < 1e-6


def test_figure_data_hw_cat(tmp_path, capsys):
    csv = tmp_path / "cat.csv"
    out = run_cli(
        capsys, "figure-data", "--preset", "hw-cat", "--system", "hw:24",
        "--grid-res", "41", "--radius", "4.5", "--out", str(csv),
    )
    assert out["origin_residual"] < 1e-6
    lines = csv.read_text().splitlines()
    assert lines[0] == "re,im,value_re,value_im,magnitude,phase"
    assert len(lines) == 1 + 41 * 41


def test_figure_data_ghz5_rows_match(tmp_path, capsys):
    """Equal-angle GHZ slice: tensor-product route equals the Dicke route."""
    a = tmp_path / "dicke.csv"
    b = tmp_path / "tensor.csv"
    run_cli(capsys, "figure-data", "--preset", "ghz5-dicke",
            "--side", "weyl", "--grid-res", "7", "--out", str(a))
    run_cli(capsys, "figure-data", "--preset", "ghz5-equal-angle",
            "--side", "weyl", "--grid-res", "7", "--out", str(b))
    va = np.loadtxt(a, delimiter=",", skiprows=1)
    vb = np.loadtxt(b, delimiter=",", skiprows=1)
    assert va.shape == vb.shape
    assert np.max(np.abs(va[:, 4:6] - vb[:, 4:6])) < 1e-10


def test_config_file_then_flags_precedence(tmp_path, capsys):
    cfgfile = tmp_path / "run.json"
    cfgfile.write_text(json.dumps({"system": "su:2:1", "beta": 0.3, "field": "0,0,1"}))
    out = run_cli(capsys, "partition", "--config", str(cfgfile))
    assert out["beta"] == 0.3
    # explicit flag wins over the config value
    out = run_cli(capsys, "partition", "--config", str(cfgfile), "--beta", "1.1")
    assert out["beta"] == 1.1


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfgfile = tmp_path / "bad.json"
    cfgfile.write_text(json.dumps({"system": "su:2:1", "betaa": 0.3}))
    payload = run_cli_err(capsys, "partition", "--config", str(cfgfile))
    assert "betaa" in payload["error"]
    assert payload["context"]["type"] == "ValueError"


def test_error_payload_on_bad_system(capsys):
    payload = run_cli_err(
        capsys, "wigner", "--system", "su:1:1", "--state", "fock:0",
    )
    assert payload["context"]["command"] == "wigner"


def test_runconfig_roundtrip_rejects_unknown():
    cfg = RunConfig(command="partition", system="su:2:1", beta=0.5)
    assert RunConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        RunConfig.from_dict({"command": "partition", "nope": 1})


def test_subprocess_csv_is_byte_deterministic(tmp_path):
    """Same invocation twice gives byte-identical output files."""
    outs = []
    for name in ("a.csv", "b.csv"):
        p = tmp_path / name
        r = subprocess.run(
            [sys.executable, "-c", "import sys; from wignerweyl.cli import main; sys.exit(main())",
             "wigner", "--system", "hw:8", "--state", "hwcat:1.2|-1.2",
             "--grid-res", "40", "--radius", "3.5", "--out", str(p)],
            capture_output=True, text=True,
        )
        assert r.returncode == 0, r.stderr
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_subprocess_error_exit_code():
    r = subprocess.run(
        [sys.executable, "-c", "import sys; from wignerweyl.cli import main; sys.exit(main())",
         "kernel", "--system", "hw:8", "--side", "wigner", "--point", "1.0"],
        capture_output=True, text=True,
    )
    assert r.returncode == 2
    payload = json.loads(r.stderr)
    assert "re,im" in payload["error"]
