import json

import pytest

from twistorbf.cli import main
from twistorbf.suites import SuiteConfig, run_suite


def run_cli(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_cohomology_full_range(capsys):
    code, rep = run_cli(capsys, "--suite", "cohomology")
    assert code == 0
    assert rep["schema"] == 1
    assert len(rep["checks"]) == 17
    assert rep["pass"] is True
    assert all(c["pass"] for c in rep["checks"])


def test_kernel_single_twist(capsys):
    # quadrature order 64; invariance, holomorphy and operator agreement
    code, rep = run_cli(capsys, "--suite", "kernel", "--n-range=-4..-4")
    assert code == 0
    names = {c["name"].rsplit("-n", 1)[0] for c in rep["checks"]}
    assert {"kernel-invariance", "kernel-holomorphy",
            "kernel-vs-spectral"} <= names
    agree = [c for c in rep["checks"]
             if c["name"].startswith("kernel-vs-spectral")]
    assert agree[0]["fitted_sign"] == 1.0


def test_invariance_identity_exact(capsys):
    code, rep = run_cli(capsys, "--suite", "invariance", "--n-range=0..1")
    assert code == 0
    idents = [c for c in rep["checks"] if "identity" in c["name"]]
    assert len(idents) == 2
    assert all(c["residual"] == 0.0 and c["exact"] for c in idents)


def test_failure_exit_code_and_report(capsys):
    # an absurd tolerance forces failures but the report is still emitted
    code, rep = run_cli(capsys, "--suite", "invariance", "--n-range=0..0",
                        "--tol", "1e-30")
    assert code == 1
    assert rep["pass"] is False
    assert any(not c["pass"] for c in rep["checks"])
    # exact checks are not subject to the override
    assert all(c["pass"] for c in rep["checks"] if c.get("exact"))


def test_unknown_suite_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["--suite", "nonsense"])
    assert exc.value.code == 2


def test_bad_n_range_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["--suite", "cohomology", "--n-range", "3..x"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["--suite", "cohomology", "--n-range=4..1"])
    assert exc.value.code == 2


def test_negative_config_rejected():
    with pytest.raises(SystemExit) as exc:
        main(["--suite", "cohomology", "--truncation", "-3"])
    assert exc.value.code == 2


def test_reports_identical_across_runs(capsys):
    _, rep1 = run_cli(capsys, "--suite", "cohomology", "--n-range=-3..3")
    _, rep2 = run_cli(capsys, "--suite", "cohomology", "--n-range=-3..3")
    for rep in (rep1, rep2):
        del rep["wall_time"]
    assert rep1 == rep2


def test_parallel_matches_serial(capsys):
    _, serial = run_cli(capsys, "--suite", "invariance", "--n-range=-1..1")
    _, par = run_cli(capsys, "--suite", "invariance", "--n-range=-1..1",
                     "--parallel")
    assert serial["checks"] == par["checks"]


def test_out_file(tmp_path, capsys):
    path = tmp_path / "report.json"
    code = main(["--suite", "cohomology", "--n-range=0..2",
                 "--out", str(path)])
    assert code == 0
    assert capsys.readouterr().out == ""
    rep = json.loads(path.read_text())
    assert rep["pass"] is True
    assert rep["config"]["n_range"] == [0, 2]


def test_run_suite_rejects_bad_config():
    with pytest.raises(ValueError):
        run_suite(SuiteConfig(suite="bogus"))
    with pytest.raises(ValueError):
        run_suite(SuiteConfig(suite="bv", rank=0))
