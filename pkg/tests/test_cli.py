import json
from pathlib import Path
from typing import List

import pytest

from cosetexpanders import _cli
from cosetexpanders._cli import Run, RunConfig, main, run
from cosetexpanders._exceptions import InfeasibleParametersError
from cosetexpanders._matrices import DEFAULT_CAP

SMALL = ["--p", "2", "--s", "1", "--d", "3"]


def certificate(out: Path, stem: str) -> dict:
    return json.loads((out / f"{stem}.json").read_text())


def test_build_writes_certificate_and_timings(
    tmp_path: Path, capsys: pytest.CaptureFixture
) -> None:
    assert main(["build", *SMALL, "--out", str(tmp_path)]) == 0
    cert = certificate(tmp_path, "build-p2-s1-d3")
    assert cert["pass"] is True
    assert cert["command"] == "build"
    assert "out" not in cert["config"]
    assert "build" in json.loads((tmp_path / "timings.json").read_text())
    assert capsys.readouterr().out.splitlines()[-1] == "PASS"


def test_certificates_are_deterministic(tmp_path: Path) -> None:
    for name in ("first", "second"):
        assert main(["build", *SMALL, "--out", str(tmp_path / name)]) == 0
    first = (tmp_path / "first" / "build-p2-s1-d3.json").read_text()
    second = (tmp_path / "second" / "build-p2-s1-d3.json").read_text()
    assert first == second


@pytest.mark.parametrize("command", ["verify-groups", "verify-complex"])
def test_verification_over_f2(tmp_path: Path, command: str) -> None:
    assert main([command, *SMALL, "--out", str(tmp_path)]) == 0
    assert certificate(tmp_path, f"{command}-p2-s1-d3")["pass"] is True


@pytest.mark.parametrize(
    "argv",
    [
        ["build", "--p", "4"],
        ["build", "--d", "1"],
        ["build", "--d", "3", "--k", "3"],
        ["build", "--tol", "0"],
        ["search"],
    ],
)
def test_invalid_parameters_exit_through_the_parser(
    tmp_path: Path, argv: List[str]
) -> None:
    with pytest.raises(SystemExit) as excinfo:
        main([*argv, "--out", str(tmp_path)])
    assert excinfo.value.code == 2


def test_large_cap_needs_opt_in(tmp_path: Path) -> None:
    argv = ["build", *SMALL, "--cap", str(DEFAULT_CAP + 1), "--out", str(tmp_path)]
    assert main(argv) == 3
    assert main([*argv, "--allow-large"]) == 0


def test_export_needs_a_cached_group(tmp_path: Path) -> None:
    argv = ["export", *SMALL, "--out", str(tmp_path), "--cache", str(tmp_path / "c")]
    assert main(argv) == 2
    assert not (tmp_path / "export-p2-s1-d3.json").exists()


def test_export_after_build(tmp_path: Path) -> None:
    cache = ["--cache", str(tmp_path / "cache")]
    out = tmp_path / "out"
    assert main(["build", *SMALL, "--out", str(out), *cache]) == 0
    assert main(["export", *SMALL, "--out", str(out), *cache, "--k", "2"]) == 0
    faces = (out / "complex-p2-s1-d3.faces").read_text().splitlines()
    assert len(faces) == 168
    assert main(["export", *SMALL, "--out", str(out), *cache, "--what", "group"]) == 0
    assert len((out / "group-p2-s1-d3.txt").read_text().splitlines()) == 168


def test_run_config_validation() -> None:
    with pytest.raises(ValueError):
        RunConfig("build", solver="qr")
    with pytest.raises(InfeasibleParametersError):
        RunConfig("build", cap=DEFAULT_CAP + 1)
    config = RunConfig("spectra", p=3, s=2, d=3)
    assert config.stem == "spectra-p3-s2-d3"
    assert set(config.echo()) >= {"p", "s", "d", "tol", "solver"}


def test_run_returns_records(tmp_path: Path) -> None:
    certificate_, timer = run(RunConfig("build", s=1, out=tmp_path))
    assert certificate_.passed
    assert "build" in timer.timings


def test_stage_errors_fail_the_certificate(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    def broken(state: Run) -> None:
        raise ValueError("isolated vertex in link")

    monkeypatch.setitem(_cli.STAGES, "build", broken)
    assert main(["build", *SMALL, "--out", str(tmp_path)]) == 2
    cert = certificate(tmp_path, "build-p2-s1-d3")
    assert cert["pass"] is False
    (check,) = cert["checks"]
    assert check["name"] == "stage build"
    assert check["detail"] == "isolated vertex in link"


def test_infeasible_stage_keeps_its_exit_code(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    def too_large(state: Run) -> None:
        raise InfeasibleParametersError("closure cap reached")

    monkeypatch.setitem(_cli.STAGES, "build", too_large)
    assert main(["build", *SMALL, "--out", str(tmp_path)]) == 3


def test_spectra_leaves_the_shared_analyzer_unfitted(tmp_path: Path) -> None:
    state = Run(RunConfig("spectra", s=1, out=tmp_path))
    _cli._spectra(state)
    assert not hasattr(state.analyzer, "lambda_2_")
    assert state.certificate.passed


@pytest.mark.slow
@pytest.mark.parametrize("command", ["spectra", "affine", "trickle", "report-all"])
def test_pipelines_over_f2_t2(tmp_path: Path, command: str) -> None:
    assert main([command, "--out", str(tmp_path)]) == 0
    assert certificate(tmp_path, f"{command}-p2-s2-d3")["pass"] is True
