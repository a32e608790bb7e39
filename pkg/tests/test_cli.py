import json
import logging

import pandas as pd
import pytest

from evsense.cli.common import resolve_sensor_config
from evsense.cli.main import build_parser, collect_overrides, main
from evsense.exceptions import InvalidParameterError
from evsense.logging_config import configure_logging, resolve_level
from evsense.models.run_config import RUN_CONFIG_FILE, RunConfig
from evsense.storage.event_io import read_events, read_histograms


def run_cli(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def random_scene(tmp_path):
    out = tmp_path / "scene"
    assert run_cli("gen-scene", "--random-scene", "--seed", 3, "--width", 96, "--height", 64,
                   "--n-frames", 4, "--out", out) == 0
    return out


def test_gen_scene_writes_scene_directory(random_scene):
    assert {p.name for p in random_scene.iterdir()} == {
        "frames.frm", "labels.ndjson", "scene_spec.json", RUN_CONFIG_FILE,
    }
    echoed = json.loads((random_scene / RUN_CONFIG_FILE).read_text())
    assert echoed["seed"] == 3
    assert echoed["command"] == "gen-scene"


def test_gen_scene_without_source_is_usage_error(tmp_path):
    assert run_cli("gen-scene", "--out", tmp_path / "x") == 2


def test_unknown_command_exits_with_usage_error():
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["teleport"])
    assert info.value.code == 2


def test_simulate_with_explicit_values_resolves_registered_id(random_scene, tmp_path, capsys):
    out = tmp_path / "sim"
    code = run_cli("simulate", "--frames", random_scene, "--th-p", 0.3, "--th-n", 0.9,
                   "--tr-ms", 15, "--fov-deg", 130, "--out", out)
    assert code == 0
    assert capsys.readouterr().out.startswith("e13 ")
    stream = read_events(out / "events.evt")
    assert (stream.width, stream.height) == (96, 64)


def test_simulate_rejects_id_together_with_values(random_scene, tmp_path):
    assert run_cli("simulate", "--frames", random_scene, "--config", "e1", "--th-p", 0.3,
                   "--out", tmp_path / "sim") == 2


def test_simulate_rejects_unknown_config(random_scene, tmp_path, capsys):
    assert run_cli("simulate", "--frames", random_scene, "--config", "e99", "--out", tmp_path / "sim") == 2
    assert "e99" in capsys.readouterr().err


def test_simulate_rejects_missing_input(tmp_path):
    assert run_cli("simulate", "--frames", tmp_path / "nothing.frm", "--out", tmp_path / "sim") == 2


def test_stage_commands_chain(random_scene, tmp_path):
    sim, rep, det, ev = (tmp_path / name for name in ("sim", "rep", "det", "eval"))
    assert run_cli("simulate", "--frames", random_scene, "--config", "e1", "--out", sim) == 0
    assert run_cli("represent", "--events", sim, "--labels", random_scene, "--out", rep) == 0
    histograms = list(read_histograms(rep / "histograms.shr"))
    assert [h.window_end for h in histograms] == [50_000_000, 100_000_000, 150_000_000]

    assert run_cli("detect", "--histograms", rep, "--labels", random_scene / "labels.ndjson",
                   "--sequence-id", "s3", "--out", det) == 0
    records = [json.loads(line) for line in (det / "predictions.ndjson").read_text().splitlines()]
    assert [r["frame_index"] for r in records] == [1, 2, 3]

    assert run_cli("eval", "--predictions", det, "--labels", random_scene, "--out", ev) == 0
    metrics = json.loads((ev / "metrics.json").read_text())
    assert set(metrics) == {"AP", "AP50", "AP75", "AP_L", "AP_M"}


def test_config_file_is_overridden_by_flags(tmp_path):
    config_file = tmp_path / "options.json"
    config_file.write_text(json.dumps({"random_scene": True, "seed": 5, "width": 64, "height": 48, "n_frames": 3}))
    out = tmp_path / "scene"
    assert run_cli("gen-scene", "--config-file", config_file, "--seed", 9, "--out", out) == 0
    echoed = RunConfig.model_validate_json((out / RUN_CONFIG_FILE).read_text())
    assert (echoed.seed, echoed.width, echoed.n_frames) == (9, 64, 3)


def test_malformed_config_file_is_usage_error(tmp_path):
    config_file = tmp_path / "options.json"
    config_file.write_text("[1, 2")
    assert run_cli("gen-scene", "--config-file", config_file, "--random-scene", "--out", tmp_path / "x") == 2


def test_detector_flags_are_nested():
    args = build_parser().parse_args(["detect", "--histograms", "h.shr", "--min-area", "10"])
    overrides = collect_overrides(args)
    assert overrides["detector"] == {"min_area": 10}
    assert RunConfig.resolve("detect", None, overrides).detector.min_area == 10


def test_sensor_resolution_defaults_to_base():
    assert resolve_sensor_config(RunConfig()).id == "base"
    assert resolve_sensor_config(RunConfig(fov_deg=160.0)).id == "e9"
    custom = resolve_sensor_config(RunConfig(th_p=0.4))
    assert custom.id == "custom"
    assert custom.parameters() == (0.4, 0.5, 0.01, 90.0)
    with pytest.raises(InvalidParameterError):
        resolve_sensor_config(RunConfig(config_id="e1", tr_ms=5.0))


def test_report_reproduces_published_scores(tmp_path, capsys):
    out = tmp_path / "report"
    assert run_cli("report", "--published", "all", "--out", out) == 0
    printed = capsys.readouterr().out
    assert "AP=37.49±" in printed
    assert "AP=39.06±" in printed

    scores = pd.read_csv(out / "scores.csv")
    means = scores[(scores.config_id == "mean") & (scores.source == "RVT-B/base")]
    assert list(means.test_set) == ["train", "test1", "test2", "test3", "test4"]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["sources"]["SSMS-B/train"]["test4"]["AP"]["mean"] == pytest.approx(39.06)


def test_report_needs_a_source(tmp_path):
    assert run_cli("report", "--out", tmp_path / "r") == 2


@pytest.mark.parametrize("value, level", [
    ("error", logging.ERROR), ("WARN", logging.WARNING), ("info", logging.INFO),
    ("debug", logging.DEBUG), (None, logging.WARNING), ("chatty", logging.WARNING),
])
def test_log_level_resolution(value, level):
    assert resolve_level(value) == level


def test_configure_logging_reads_environment(monkeypatch):
    monkeypatch.setenv("EVSENSE_LOG", "debug")
    assert configure_logging() == logging.DEBUG
    assert configure_logging("error") == logging.ERROR
    handlers = [h for h in logging.getLogger("evsense").handlers if getattr(h, "_evsense_handler", False)]
    assert len(handlers) == 1
