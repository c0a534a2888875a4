import json

import pytest

from pinchsim.cli import main as cli
from pinchsim.cli import figures
from pinchsim.cli.figures import MAP_HEADER, SUBCOMMANDS, Subcommand, default_shared_square, run_table1
from pinchsim.errors import EXIT_CONFIG, EXIT_OK, EXIT_VALIDATION, SingularityError
from pinchsim.logging_utils import get_log_manager
from pinchsim.services.export import SWEEP_HEADER, ResultTable, csv_body
from pinchsim.services.validation import CheckResult


def _write_config(tmp_path, payload, name: str = "config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def _small_fig4(tmp_path):
    return _write_config(
        tmp_path,
        {"plan": {"num_trials": 50, "sweep_dbm": [0.0, 20.0]}, "curve_family": [5.0]},
    )


def _data_rows(path):
    return csv_body(path.read_text(encoding="utf-8")).splitlines()


def test_fig4_writes_a_csv(tmp_path, capsys) -> None:
    out = tmp_path / "fig4.csv"

    code = cli.main(["fig4", "--config", str(_small_fig4(tmp_path)), "--out", str(out)])

    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == str(out)
    rows = _data_rows(out)
    assert rows[0] == ",".join(SWEEP_HEADER)
    # two simulated schemes and three closed-form rows at two powers
    assert len(rows) == 1 + 2 * 2 + 3 * 2
    assert out.read_text(encoding="utf-8").startswith("# pinchsim_version=")


def test_runs_are_reproducible_across_workers(tmp_path, monkeypatch) -> None:
    monkeypatch.setenv("PINCHSIM_BLOCK_SIZE", "16")
    config = _small_fig4(tmp_path)
    outputs = []
    for workers in ("1", "1", "2"):
        out = tmp_path / f"run-{len(outputs)}.csv"
        assert cli.main(["fig4", "--config", str(config), "--out", str(out), "--workers", workers]) == EXIT_OK
        outputs.append(out.read_text(encoding="utf-8"))

    assert outputs[0] == outputs[1] == outputs[2]
    assert "# block_size=16" in outputs[0]


def test_seed_override_changes_the_sample(tmp_path) -> None:
    config = _small_fig4(tmp_path)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"

    cli.main(["fig4", "--config", str(config), "--out", str(first)])
    cli.main(["fig4", "--config", str(config), "--out", str(second), "--seed", "99"])

    assert "# seed=99" in second.read_text(encoding="utf-8")
    assert _data_rows(first) != _data_rows(second)


@pytest.mark.parametrize(
    "payload, key",
    [
        ({"plan": {"num_trials": 0}}, "plan.num_trials"),
        ({"bogus": 1}, "bogus"),
        ({"plan": {"sweep_dbm": [10.0, 5.0]}}, "plan.sweep_dbm"),
    ],
)
def test_bad_configs_exit_with_the_key_path(tmp_path, capsys, payload, key) -> None:
    code = cli.main(["fig4", "--config", str(_write_config(tmp_path, payload))])

    assert code == EXIT_CONFIG
    assert f"config error at {key}" in capsys.readouterr().err


def test_unreadable_configs(tmp_path, capsys) -> None:
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")

    assert cli.main(["fig4", "--config", str(broken)]) == EXIT_CONFIG
    assert cli.main(["fig4", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_scheme_outside_the_figure_family(tmp_path, capsys) -> None:
    config = _write_config(tmp_path, {"plan": {"scheme": "pinching-1"}})

    assert cli.main(["fig9", "--config", str(config)]) == EXIT_CONFIG
    assert "plan.scheme" in capsys.readouterr().err


def test_deployment_outside_the_figure(tmp_path, capsys) -> None:
    config = _write_config(tmp_path, {"plan": {"deployment": {"kind": "split_square"}}})

    assert cli.main(["fig4", "--config", str(config)]) == EXIT_CONFIG
    assert "plan.deployment.kind" in capsys.readouterr().err


def test_fig10_writes_the_search_map(tmp_path) -> None:
    config = _write_config(
        tmp_path,
        {
            "plan": {
                "scheme": "miso-search",
                "deployment": {"kind": "square", "side_m": 20.0},
                "num_users": 2,
                "num_antennas": 2,
                "search_window_wavelengths": 0.3,
            },
            "realizations": 1,
        },
    )
    out = tmp_path / "fig10.csv"

    assert cli.main(["fig10", "--config", str(config), "--out", str(out)]) == EXIT_OK

    rows = _data_rows(out)
    assert rows[0] == ",".join(MAP_HEADER)
    assert 1 < len(rows) <= 1 + 7 * 7


def test_table_failures_exit_after_writing(tmp_path, monkeypatch, capsys) -> None:
    def failing_run(config, workers):
        table = ResultTable(header=("realization", "mode"))
        table.add(0, "MRC")
        table.failures.append("ordering violated")
        return table

    original = SUBCOMMANDS["table1"]
    monkeypatch.setitem(
        SUBCOMMANDS, "table1", Subcommand("table1", original.default, failing_run, original.schemes)
    )
    out = tmp_path / "table1.csv"

    assert cli.main(["table1", "--out", str(out)]) == EXIT_VALIDATION
    assert out.exists()
    assert "ordering violated" in capsys.readouterr().err


def test_table1_skips_realizations_without_zero_forcing(monkeypatch) -> None:
    def collinear(H):
        raise SingularityError("user channels are collinear; zero forcing is undefined")

    monkeypatch.setattr(figures, "zf_beamformer", collinear)
    cursor = get_log_manager().latest_cursor()

    table = run_table1(default_shared_square(2))

    assert table.rows == []
    assert table.failures == ["zero forcing is undefined for realization(s) [0, 1]"]
    events = get_log_manager().get_logs(after=cursor, event_prefix="table1.zf.singular")
    assert [event["payload"]["realization"] for event in events] == [0, 1]


@pytest.mark.slow
def test_default_table1_shows_attained_and_missed_bounds(tmp_path) -> None:
    out = tmp_path / "table1.csv"
    cursor = get_log_manager().latest_cursor()

    assert cli.main(["table1", "--out", str(out)]) == EXIT_OK

    events = get_log_manager().get_logs(after=cursor, event_prefix="table1.dichotomy")
    assert events and events[-1]["payload"]["passed"] is True
    assert len(_data_rows(out)) == 1 + 4 * 100


def test_validate_reports_each_check(monkeypatch, capsys) -> None:
    seen = {}

    def fake_checks(settings):
        seen["eta_scale"] = settings.eta_scale
        return [CheckResult(name="demo", residual=0.0, tolerance=1.0, passed=True)]

    monkeypatch.setattr(cli, "run_checks", fake_checks)

    assert cli.main(["validate", "--debug-eta-scale", "1.2"]) == EXIT_OK
    assert "demo 0.000e+00 1.000e+00 PASS" in capsys.readouterr().out
    assert seen["eta_scale"] == 1.2


def test_validate_fails_on_a_failed_check(monkeypatch) -> None:
    monkeypatch.setattr(
        cli,
        "run_checks",
        lambda settings: [CheckResult(name="demo", residual=2.0, tolerance=1.0, passed=False)],
    )

    assert cli.main(["validate"]) == EXIT_VALIDATION


def test_log_records_can_be_dumped(tmp_path) -> None:
    log_path = tmp_path / "logs" / "run.jsonl"

    cli.main(["fig4", "--config", str(_small_fig4(tmp_path)), "--out", str(tmp_path / "x.csv"), "--log-json", str(log_path)])

    events = [json.loads(line)["event"] for line in log_path.read_text(encoding="utf-8").splitlines()]
    assert "cli.command.start" in events
    assert "export.csv.written" in events
