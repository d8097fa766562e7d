import dataclasses
import io

import pytest

from ddr4bench.cli import main


@pytest.fixture
def tiny_plan_file(tmp_path):
    path = tmp_path / "tiny.plan"
    path.write_text(
        "name tiny\n"
        "beats 256\n"
        "point op=r addr=seq burst=incr:8 sig=nb\n"
        "point op=w addr=rnd burst=incr:8 sig=nb\n"
    )
    return str(path)


def test_run_plan_file_with_outputs(tmp_path, tiny_plan_file, capsys):
    out = tmp_path / "results"
    status = main(["--plan", tiny_plan_file, "--out", str(out),
                   "--csv", "--svg", "--seed", "3"])
    assert status == 0
    assert (out / "tiny.csv").exists()
    assert (out / "tiny-1600.svg").exists()
    captured = capsys.readouterr().out
    assert "r-seq-incr8" in captured


def test_run_is_default_subcommand(tmp_path, tiny_plan_file):
    status = main(["--plan", tiny_plan_file, "--out", str(tmp_path), "--quiet"])
    assert status == 0


def test_unknown_plan_errors():
    assert main(["--plan", "definitely-not-a-plan"]) == 1


def test_rate_and_channel_override(tmp_path, tiny_plan_file, capsys):
    status = main(["--plan", tiny_plan_file, "--out", str(tmp_path),
                   "--rate", "2400", "--channels", "2", "--csv", "--quiet"])
    assert status == 0
    text = (tmp_path / "tiny.csv").read_text()
    assert ",2400," in text
    from ddr4bench.bench import read_csv

    rows = read_csv(tmp_path / "tiny.csv")
    assert {r.channel for r in rows} == {0, 1}
    assert all(r.rate == 2400 for r in rows)


def test_no_refresh_flag(tmp_path, tiny_plan_file):
    status = main(["--plan", tiny_plan_file, "--out", str(tmp_path),
                   "--no-refresh", "--quiet"])
    assert status == 0


def test_audit_flag(tmp_path, tiny_plan_file, capsys):
    status = main(["--plan", tiny_plan_file, "--out", str(tmp_path), "--audit"])
    assert status == 0
    assert "no violations" in capsys.readouterr().out


def test_timings_override(tmp_path, tiny_plan_file):
    timings = tmp_path / "t.txt"
    timings.write_text("CL=13\ntRCD=13\n")
    status = main(["--plan", tiny_plan_file, "--out", str(tmp_path),
                   "--timings", str(timings), "--quiet"])
    assert status == 0


def test_timings_rejects_unknown_key(tmp_path, tiny_plan_file):
    timings = tmp_path / "t.txt"
    timings.write_text("tBOGUS=1\n")
    status = main(["--plan", tiny_plan_file, "--out", str(tmp_path),
                   "--timings", str(timings), "--quiet"])
    assert status == 1


def test_compare_subcommand(tmp_path, tiny_plan_file, capsys):
    main(["--plan", tiny_plan_file, "--out", str(tmp_path), "--csv", "--quiet"])
    csv_path = str(tmp_path / "tiny.csv")
    status = main(["compare", csv_path, csv_path])
    assert status == 0
    out = capsys.readouterr().out
    assert "seq-r" in out and "1.000" in out


def test_host_subcommand(monkeypatch, capsys):
    commands = io.StringIO("query\nquit\n")
    monkeypatch.setattr("sys.stdin", commands)
    status = main(["host", "--rate", "1866"])
    assert status == 0
    out = capsys.readouterr().out
    assert "data_rate_mts=1866" in out


def test_two_rate_plan_emits_chart_per_rate(tmp_path):
    plan = tmp_path / "rates.plan"
    plan.write_text(
        "name rates\n"
        "beats 256\n"
        "point op=r addr=seq burst=incr:8 rate=1600\n"
        "point op=r addr=seq burst=incr:8 rate=2400\n"
    )
    status = main(["--plan", str(plan), "--out", str(tmp_path), "--svg",
                   "--quiet"])
    assert status == 0
    assert (tmp_path / "rates-1600.svg").exists()
    assert (tmp_path / "rates-2400.svg").exists()


def test_data_errors_force_nonzero_exit(tmp_path, tiny_plan_file, monkeypatch):
    import ddr4bench.cli as cli_mod

    real_run_plan = cli_mod.run_plan

    def corrupting_run_plan(*args, **kwargs):
        rows, audit = real_run_plan(*args, **kwargs)
        rows = [dataclasses.replace(rows[0], data_errors=1)] + rows[1:]
        return rows, audit

    monkeypatch.setattr(cli_mod, "run_plan", corrupting_run_plan)
    status = main(["--plan", tiny_plan_file, "--out", str(tmp_path), "--quiet"])
    assert status == 1


def test_builtin_plan_via_cli_small(tmp_path):
    # fig4 with tiny batches runs all mixed points quickly
    status = main(["--plan", "fig4", "--out", str(tmp_path), "--beats", "256",
                   "--csv", "--quiet"])
    assert status == 0
    from ddr4bench.bench import read_csv

    rows = read_csv(tmp_path / "fig4.csv")
    assert {r.direction for r in rows} == {"read", "write", "combined"}
