from gpsrsim.cli import main
from gpsrsim.experiments import CSV_HEADER


def test_simulate_writes_csv_and_trace(tmp_path):
    out = tmp_path / "run.csv"
    trace = tmp_path / "run.trace"
    code = main(["simulate", "--protocol", "sgpsr", "--nodes", "30",
                 "--area", "150", "--malicious", "3", "--seed", "4",
                 "--out", str(out), "--trace", str(trace)])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert lines[1].startswith("sgpsr,30,150,3,4,")
    header = trace.read_text().splitlines()
    assert header[0].startswith("# config ")
    assert "protocol=sgpsr" in header[0]
    assert header[1].startswith("# malicious ")
    assert header[2].startswith("# protocol=sgpsr,nodes=30")


def test_simulate_honors_config_file(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("nodes = 25\narea_m = 120x120\nsim_time_s = 6\n"
                        "flows = 2\nseed = 8\n")
    out = tmp_path / "run.csv"
    assert main(["simulate", "--config", str(cfg_file), "--out", str(out)]) == 0
    assert out.read_text().strip().split("\n")[1].startswith("gpsr,25,120,0,8,")


def test_flag_overrides_config_file(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("nodes = 25\nsim_time_s = 6\nflows = 2\n")
    out = tmp_path / "run.csv"
    assert main(["simulate", "--config", str(cfg_file), "--nodes", "31",
                 "--out", str(out)]) == 0
    assert out.read_text().strip().split("\n")[1].split(",")[1] == "31"


def test_config_error_exit_code(capsys):
    code = main(["simulate", "--nodes", "10", "--malicious", "10"])
    assert code == 2
    assert "malicious" in capsys.readouterr().err


def test_unknown_config_key_exit_code(tmp_path, capsys):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("definitely_not_a_key = 1\n")
    assert main(["simulate", "--config", str(cfg_file)]) == 2


def test_sweep_cli_tiny(tmp_path):
    cfg_file = tmp_path / "base.cfg"
    cfg_file.write_text("nodes = 30\narea_m = 150\nflows = 3\nsim_time_s = 6\n")
    out = tmp_path / "sweep.csv"
    code = main(["sweep", "--config", str(cfg_file), "--seeds", "1",
                 "--jobs", "2", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == CSV_HEADER
    # full grid: 48 cells x (1 run + mean + stddev)
    assert len(lines) - 1 == 48 * 3
