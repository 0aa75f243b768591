import json

import pytest

from gctubes.cli import EXIT_CELL_FAILED, EXIT_CONFIG, EXIT_OK, EXIT_VIOLATION, main


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def test_overlap_command(capsys):
    code, out = run(["overlap", "--pole-a", "1", "0", "0", "--pole-b", "0", "1", "0", "--half-width", "0.1", "--mc-samples", "2000"], capsys)
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "quantity,value,std_error,method"
    assert lines[1].startswith("pair_overlap,") and lines[1].endswith("exact_lens")
    assert lines[2].startswith("monte_carlo,")


def test_degenerate_pole_is_an_input_error(capsys):
    code, _ = run(["overlap", "--pole-a", "0", "0", "0", "--pole-b", "0", "1", "0", "--half-width", "0.1"], capsys)
    assert code != EXIT_OK


@pytest.mark.parametrize("kind", ["overlap", "antipodal", "riesz"])
def test_energy_command(kind, capsys):
    code, out = run(["energy", "--construction", "fibonacci", "--n", "12", "--kind", kind], capsys)
    assert code == EXIT_OK and len(out.splitlines()) == 2


def test_construct_command(tmp_path, capsys):
    path = tmp_path / "poles.csv"
    assert main(["construct", "--construction", "pencil", "--n", "3", "--output-path", str(path)]) == EXIT_OK
    assert path.read_text().splitlines() == ["x,y,z", "1,0,0", "0.5,0.866025403784,0", "-0.5,0.866025403784,0"]


def test_optimize_command(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    code, out = run(["optimize", "--n", "6", "--max-iters", "30", "--output-path", str(trace)], capsys)
    assert code == EXIT_OK
    assert out.startswith("initial_energy,final_energy")
    assert trace.read_text().startswith("iteration,energy,step,grad_norm\n0,")


def test_sweep_and_fit(tmp_path, capsys):
    out_csv = tmp_path / "sweep.csv"
    code, _ = run(["sweep", "--constructions", "planar_pencil", "--n", "8", "16", "32", "--s", "2", "--output-path", str(out_csv)], capsys)
    assert code == EXIT_OK
    code, out = run(["fit", str(out_csv)], capsys)
    assert code == EXIT_OK
    header, row = out.splitlines()
    assert header == "construction,s,slope,intercept,r_squared,points_used"
    assert row.startswith("planar_pencil,2,")


def test_config_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"constructions": ["pencil"], "n": [4], "s": [1]}))
    code, out = run(["sweep", "--constructions", "greedy", "--n", "16", "32", "--config", str(cfg)], capsys)
    assert code == EXIT_OK
    rows = out.splitlines()[1:]
    assert len(rows) == 1 and rows[0].startswith("pencil,4,")


def test_sweep_output_is_byte_stable(capsys):
    argv = ["sweep", "--constructions", "greedy", "random", "--n", "8", "12", "--seeds", "0", "1"]
    assert run(argv, capsys) == run(argv, capsys)


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    assert main(["sweep", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["sweep", "--constructions", "pencil", "--n", "1", "4"]) == EXIT_CELL_FAILED
    assert main(["union-check", "--n", "1"]) == EXIT_CONFIG
    assert main(["union-check", "--n", "16", "--mc-samples", "5000", "--threshold", "100"]) == EXIT_VIOLATION
    assert main(["limit-check", "--s", "1"]) == EXIT_OK
    assert main(["identity-check", "--n", "2", "--mc-samples", "100000"]) == EXIT_OK
    assert main(["no-such-command"]) == 2
    capsys.readouterr()
