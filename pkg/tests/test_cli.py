import csv
import io
import json

import numpy as np
import pytest

from monoflow import cli
from monoflow.dynamics import ConfigError

SFP_SCHEDULES = ["--gam", "const(0.15)", "--lam", "const(0.5)", "--eps", "powerlaw(1,0.5)", "--t-end", "200"]


def run_cli(tmp_path, *argv, name="out"):
    csv_path, json_path = tmp_path / f"{name}.csv", tmp_path / f"{name}.json"
    code = cli.main(["run", *argv, "--csv", str(csv_path), "--json", str(json_path)])
    summary = json.loads(json_path.read_text()) if json_path.exists() else None
    return code, summary, csv_path


def test_run_fb_outer_sfp(tmp_path):
    code, summary, csv_path = run_cli(tmp_path, "--problem", "sfp", "--variant", "fb_outer", *SFP_SCHEDULES)
    assert code == 0
    assert summary["status"] == "ok"
    assert summary["terminal_norm"] < 0.05
    assert summary["dist_to_min_norm"] < 0.05
    assert "hypothesis_report" in summary
    rows = list(csv.reader(csv_path.open()))
    assert rows[0][:3] == ["t", "x_1", "x_2"]
    assert float(rows[-1][0]) == pytest.approx(200.0)


def test_run_fb_inner_sfp_desk_scale(tmp_path):
    # faithful to the stated threshold; the (0.5, 0.15) cell decays too slowly for T = 200
    code, summary, _ = run_cli(tmp_path, "--problem", "sfp", "--variant", "fb_inner", *SFP_SCHEDULES)
    assert code == 0
    assert summary["terminal_norm"] < 0.05


def test_run_unregularized_stops_at_positive_norm(tmp_path):
    argv = ["--problem", "sfp", "--variant", "fb_inner", *SFP_SCHEDULES[:-4], "--t-end", "200",
            "--eps", "const(0)"]
    code, summary, _ = run_cli(tmp_path, *argv)
    assert code == 0
    x = np.array(summary["terminal_state"])
    assert summary["terminal_norm"] > 0.1
    # zeros of the SFP: x1 = 2 x2 inside the closed unit ball
    assert abs(x[0] - 2 * x[1]) / np.sqrt(5) < 1e-3 and np.linalg.norm(x) <= 1 + 1e-3


def test_config_error_exit_code(tmp_path, capsys):
    code, _, csv_path = run_cli(tmp_path, "--problem", "sfp", "--variant", "FB_outer", "--gam", "const(0.6)",
                                "--lam", "const(2)")
    assert code == 1
    err = capsys.readouterr().err
    assert "gamma=0.6 exceeds 2beta=0.5" in err
    assert "lambda=2 outside (0, 0.8]" in err
    assert not csv_path.exists()


def test_config_error_lists_everything():
    cfg = cli.RunConfig(problem="nowhere", variant="bogus", eps="powerlaw(", t_end=-1.0)
    with pytest.raises(ConfigError) as exc:
        cli.build_experiment(cfg)
    assert len(exc.value.violations) >= 3


def test_abort_exit_two_with_partial_csv(tmp_path):
    cfg = cli.RunConfig(problem="sfp", variant="FB_outer", t_end=5.0,
                        csv=str(tmp_path / "a.csv"), json=str(tmp_path / "a.json"))
    exp = cli.build_experiment(cfg)
    # a field that turns non-finite after t = 1
    exp.spec = _NanAfter(exp.spec, 1.0)
    summary, code = cli.execute_run(exp)
    assert code == cli.EXIT_NUMERIC == 2
    assert summary["status"] == "aborted"
    rows = list(csv.reader((tmp_path / "a.csv").open()))
    assert len(rows) > 2 and float(rows[-1][0]) <= 1.0 + 1e-9


class _NanAfter:
    def __init__(self, spec, t_bad):
        self._spec, self._t_bad = spec, t_bad

    def __getattr__(self, name):
        return getattr(self._spec, name)

    def __call__(self, t, x):
        if t > self._t_bad:
            return np.full_like(x, np.nan)
        return self._spec(t, x)


def test_determinism_byte_identical(tmp_path):
    argv = ["--problem", "vi", "--variant", "FBF_reg", "--lam", "const(1)", "--gam", "const(0.5)",
            "--t-end", "20", "--seed", "3"]
    run_cli(tmp_path, *argv, name="a")
    run_cli(tmp_path, *argv, name="b")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_dump_config_round_trip(tmp_path, capsys):
    argv = ["run", "--problem", "vi", "--variant", "FBF_reg", "--eps", "powerlaw(1, 0.9)", "--x0", "1,2,3",
            "--t-end", "12.5", "--seed", "7", "--no-diagnostics", "--dump-config"]
    assert cli.main(argv) == 0
    text = capsys.readouterr().out
    path = tmp_path / "cfg.toml"
    path.write_text(text)
    again = cli.load_config(str(path), {})
    first = cli.load_config(None, {"problem": "vi", "variant": "FBF_reg", "eps": "powerlaw(1, 0.9)",
                                   "x0": "1,2,3", "t_end": 12.5, "seed": 7, "diagnostics": False})
    assert again == first
    assert cli.load_config(None, {}) == cli.RunConfig()


def test_flags_override_file(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('problem = "vi"\nvariant = "FBF_reg"\nt_end = 10.0\n\n[sweep]\ngammas = [0.2]\n')
    cfg = cli.load_config(str(path), {"t_end": 3.0})
    assert cfg.problem == "vi" and cfg.t_end == 3.0 and cfg.gammas == [0.2]
    path.write_text('problem = "vi"\ncolour = "red"\n')
    with pytest.raises(ConfigError, match="colour"):
        cli.load_config(str(path), {})


def test_seed_environment(monkeypatch):
    monkeypatch.setenv("MONOFLOW_SEED", "11")
    assert cli.load_config(None, {}).seed == 11
    assert cli.load_config(None, {"seed": 4}).seed == 4
    monkeypatch.delenv("MONOFLOW_SEED")
    assert cli.load_config(None, {}).seed == 0


def test_sweep_empty_grid(tmp_path, capsys):
    code = cli.main(["sweep", "--decays", "", "--gammas", "0.2", "--csv", "-", "--json", str(tmp_path / "s.json")])
    assert code == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out == [",".join(cli.SWEEP_COLUMNS)]


def test_sweep_small_grid(tmp_path):
    out = tmp_path / "s.csv"
    code = cli.main(["sweep", "--decays", "0,0.5", "--gammas", "0.5", "--t-end", "60", "--csv", str(out),
                     "--json", str(tmp_path / "s.json")])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert [float(r["decay"]) for r in rows] == [0.0, 0.5]
    assert all(r["status"] == "ok" for r in rows)


def test_sweep_cell_failure_recorded():
    cfg = cli.SWEEP_BASE
    row = cli.sweep_cell(cfg, 0.5, 5.0)
    assert row["status"].startswith("config error")
    assert np.isnan(row["terminal_norm"])


def test_sweep_jobs_match_serial():
    cfg = cli.RunConfig(**{**cli.SWEEP_BASE.__dict__, "t_end": 20.0, "decays": [0.0, 0.5], "gammas": [0.2, 0.5]})
    serial = cli.execute_sweep(cfg)
    parallel = cli.execute_sweep(cli.RunConfig(**{**cfg.__dict__, "jobs": 2}))
    assert serial == parallel


def _check(capsys, *argv):
    assert cli.main(["check", *argv]) == 0
    return json.loads(capsys.readouterr().out)


def test_check_th1_fb_known_good_set(capsys):
    rep = _check(capsys, "th1_fb", "--eps", "powerlaw(1,0.6)", "--lam", "cosinv(0)", "--gam", "const(0.5)",
                 "--beta", "0.5")
    assert rep["all_hold"]
    assert {c["verdict"] for c in rep["conditions"]} == {"holds"}


def test_check_main2_convergent_eps(capsys):
    rep = _check(capsys, "main2", "--eps", "powerlaw(1,2)", "--lam", "const(0.5)", "--gam", "const(0.1)",
                 "--beta", "0.25")
    verdicts = {c["name"]: c["verdict"] for c in rep["conditions"]}
    assert verdicts["(i)"] == "fails"


def test_check_main1_nonmonotone_ratio(capsys):
    beta = 0.25
    rep = _check(capsys, "main1", "--eps", f"powerlaw(0.2,{beta})", "--lam", "coscap(0.2)", "--gam",
                 "const(0.1)", "--beta", str(beta))
    verdicts = {c["name"]: c["verdict"] for c in rep["conditions"]}
    assert verdicts["(iii)"] == "fails"


def test_check_bad_schedule(capsys):
    assert cli.main(["check", "main2", "--eps", "wiggle(3)"]) == 1
    assert "error" in capsys.readouterr().err


def test_oracle_csv(capsys):
    assert cli.main(["oracle", "--problem", "synthetic:shift(1,2)", "--eps-values", "1,0.5"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["eps", "x_1", "x_2", "iterations", "residual"]
    assert float(rows[1][1]) == pytest.approx(0.5, abs=1e-10)
    assert float(rows[2][2]) == pytest.approx(2 / 1.5, abs=1e-10)
    assert cli.main(["oracle", "--eps-values", "0,1"]) == 1
