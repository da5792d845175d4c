import json
import textwrap
from pathlib import Path

import numpy as np
import pytest

from hessflow.exceptions import ConfigError
from hessflow.grid import load_field
from hessflow.harness.cli import main
from hessflow.harness.config import config_from_preset, load_config, parse_config
from hessflow.harness.expr import Expression, expression_eval
from hessflow.harness.presets import SAMPLERS, SCENARIOS

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(tmp_path, text, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return path


def cli(tmp_path, command, config, out="out"):
    out_dir = tmp_path / out
    code = main([command, "--config", str(config), "--out", str(out_dir)])
    return code, out_dir


# -- expressions ---------------------------------------------------------------

def test_expression_examples():
    assert expression_eval("x^2+y^2", 2)(1.0, 2.0) == 5.0
    assert expression_eval("sin(pi*x)", 1)(0.5) == pytest.approx(1.0)
    assert expression_eval("(x^2+y^2-1)/2", 2)(0.0, 0.0) == -0.5


def test_expression_features():
    e = Expression("-exp(-2*pi^2*t)*abs(x) + sqrt(4) - cos(0) + e^0", dim=2)
    assert e.uses_time and e.names == ["t", "x"]
    x = np.linspace(-1, 1, 5)
    assert np.allclose(e(x, 0 * x, 0.0), -np.abs(x) + 2.0)
    assert e(x, 0 * x, 0.0).shape == (5,)
    assert expression_eval("2^3^2")() == 512.0  # right associative
    assert np.array_equal(expression_eval("1", 2)(np.zeros((3, 4)), np.zeros((3, 4))), np.ones((3, 4)))


@pytest.mark.parametrize(
    "src, position",
    [("x^^2", 3), ("foo(x)", 1), ("x+", 3), ("2^x^y+q", 7), ("(x+1", 1), ("x @ y", 3)],
)
def test_expression_error_positions(src, position):
    with pytest.raises(ConfigError) as exc:
        Expression(src)
    assert exc.value.position == position
    assert f"position {position}" in str(exc.value)


@pytest.mark.parametrize("src", ["", "x if y else 1", "'a'", "sin(x, y)", "x.real", "[1]", "True"])
def test_expression_rejects(src):
    with pytest.raises(ConfigError):
        Expression(src)


def test_expression_dimension_check():
    with pytest.raises(ConfigError):
        Expression("x + z", dim=2)
    with pytest.raises(ConfigError):
        Expression("x + t", dim=1)(0.5)


# -- config --------------------------------------------------------------------

def test_presets_complete():
    assert set(SCENARIOS) == {"HEAT-1", "MA-1", "MA-NEG", "SPLIT-1", "NONADM-1", "COMP-1"}
    for name in SCENARIOS:
        cfg = config_from_preset(name)
        assert cfg.command is not None and cfg.m is not None
    s = SAMPLERS["heat_exact"]
    assert s(0.5, 0.5, 0.0) == pytest.approx(0.25 + 1.0)


def test_preset_with_override():
    cfg = config_from_preset("MA-1", grid={"res": "17"}, time={"t_end": "2"})
    assert cfg.grid["res"] == (17, 17)
    assert cfg.time["t_end"] == 2.0
    assert cfg.m == 2 and cfg.command == "stationary"
    assert repr(cfg.data["f"]) == "preset:one"


def test_full_config_parse():
    cfg = parse_config(textwrap.dedent("""
        [scenario]
        name = demo      # inline comment
        command = evolve
        m = 1
        [grid]
        dim = 2
        lo = -1 0
        hi = 1
        res = 9 11
        [data]
        f = 2
        phi = (x^2 + y^2)/2 + t
        [time]
        t_end = 0.5
        dt = 1e-4
        orientation = 1
        [comparison]
        C = 5
    """))
    assert cfg.name == "demo"
    assert cfg.grid == {"dim": 2, "lo": (-1.0, 0.0), "hi": (1.0, 1.0), "res": (9, 11)}
    assert cfg.time["dt"] == 1e-4
    assert cfg.data["phi"](1.0, 1.0, 0.5) == pytest.approx(1.5)
    assert cfg.section("comparison")["C"] == "5"


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("[scenario]\ncommand = evolve\n[bogus]\nx = 1", "unknown section"),
        ("[scenario]\ncommand = evolve\ncolour = red", "unknown key"),
        ("[scenario]\npreset = NOPE", "unknown scenario preset"),
        ("[scenario]\ncommand = fly", "unknown command"),
        ("[grid]\ndim = 4", "must be 1, 2 or 3"),
        ("[grid]\ndim = 2\nres = 3", "at least 5"),
        ("[grid]\ndim = 2\nlo = 0 0 0", "expected 1 or 2"),
        ("[grid]\ndim = 2\n[data]\nf = preset:nothing", "unknown preset sampler"),
        ("[grid]\ndim = 2\n[data]\nf = x^^2", "position 3"),
        ("[grid]\ndim = 2\n[data]\ninitial = x + t", "must not depend on t"),
        ("[time]\nt_end = soon", "not a number"),
        ("[time]\norientation = 2", "orientation"),
        ("[data]\nf = 1", "needs a [grid]"),
        ("not an ini file", "config"),
    ],
)
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert fragment in str(exc.value)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini")


# -- CLI -----------------------------------------------------------------------

def test_cli_bad_config_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "[scenario]\ncommand = evolve\nwhatever = 1\n")
    code, _ = cli(tmp_path, "evolve", cfg)
    assert code == 1
    assert "unknown key" in capsys.readouterr().err


def test_cli_usage_error_exit_code(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["fly", "--config", "x.ini"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["trace"])
    assert exc.value.code == 1


def test_cli_trace(tmp_path, capsys):
    code, out = cli(tmp_path, "trace", CONFIGS / "cone_diag.ini")
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["traces"] == [1.0, 5.0, 3.0, -9.0]
    assert (out / "traces.csv").read_text().splitlines()[0] == "p,T_p"


def test_cli_cone(tmp_path, capsys):
    code, out = cli(tmp_path, "cone", CONFIGS / "cone_diag.ini")
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["max_m"] == 2
    assert summary["witness"] == [1]
    assert "witness" in capsys.readouterr().out


def test_cli_inline_matrix(tmp_path):
    cfg = write(tmp_path, "[matrix]\nrows = 2 1; 1 2\nm = 2\n")
    code, out = cli(tmp_path, "trace", cfg)
    assert code == 0
    assert json.loads((out / "summary.json").read_text())["traces"] == [1.0, 4.0, 3.0]
    bad = write(tmp_path, "[matrix]\nrows = 2 1; 0 2\n", "bad.ini")
    assert cli(tmp_path, "trace", bad)[0] == 1


def test_cli_curvature_sphere(tmp_path):
    code, out = cli(tmp_path, "curvature", CONFIGS / "sphere.ini")
    assert code == 0
    lines = (out / "curvature.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert header[:5] == ["sample", "u", "v", "k_1", "k_2"]
    for line in lines[1:]:
        row = dict(zip(header, line.split(",")))
        assert abs(float(row["k_1"]) - 1.0) <= 1e-8
        assert abs(float(row["k_2"]) - 0.25) <= 1e-8


def test_cli_curvature_torus(tmp_path):
    code, out = cli(tmp_path, "curvature", CONFIGS / "torus.ini")
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert not summary["m_convex"]
    assert summary["min_k_m"] < 0


def test_cli_nonadmissible(tmp_path, capsys):
    code, out = cli(tmp_path, "evolve", CONFIGS / "nonadm_1.ini")
    assert code == 2
    err = capsys.readouterr().err
    assert "S in K_{m-1}" in err
    summary = json.loads((out / "summary.json").read_text())
    assert summary["step"] == 0 and summary["condition"] == "S in K_{m-1}"


def test_cli_comparison_pass_and_corrupted(tmp_path, capsys):
    code, out = cli(tmp_path, "verify-comparison", CONFIGS / "comp1.ini", "ok")
    assert code == 0
    results = json.loads((out / "summary.json").read_text())["results"]
    assert [r["epsilon"] for r in results] == [1e-3, 1e-1]
    assert all(r["passed"] for r in results)

    code, out = cli(tmp_path, "verify-comparison", CONFIGS / "comp1_corrupt.ini", "bad")
    assert code == 3
    assert "16:16" in capsys.readouterr().err
    results = json.loads((out / "summary.json").read_text())["results"]
    assert results[0]["failing_node"] == "16:16"


SMALL_MA = """
[scenario]
preset = MA-1
[grid]
res = 17
[time]
t_end = {t_end}
[output]
record_every = {record}
"""


def test_determinism(tmp_path):
    cfg = write(tmp_path, SMALL_MA.format(t_end=0.05, record=20))
    code1, out1 = cli(tmp_path, "evolve", cfg, "a")
    code2, out2 = cli(tmp_path, "evolve", cfg, "b")
    assert code1 == code2 == 0
    files1 = sorted(p.relative_to(out1) for p in out1.rglob("*") if p.is_file())
    files2 = sorted(p.relative_to(out2) for p in out2.rglob("*") if p.is_file())
    assert files1 == files2 and len(files1) > 4
    for rel in files1:
        assert (out1 / rel).read_bytes() == (out2 / rel).read_bytes(), rel
    header = (out1 / "trace.csv").read_text().splitlines()[0]
    assert header == "t,dt,sup_residual,min_Tm1,min_Em,admissible,dist_to_reference"


def test_stationary_then_barrier(tmp_path):
    cfg = write(tmp_path, SMALL_MA.format(t_end=50, record=100))
    code, run_dir = cli(tmp_path, "stationary", cfg, "run")
    assert code == 0
    summary = json.loads((run_dir / "summary.json").read_text())
    assert summary["converged"] and summary["admissibility"]["all_steps"]
    assert summary["certificate"]["envelope_passed"]
    u = load_field(run_dir / "field.txt")
    assert u.grid.res == (17, 17)

    bcfg = write(tmp_path, f"""
        [scenario]
        m = 2
        [grid]
        dim = 2
        res = 17
        [data]
        f = 1
        reference = (x^2 + y^2 - 1)/2
        [barrier]
        run = {run_dir}
    """, "barrier.ini")
    code, out = cli(tmp_path, "barrier", bcfg, "barrier")
    assert code == 0
    lines = (out / "barrier.csv").read_text().splitlines()
    assert lines[0] == "t,theta_plus,theta_minus,upper_bound,lower_bound,measured_sup_dist,envelope_ok"
    assert len(lines) - 1 == json.loads((out / "summary.json").read_text())["snapshots"]
    # same certificate as the one issued during the run
    assert (out / "barrier.csv").read_bytes() == (run_dir / "barrier.csv").read_bytes()


def test_stationary_not_reached_is_reported(tmp_path):
    cfg = write(tmp_path, SMALL_MA.format(t_end=0.01, record=10))
    code, out = cli(tmp_path, "stationary", cfg)
    assert code == 4
    assert not json.loads((out / "summary.json").read_text())["converged"]


def test_split_evolution_sign_changing_laplacian(tmp_path):
    # lap u = x changes sign, so u itself is not admissible for m = 1 with a positive source;
    # both halves of the split are
    cfg = write(tmp_path, """
        [scenario]
        command = stationary
        m = 1
        [grid]
        dim = 2
        lo = -1
        hi = 1
        res = 17
        [data]
        f = x
        phi = x^3/6
        reference = x^3/6
        initial = x^3/6 + 0.1*cos(pi*x/2)*cos(pi*y/2)
        [time]
        t_end = 20
        [output]
        record_every = 100
        [split]
        nu = 0.5
        mu = 1
        mode = evolve
    """)
    code, out = cli(tmp_path, "stationary", cfg)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    split = summary["split"]
    assert split["passed"] and split["C"] == 0.375
    assert split["min_lap_u1"] >= 0.25 - 1e-9 and split["min_lap_neg_u2"] >= 0.25 - 1e-9
    assert split["sum_residual"] <= 1e-15
    for part in ("part1", "part2"):
        assert summary[part]["converged"]
        assert summary[part]["certificate"]["envelope_passed"]
    assert summary["final_sup_distance"] < 1e-6
    assert (out / "split_u1.txt").exists() and (out / "part1_trace.csv").exists()


def test_split_check_mode_reports_wrong_mu(tmp_path):
    cfg = write(tmp_path, """
        [scenario]
        command = evolve
        m = 1
        [grid]
        dim = 2
        res = 9
        [data]
        f = 2
        phi = x^2 + y^2 + x^3
        reference = x^2 + y^2 + x^3
        [time]
        t_end = 0.001
        [barrier]
        enabled = false
        [split]
        nu = 1
        mu = 1
    """)
    code, out = cli(tmp_path, "evolve", cfg)
    assert code == 4
    split = json.loads((out / "summary.json").read_text())["split"]
    assert not split["passed"] and split["failing_node"] is not None
