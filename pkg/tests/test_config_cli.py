import textwrap

import pytest

from bandit_elites.cli import ENV_OUT, main
from bandit_elites.config import (
    ConfigError,
    ExperimentSpec,
    build_run_configs,
    load_experiment,
    parse_resolution,
    parse_seeds,
)
from bandit_elites.runner import read_manifest
from bandit_elites.selection import POLICY_NAMES, UCB_LAMBDA


def test_parse_seeds():
    assert parse_seeds("0..19") == tuple(range(20))
    assert parse_seeds("5..5") == (5,)
    assert parse_seeds("3,1,2") == (3, 1, 2)
    assert parse_seeds(" 7 ") == (7,)
    for bad in ("9..2", "a..b", "1,a", ""):
        with pytest.raises(ConfigError):
            parse_seeds(bad)


def test_parse_resolution():
    assert parse_resolution("100x100") == (100, 100)
    assert parse_resolution("8X16") == (8, 16)
    for bad in ("100", "0x5", "axb", "1x2x3"):
        with pytest.raises(ConfigError):
            parse_resolution(bad)


def write_config(tmp_path, body, name="exp.ini"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(body))
    return path


def test_load_experiment_full(tmp_path):
    path = write_config(tmp_path, """
        [experiment]
        name = demo
        methods = uniform, greedy
        seeds = 0..2
        budget = 500
        init_population = 50
        jobs = 2
        grids = true
        lambda = 0.5

        [testbed]
        name = rastrigin6
        resolution = 20x20

        [output]
        dir = out/here
    """)
    spec = load_experiment(path)
    assert spec.name == "demo"
    assert spec.methods == ("uniform", "greedy")
    assert spec.seeds == (0, 1, 2)
    assert spec.budget == 500
    assert spec.init_population == 50
    assert spec.jobs == 2
    assert spec.grids is True
    assert spec.lam == 0.5
    assert spec.resolution == (20, 20)
    assert spec.out_dir == "out/here"
    assert spec.treatments == (("rastrigin6", {}),)


def test_load_experiment_defaults(tmp_path):
    path = write_config(tmp_path, """
        [experiment]
        budget = 1000

        [testbed]
        name = arm12
    """, name="minimal.ini")
    spec = load_experiment(path)
    assert spec.name == "minimal"
    assert spec.methods == POLICY_NAMES
    assert spec.seeds == (0,)
    assert spec.init_population == 100
    assert spec.jobs == 1
    assert spec.grids is False
    assert spec.lam is None
    assert spec.resolution is None
    assert spec.out_dir is None


@pytest.mark.parametrize("body,fragment", [
    ("[experiment]\nbudget = 100\n[testbed]\nname = rastrigin6\n[extra]\nx = 1\n",
     "unknown config section"),
    ("[experiment]\nbudget = 100\nbogus = 1\n[testbed]\nname = rastrigin6\n",
     "experiment.bogus"),
    ("[experiment]\n\n[testbed]\nname = rastrigin6\n", "budget"),
    ("[experiment]\nbudget = 100\nmethods = warmest\n[testbed]\nname = rastrigin6\n",
     "unknown policy"),
    ("[experiment]\nbudget = 100\n[testbed]\nname = simplex\n", "unknown testbed"),
    ("[experiment]\nbudget = 100\ninit_population = 200\n[testbed]\nname = rastrigin6\n",
     "exceeds budget"),
    ("[experiment]\nbudget = 100\nlambda = -1\n[testbed]\nname = rastrigin6\n",
     "lambda"),
    ("[experiment]\nbudget = 100\ngrids = maybe\n[testbed]\nname = rastrigin6\n",
     "boolean"),
    ("[experiment]\nbudget = 100\n[testbed]\nname = rastrigin6\nwidth = 8\n",
     "only applies to maze"),
    ("[experiment]\nbudget = 100\n[testbed]\nname = maze\njoints = 4\n",
     "joints"),
    ("[experiment]\nbudget = 100\n[testbed]\nname = maze\nsizes = 8x8\n",
     "requires assignments"),
    ("[experiment]\nbudget = 100\n[testbed]\nname = maze\nassignments = some\n",
     "assignments"),
    ("[experiment]\nbudget = 100\n[testbed]\nname = maze\nassignments = all\n"
     "fitness_metric = P\n", "conflicts"),
    ("[experiment]\nbudget = 100\n[testbed]\nname = maze\npath_count = steps\n",
     "path_count"),
])
def test_load_experiment_errors(tmp_path, body, fragment):
    path = write_config(tmp_path, body)
    with pytest.raises(ConfigError) as err:
        load_experiment(path)
    assert fragment in str(err.value)


def test_load_experiment_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment(tmp_path / "absent.ini")


def test_maze_assignment_expansion(tmp_path):
    path = write_config(tmp_path, """
        [experiment]
        budget = 1000

        [testbed]
        name = maze
        assignments = all
        sizes = 8x8
    """)
    spec = load_experiment(path)
    assert len(spec.treatments) == 30
    labels = {(p["fitness_metric"], tuple(p["behavior_metrics"]))
              for _, p in spec.treatments}
    assert len(labels) == 30
    path2 = write_config(tmp_path, """
        [experiment]
        budget = 1000

        [testbed]
        name = maze
        assignments = all
    """, name="sizes2.ini")
    assert len(load_experiment(path2).treatments) == 60  # default two sizes


def test_arm_joint_override(tmp_path):
    path = write_config(tmp_path, """
        [experiment]
        budget = 1000

        [testbed]
        name = arm12
        joints = 6
    """)
    spec = load_experiment(path)
    assert spec.treatments == (("arm12", {"joints": 6}),)


def test_build_run_configs_order_and_lambda():
    spec = ExperimentSpec(
        name="x", methods=("ucb_cell", "exploit_cell", "uniform"),
        seeds=(0, 1), budget=500, lam=0.5,
        treatments=(("rastrigin6", {}), ("arm12", {})))
    configs = build_run_configs(spec)
    assert len(configs) == 2 * 3 * 2
    keys = [(c.testbed, c.policy.kind, c.seed) for c in configs]
    assert keys[:6] == [
        ("rastrigin6", "ucb_cell", 0), ("rastrigin6", "ucb_cell", 1),
        ("rastrigin6", "exploit_cell", 0), ("rastrigin6", "exploit_cell", 1),
        ("rastrigin6", "uniform", 0), ("rastrigin6", "uniform", 1)]
    assert keys[6][0] == "arm12"
    by_kind = {c.policy.kind: c.policy.lam for c in configs}
    # the lambda override only touches the ucb family
    assert by_kind == {"ucb_cell": 0.5, "exploit_cell": 0.0, "uniform": 0.0}
    no_lam = build_run_configs(ExperimentSpec(
        name="y", methods=("ucb_cell",), seeds=(0,), budget=500,
        treatments=(("rastrigin6", {}),)))
    assert no_lam[0].policy.lam == UCB_LAMBDA


def experiment_config(tmp_path):
    return write_config(tmp_path, """
        [experiment]
        name = cli-demo
        methods = uniform, greedy
        seeds = 0..1
        budget = 200

        [testbed]
        name = rastrigin6
        resolution = 8x8
    """)


def test_cli_validate_config(tmp_path, capsys):
    path = experiment_config(tmp_path)
    assert main(["validate-config", str(path)]) == 0
    out = capsys.readouterr().out
    assert "ok" in out
    assert "= 4 runs" in out
    bad = write_config(tmp_path, "[experiment]\n[testbed]\nname = rastrigin6\n",
                       name="bad.ini")
    assert main(["validate-config", str(bad)]) == 1


def test_cli_usage_errors_exit_1(capsys):
    assert main([]) == 1
    assert main(["run", "--testbed", "nope", "--policy", "uniform",
                 "--budget", "200"]) == 1
    assert main(["run", "--testbed", "rastrigin6", "--policy", "softmax",
                 "--budget", "200"]) == 1
    capsys.readouterr()


def test_cli_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "single"
    code = main(["run", "--testbed", "rastrigin6", "--policy", "uniform",
                 "--seed", "3", "--budget", "200", "--resolution", "8x8",
                 "--grids", "--out", str(out)])
    assert code == 0
    assert (out / "metrics.csv").is_file()
    assert (out / "grids" / "run_3_fitness.csv").is_file()
    assert (out / "manifest").is_file()
    assert "wrote" in capsys.readouterr().out


def test_cli_run_default_out_root(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(ENV_OUT, str(tmp_path))
    code = main(["run", "--testbed", "rastrigin6", "--policy", "uniform",
                 "--seed", "4", "--budget", "200", "--resolution", "8x8"])
    assert code == 0
    assert (tmp_path / "run_rastrigin6_uniform_4" / "metrics.csv").is_file()
    capsys.readouterr()


def test_cli_run_testbed_params(tmp_path, capsys):
    out = tmp_path / "mazerun"
    code = main(["run", "--testbed", "maze", "--policy", "uniform",
                 "--budget", "150", "--init-population", "50",
                 "--resolution", "6x6", "--param", "width=4",
                 "--param", "height=4", "--out", str(out)])
    assert code == 0
    manifest = read_manifest(out)
    assert manifest["testbeds"][0]["width"] == 4
    assert main(["run", "--testbed", "maze", "--policy", "uniform",
                 "--budget", "150", "--param", "width4"]) == 1
    capsys.readouterr()


def test_cli_experiment_and_followups(tmp_path, capsys):
    path = experiment_config(tmp_path)
    out = tmp_path / "exp"
    code = main(["experiment", str(path), "--out", str(out), "--grids",
                 "--no-figures"])
    assert code == 0
    captured = capsys.readouterr().out
    assert "metric" in captured  # significance table header
    assert "uniform" in captured
    assert (out / "metrics.csv").is_file()
    assert (out / "significance.csv").is_file()
    assert (out / "progress_summary.csv").is_file()

    # analyze as a separate pass over the same directory
    assert main(["analyze", str(out), "--no-figures"]) == 0
    capsys.readouterr()

    # heatmap export: ambiguous until narrowed, registered in the manifest
    assert main(["export-heatmap", str(out), "--kind", "fitness"]) == 1
    code = main(["export-heatmap", str(out), "--kind", "fitness",
                 "--method", "greedy", "--seed", "1"])
    assert code == 0
    png = out / "grids" / "run_greedy_1_fitness.png"
    assert png.is_file()
    assert f"grids/{png.name}" in read_manifest(out)["artifacts"]
    capsys.readouterr()


def test_cli_experiment_no_analyze_and_runs_override(tmp_path, capsys):
    path = experiment_config(tmp_path)
    out = tmp_path / "exp2"
    code = main(["experiment", str(path), "--out", str(out), "--runs", "1",
                 "--no-analyze"])
    assert code == 0
    assert not (out / "significance.csv").exists()
    manifest = read_manifest(out)
    assert len(manifest["runs"]) == 2  # two methods, one seed
    capsys.readouterr()


def test_cli_export_heatmap_without_grids(tmp_path, capsys):
    path = experiment_config(tmp_path)
    out = tmp_path / "exp3"
    assert main(["experiment", str(path), "--out", str(out), "--runs", "1",
                 "--no-analyze"]) == 0
    assert main(["export-heatmap", str(out), "--kind", "fitness"]) == 2
    capsys.readouterr()


def test_cli_list_testbeds(capsys):
    assert main(["list-testbeds"]) == 0
    out = capsys.readouterr().out
    for name in ("rastrigin6", "arm12", "maze"):
        assert name in out


def test_cli_analyze_missing_directory(tmp_path, capsys):
    assert main(["analyze", str(tmp_path / "void")]) == 2
    capsys.readouterr()
