import csv
import json

import numpy as np
import pytest

from leadtime_lab import cli
from leadtime_lab.composition import make_pair, write_panel
from leadtime_lab.errors import InvalidConfig, MissingStageOutput
from leadtime_lab.fileio import atomic_open
from leadtime_lab.pipeline import (
    EXIT_INPUT,
    EXIT_OK,
    EXIT_STAGE,
    RunConfig,
    emit_plot_data,
    histogram_counts,
    parallel_map,
    resolve_stages,
    run,
    thread_count,
)
from leadtime_lab.synth import Regime, ScenarioSpec, generate_panel, scenario_to_dict

from conftest import N, point_mass


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def outputs(d):
    return {p.relative_to(d): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file() and p.name != "manifest.json"}


@pytest.fixture(scope="module")
def panel(tmp_path_factory):
    path = tmp_path_factory.mktemp("panel") / "panel.csv"
    write_panel(generate_panel(ScenarioSpec(n_days=45, base_params=(0.9, 0.03), noise_draws=3000,
                                            regimes=(Regime(25, mean_factor=1.8),), gbv_shift=0.15)), path)
    return path


def one_break_scenario(tmp_path):
    spec = ScenarioSpec(n_days=300, base_params=(0.77, 0.026), regimes=(Regime(150, mean_factor=2.0),),
                        noise_draws=5000, gbv_shift=0.14, seed=1)
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario_to_dict(spec)))
    return path


class TestStages:
    def test_dependency_closure(self):
        assert resolve_stages(["score"]) == ("fit", "smooth", "score")
        assert resolve_stages(["breaks", "simulate"]) == ("simulate", "divergence", "breaks")

    def test_simulate_divergence_breaks(self, tmp_path):
        res = run(RunConfig(one_break_scenario(tmp_path), tmp_path / "out",
                            stages=("simulate", "divergence", "breaks"), seed=42, null_draws=200))
        assert res.status == EXIT_OK
        man = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert man["stages"] == ["simulate", "divergence", "breaks"]
        assert set(man["wall_time_s"]) == {"simulate", "divergence", "breaks"}
        rep = json.loads((tmp_path / "out" / "breaks.json").read_text())
        days = read(tmp_path / "out" / "divergence.csv")
        starts = [[r["date"] for r in days].index(b["date"]) for b in rep["breaks"]]
        assert len(starts) == 1 and abs(starts[0] - 150) <= 5
        assert set(rep) >= {"breaks", "supf", "supf_p", "bic"}

    def test_identical_pairs_zero_divergence(self, tmp_path):
        days = generate_panel(ScenarioSpec(n_days=10, noise_draws=500))
        same = [make_pair(d.date, d.nights.mass, d.nights.mass) for d in days]
        write_panel(same, tmp_path / "p.csv")
        assert run(RunConfig(tmp_path / "p.csv", tmp_path / "o", stages=("divergence",))).status == 0
        assert all(float(r["w1"]) == 0.0 for r in read(tmp_path / "o" / "divergence.csv"))

    def test_report_schemas(self, panel, tmp_path):
        out = tmp_path / "o"
        assert run(RunConfig(panel, out, null_draws=200, draws_per_day=200)).status == EXIT_OK
        heads = {
            "divergence.csv": "date,w1",
            "tails.csv": "date,threshold,nights_tail,gbv_tail,ratio,defined",
            "gpd.csv": "metric,threshold,xi,beta,n_exceed,estimator",
            "fits.csv": "date,metric,family,a,b,cross_entropy,converged",
            "comparisons.csv": "date,metric,winner,ln_minus_gamma,wei_minus_gamma",
            "smoother.csv": "date,metric,k_used,edf,lambda,crps,kld,k_check_passed",
            "segments.csv": "date,segment_id",
            "scores.csv": "date,metric,model,crps,kld,in_sample",
        }
        for name, head in heads.items():
            assert (out / name).read_text().splitlines()[0] == head
        assert len(read(out / "fits.csv")) == 45 * 2 * 3
        assert len(read(out / "tails.csv")) == 45 * 5
        assert len(read(out / "gpd.csv")) == 2 * 8
        for bundle in ("pooled_pmf", "divergence_breaks", "tail_ratios", "stability", "ce_difference_hist"):
            assert (out / "plots" / f"{bundle}.csv").is_file()

    def test_stage_isolation(self, panel, tmp_path):
        full, part = tmp_path / "full", tmp_path / "part"
        run(RunConfig(panel, full, stages=("divergence", "tails", "gpd"), draws_per_day=100))
        run(RunConfig(panel, part, stages=("tails",), draws_per_day=100))
        assert (full / "tails.csv").read_bytes() == (part / "tails.csv").read_bytes()
        assert not (part / "gpd.csv").exists()

    def test_thread_count_does_not_change_outputs(self, panel, tmp_path, monkeypatch):
        monkeypatch.setenv("LEADTIME_LAB_THREADS", "1")
        run(RunConfig(panel, tmp_path / "a", stages=("fit",)))
        monkeypatch.setenv("LEADTIME_LAB_THREADS", "2")
        run(RunConfig(panel, tmp_path / "b", stages=("fit",)))
        assert outputs(tmp_path / "a") == outputs(tmp_path / "b")

    def test_input_validation_exit(self, tmp_path):
        (tmp_path / "bad.csv").write_text("date,lead,nights_share,gbv_share\n2020-01-01,400,1,1\n")
        res = run(RunConfig(tmp_path / "bad.csv", tmp_path / "o"))
        assert res.status == EXIT_INPUT
        assert any("row 2" in d for d in res.diagnostics)
        assert json.loads((tmp_path / "o" / "manifest.json").read_text())["status"] == EXIT_INPUT

    def test_stage_failure_keeps_partial_outputs(self, tmp_path):
        # 10 days cannot hold six regimes of at least two days
        days = generate_panel(ScenarioSpec(n_days=10, noise_draws=500, gbv_shift=0.1))
        write_panel(days, tmp_path / "p.csv")
        res = run(RunConfig(tmp_path / "p.csv", tmp_path / "o", stages=("divergence", "breaks", "tails"),
                            max_breaks=5, trim=0.2))
        assert res.status == EXIT_STAGE and res.failed_stage == "breaks"
        assert (tmp_path / "o" / "divergence.csv").is_file()
        assert not (tmp_path / "o" / "tails.csv").exists()

    def test_degenerate_day_recorded_not_fatal(self, tmp_path):
        days = generate_panel(ScenarioSpec(n_days=3, noise_draws=500))
        days.append(make_pair(days[-1].date.replace(day=days[-1].date.day + 1), point_mass(5), point_mass(5)))
        write_panel(days, tmp_path / "p.csv")
        assert run(RunConfig(tmp_path / "p.csv", tmp_path / "o", stages=("fit",))).status == EXIT_OK
        assert read(tmp_path / "o" / "comparisons.csv")[-1]["winner"] == ""

    @pytest.mark.parametrize("kw", [dict(stages=()), dict(stages=("nope",)), dict(trim=0.7), dict(bootstrap_replicates=10),
                                    dict(gpd_thresholds=(90, 60)), dict(tail_thresholds=(365,))])
    def test_config_errors(self, panel, tmp_path, kw):
        with pytest.raises(InvalidConfig):
            run(RunConfig(panel, tmp_path, **kw))

    def test_missing_input(self, tmp_path):
        with pytest.raises(InvalidConfig):
            RunConfig(tmp_path / "none.csv", tmp_path).validate()


class TestPlotData:
    def test_symmetric_pooled_bundle(self, tmp_path):
        a, b = np.zeros(N), np.zeros(N)
        a[0], a[10] = 0.5, 0.5
        b[0], b[10] = 0.5, 0.5
        days = generate_panel(ScenarioSpec(n_days=2))
        write_panel([make_pair(days[0].date, a, b), make_pair(days[1].date, b, a)], tmp_path / "p.csv")
        run(RunConfig(tmp_path / "p.csv", tmp_path / "o", stages=("tails",)))
        rows = read(tmp_path / "o" / "plots" / "pooled_pmf.csv")
        assert len(rows) == N and all(r["nights"] == r["gbv"] for r in rows)

    def test_zero_differences_single_bin(self):
        edges, counts, below, above = histogram_counts(np.zeros(17))
        assert counts.sum() == 17 and counts.max() == 17 and below == above == 0
        assert edges[np.argmax(counts)] == 0.0
        assert len(edges) == 61 and edges[0] == -0.05 and edges[-1] == 0.25

    def test_histogram_edges(self):
        _, counts, below, above = histogram_counts([-0.06, -0.05, 0.0049, 0.005, 0.25, 0.3, np.nan])
        assert below == 1 and above == 1
        assert counts[0] == 1 and counts[10] == 1 and counts[11] == 1 and counts[-1] == 1

    def test_missing_stage_output(self, tmp_path):
        with pytest.raises(MissingStageOutput):
            emit_plot_data(tmp_path, ["stability"])
        assert emit_plot_data(tmp_path) == {}


class TestHelpers:
    def test_atomic_open_keeps_old_file_on_error(self, tmp_path):
        p = tmp_path / "f.txt"
        p.write_text("old")
        with pytest.raises(RuntimeError):
            with atomic_open(p) as fh:
                fh.write("new")
                raise RuntimeError
        assert p.read_text() == "old"
        assert [q.name for q in tmp_path.iterdir()] == ["f.txt"]

    def test_thread_env(self, monkeypatch):
        monkeypatch.setenv("LEADTIME_LAB_THREADS", "3")
        assert thread_count() == 3
        monkeypatch.setenv("LEADTIME_LAB_THREADS", "0")
        with pytest.raises(InvalidConfig):
            thread_count()

    def test_parallel_map_order(self):
        assert parallel_map(abs, [-3, 2, -1], threads=2) == [3, 2, 1]


class TestCli:
    def test_simulate_then_run(self, tmp_path, capsys):
        sc = one_break_scenario(tmp_path)
        assert cli.main(["simulate", "--scenario", str(sc), "--output", str(tmp_path / "p.csv"), "--seed", "7"]) == 0
        rc = cli.main(["run", "--input", str(tmp_path / "p.csv"), "--output", str(tmp_path / "o"),
                       "--stages", "divergence,tails", "--tail-thresholds", "7,30", "--seed", "1"])
        assert rc == 0
        assert {r["threshold"] for r in read(tmp_path / "o" / "tails.csv")} == {"7", "30"}
        man = json.loads((tmp_path / "o" / "manifest.json").read_text())
        assert man["config"]["tail_thresholds"] == [7, 30] and man["seed"] == 1

    def test_bad_input_exit_code(self, tmp_path, capsys):
        (tmp_path / "bad.csv").write_text("date,lead,nights_share,gbv_share\n2020-01-01,0,0.5,1\n")
        rc = cli.main(["run", "--input", str(tmp_path / "bad.csv"), "--output", str(tmp_path / "o")])
        assert rc == 2
        assert "SumOutOfTolerance" in capsys.readouterr().err

    def test_unknown_stage(self, tmp_path, capsys):
        rc = cli.main(["run", "--input", str(tmp_path / "x.csv"), "--output", str(tmp_path), "--stages", "bogus"])
        assert rc == 2

    def test_no_jitter_flag(self, panel, tmp_path):
        cli.main(["run", "--input", str(panel), "--output", str(tmp_path / "a"), "--stages", "gpd",
                  "--draws-per-day", "100", "--no-jitter", "--gpd-thresholds", "30,60"])
        man = json.loads((tmp_path / "a" / "manifest.json").read_text())
        assert man["config"]["jitter"] is False and man["config"]["draws_per_day"] == 100
