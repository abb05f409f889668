from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gaussflow.cli import main
from gaussflow.config import ConfigError, RunConfig, load_config, save_config
from gaussflow.grids import GraphGrid, RadialProfile
from gaussflow.io import (
    SnapshotError,
    dumps,
    format_float,
    load_frame,
    load_snapshot,
    read_timeseries,
    read_trajectory,
    resume_snapshot,
    save_frame,
    save_snapshot,
    state_from_dict,
    write_timeseries,
    write_trajectory,
)
from gaussflow.params import derive_exponents
from gaussflow.pipeline import planned_samples, run_config
from gaussflow.scenarios import ScenarioError, ScenarioSpec, scenario_build
from gaussflow.transforms.hodograph import hodograph_solve
from gaussflow.transforms.legendre import PolarGrid, legendre_transform
from gaussflow.transforms.pressure import to_pressure
from gaussflow.transforms.zeta import rescaled_zeta

from conftest import flat_disk_run

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


# ---------------------------------------------------------------------------
# scenarios


def test_radial_flat_disk_profile():
    state = scenario_build(ScenarioSpec(kind="radial_flat_disk", n=2, p=1.0, radius=1.0, collar=1.0, cells=200))
    np.testing.assert_array_equal(state.values, np.maximum(state.rho - 1.0, 0.0) ** 2)
    assert state.rho_max == 2.0


def test_cap_sphere_apex_is_zero():
    state = scenario_build(ScenarioSpec(kind="cap_sphere", radius=1.0, cells=64))
    assert state.values[0] == 0.0 and state.values.min() == 0.0
    assert state.values[-1] == pytest.approx(1 - np.sqrt(1 - 0.25))


def test_perturbed_disk_is_cartesian_and_flat_at_origin():
    state = scenario_build(ScenarioSpec(kind="perturbed_flat_disk", amplitude=0.1, mode=2, cells=128))
    assert isinstance(state, GraphGrid)
    c = state.values.shape[0] // 2
    assert state.values[c, c] == 0.0 and state.values.max() > 0


@pytest.mark.parametrize("kw,condition,key", [
    (dict(radius=0.0), None, "radius"),
    (dict(radius=-1.0), None, "radius"),
    (dict(gamma=3.0), "I2", None),
    (dict(kind="perturbed_flat_disk", amplitude=0.2, mode=2), "I1", None),
])
def test_scenarios_rejected(kw, condition, key):
    with pytest.raises(ScenarioError) as err:
        scenario_build(ScenarioSpec(**{"cells": 128, **kw}))
    if condition:
        assert err.value.condition == condition
    if key:
        assert err.value.key == key


def test_scenario_kind_and_key_validation():
    with pytest.raises(ScenarioError) as err:
        ScenarioSpec(kind="torus")
    assert err.value.key == "kind"
    with pytest.raises(ScenarioError) as err:
        ScenarioSpec.from_dict({"kind": "cap_sphere", "bogus": 1})
    assert err.value.key == "bogus"
    spec = ScenarioSpec(kind="cap_sphere", radius=2.0)
    assert ScenarioSpec.from_dict(spec.to_dict()) == spec


def test_custom_file_scenario(tmp_path):
    state = RadialProfile(2.0, np.maximum(np.linspace(0, 2, 129) - 1, 0) ** 2)
    path = save_snapshot(tmp_path / "s.json", state)
    loaded = scenario_build(ScenarioSpec(kind="custom_file", path=str(path)))
    np.testing.assert_array_equal(loaded.values, state.values)
    with pytest.raises(ScenarioError):
        scenario_build(ScenarioSpec(kind="custom_file"))


# ---------------------------------------------------------------------------
# snapshots and frames


@given(x=finite)
def test_format_float_round_trips(x):
    assert float(format_float(x)) == x


def test_format_float_rejects_nonfinite():
    with pytest.raises(SnapshotError):
        format_float(float("nan"))


@settings(max_examples=50, deadline=None)
@given(values=arrays(float, st.integers(4, 40), elements=finite), t=finite)
def test_radial_snapshot_round_trip_is_bit_exact(tmp_path_factory, values, t):
    state = RadialProfile(1.5, values, t)
    path = save_snapshot(tmp_path_factory.mktemp("snap") / "s.json", state, derive_exponents(2, 0.75))
    back, params, _ = load_snapshot(path)
    assert back.values.tobytes() == state.values.tobytes()
    assert back.time == t and back.rho_max == 1.5
    assert params == derive_exponents(2, 0.75)
    assert path.read_text() == save_snapshot(path.with_name("t.json"), back, params).read_text()


@settings(max_examples=20, deadline=None)
@given(values=arrays(float, (7, 7), elements=finite))
def test_cartesian_snapshot_round_trip_is_bit_exact(tmp_path_factory, values):
    state = GraphGrid(-1.0, 1.0, values, 0.25)
    back = resume_snapshot(save_snapshot(tmp_path_factory.mktemp("snap") / "g.json", state))
    assert back.values.tobytes() == state.values.tobytes()
    assert (back.lo, back.hi, back.time) == (-1.0, 1.0, 0.25)


def test_snapshot_errors_name_the_key():
    good = json.loads(dumps({"schema_version": 1, "frame": "height", "time": 0.0, "values": [0.0, 1.0, 2.0, 3.0],
                             "grid": {"kind": "radial", "rho_max": 1.0, "cells": 3}}))
    state_from_dict(good)
    for mutate, key in [(lambda d: d.update(schema_version=2), "schema_version"),
                        (lambda d: d.pop("values"), "values"),
                        (lambda d: d["grid"].update(kind="hex"), "grid.kind"),
                        (lambda d: d["grid"].update(cells=5), "grid.cells"),
                        (lambda d: d.update(values=[[1.0]]), "values"),
                        (lambda d: d.update(frame="zeta"), "frame")]:
        bad = json.loads(json.dumps(good))
        mutate(bad)
        with pytest.raises(SnapshotError) as err:
            state_from_dict(bad)
        assert err.value.key == key


def test_dumps_is_sorted_and_compact():
    assert dumps({"b": 1, "a": [0.1, True, None, -0.0, 2.0]}) == '{"a":[0.10000000000000001,true,null,-0.0,2.0],"b":1}'
    with pytest.raises(TypeError):
        dumps(object())


def test_frames_round_trip(tmp_path, params21):
    state = scenario_build(ScenarioSpec(kind="radial_flat_disk", cells=256))
    g = to_pressure(state, params21)
    grid = PolarGrid.uniform_s(1, 50, params21.sigma_p)
    u = legendre_transform(state, grid, refine=True)
    frames = {"pressure": g, "legendre": u, "zeta": rescaled_zeta(u, params21),
              "hodograph": hodograph_solve(g, 1.0, 0.1)}
    for tag, frame in frames.items():
        back = load_frame(save_frame(tmp_path / f"{tag}.json", frame))
        assert type(back) is type(frame)
        for attr in ("g", "u", "zeta", "h"):
            if hasattr(frame, attr):
                assert getattr(back, attr).tobytes() == np.asarray(getattr(frame, attr)).tobytes()
    with pytest.raises(TypeError):
        save_frame(tmp_path / "x.json", object())


# ---------------------------------------------------------------------------
# trajectories and time series


def test_trajectory_and_timeseries_round_trip(tmp_path, params21):
    traj, params = flat_disk_run(64, (0.0, 0.01, 0.02), t_end=0.02)
    states, p = read_trajectory(write_trajectory(traj, params, tmp_path / "traj.jsonl"))
    assert p == params and len(states) == 3
    for a, b in zip(states, traj.states):
        assert a.values.tobytes() == b.values.tobytes() and a.time == b.time
    assert load_snapshot(tmp_path / "traj.jsonl")[0].time == 0.02
    rows = read_timeseries(write_timeseries(traj, tmp_path / "ts.csv"))
    assert [r["t"] for r in rows] == [0.0, 0.01, 0.02]
    assert all(r["Tstar_estimate"] is None for r in rows)
    assert rows[0]["flat_volume"] == traj.interfaces[0].flat_volume
    header = (tmp_path / "ts.csv").read_text().splitlines()[0]
    assert header == "t,apex_height,flat_volume,inner_radius,outer_radius,Tstar_estimate"


# ---------------------------------------------------------------------------
# config


def base_config(**over):
    # 128 cells resolve the interface recession over t in [0, 0.02]
    d = {"schema_version": 1, "t_end": 0.02, "scenario": {"kind": "radial_flat_disk", "cells": 128},
         "analyses": ["interface"]}
    d.update(over)
    return d


def test_config_round_trip(tmp_path):
    cfg = RunConfig.from_dict(base_config(seed=3))
    again = load_config(save_config(cfg, tmp_path / "c.json"))
    assert again.to_dict() == cfg.to_dict()
    assert RunConfig.from_dict(base_config(samples=[])).sample_times()[-1] == 0.02


@pytest.mark.parametrize("over,key", [
    (dict(schema_version=2), "schema_version"),
    (dict(colour="red"), "colour"),
    (dict(samples=[0.02, 0.01]), "samples"),
    (dict(samples=[0.0, 0.5]), "samples"),
    (dict(cfl=0.9), "cfl"),
    (dict(t_end=-1.0), "t_end"),
    (dict(analyses=["magic"]), "analyses"),
    (dict(scenario={"kind": "radial_flat_disk", "wobble": 1}), "scenario.wobble"),
    (dict(scenario={"kind": "blob"}), "scenario.kind"),
    (dict(scenario={"kind": "radial_flat_disk", "p": 0.4}), "scenario.p"),
])
def test_config_errors_name_the_key(over, key):
    with pytest.raises(ConfigError) as err:
        RunConfig.from_dict(base_config(**over))
    assert err.value.key == key
    assert key in str(err.value)


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)
    missing = base_config()
    missing.pop("schema_version")
    with pytest.raises(ConfigError) as err:
        RunConfig.from_dict(missing)
    assert err.value.key == "schema_version"


def test_planned_samples_add_start_and_pair_partner():
    cfg = RunConfig.from_dict(base_config(analyses=["dual"], samples=[0.01, 0.02]))
    assert planned_samples(cfg) == [0.0, 0.01, 0.019, 0.02]
    assert planned_samples(cfg, 0.015) == [0.015, 0.019, 0.02]


# ---------------------------------------------------------------------------
# pipeline determinism and resume


def test_identical_configs_give_identical_outputs(tmp_path):
    cfg = RunConfig.from_dict(base_config(analyses=["interface", "transversality", "holder"], holder_pairs=2000))
    a = run_config(cfg, out=tmp_path / "a")
    b = run_config(cfg, out=tmp_path / "b")
    for name in ("timeseries.csv", "report.json", "trajectory.jsonl", "snapshot_final.json"):
        assert (a.out / name).read_bytes() == (b.out / name).read_bytes(), name
    assert a.report.passed


def test_resume_continues_from_snapshot(tmp_path):
    first = RunConfig.from_dict(base_config(t_end=0.01, samples=[0.0, 0.01]))
    run_config(first, out=tmp_path / "first")
    cfg = RunConfig.from_dict(base_config())
    res = run_config(cfg, resume=tmp_path / "first" / "snapshot_final.json", out=tmp_path / "second")
    times = list(res.trajectory.times)
    assert times[0] == 0.01 and times[-1] == 0.02 and len(times) == 11
    with pytest.raises(ValueError):
        run_config(first, resume=tmp_path / "second" / "snapshot_final.json", out=tmp_path / "third")


# ---------------------------------------------------------------------------
# command line


def test_cli_classify(capsys):
    assert main(["classify", "--n", "2", "--p", "0.75"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["g"]["smooth"] is True and out["v"]["smooth"] is False


def test_cli_run_passes(tmp_path, capsys):
    code = main(["run", "--grid", "128", "--t-end", "0.02", "--analyses", "interface",
                 "--out", str(tmp_path / "run")])
    assert code == 0
    assert "PASS interface_kinematics" in capsys.readouterr().out
    assert json.loads((tmp_path / "run" / "report.json").read_text())["passed"] is True


def test_cli_run_reports_failed_check(tmp_path):
    # 64 cells leave too few samples in the exponent fit window: a failed check, not a fault
    code = main(["run", "--grid", "64", "--t-end", "0.02", "--analyses", "exponent", "--out", str(tmp_path / "r")])
    assert code == 1


@pytest.mark.parametrize("argv", [
    ["run", "--p", "0.4", "--grid", "32"],
    ["run", "--radius", "-1", "--grid", "32"],
    ["run", "--cfl", "0.9", "--grid", "32"],
    ["run", "--analyses", "nope", "--grid", "32"],
    ["verify", "--resume", "/nonexistent/trajectory.jsonl"],
])
def test_cli_faults_exit_2(tmp_path, argv):
    assert main(argv + ["--out", str(tmp_path / "o")]) == 2


def test_cli_bad_config_exit_2(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(base_config(schema_version=9)))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_cli_config_verify_and_transform(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(base_config(analyses=["interface", "transversality"])))
    out = tmp_path / "run"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert main(["verify", "--resume", str(out / "trajectory.jsonl"), "--analyses", "interface"]) == 0
    assert (out / "report_verify.json").exists()
    for frame in ("pressure", "legendre", "zeta", "hodograph"):
        target = tmp_path / f"{frame}.json"
        code = main(["transform", "--resume", str(out / "snapshot_final.json"), "--frame", frame,
                     "--grid", "50", "--eta", "0.1", "--out", str(target)])
        assert code == 0, frame
        assert json.loads(target.read_text())["frame"] == frame


def test_cli_oracle_closed_form(tmp_path):
    out = tmp_path / "oracle.json"
    assert main(["oracle", "--t-end", "0.1", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["extinction_time"] == pytest.approx(1 / 3)
    assert data["closed_form"][0]["apex_height"] == 0.0


def test_cli_version(capsys):
    with pytest.raises(SystemExit) as err:
        main(["--version"])
    assert err.value.code == 0
    assert "gaussflow" in capsys.readouterr().out
