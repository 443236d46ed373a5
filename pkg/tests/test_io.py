"""Trajectory CSV round-trips and run-configuration parsing."""

import numpy as np
import pytest

from trajfield.errors import ConfigError, ParseError
from trajfield.integrators import Trajectory
from trajfield.io import parse_config, read_trajectory, write_trajectory
from trajfield.presets import default_config


def _write(path, text):
    path.write_text(text)
    return path


def test_trajectory_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(0)
    traj = Trajectory(t0=0.25, dt=0.01,
                      states=rng.normal(size=(100, 6)),
                      accels=rng.normal(size=(100, 3)),
                      inputs=rng.normal(size=(100, 2)))
    path = tmp_path / "traj.csv"
    write_trajectory(traj, path)
    back = read_trajectory(path)
    assert back.t0 == traj.t0
    # dt is recovered from t[1] - t[0], so it carries one rounding ulp
    assert back.dt == pytest.approx(traj.dt, abs=1e-15)
    np.testing.assert_array_equal(back.states, traj.states)
    np.testing.assert_array_equal(back.accels, traj.accels)
    np.testing.assert_array_equal(back.inputs, traj.inputs)


def test_trajectory_roundtrip_states_only(tmp_path):
    traj = Trajectory(t0=0.0, dt=0.1,
                      states=np.arange(12.0).reshape(6, 2))
    path = tmp_path / "t.csv"
    write_trajectory(traj, path)
    back = read_trajectory(path)
    np.testing.assert_array_equal(back.states, traj.states)
    assert back.accels is None
    assert back.inputs is None


def test_read_empty_file(tmp_path):
    path = _write(tmp_path / "empty.csv", "")
    with pytest.raises(ParseError, match="no header") as err:
        read_trajectory(path)
    assert err.value.line == 1


def test_read_ragged_row(tmp_path):
    path = _write(tmp_path / "ragged.csv",
                  "t,q0,v0\n0,1,2\n0.1,3\n")
    with pytest.raises(ParseError, match="expected 3 columns, got 2") as err:
        read_trajectory(path)
    assert err.value.line == 3


def test_read_bad_header(tmp_path):
    path = _write(tmp_path / "bad.csv", "q0,v0\n1,2\n3,4\n")
    with pytest.raises(ParseError, match="first column must be 't'"):
        read_trajectory(path)


def test_read_single_row(tmp_path):
    path = _write(tmp_path / "one.csv", "t,q0,v0\n0,1,2\n")
    with pytest.raises(ParseError, match="at least two data rows"):
        read_trajectory(path)


def test_read_non_finite(tmp_path):
    path = _write(tmp_path / "nan.csv", "t,q0,v0\n0,1,2\n0.1,nan,4\n")
    with pytest.raises(ParseError, match="non-finite") as err:
        read_trajectory(path)
    assert err.value.line == 3


def test_read_time_must_increase(tmp_path):
    path = _write(tmp_path / "rev.csv", "t,q0,v0\n0.2,1,2\n0.1,3,4\n")
    with pytest.raises(ParseError, match="time must increase"):
        read_trajectory(path)


def test_read_non_uniform_step(tmp_path):
    path = _write(tmp_path / "jump.csv",
                  "t,q0,v0\n0,1,2\n0.1,3,4\n0.3,5,6\n")
    with pytest.raises(ParseError, match="non-uniform time step") as err:
        read_trajectory(path)
    assert err.value.line == 4


def test_parse_config_minimal_fills_defaults(tmp_path):
    path = _write(tmp_path / "run.cfg", "benchmark = smsd\n")
    cfg = parse_config(path)
    ref = default_config("smsd")
    assert cfg.dt == ref.dt
    assert cfg.train_steps == ref.train_steps
    assert cfg.train == ref.train
    np.testing.assert_array_equal(cfg.init_state, ref.init_state)


def test_parse_config_overrides_and_comments(tmp_path):
    path = _write(tmp_path / "run.cfg", "\n".join([
        "# spring-mass run",
        "benchmark = smsd",
        "seed = 7   # rng",
        "dt = 0.02",
        "epochs = 12",
        "batch_size = full",
        "diff_sigma = auto",
        "excite_dt = auto",
        "init_state = 0.5 -0.5",
        "",
    ]))
    cfg = parse_config(path)
    assert cfg.seed == 7
    assert cfg.dt == 0.02
    assert cfg.train.epochs == 12
    assert cfg.train.batch_size is None
    assert cfg.diff.sigma is None
    assert cfg.excite_dt is None
    np.testing.assert_array_equal(cfg.init_state, [0.5, -0.5])


def test_parse_config_excite_dt_value(tmp_path):
    path = _write(tmp_path / "run.cfg",
                  "benchmark = cartpole\nexcite_dt = 0.004\n")
    assert parse_config(path).excite_dt == 0.004


def test_parse_config_duplicate_key(tmp_path):
    path = _write(tmp_path / "dup.cfg",
                  "benchmark = smsd\nseed = 1\nseed = 2\n")
    with pytest.raises(ParseError, match="duplicate key 'seed'") as err:
        parse_config(path)
    assert err.value.line == 3


def test_parse_config_unknown_key(tmp_path):
    path = _write(tmp_path / "unk.cfg", "benchmark = smsd\nwat = 1\n")
    with pytest.raises(ConfigError, match="unknown key 'wat'") as err:
        parse_config(path)
    assert err.value.key == "wat"


def test_parse_config_missing_benchmark(tmp_path):
    path = _write(tmp_path / "nob.cfg", "seed = 1\n")
    with pytest.raises(ConfigError, match="config must set 'benchmark'"):
        parse_config(path)


def test_parse_config_unknown_benchmark(tmp_path):
    path = _write(tmp_path / "badb.cfg", "benchmark = pogo\n")
    with pytest.raises(ConfigError, match="unknown benchmark 'pogo'"):
        parse_config(path)


def test_parse_config_bad_int(tmp_path):
    path = _write(tmp_path / "badint.cfg",
                  "benchmark = smsd\nepochs = soon\n")
    with pytest.raises(ConfigError, match="epochs expects an integer"):
        parse_config(path)


def test_parse_config_negative_dt(tmp_path):
    path = _write(tmp_path / "neg.cfg", "benchmark = smsd\ndt = -0.01\n")
    with pytest.raises(ConfigError, match="dt must be positive, got -0.01"):
        parse_config(path)


def test_parse_config_missing_equals(tmp_path):
    path = _write(tmp_path / "noeq.cfg", "benchmark = smsd\nseed 3\n")
    with pytest.raises(ParseError, match="expected 'key = value'"):
        parse_config(path)


def test_parse_config_physical_parameter_override(tmp_path):
    path = _write(tmp_path / "par.cfg", "benchmark = smsd\nk = 9.0\n")
    cfg = parse_config(path)
    assert cfg.params.k == 9.0
