import math
import os
import threading

import pytest

import dcsim

ROOT = os.environ.get("DCSIM_SOURCE_DIR", os.path.join(os.path.dirname(__file__), "..", ".."))


def path(*parts):
    return os.path.join(ROOT, *parts)


def make(**kw):
    return dcsim.make_env(path("configs", "reference.json"), path("data", "weather.csv"),
                          path("data", "ci.csv"), path("data", "workload.csv"), **kw)


def test_config_loads_and_round_trips():
    cfg = dcsim.load_config(path("configs", "reference.json"))
    assert cfg.num_cpus == 2000
    assert cfg.chiller_cop == 6.0
    assert dcsim.validate_config(cfg) == []
    assert dcsim.parse_config(dcsim.serialize_config(cfg)) == cfg


def test_bad_config_raises_with_key():
    with pytest.raises(dcsim.SchemaError, match="NUM_ROWS"):
        dcsim.parse_config("{}")
    with pytest.raises(dcsim.IoError):
        dcsim.load_config(path("configs", "missing.json"))


def test_scalar_model():
    curve = dcsim.PowerCurveParams(p_idle=100.0, p_full=300.0, temp_slope=1.0, p_cap=400.0)
    assert dcsim.cpu_power(curve, 20.0, 0.5) == 200.0
    assert dcsim.chiller_power(6.0, 6.0) == 7.0
    assert dcsim.ct_power(25.0, 50.0, 8000.0) == 1000.0


def test_episode_runs_to_truncation():
    env = make(episode_days=1)
    obs = env.reset(seed=0, start_index=0)
    assert len(obs) == len(env.observation_names) == 12
    lo, hi = env.action_bounds
    steps, truncated = 0, False
    while not truncated:
        obs, reward, terminated, truncated, info = env.step(lo + (hi - lo) * (steps % 5) / 4)
        assert not terminated
        assert reward <= 0.0
        assert math.isclose(info["energy_wh"], info["it_energy_wh"] + info["hvac_energy_wh"])
        assert len(info["rack_inlet_c"]) == 50
        steps += 1
    assert steps == env.episode_length == 96


def test_step_before_reset_raises():
    with pytest.raises(dcsim.NotReset):
        make().step(20.0)


def test_threads_match_serial():
    def run(out, k):
        env = make(episode_days=2)
        env.reset(seed=k)
        out[k] = [env.step(15.0 + k)[1] for _ in range(env.episode_length)]

    serial, parallel = {}, {}
    for k in range(4):
        run(serial, k)
    threads = [threading.Thread(target=run, args=(parallel, k)) for k in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert serial == parallel
