from __future__ import annotations

import pytest

from herlab.agents import TabularQAgent
from herlab.config import ProbeConfig
from herlab.envs import BitFlipEnv, GridPushEnv, LineReachEnv
from herlab.probe import emit_probe_csv, probe_q


def gridpush_spec(env, goal=(2, 2)):
    states = tuple(((0, 0), (x, y)) for x in range(env.width) for y in range(env.height) if (x, y) != (0, 0))
    return ProbeConfig(goal=goal, probe_states=states, snapshot_every=1000)


class TestProbeQ:
    def test_untrained_agent_all_zero(self):
        env = GridPushEnv(4, 4)
        agent = TabularQAgent(4)
        snap = probe_q(agent, env, gridpush_spec(env), 0)
        assert all(v == 0.0 for _, v in snap.values)
        assert len(snap.values) == 15

    def test_read_only(self):
        env = GridPushEnv(4, 4)
        agent = TabularQAgent(4)
        probe_q(agent, env, gridpush_spec(env), 0)
        assert agent.table == {}

    def test_reports_greedy_max(self):
        env = LineReachEnv(4, 4)
        agent = TabularQAgent(4)
        agent.table[((1, 1), 3)] = [-4.0, -1.5, -2.0, -3.0]
        spec = ProbeConfig(goal=3, probe_states=((1, 1),), snapshot_every=10)
        snap = probe_q(agent, env, spec, 5)
        assert snap.values[0] == ((1, 1), -1.5)

    def test_invalid_state_rejected(self):
        env = GridPushEnv(4, 4)
        spec = ProbeConfig(goal=(2, 2), probe_states=(((0, 0), (9, 9)),), snapshot_every=10)
        with pytest.raises(ValueError):
            probe_q(TabularQAgent(4), env, spec, 0)


class TestEmitProbeCsv:
    def test_row_count_and_header_planar(self, tmp_path):
        env = GridPushEnv(4, 4)
        agent = TabularQAgent(4)
        spec = ProbeConfig(
            goal=(2, 2),
            probe_states=(((0, 0), (1, 1)), ((0, 0), (2, 2)), ((0, 0), (3, 3))),
            snapshot_every=10,
        )
        snaps = [probe_q(agent, env, spec, step) for step in (0, 10)]
        path = tmp_path / "probe.csv"
        emit_probe_csv(env, snaps, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "env_step,state_x,state_y,value"
        assert len(lines) == 7  # header + 2 snapshots x 3 probes
        assert lines[1] == "0,1,1,0.000000000"

    def test_state_key_header_for_nonplanar(self, tmp_path):
        env = BitFlipEnv(3)
        agent = TabularQAgent(3)
        spec = ProbeConfig(goal=(1, 1, 1), probe_states=((0, 1, 0),), snapshot_every=10)
        snaps = [probe_q(agent, env, spec, 0)]
        path = tmp_path / "probe.csv"
        emit_probe_csv(env, snaps, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "env_step,state_key,value"
        assert lines[1] == f"0,{env.encode_state((0, 1, 0))},0.000000000"

    def test_empty_snapshot_list_header_only(self, tmp_path):
        env = GridPushEnv(4, 4)
        path = tmp_path / "probe.csv"
        emit_probe_csv(env, [], path)
        assert path.read_text() == "env_step,state_x,state_y,value\n"

    def test_values_round_trip_to_nine_decimals(self, tmp_path):
        env = LineReachEnv(4, 4)
        agent = TabularQAgent(4)
        value = -3.123456789123
        agent.table[((2, 1), 0)] = [value] * 4
        spec = ProbeConfig(goal=0, probe_states=(((2, 1)),), snapshot_every=10)
        snaps = [probe_q(agent, env, spec, 0)]
        path = tmp_path / "probe.csv"
        emit_probe_csv(env, snaps, path)
        parsed = float(path.read_text().splitlines()[1].split(",")[3])
        assert parsed == pytest.approx(value, abs=5e-10)
