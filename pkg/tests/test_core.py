from __future__ import annotations

import pytest

from herlab.core import (
    Episode,
    RewardParams,
    Transition,
    binary_reward,
    is_success,
    validate_episode,
    validate_transition,
)


def make_transition(**overrides) -> Transition:
    base = dict(
        state=(0, 0),
        action=1,
        next_state=(0, 1),
        goal=(3, 3),
        reward=-1.0,
        success=False,
        done=False,
        episode_id=0,
        step_index=0,
    )
    base.update(overrides)
    return Transition(**base)


class TestBinaryReward:
    @pytest.mark.parametrize(
        "d,eps,expected",
        [
            (0.0, 0.5, 0.0),
            (0.5, 0.5, 0.0),  # boundary is inclusive
            (0.51, 0.5, -1.0),
            (3.0, 1.0, -1.0),
        ],
    )
    def test_values(self, d, eps, expected):
        assert binary_reward(d, eps) == expected

    def test_rejects_negative_distance(self):
        with pytest.raises(ValueError):
            binary_reward(-0.1, 0.5)

    def test_rejects_nonpositive_threshold(self):
        with pytest.raises(ValueError):
            binary_reward(0.1, 0.0)

    def test_monotone_in_distance(self):
        eps = 0.7
        distances = [i * 0.05 for i in range(40)]
        rewards = [binary_reward(d, eps) for d in distances]
        assert all(a >= b for a, b in zip(rewards, rewards[1:]))


class TestIsSuccess:
    @pytest.mark.parametrize("d,eps,expected", [(0.0, 0.5, True), (1.0, 0.5, False), (0.5, 0.5, True)])
    def test_values(self, d, eps, expected):
        assert is_success(d, eps) is expected

    def test_matches_reward(self):
        for d in (0.0, 0.2, 0.5, 0.8, 2.0):
            assert is_success(d, 0.5) == (binary_reward(d, 0.5) == 0.0)


class TestRewardParams:
    def test_valid(self):
        p = RewardParams(eps_r=0.5, gamma=0.99)
        assert p.eps_r == 0.5

    @pytest.mark.parametrize("eps,gamma", [(0.0, 0.9), (-1.0, 0.9), (0.5, 0.0), (0.5, 1.0)])
    def test_invalid(self, eps, gamma):
        with pytest.raises(ValueError):
            RewardParams(eps_r=eps, gamma=gamma)


class TestTransitionValidation:
    def test_accepts_consistent(self):
        validate_transition(make_transition())
        validate_transition(make_transition(reward=0.0, success=True, done=True))

    def test_rejects_bad_reward(self):
        with pytest.raises(ValueError, match="reward"):
            validate_transition(make_transition(reward=-0.5))

    def test_rejects_mismatched_success(self):
        with pytest.raises(ValueError, match="success"):
            validate_transition(make_transition(reward=0.0, success=False))

    def test_rejects_done_without_success(self):
        with pytest.raises(ValueError, match="done"):
            validate_transition(make_transition(done=True))


class TestEpisodeValidation:
    def test_accepts_chained(self):
        trs = [
            make_transition(state=(0, 0), next_state=(0, 1), step_index=0),
            make_transition(state=(0, 1), next_state=(0, 2), step_index=1),
        ]
        validate_episode(Episode(trs, (3, 3), horizon=5))

    def test_rejects_broken_chain(self):
        trs = [
            make_transition(state=(0, 0), next_state=(0, 1), step_index=0),
            make_transition(state=(9, 9), next_state=(0, 2), step_index=1),
        ]
        with pytest.raises(ValueError, match="chain"):
            validate_episode(Episode(trs, (3, 3), horizon=5))

    def test_rejects_over_horizon(self):
        trs = [make_transition(step_index=i, state=(0, i), next_state=(0, i + 1)) for i in range(3)]
        with pytest.raises(ValueError, match="horizon"):
            validate_episode(Episode(trs, (3, 3), horizon=2))

    def test_rejects_foreign_goal(self):
        trs = [make_transition(goal=(1, 1))]
        with pytest.raises(ValueError, match="goal"):
            validate_episode(Episode(trs, (3, 3), horizon=5))
