# Copyright 2026 The RehabAssess Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


class TestDoubleQTarget:
    def test_terminal(self):
        from rehab_assess.algo.double_q import double_q_target
        assert float(double_q_target(
            1., [0.2, 0.9], [0.5, 0.3], True, 1.)) == 1.

    def test_online_selects_target_evaluates(self):
        import pytest
        from rehab_assess.algo.double_q import double_q_target
        y = double_q_target(-0.05, [0.2, 0.9, 0.1], [0.5, 0.3, 0.8], False,
                            1.)
        assert float(y) == pytest.approx(0.25)

    def test_illegal_actions_are_skipped(self):
        import pytest
        from rehab_assess.algo.double_q import double_q_target
        y = double_q_target(-0.05, [0.2, 0.9, 0.1], [0.5, 0.3, 0.8], False,
                            1., next_legal=[True, False, True])
        assert float(y) == pytest.approx(0.45)

    def test_equal_networks_give_q_learning(self):
        import numpy as np
        from rehab_assess.algo.double_q import double_q_target
        q = np.array([[0.1, 0.7, -0.3], [1.5, 0.2, 0.4]])
        y = double_q_target(np.array([0.5, -1.]), q, q, np.array([0, 0]),
                            0.9)
        np.testing.assert_allclose(y, [0.5 + 0.9 * 0.7, -1. + 0.9 * 1.5])


class TestReplayBuffer:
    def test_ring(self):
        import numpy as np
        from rehab_assess.algo import ReplayBuffer
        buf = ReplayBuffer(capacity=3, obs_dim=2, num_actions=4, seed=0)
        for i in range(5):
            buf.add(obs=np.full((1, 2), i), actions=np.array([i % 4]),
                    rewards=np.array([float(i)]),
                    next_obs=np.full((1, 2), i + 1),
                    next_legal=np.ones((1, 4), dtype=bool),
                    dones=np.array([0]))
        assert len(buf) == 3
        batch = buf.sample(16)
        assert batch['obs'].shape == (16, 2)
        assert batch['next_legal'].shape == (16, 4)
        assert set(batch['rewards'].tolist()) <= {2., 3., 4.}


class TestRlConfig:
    def test_defaults(self):
        from rehab_assess.algo.double_q import RlConfig
        cfg = RlConfig()
        assert cfg.rewards.feature_cost == 0.05
        assert (cfg.buffer_size, cfg.batch_size, cfg.target_sync) == (
            10000, 64, 200)
        assert RlConfig.from_dict(cfg.to_dict()) == cfg

    def test_validation(self):
        import pytest
        from rehab_assess.algo.double_q import RlConfig
        from rehab_assess.errors import ConfigError
        with pytest.raises(ConfigError):
            RlConfig(gamma=0.)
        with pytest.raises(ConfigError):
            RlConfig(eps_start=0.01, eps_end=0.05)

    def test_epsilon_schedule(self):
        import pytest
        from rehab_assess.algo.double_q import DoubleQLearner
        from rehab_assess.algo.double_q import RlConfig
        from rehab_assess.task import ChainTask
        learner = DoubleQLearner(ChainTask(), (), RlConfig(episodes=100))
        assert learner.epsilon(0) == 1.
        assert learner.epsilon(25) == pytest.approx(0.525)
        assert learner.epsilon(50) == pytest.approx(0.05)
        assert learner.epsilon(100) == pytest.approx(0.05)


class TestChainTask:
    def test_optimal_values(self):
        import numpy as np
        import pytest
        from rehab_assess.task import ChainTask
        q = ChainTask().optimal_q()
        assert q[:4, 0].tolist() == pytest.approx([0.5, 0.15, 0.25, 0.35])
        assert q[:, 1].tolist() == pytest.approx([0., 0.6, 0.1, 0.2, 0.45])
        assert q[4, 0] == -np.inf

    def test_learns_optimal_q(self):
        import dataclasses
        import numpy as np
        from rehab_assess.algo.double_q import DoubleQLearner
        from rehab_assess.algo.double_q import RlConfig
        from rehab_assess.task import ChainTask
        task = ChainTask()
        cfg = RlConfig(episodes=4000, n_envs=16, updates_per_step=8,
                       target_sync=100, learning_rate=0.02, batch_size=64,
                       buffer_size=10000, log_interval=1000)
        optimal = task.optimal_q()
        legal = np.isfinite(optimal)
        state = task.reset_to(np.arange(task.n_states))
        for seed in range(5):
            learner = DoubleQLearner(
                task, (), dataclasses.replace(cfg, seed=seed)).train()
            q = learner.q_values(np.eye(task.n_states))
            assert np.all(np.abs(q - optimal)[legal] < 0.05), seed
            greedy = learner.greedy_actions(state.obs, state.legal)
            assert greedy.tolist() == np.argmax(optimal, axis=1).tolist()

    def test_sim_manager_rollout(self):
        import numpy as np
        import pytest
        from rehab_assess.policy.mlp import Architecture
        from rehab_assess.policy.mlp import QPolicy
        from rehab_assess.policy.mlp import model_from_layers
        from rehab_assess.sim_mgr import SimManager
        from rehab_assess.task import ChainTask
        task = ChainTask()
        arch = Architecture(input_dim=5, hidden_dims=(), output_dim=2,
                            head='linear')
        optimal = task.optimal_q()
        kernel = np.where(np.isfinite(optimal), optimal, -10.)
        model = model_from_layers(arch, [(kernel, np.zeros(2))])
        sim_mgr = SimManager(QPolicy(arch), task)
        scores, final_state, steps = sim_mgr.eval_params(
            model.params, task.reset_to(np.arange(5)))
        value = optimal.max(axis=1)
        assert np.asarray(scores).tolist() == pytest.approx(value.tolist())
        assert np.asarray(steps).tolist() == [2, 1, 3, 2, 1]
        assert np.asarray(final_state.position).tolist() == [1, 1, 4, 4, 4]


def _threshold_set(n=40, n_features=3, seed=0):
    import numpy as np
    rnd = np.random.RandomState(seed)
    values = rnd.normal(size=(n, n_features))
    labels = (values[:, 0] > 0).astype(np.int64)
    return values, labels


def _one_informative(n=200, n_features=10, seed=0):
    import numpy as np
    rnd = np.random.RandomState(seed)
    labels = np.array([0, 1] * (n // 2))
    values = rnd.normal(size=(n, n_features))
    values[:, 0] = (2. * labels - 1.) * (0.5 + np.abs(values[:, 0]))
    return values, labels


class TestSelector:
    def test_expensive_features_are_never_acquired(self):
        import numpy as np
        from rehab_assess.algo.double_q import RlConfig
        from rehab_assess.algo.double_q import evaluate_selector
        from rehab_assess.algo.double_q import train_selector
        values, labels = _threshold_set()
        cfg = RlConfig(feature_cost=2.5, episodes=1500, q_hidden=(16,),
                       log_interval=1000)
        selector = train_selector(values, labels, cfg)
        result = evaluate_selector(selector, values, labels)
        assert result['masks'].sum() == 0
        assert np.all(result['lengths'] == 1)

    def test_single_episode_matches_batched_rollout(self):
        import numpy as np
        from rehab_assess.algo.double_q import RlConfig
        from rehab_assess.algo.double_q import evaluate_selector
        from rehab_assess.algo.double_q import select_and_classify
        from rehab_assess.algo.double_q import train_selector
        from rehab_assess.kinematics import FeatureVector
        values, labels = _threshold_set(n=20)
        cfg = RlConfig(episodes=300, q_hidden=(8,), log_interval=1000)
        selector = train_selector(values, labels, cfg)
        assert selector.num_features == 3
        batched = evaluate_selector(selector, values, labels)
        names = ('a', 'b', 'c')
        for i in range(len(labels)):
            mask, prediction, trace = select_and_classify(
                selector, FeatureVector(names, values[i]), int(labels[i]))
            assert mask.tolist() == batched['masks'][i].tolist()
            assert prediction == int(batched['predictions'][i])
            assert abs(trace.total_reward - batched['returns'][i]) < 1e-9
            assert trace.actions[-1].is_terminal

    def test_acquires_only_the_informative_feature(self):
        import numpy as np
        from rehab_assess.algo.double_q import RlConfig
        from rehab_assess.algo.double_q import evaluate_selector
        from rehab_assess.algo.double_q import train_selector
        values, labels = _one_informative()
        cfg = RlConfig(feature_cost=0.1, episodes=3000, q_hidden=(32,),
                       log_interval=1000)
        selector = train_selector(values, labels, cfg)
        test_values, test_labels = _one_informative(seed=1)
        result = evaluate_selector(selector, test_values, test_labels)
        assert result['masks'].sum(axis=1).mean() <= 2.0
        assert np.mean(result['predictions'] == test_labels) >= 0.95
        assert result['masks'][:, 0].mean() >= 0.9

    def test_higher_cost_never_acquires_more(self):
        from rehab_assess.algo.double_q import RlConfig
        from rehab_assess.algo.double_q import evaluate_selector
        from rehab_assess.algo.double_q import train_selector
        values, labels = _one_informative(n_features=4)
        acquired = []
        for cost in (0.01, 0.05, 0.5):
            cfg = RlConfig(feature_cost=cost, episodes=2000, q_hidden=(32,),
                           log_interval=1000)
            selector = train_selector(values, labels, cfg)
            result = evaluate_selector(selector, values, labels)
            acquired.append(float(result['masks'].sum(axis=1).mean()))
        for cheaper, dearer in zip(acquired, acquired[1:]):
            assert dearer <= cheaper + 0.5

    def test_degenerate_labels(self):
        import numpy as np
        import pytest
        from rehab_assess.algo.double_q import RlConfig
        from rehab_assess.algo.double_q import train_selector
        from rehab_assess.errors import DegenerateLabels
        values, _ = _threshold_set()
        with pytest.raises(DegenerateLabels):
            train_selector(values, np.zeros(len(values)), RlConfig())
