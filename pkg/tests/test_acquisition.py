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


def _instance(values, truth):
    from rehab_assess.kinematics import FeatureVector
    names = tuple('f{}'.format(i) for i in range(len(values)))
    return FeatureVector(names, values), truth


class TestLegalActions:
    def test_empty_mask(self):
        from rehab_assess.task.acquisition import AcquisitionState
        from rehab_assess.task.acquisition import legal_actions
        assert len(legal_actions(AcquisitionState.empty(3))) == 5

    def test_full_mask(self):
        import numpy as np
        from rehab_assess.task.acquisition import CLASSIFY0
        from rehab_assess.task.acquisition import CLASSIFY1
        from rehab_assess.task.acquisition import AcquisitionState
        from rehab_assess.task.acquisition import legal_actions
        s = AcquisitionState(np.zeros(3), np.ones(3, dtype=np.int32))
        assert legal_actions(s) == [CLASSIFY0, CLASSIFY1]

    def test_partial_mask(self):
        import numpy as np
        from rehab_assess.task.acquisition import CLASSIFY0
        from rehab_assess.task.acquisition import CLASSIFY1
        from rehab_assess.task.acquisition import AcquisitionState
        from rehab_assess.task.acquisition import SelectorAction
        from rehab_assess.task.acquisition import legal_actions
        from rehab_assess.task.acquisition import legal_mask
        s = AcquisitionState(np.zeros(2), np.array([1, 0], dtype=np.int32))
        assert legal_actions(s) == [SelectorAction.acquire(1), CLASSIFY0,
                                    CLASSIFY1]
        assert legal_mask(s.mask).tolist() == [False, True, True, True]

    def test_integer_encoding(self):
        import pytest
        from rehab_assess.errors import IllegalAction
        from rehab_assess.task.acquisition import CLASSIFY1
        from rehab_assess.task.acquisition import SelectorAction
        assert SelectorAction.from_int(4, 4) == SelectorAction.classify(0)
        assert CLASSIFY1.to_int(4) == 5
        assert SelectorAction.acquire(2).to_int(4) == 2
        with pytest.raises(IllegalAction):
            SelectorAction.from_int(6, 4)


class TestTransition:
    def test_acquire(self):
        import pytest
        from rehab_assess.task.acquisition import AcquisitionState
        from rehab_assess.task.acquisition import SelectorAction
        from rehab_assess.task.acquisition import transition
        s = AcquisitionState.empty(3)
        s2, reward, done = transition(s, SelectorAction.acquire(2),
                                      _instance([0.3, -1.2, 0.7], 1))
        assert s2.mask.tolist() == [0, 0, 1]
        assert s2.observed.tolist() == [0., 0., 0.7]
        assert reward == pytest.approx(-0.05)
        assert not done
        assert s.mask.tolist() == [0, 0, 0]
        assert s2.budget_used == 1

    def test_classify(self):
        from rehab_assess.task.acquisition import CLASSIFY0
        from rehab_assess.task.acquisition import CLASSIFY1
        from rehab_assess.task.acquisition import AcquisitionState
        from rehab_assess.task.acquisition import transition
        s = AcquisitionState.empty(2)
        assert transition(s, CLASSIFY1, _instance([0., 0.], 1))[1:] == (
            1.0, True)
        assert transition(s, CLASSIFY0, _instance([0., 0.], 1))[1:] == (
            -1.0, True)

    def test_illegal(self):
        import numpy as np
        import pytest
        from rehab_assess.errors import DimensionMismatch
        from rehab_assess.errors import IllegalAction
        from rehab_assess.task.acquisition import AcquisitionState
        from rehab_assess.task.acquisition import SelectorAction
        from rehab_assess.task.acquisition import transition
        s = AcquisitionState(np.zeros(2), np.array([1, 0], dtype=np.int32))
        with pytest.raises(IllegalAction):
            transition(s, SelectorAction.acquire(0), _instance([1., 2.], 0))
        with pytest.raises(IllegalAction):
            transition(s, SelectorAction.classify(2), _instance([1., 2.], 0))
        with pytest.raises(DimensionMismatch):
            transition(s, SelectorAction.acquire(1), _instance([1.], 0))

    def test_encoding_matches_predictor_input(self):
        import numpy as np
        from rehab_assess.policy.mlp import encode_inputs
        from rehab_assess.task.acquisition import AcquisitionState
        from rehab_assess.task.acquisition import SelectorAction
        from rehab_assess.task.acquisition import transition
        fv, truth = _instance([0.3, -1.2, 0.7], 1)
        s, _, _ = transition(AcquisitionState.empty(3),
                             SelectorAction.acquire(1), (fv, truth))
        np.testing.assert_array_equal(s.encode(),
                                      encode_inputs(fv.values, s.mask))


class TestAcquisitionTask:
    def test_vectorized_step(self):
        import jax.numpy as jnp
        import numpy as np
        import pytest
        from rehab_assess.task import AcquisitionTask
        values = np.array([[1., 2., 3.], [4., 5., 6.]])
        task = AcquisitionTask(values, np.array([1, 0]))
        assert task.num_actions == 5
        assert task.obs_shape == (6,)
        assert task.max_steps == 4
        state = task.reset_to(np.array([0, 1]))
        assert np.asarray(state.obs).sum() == 0.
        state, reward, done = task.step(state, jnp.array([1, 2]))
        np.testing.assert_allclose(reward, [-0.05, -0.05])
        assert np.asarray(done).tolist() == [0, 0]
        np.testing.assert_allclose(state.obs[0], [0., 2., 0., 0., 1., 0.])
        assert np.asarray(state.legal[1]).tolist() == [
            True, True, False, True, True]
        state, reward, done = task.step(state, jnp.array([4, 4]))
        assert np.asarray(reward).tolist() == pytest.approx([1., -1.])
        assert np.asarray(done).tolist() == [1, 1]
        assert np.asarray(state.prediction).tolist() == [1, 1]

    def test_random_reset(self):
        import numpy as np
        from jax import random
        from rehab_assess.task import AcquisitionTask
        task = AcquisitionTask(np.eye(3), np.array([0, 1, 0]))
        state = task.reset(random.split(random.PRNGKey(0), 8))
        assert state.obs.shape == (8, 6)
        assert np.all(np.asarray(state.legal))

    def test_shape_check(self):
        import numpy as np
        import pytest
        from rehab_assess.errors import DimensionMismatch
        from rehab_assess.task import AcquisitionTask
        with pytest.raises(DimensionMismatch):
            AcquisitionTask(np.zeros((3, 2)), np.zeros(2))


class TestEpisodeTrace:
    def test_to_dict(self):
        from rehab_assess.task.acquisition import CLASSIFY1
        from rehab_assess.task.acquisition import AcquisitionState
        from rehab_assess.task.acquisition import EpisodeTrace
        from rehab_assess.task.acquisition import SelectorAction
        from rehab_assess.task.acquisition import transition
        fv, truth = _instance([0.5, 0.1], 1)
        s0 = AcquisitionState.empty(2)
        s1, r1, _ = transition(s0, SelectorAction.acquire(1), (fv, truth))
        _, r2, _ = transition(s1, CLASSIFY1, (fv, truth))
        trace = EpisodeTrace(states=(s0, s1),
                             actions=(SelectorAction.acquire(1), CLASSIFY1),
                             rewards=(r1, r2), prediction=1, truth=1)
        out = trace.to_dict(fv.names)
        assert out['mask'] == [0, 1]
        assert out['actions'] == ['acquire:f1', 'classify:1']
        assert trace.num_acquired == 1
        assert abs(trace.total_reward - 0.95) < 1e-12
