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


def _label_in_feature_zero(n=60, seed=0):
    import numpy as np
    rnd = np.random.RandomState(seed)
    labels = np.array([0, 1] * (n // 2))
    values = rnd.normal(size=(n, 5))
    values[:, 0] = 2. * labels - 1.
    return values, labels


def _small_cfg():
    from rehab_assess.trainer import TrainConfig
    return TrainConfig(hidden_widths=(8,), depths=(1,),
                       learning_rates=(0.1,), max_iter=200)


class TestRfe:
    def test_informative_feature_ranked_first(self):
        from rehab_assess.algo.rfe import RecursiveFeatureEliminator
        values, labels = _label_in_feature_zero()
        result = RecursiveFeatureEliminator(
            _small_cfg(), (8,), 0.1).fit(values, labels)
        assert result.ranking[0] == 0
        assert sorted(result.ranking) == [0, 1, 2, 3, 4]
        assert [size for size, _ in result.scores] == [5, 4, 3, 2, 1]
        assert result.ranks[0] == 1

    def test_informative_feature_stable_across_seeds(self):
        import dataclasses
        from rehab_assess.algo.rfe import RecursiveFeatureEliminator
        top = []
        for seed in range(20):
            values, labels = _label_in_feature_zero(seed=seed)
            cfg = dataclasses.replace(_small_cfg(), seed=seed)
            result = RecursiveFeatureEliminator(cfg, (8,), 0.1).fit(
                values, labels)
            top.append(result.ranking[0])
        assert top.count(0) >= 18

    def test_smallest_perfect_subset(self):
        from rehab_assess.algo.rfe import RecursiveFeatureEliminator
        values, labels = _label_in_feature_zero()
        result = RecursiveFeatureEliminator(
            _small_cfg(), (8,), 0.1).fit(values, labels)
        assert result.subset_size == 1
        assert result.support.tolist() == [1, 0, 0, 0, 0]
        assert result.model is not None

    def test_grid_searched_architecture(self):
        from rehab_assess.algo.rfe import rfe_select
        values, labels = _label_in_feature_zero()
        result = rfe_select(values, labels, _small_cfg())
        assert result.hidden_dims == (8,)
        assert result.learning_rate == 0.1
        assert result.to_dict(['a', 'b', 'c', 'd', 'e'])['ranked_names'][
            0] == 'a'

    def test_subset(self):
        import pytest
        from rehab_assess.algo.rfe import rfe_subset
        from rehab_assess.errors import DomainError
        assert rfe_subset([2, 0, 1], 3).tolist() == [1, 1, 1]
        assert rfe_subset([2, 0, 1], 1).tolist() == [0, 0, 1]
        with pytest.raises(DomainError):
            rfe_subset([2, 0, 1], 0)

    def test_drop_fraction(self):
        import pytest
        from rehab_assess.algo.rfe import RecursiveFeatureEliminator
        from rehab_assess.errors import DomainError
        with pytest.raises(DomainError):
            RecursiveFeatureEliminator(_small_cfg(), (8,), 0.1,
                                       drop_fraction=1.)
