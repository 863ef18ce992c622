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


def _synth_rep(**kwargs):
    from rehab_assess.data.synth import ImpairmentSpec
    from rehab_assess.data.synth import synth_repetition
    rep, _ = synth_repetition('E1', kwargs.pop('impairment', ImpairmentSpec()),
                              2.0, seed=kwargs.pop('seed', 0), **kwargs)
    return rep


class TestAngles:
    def test_joint_angle(self):
        import pytest
        from rehab_assess.kinematics import joint_angle
        b = (0., 0., 0.)
        assert joint_angle((1., 0., 0.), b, (0., 1., 0.)) == pytest.approx(90.)
        assert joint_angle((1., 0., 0.), b, (-1., 0., 0.)) == pytest.approx(
            180.)
        assert joint_angle((1., 0., 0.), b, (1., 1., 0.)) == pytest.approx(
            45.)

    def test_joint_angle_per_frame(self):
        import numpy as np
        from rehab_assess.kinematics import joint_angle
        a = np.array([[1., 0., 0.], [1., 0., 0.]])
        c = np.array([[0., 1., 0.], [-1., 0., 0.]])
        np.testing.assert_allclose(joint_angle(a, np.zeros((2, 3)), c),
                                   [90., 180.])

    def test_degenerate_ray(self):
        import pytest
        from rehab_assess.errors import DegenerateGeometry
        from rehab_assess.kinematics import joint_angle
        with pytest.raises(DegenerateGeometry):
            joint_angle((0., 0., 0.), (0., 0., 0.), (1., 0., 0.))

    def test_tilt_angle(self):
        import pytest
        from rehab_assess.kinematics import tilt_angle
        up = (0., 1., 0.)
        assert tilt_angle((0., 1., 0.), (0., 0., 0.), up) == pytest.approx(0.)
        assert tilt_angle((1., 0., 0.), (0., 0., 0.), up) == pytest.approx(
            90.)
        assert tilt_angle((1., 1., 0.), (0., 0., 0.), up) == pytest.approx(
            45.)


class TestDerivativeSeries:
    def test_linear(self):
        import numpy as np
        from rehab_assess.kinematics import derivative_series
        ts = np.array([0., .1, .2, .3])
        np.testing.assert_allclose(derivative_series(2 * ts, ts, 1),
                                   [2., 2., 2., 2.])

    def test_constant(self):
        import numpy as np
        from rehab_assess.kinematics import derivative_series
        ts = np.linspace(0., 1., 10)
        for order in (1, 2, 3):
            np.testing.assert_allclose(
                derivative_series(np.full(10, 3.), ts, order), 0.)

    def test_central_difference(self):
        import numpy as np
        import pytest
        from rehab_assess.kinematics import derivative_series
        ts = np.array([0., .1, .2])
        assert derivative_series(ts ** 2, ts, 1)[1] == pytest.approx(0.2)

    def test_non_uniform_spacing(self):
        import numpy as np
        from rehab_assess.kinematics import derivative_series
        ts = np.array([0., .1, .3, .35, .6])
        np.testing.assert_allclose(derivative_series(3 * ts + 1, ts, 1), 3.)

    def test_errors(self):
        import numpy as np
        import pytest
        from rehab_assess.errors import DomainError
        from rehab_assess.errors import LengthMismatch
        from rehab_assess.errors import NonMonotoneTime
        from rehab_assess.kinematics import derivative_series
        with pytest.raises(NonMonotoneTime):
            derivative_series(np.zeros(3), np.array([0., .1, .1]), 1)
        with pytest.raises(LengthMismatch):
            derivative_series(np.zeros(3), np.array([0., .1]), 1)
        with pytest.raises(LengthMismatch):
            derivative_series(np.zeros(3), np.array([0., .1, .2]), 3)
        with pytest.raises(DomainError):
            derivative_series(np.zeros(3), np.array([0., .1, .2]), 4)


class TestRelativeDistance:
    def test_head_on_wrist(self):
        import numpy as np
        from rehab_assess.data.motion import JOINT_INDEX
        from rehab_assess.data.motion import JointName
        from rehab_assess.kinematics import relative_distance_series
        rep = _synth_rep()
        positions = rep.positions.copy()
        positions[:, JOINT_INDEX[JointName.HEAD]] = positions[
            :, JOINT_INDEX[JointName.WRIST_RIGHT]]
        rep = rep.__class__(rep.subject_id, rep.exercise, rep.side,
                            rep.times, positions, arm='right')
        np.testing.assert_allclose(
            relative_distance_series(rep, JointName.WRIST_RIGHT), 0.)

    def test_unit_ratio(self):
        import numpy as np
        from rehab_assess.data.motion import JOINT_INDEX
        from rehab_assess.data.motion import JointName
        from rehab_assess.kinematics import relative_distance_series
        rep = _synth_rep()
        positions = rep.positions.copy()
        # Trunk (SpineBase -> SpineShoulder) is 0.5 m at body_scale 1.
        positions[:, JOINT_INDEX[JointName.HEAD]] = positions[
            :, JOINT_INDEX[JointName.WRIST_RIGHT]] + [0.5, 0., 0.]
        rep = rep.__class__(rep.subject_id, rep.exercise, rep.side,
                            rep.times, positions, arm='right')
        np.testing.assert_allclose(
            relative_distance_series(rep, JointName.WRIST_RIGHT), 1.)

    def test_collapsed_trunk(self):
        import pytest
        from rehab_assess.data.motion import JOINT_INDEX
        from rehab_assess.data.motion import JointName
        from rehab_assess.errors import DegenerateGeometry
        from rehab_assess.kinematics import relative_distance_series
        rep = _synth_rep()
        positions = rep.positions.copy()
        positions[3, JOINT_INDEX[JointName.SPINE_SHOULDER]] = positions[
            3, JOINT_INDEX[JointName.SPINE_BASE]]
        rep = rep.__class__(rep.subject_id, rep.exercise, rep.side,
                            rep.times, positions)
        with pytest.raises(DegenerateGeometry) as info:
            relative_distance_series(rep, JointName.WRIST_RIGHT)
        assert info.value.frame == 3


class TestExtractFeatures:
    def test_default_layout(self):
        from rehab_assess.kinematics import FeatureConfig
        cfg = FeatureConfig()
        assert cfg.dim == 60
        assert len(cfg.feature_names) == 60
        assert cfg.feature_names[0] == 'elbow_flexion.max'
        assert cfg.feature_names[-1] == 'headelbow_dist.std'

    def test_vector(self):
        import numpy as np
        from rehab_assess.kinematics import extract_features
        fv = extract_features(_synth_rep())
        assert fv.dim == 60
        assert np.all(np.isfinite(fv.values))
        assert fv.effective_mask.sum() == 60
        assert fv.as_dict()['elbow_flexion.max'] > 0.

    def test_summaries_are_configurable(self):
        from rehab_assess.kinematics import FeatureConfig
        from rehab_assess.kinematics import extract_features
        cfg = FeatureConfig(summaries=('std', 'min'))
        fv = extract_features(_synth_rep(), cfg)
        assert fv.dim == 30
        assert fv.names[:2] == ('elbow_flexion.min', 'elbow_flexion.std')

    def test_static_pose(self):
        import numpy as np
        import pytest
        from rehab_assess.data.motion import MotionRepetition
        from rehab_assess.kinematics import extract_features
        rep = _synth_rep()
        still = MotionRepetition(
            rep.subject_id, rep.exercise, rep.side, rep.times,
            np.repeat(rep.positions[:1], rep.num_frames, axis=0), arm='right')
        fv = extract_features(still).as_dict()
        for name, value in fv.items():
            series = name.split('.')[0]
            if series.endswith(('_speed', '_accel', '_jerk')):
                assert value == pytest.approx(0., abs=1e-9)

    def test_translation_and_heading_invariance(self):
        import numpy as np
        from rehab_assess.data.motion import MotionRepetition
        from rehab_assess.kinematics import extract_features
        rep = _synth_rep(seed=4)
        angle = np.deg2rad(30.)
        rot = np.array([[np.cos(angle), 0., np.sin(angle)],
                        [0., 1., 0.],
                        [-np.sin(angle), 0., np.cos(angle)]])
        moved = MotionRepetition(
            rep.subject_id, rep.exercise, rep.side, rep.times,
            rep.positions @ rot.T + [1., -2., 3.], arm=rep.arm)
        np.testing.assert_allclose(extract_features(moved).values,
                                   extract_features(rep).values,
                                   rtol=1e-6, atol=1e-6)

    def test_more_reach_more_range(self):
        from rehab_assess.data.synth import ImpairmentSpec
        from rehab_assess.kinematics import extract_features
        full = extract_features(_synth_rep()).as_dict()
        short = extract_features(
            _synth_rep(impairment=ImpairmentSpec(rom_scale=0.4))).as_dict()
        assert short['headwrist_dist.range'] < full['headwrist_dist.range']

    def test_invalid_repetition(self):
        import numpy as np
        import pytest
        from rehab_assess.data.motion import MotionRepetition
        from rehab_assess.errors import DomainError
        from rehab_assess.kinematics import extract_features
        rep = _synth_rep()
        short = MotionRepetition(rep.subject_id, rep.exercise, rep.side,
                                 rep.times[:5], rep.positions[:5])
        with pytest.raises(DomainError):
            extract_features(short)

    def test_family(self):
        import pytest
        from rehab_assess.errors import DomainError
        from rehab_assess.kinematics import feature_family
        assert feature_family('headwrist_dist.range') == 'rom'
        assert feature_family('wrist_jerk.max') == 'smoothness'
        assert feature_family('elbow_speed.mean') == 'speed'
        assert feature_family('spine_tilt.max') == 'compensation'
        with pytest.raises(DomainError):
            feature_family('knee_angle.max')


class TestFeatureTable:
    def _table(self):
        from rehab_assess.data.synth import CorpusSpec
        from rehab_assess.data.synth import synth_dataset
        from rehab_assess.kinematics import feature_table
        ds = synth_dataset(CorpusSpec(n_patients=2, n_healthy=1,
                                      reps_per_patient_side=2,
                                      reps_per_healthy=2, exercises=('E1',)))
        return feature_table(ds)

    def test_rows_and_labels(self):
        table = self._table()
        assert len(table) == 10
        assert table.values.shape == (10, 60)
        assert table.has_labels and table.has_components
        assert table.subject_ids == ['P01', 'P02', 'H01']

    def test_threads_give_same_table(self):
        import numpy as np
        from rehab_assess.data.synth import CorpusSpec
        from rehab_assess.data.synth import synth_dataset
        from rehab_assess.kinematics import feature_table
        ds = synth_dataset(CorpusSpec(n_patients=1, n_healthy=1,
                                      reps_per_patient_side=2,
                                      reps_per_healthy=2, exercises=('E2',)))
        assert np.array_equal(feature_table(ds).values,
                              feature_table(ds, threads=3).values)

    def test_filter_and_lookup(self):
        import pytest
        from rehab_assess.data.motion import Exercise
        from rehab_assess.data.motion import Side
        table = self._table()
        unaffected = table.filter(side=Side.UNAFFECTED, subject_id='P02')
        assert len(unaffected) == 2
        row = table.row_index('H01', Exercise.E1_CUP, Side.DOMINANT, 1)
        assert table.subjects[row] == 'H01' and table.reps[row] == 1
        with pytest.raises(KeyError):
            table.row_index('H01', Exercise.E1_CUP, Side.DOMINANT, 7)

    def test_csv_round_trip(self, tmp_path):
        import numpy as np
        from rehab_assess.kinematics import read_feature_csv
        table = self._table()
        path = str(tmp_path / 'features.csv')
        table.to_csv(path)
        loaded = read_feature_csv(path)
        assert loaded.names == table.names
        assert np.array_equal(loaded.values, table.values)
        assert np.array_equal(loaded.labels, table.labels)
        assert loaded.subjects.tolist() == table.subjects.tolist()

    def test_feature_vector_checks(self):
        import pytest
        from rehab_assess.errors import DimensionMismatch
        from rehab_assess.errors import DomainError
        from rehab_assess.kinematics import FeatureVector
        with pytest.raises(DimensionMismatch):
            FeatureVector(('a', 'b'), [1.])
        with pytest.raises(DomainError):
            FeatureVector(('a',), [float('nan')])
        fv = FeatureVector(('a', 'b'), [1., 2.], [0, 1])
        assert fv.masked_values().tolist() == [0., 2.]
