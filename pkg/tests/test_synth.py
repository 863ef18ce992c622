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


class TestMinJerk:
    def test_endpoints(self):
        from rehab_assess.data.synth import min_jerk_scalar
        assert min_jerk_scalar(0., 1., 0.) == 0.
        assert min_jerk_scalar(0., 1., 1.) == 1.

    def test_midpoint(self):
        import pytest
        from rehab_assess.data.synth import min_jerk_scalar
        assert min_jerk_scalar(0., 1., 0.5) == pytest.approx(0.5)

    def test_quarter(self):
        import pytest
        from rehab_assess.data.synth import min_jerk_scalar
        assert min_jerk_scalar(2., 4., 0.25) == pytest.approx(2.20703125)

    def test_vectorized_matches_scalar(self):
        import numpy as np
        from rehab_assess.data.synth import min_jerk
        from rehab_assess.data.synth import min_jerk_scalar
        tau = np.linspace(0., 1., 11)
        expected = [min_jerk_scalar(-1., 3., t) for t in tau]
        np.testing.assert_allclose(min_jerk(-1., 3., tau), expected)

    def test_tau_out_of_range(self):
        import pytest
        from rehab_assess.data.synth import min_jerk_scalar
        from rehab_assess.errors import DomainError
        with pytest.raises(DomainError):
            min_jerk_scalar(0., 1., 1.5)


class TestSynthRepetition:
    def test_unimpaired_is_correct(self):
        from rehab_assess.data.synth import ImpairmentSpec
        from rehab_assess.data.synth import synth_repetition
        rep, label = synth_repetition('E1', ImpairmentSpec(), 2.0, seed=0)
        assert label.overall == 1
        assert label.components == {
            'rom': 1, 'smoothness': 1, 'compensation': 1}
        assert rep.label == label

    def test_reduced_rom_is_incorrect(self):
        from rehab_assess.data.synth import ImpairmentSpec
        from rehab_assess.data.synth import synth_repetition
        _, label = synth_repetition(
            'E2', ImpairmentSpec(rom_scale=0.5), 2.0, seed=0)
        assert label.components['rom'] == 0
        assert label.overall == 0

    def test_threshold_rules(self):
        from rehab_assess.data.synth import ImpairmentSpec
        from rehab_assess.data.synth import LabelThresholds
        thresholds = LabelThresholds()
        assert thresholds.label(ImpairmentSpec(rom_scale=0.8)).overall == 1
        assert thresholds.label(
            ImpairmentSpec(jerk_noise_amp=0.02)).components == {
                'rom': 1, 'smoothness': 0, 'compensation': 1}
        assert thresholds.label(
            ImpairmentSpec(trunk_lean_deg=6.)).components[
                'compensation'] == 0

    def test_frames_at_30_hz(self):
        import numpy as np
        from rehab_assess.data.motion import validate_repetition
        from rehab_assess.data.synth import ImpairmentSpec
        from rehab_assess.data.synth import synth_repetition
        rep, _ = synth_repetition('E3', ImpairmentSpec(), 2.0, seed=1)
        assert rep.num_frames == 61
        np.testing.assert_allclose(np.diff(rep.times), 1. / 30.)
        assert validate_repetition(rep) == []

    def test_deterministic(self):
        import numpy as np
        from rehab_assess.data.synth import ImpairmentSpec
        from rehab_assess.data.synth import synth_repetition
        impairment = ImpairmentSpec(0.7, 0.03, 12.)
        a, _ = synth_repetition('E1', impairment, 2.3, seed=11)
        b, _ = synth_repetition('E1', impairment, 2.3, seed=11)
        c, _ = synth_repetition('E1', impairment, 2.3, seed=12)
        assert np.array_equal(a.positions, b.positions)
        assert not np.array_equal(a.positions, c.positions)

    def test_duration_range(self):
        import pytest
        from rehab_assess.data.synth import ImpairmentSpec
        from rehab_assess.data.synth import synth_repetition
        from rehab_assess.errors import DomainError
        with pytest.raises(DomainError):
            synth_repetition('E1', ImpairmentSpec(), 0.5, seed=0)

    def test_invalid_impairment(self):
        import pytest
        from rehab_assess.data.synth import ImpairmentSpec
        from rehab_assess.errors import DomainError
        with pytest.raises(DomainError):
            ImpairmentSpec(rom_scale=0.)

    def test_trunk_lean_tilts_spine(self):
        from rehab_assess.data.motion import JointName
        from rehab_assess.data.synth import ImpairmentSpec
        from rehab_assess.data.synth import synth_repetition
        from rehab_assess.kinematics import tilt_angle
        rep, _ = synth_repetition(
            'E1', ImpairmentSpec(trunk_lean_deg=20.), 2.0, seed=0)
        tilt = tilt_angle(rep.joint(JointName.SPINE_SHOULDER),
                          rep.joint(JointName.SPINE_BASE), (0., 1., 0.))
        assert tilt[0] < 1e-6
        assert 15. < tilt.max() <= 20. + 1e-6


class TestSynthDataset:
    def test_clinical_counts(self):
        from rehab_assess.data.motion import Side
        from rehab_assess.data.synth import CorpusSpec
        from rehab_assess.data.synth import synth_dataset
        ds = synth_dataset(CorpusSpec(exercises=('E1',)))
        assert len(ds.repetitions) == 15 * 10 * 2 + 11 * 15 == 465
        assert len(ds.filter(side=Side.DOMINANT).repetitions) == 165
        assert ds.subject_ids[0] == 'P01' and ds.subject_ids[-1] == 'H11'

    def test_single_patient(self):
        from rehab_assess.data.synth import CorpusSpec
        from rehab_assess.data.synth import synth_dataset
        ds = synth_dataset(CorpusSpec(n_patients=1, n_healthy=0,
                                      exercises=('E2',)))
        assert len(ds.repetitions) == 20

    def test_same_seed_same_bytes(self):
        from rehab_assess.data.io import serialize_dataset
        from rehab_assess.data.synth import CorpusSpec
        from rehab_assess.data.synth import synth_dataset
        spec = CorpusSpec(n_patients=2, n_healthy=1, reps_per_patient_side=2,
                          reps_per_healthy=2, seed=5)
        assert serialize_dataset(synth_dataset(spec)) == serialize_dataset(
            synth_dataset(spec))

    def test_normal_repetitions_are_correct(self):
        from rehab_assess.data.motion import Side
        from rehab_assess.data.synth import CorpusSpec
        from rehab_assess.data.synth import synth_dataset
        ds = synth_dataset(CorpusSpec(n_patients=3, n_healthy=2,
                                      reps_per_patient_side=3,
                                      reps_per_healthy=3, exercises=('E1',)))
        for rep in ds.repetitions:
            if rep.side is not Side.AFFECTED:
                assert rep.label.overall == 1

    def test_spec_dict(self):
        from rehab_assess.data.motion import Exercise
        from rehab_assess.data.synth import CorpusSpec
        spec = CorpusSpec.from_dict({'n_patients': 2, 'exercises': ['E3'],
                                     'thresholds': {'rom_scale': 0.7}})
        assert spec.exercises == (Exercise.E3_CANE,)
        assert spec.thresholds.rom_scale == 0.7
        assert CorpusSpec.from_dict(spec.to_dict()) == spec
