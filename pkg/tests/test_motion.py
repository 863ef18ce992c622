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


import json


def _frames(n_frames, dt=1. / 30., joints=None):
    from rehab_assess.data.motion import JOINTS
    names = joints or [j.value for j in JOINTS]
    return [{'t': i * dt,
             'joints': {name: [0.1 * k, 1.0 + 0.01 * i, 2.0]
                        for k, name in enumerate(names)}}
            for i in range(n_frames)]


def _record(subject='A', cohort='patient', side='affected', n_frames=30,
            **kwargs):
    record = {'subject': subject, 'cohort': cohort, 'exercise': 'E1',
              'side': side, 'frames': _frames(n_frames)}
    record.update(kwargs)
    return record


def _write(path, records):
    with open(path, 'w') as f:
        for record in records:
            f.write(json.dumps(record) + '\n')
    return str(path)


class TestParseDataset:
    def test_single_repetition(self, tmp_path):
        from rehab_assess.data.io import parse_dataset
        ds = parse_dataset(_write(tmp_path / 'one.jsonl', [_record()]))
        assert len(ds.repetitions) == 1
        assert ds.subject_ids == ['A']
        assert ds.repetitions[0].num_frames == 30
        assert ds.repetitions[0].positions.shape == (30, 11, 3)

    def test_empty_file(self, tmp_path):
        import pytest
        from rehab_assess.data.io import parse_dataset
        from rehab_assess.errors import SchemaError
        with pytest.raises(SchemaError, match='no records'):
            parse_dataset(_write(tmp_path / 'empty.jsonl', []))

    def test_unknown_joint(self, tmp_path):
        import pytest
        from rehab_assess.data.io import parse_dataset
        from rehab_assess.errors import SchemaError
        record = _record()
        for frame in record['frames']:
            frame['joints']['Foot'] = [0., 0., 0.]
        with pytest.raises(SchemaError, match='Foot') as info:
            parse_dataset(_write(tmp_path / 'foot.jsonl', [record]))
        assert info.value.line == 1

    def test_unknown_field(self, tmp_path):
        import pytest
        from rehab_assess.data.io import parse_dataset
        from rehab_assess.errors import SchemaError
        with pytest.raises(SchemaError, match='unknown field'):
            parse_dataset(_write(tmp_path / 'extra.jsonl',
                                 [_record(colour='red')]))

    def test_dominant_side_needs_healthy_subject(self, tmp_path):
        import pytest
        from rehab_assess.data.io import parse_dataset
        from rehab_assess.errors import SchemaError
        with pytest.raises(SchemaError):
            parse_dataset(_write(tmp_path / 'dominant.jsonl',
                                 [_record(side='dominant')]))

    def test_label_must_be_and_of_components(self, tmp_path):
        import pytest
        from rehab_assess.data.io import parse_dataset
        from rehab_assess.errors import SchemaError
        label = {'overall': 1, 'components': {
            'rom': 0, 'smoothness': 1, 'compensation': 1}}
        with pytest.raises(SchemaError):
            parse_dataset(_write(tmp_path / 'label.jsonl',
                                 [_record(label=label)]))

    def test_error_names_the_line(self, tmp_path):
        import pytest
        from rehab_assess.data.io import parse_dataset
        from rehab_assess.errors import SchemaError
        records = [_record(), _record(n_frames=5)]
        with pytest.raises(SchemaError, match='too few frames') as info:
            parse_dataset(_write(tmp_path / 'short.jsonl', records))
        assert info.value.line == 2

    def test_fugl_meyer_must_be_integer(self, tmp_path):
        import pytest
        from rehab_assess.data.io import parse_dataset
        from rehab_assess.errors import SchemaError
        for value in ('41', True, 40.5):
            with pytest.raises(SchemaError, match='fugl_meyer') as info:
                parse_dataset(_write(tmp_path / 'fm.jsonl',
                                     [_record(fugl_meyer=value)]))
            assert info.value.line == 1
        ds = parse_dataset(_write(tmp_path / 'fm.jsonl',
                                  [_record(fugl_meyer=41)]))
        assert ds.subjects[0].fugl_meyer == 41

    def test_rep_must_not_be_bool(self, tmp_path):
        import pytest
        from rehab_assess.data.io import parse_dataset
        from rehab_assess.errors import SchemaError
        with pytest.raises(SchemaError, match='rep'):
            parse_dataset(_write(tmp_path / 'rep.jsonl',
                                 [_record(rep=True)]))

    def test_missing_file(self, tmp_path):
        import pytest
        from rehab_assess.data.io import parse_dataset
        from rehab_assess.errors import IoError
        with pytest.raises(IoError):
            parse_dataset(str(tmp_path / 'absent.jsonl'))

    def test_repetition_counter_per_subject_exercise_side(self, tmp_path):
        from rehab_assess.data.io import parse_dataset
        from rehab_assess.data.motion import Exercise
        from rehab_assess.data.motion import Side
        ds = parse_dataset(_write(tmp_path / 'reps.jsonl',
                                  [_record(), _record(), _record('B')]))
        assert ds.get_repetition('A', Exercise.E1_CUP, Side.AFFECTED, 1)
        assert ds.get_repetition('B', Exercise.E1_CUP, Side.AFFECTED, 0)

    def test_round_trip(self, tmp_path):
        from rehab_assess.data.io import dump_dataset
        from rehab_assess.data.io import parse_dataset
        from rehab_assess.data.io import serialize_dataset
        from rehab_assess.data.synth import CorpusSpec
        from rehab_assess.data.synth import synth_dataset
        spec = CorpusSpec(n_patients=2, n_healthy=1, reps_per_patient_side=2,
                          reps_per_healthy=2, exercises=('E1',), seed=3)
        ds = synth_dataset(spec)
        path = str(tmp_path / 'corpus.jsonl')
        dump_dataset(ds, path)
        parsed = parse_dataset(path)
        assert serialize_dataset(parsed) == serialize_dataset(ds)
        assert parsed.subjects == ds.subjects
        for a, b in zip(parsed.repetitions, ds.repetitions):
            assert a.key == b.key
            assert a.label == b.label


class TestValidateRepetition:
    def _rep(self, times):
        import numpy as np
        from rehab_assess.data.motion import Exercise
        from rehab_assess.data.motion import MotionRepetition
        from rehab_assess.data.motion import Side
        times = np.asarray(times, dtype=np.float64)
        positions = np.ones((len(times), 11, 3))
        return MotionRepetition('A', Exercise.E1_CUP, Side.AFFECTED, times,
                                positions)

    def test_valid(self):
        import numpy as np
        from rehab_assess.data.motion import validate_repetition
        assert validate_repetition(self._rep(np.arange(61) / 30.)) == []

    def test_non_monotone_time(self):
        from rehab_assess.data.motion import validate_repetition
        assert validate_repetition(self._rep([0., 0.])) == [
            'non-monotone time']

    def test_too_few_frames(self):
        import numpy as np
        from rehab_assess.data.motion import validate_repetition
        assert validate_repetition(self._rep(np.arange(5) / 30.)) == [
            'too few frames']

    def test_duration_out_of_range(self):
        import numpy as np
        from rehab_assess.data.motion import validate_repetition
        assert validate_repetition(self._rep(np.arange(15) / 100.)) == [
            'duration out of range']


class TestQualityLabel:
    def test_overall_is_and_of_components(self):
        from rehab_assess.data.motion import QualityLabel
        label = QualityLabel.from_components(
            {'rom': 1, 'smoothness': 0, 'compensation': 1})
        assert label.overall == 0

    def test_rejects_non_binary(self):
        import pytest
        from rehab_assess.data.motion import QualityLabel
        with pytest.raises(ValueError):
            QualityLabel(overall=2)


class TestSplitBySubject:
    def _dataset(self):
        from rehab_assess.data.motion import Cohort
        from rehab_assess.data.motion import Dataset
        from rehab_assess.data.motion import SubjectMeta
        from rehab_assess.data.synth import ImpairmentSpec
        from rehab_assess.data.synth import synth_repetition
        reps = [synth_repetition('E1', ImpairmentSpec(), 1.0, seed=i,
                                 subject_id=s, rep_index=i)[0]
                for i, s in enumerate(['A', 'A', 'B'])]
        subjects = [SubjectMeta('A', Cohort.PATIENT),
                    SubjectMeta('B', Cohort.PATIENT)]
        return Dataset(subjects=subjects, repetitions=reps)

    def test_partition(self):
        from rehab_assess.data.motion import split_by_subject
        train, test = split_by_subject(self._dataset(), 'A')
        assert {r.subject_id for r in train.repetitions} == {'B'}
        assert len(test.repetitions) == 2
        assert train.subject_ids == ['B']

    def test_unknown_subject(self):
        import pytest
        from rehab_assess.data.motion import split_by_subject
        from rehab_assess.errors import UnknownSubject
        with pytest.raises(UnknownSubject):
            split_by_subject(self._dataset(), 'C')

    def test_clinical_shape(self):
        from rehab_assess.data.motion import split_by_subject
        from rehab_assess.data.synth import CorpusSpec
        from rehab_assess.data.synth import synth_dataset
        ds = synth_dataset(CorpusSpec(reps_per_patient_side=1,
                                      reps_per_healthy=1, exercises=('E1',)))
        assert len(ds.subjects) == 26
        train, test = split_by_subject(ds, 'P01')
        assert len(train.subjects) == 25
        assert test.subject_ids == ['P01']

    def test_duplicate_repetition(self):
        import pytest
        from rehab_assess.data.motion import Dataset
        ds = self._dataset()
        with pytest.raises(ValueError):
            Dataset(subjects=ds.subjects,
                    repetitions=ds.repetitions + ds.repetitions[:1])
