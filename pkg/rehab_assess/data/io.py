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

"""JSON Lines ingestion and export of motion datasets.

One record per repetition:

    {"subject": "P01", "cohort": "patient", "fugl_meyer": 37,
     "exercise": "E1", "side": "affected", "rep": 0, "arm": "right",
     "label": {"overall": 1,
               "components": {"rom": 1, "smoothness": 1, "compensation": 1}},
     "frames": [{"t": 0.0, "joints": {"Head": [x, y, z], ...}}, ...]}

`fugl_meyer`, `rep`, `arm` and `label` are optional; any other key is
rejected.
"""

import json
from collections import defaultdict
from typing import Any
from typing import Dict
from typing import List

import numpy as np

from rehab_assess.data.motion import Cohort
from rehab_assess.data.motion import Dataset
from rehab_assess.data.motion import Exercise
from rehab_assess.data.motion import JOINTS
from rehab_assess.data.motion import JOINT_INDEX
from rehab_assess.data.motion import JointName
from rehab_assess.data.motion import MotionRepetition
from rehab_assess.data.motion import QualityLabel
from rehab_assess.data.motion import Side
from rehab_assess.data.motion import SubjectMeta
from rehab_assess.data.motion import validate_repetition
from rehab_assess.errors import IoError
from rehab_assess.errors import SchemaError

_REQUIRED_KEYS = {'subject', 'cohort', 'exercise', 'side', 'frames'}
_OPTIONAL_KEYS = {'fugl_meyer', 'rep', 'arm', 'label'}


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _parse_enum(enum_cls, value: Any, field: str, line: int):
    try:
        return enum_cls(value)
    except ValueError:
        raise SchemaError(line, 'invalid {}: {!r}'.format(field, value))


def _parse_label(obj: Any, line: int) -> QualityLabel:
    if not isinstance(obj, dict) or 'overall' not in obj:
        raise SchemaError(line, 'label must be an object with "overall"')
    unknown = set(obj) - {'overall', 'components'}
    if unknown:
        raise SchemaError(line, 'unknown label keys: {}'.format(
            ', '.join(sorted(unknown))))
    components = obj.get('components')
    if components is not None and not isinstance(components, dict):
        raise SchemaError(line, 'label components must be an object')
    try:
        return QualityLabel(overall=obj['overall'], components=components)
    except ValueError as e:
        raise SchemaError(line, str(e))


def _parse_frames(frames: Any, line: int):
    if not isinstance(frames, list) or not frames:
        raise SchemaError(line, 'frames must be a non-empty list')
    times = np.zeros(len(frames))
    positions = np.zeros((len(frames), len(JOINTS), 3))
    for i, frame in enumerate(frames):
        if not isinstance(frame, dict) or set(frame) != {'t', 'joints'}:
            raise SchemaError(
                line, 'frame {} must have exactly "t" and "joints"'.format(i))
        joints = frame['joints']
        if not isinstance(joints, dict):
            raise SchemaError(line, 'frame {}: joints must be an object'
                              .format(i))
        for name, xyz in joints.items():
            try:
                joint = JointName.parse(name)
            except ValueError:
                raise SchemaError(
                    line, 'frame {}: unknown joint "{}"'.format(i, name))
            if (not isinstance(xyz, list) or len(xyz) != 3 or
                    not all(isinstance(v, (int, float)) and
                            not isinstance(v, bool) for v in xyz)):
                raise SchemaError(
                    line, 'frame {}: joint {} must be [x, y, z]'.format(
                        i, name))
            positions[i, JOINT_INDEX[joint]] = xyz
        missing = [j.value for j in JOINTS if j.value not in joints]
        if missing:
            raise SchemaError(line, 'frame {}: missing joints {}'.format(
                i, ', '.join(missing)))
        t = frame['t']
        if not isinstance(t, (int, float)) or isinstance(t, bool):
            raise SchemaError(line, 'frame {}: t must be a number'.format(i))
        times[i] = t
    return times, positions


def parse_record(record: Any, line: int, rep_index: int) -> Dict[str, Any]:
    """Validate one decoded record, returning subject meta and repetition."""

    if not isinstance(record, dict):
        raise SchemaError(line, 'record must be a JSON object')
    missing = _REQUIRED_KEYS - set(record)
    if missing:
        raise SchemaError(line, 'missing field(s): {}'.format(
            ', '.join(sorted(missing))))
    unknown = set(record) - _REQUIRED_KEYS - _OPTIONAL_KEYS
    if unknown:
        raise SchemaError(line, 'unknown field(s): {}'.format(
            ', '.join(sorted(unknown))))

    subject_id = record['subject']
    if not isinstance(subject_id, str) or not subject_id:
        raise SchemaError(line, 'subject must be a non-empty string')
    cohort = _parse_enum(Cohort, record['cohort'], 'cohort', line)
    fugl_meyer = record.get('fugl_meyer')
    if fugl_meyer is not None and not _is_int(fugl_meyer):
        raise SchemaError(line, 'fugl_meyer must be an integer')
    try:
        meta = SubjectMeta(subject_id, cohort, fugl_meyer)
    except ValueError as e:
        raise SchemaError(line, str(e))

    exercise = _parse_enum(Exercise, record['exercise'], 'exercise', line)
    side = _parse_enum(Side, record['side'], 'side', line)
    if side is Side.DOMINANT and cohort is not Cohort.HEALTHY:
        raise SchemaError(line, 'side "dominant" requires a healthy subject')
    rep_index = record.get('rep', rep_index)
    if not _is_int(rep_index) or rep_index < 0:
        raise SchemaError(line, 'rep must be a non-negative integer')
    label = None
    if record.get('label') is not None:
        label = _parse_label(record['label'], line)
    times, positions = _parse_frames(record['frames'], line)
    try:
        rep = MotionRepetition(
            subject_id=subject_id, exercise=exercise, side=side,
            times=times, positions=positions, label=label,
            rep_index=rep_index, arm=record.get('arm'))
    except ValueError as e:
        raise SchemaError(line, str(e))
    violations = validate_repetition(rep)
    if violations:
        raise SchemaError(line, '; '.join(violations))
    return {'meta': meta, 'rep': rep}


def parse_dataset(path: str) -> Dataset:
    """Read and validate a JSON Lines dataset file."""

    try:
        with open(path) as f:
            lines = f.readlines()
    except OSError as e:
        raise IoError('cannot read {}: {}'.format(path, e)) from e

    subjects: Dict[str, SubjectMeta] = {}
    reps: List[MotionRepetition] = []
    keys = set()
    counters = defaultdict(int)
    for line_no, text in enumerate(lines, start=1):
        if not text.strip():
            continue
        try:
            record = json.loads(text)
        except json.JSONDecodeError as e:
            raise SchemaError(line_no, 'invalid JSON: {}'.format(e.msg))
        if isinstance(record, dict):
            counter_key = tuple(
                str(record.get(k)) for k in ('subject', 'exercise', 'side'))
        else:
            counter_key = None
        parsed = parse_record(record, line_no, counters[counter_key])
        counters[counter_key] += 1
        meta, rep = parsed['meta'], parsed['rep']
        known = subjects.setdefault(meta.subject_id, meta)
        if known != meta:
            raise SchemaError(
                line_no, 'subject {} has inconsistent cohort or fugl_meyer'
                .format(meta.subject_id))
        if rep.key in keys:
            raise SchemaError(line_no, 'duplicate repetition {} {} {} {}'
                              .format(rep.subject_id, rep.exercise.value,
                                      rep.side.value, rep.rep_index))
        keys.add(rep.key)
        reps.append(rep)

    if not reps:
        raise SchemaError(0, 'no records')
    return Dataset(subjects=tuple(subjects.values()), repetitions=tuple(reps))


def repetition_to_record(rep: MotionRepetition,
                         meta: SubjectMeta) -> Dict[str, Any]:
    record = {
        'subject': rep.subject_id,
        'cohort': meta.cohort.value,
    }
    if meta.fugl_meyer is not None:
        record['fugl_meyer'] = meta.fugl_meyer
    record['exercise'] = rep.exercise.value
    record['side'] = rep.side.value
    record['rep'] = rep.rep_index
    if rep.arm is not None:
        record['arm'] = rep.arm
    if rep.label is not None:
        label = {'overall': rep.label.overall}
        if rep.label.components is not None:
            label['components'] = dict(rep.label.components)
        record['label'] = label
    record['frames'] = [
        {'t': float(t),
         'joints': {j.value: [float(v) for v in p[JOINT_INDEX[j]]]
                    for j in JOINTS}}
        for t, p in zip(rep.times, rep.positions)]
    return record


def serialize_dataset(ds: Dataset) -> str:
    """Render a dataset as JSON Lines text; equal datasets give equal bytes."""
    metas = {s.subject_id: s for s in ds.subjects}
    return ''.join(
        json.dumps(repetition_to_record(rep, metas[rep.subject_id]),
                   separators=(',', ':')) + '\n'
        for rep in ds.repetitions)


def dump_dataset(ds: Dataset, path: str) -> None:
    try:
        with open(path, 'w') as f:
            f.write(serialize_dataset(ds))
    except OSError as e:
        raise IoError('cannot write {}: {}'.format(path, e)) from e
