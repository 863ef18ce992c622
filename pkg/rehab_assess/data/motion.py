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

"""Subjects, exercise repetitions and quality labels.

A repetition stores its frames as two arrays: `times` with shape (T,) in
seconds and `positions` with shape (T, len(JOINTS), 3) in meters, joints in
`JOINTS` order. Both arrays are made read-only on construction.
"""

import dataclasses
import enum
from typing import Dict
from typing import List
from typing import Mapping
from typing import Optional
from typing import Tuple

import numpy as np

from rehab_assess.errors import UnknownSubject

MIN_FRAMES = 15
MIN_DURATION = 0.5
MAX_DURATION = 30.0
FRAME_RATE = 30.0


class JointName(enum.Enum):
    HEAD = 'Head'
    NECK = 'Neck'
    SPINE_SHOULDER = 'SpineShoulder'
    SPINE_MID = 'SpineMid'
    SPINE_BASE = 'SpineBase'
    SHOULDER_LEFT = 'ShoulderLeft'
    SHOULDER_RIGHT = 'ShoulderRight'
    ELBOW_LEFT = 'ElbowLeft'
    ELBOW_RIGHT = 'ElbowRight'
    WRIST_LEFT = 'WristLeft'
    WRIST_RIGHT = 'WristRight'

    @classmethod
    def parse(cls, name: str) -> 'JointName':
        try:
            return cls(name)
        except ValueError:
            raise ValueError('unknown joint: {}'.format(name)) from None


JOINTS: Tuple[JointName, ...] = tuple(JointName)
JOINT_INDEX: Dict[JointName, int] = {j: i for i, j in enumerate(JOINTS)}


class Exercise(enum.Enum):
    E1_CUP = 'E1'
    E2_LIGHT = 'E2'
    E3_CANE = 'E3'


class Side(enum.Enum):
    AFFECTED = 'affected'
    UNAFFECTED = 'unaffected'
    DOMINANT = 'dominant'


class Cohort(enum.Enum):
    PATIENT = 'patient'
    HEALTHY = 'healthy'


COMPONENTS = ('rom', 'smoothness', 'compensation')


@dataclasses.dataclass(frozen=True)
class QualityLabel(object):
    """Binary overall quality (1 = correct) with optional components."""

    overall: int
    components: Optional[Mapping[str, int]] = None

    def __post_init__(self):
        if self.overall not in (0, 1):
            raise ValueError('overall label must be 0 or 1')
        if self.components is not None:
            components = dict(self.components)
            for name, value in components.items():
                if value not in (0, 1):
                    raise ValueError(
                        'component {} must be 0 or 1'.format(name))
            if int(all(components.values())) != self.overall:
                raise ValueError(
                    'overall label must equal the AND of its components')
            object.__setattr__(self, 'components', components)

    @classmethod
    def from_components(cls, components: Mapping[str, int]) -> 'QualityLabel':
        return cls(overall=int(all(components.values())),
                   components=dict(components))


@dataclasses.dataclass(frozen=True)
class SubjectMeta(object):
    subject_id: str
    cohort: Cohort
    fugl_meyer: Optional[int] = None

    def __post_init__(self):
        if self.fugl_meyer is not None:
            if self.cohort is not Cohort.PATIENT:
                raise ValueError('fugl_meyer is only defined for patients')
            if not 0 <= self.fugl_meyer <= 66:
                raise ValueError('fugl_meyer must lie in [0, 66]')


@dataclasses.dataclass(frozen=True)
class JointFrame(object):
    t: float
    joints: Mapping[JointName, Tuple[float, float, float]]


@dataclasses.dataclass(frozen=True, eq=False)
class MotionRepetition(object):
    """One pre-segmented exercise repetition."""

    subject_id: str
    exercise: Exercise
    side: Side
    times: np.ndarray
    positions: np.ndarray
    label: Optional[QualityLabel] = None
    rep_index: int = 0
    arm: Optional[str] = None

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64)
        positions = np.array(self.positions, dtype=np.float64)
        times.setflags(write=False)
        positions.setflags(write=False)
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'positions', positions)
        if self.arm not in (None, 'left', 'right'):
            raise ValueError('arm must be "left" or "right"')

    @property
    def key(self) -> Tuple[str, Exercise, Side, int]:
        return self.subject_id, self.exercise, self.side, self.rep_index

    @property
    def num_frames(self) -> int:
        return int(self.times.shape[0])

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0]) if self.num_frames else 0.

    @property
    def frames(self) -> Tuple[JointFrame, ...]:
        return tuple(
            JointFrame(
                t=float(t),
                joints={j: tuple(float(v) for v in p[JOINT_INDEX[j]])
                        for j in JOINTS})
            for t, p in zip(self.times, self.positions))

    def joint(self, name: JointName) -> np.ndarray:
        """Trajectory of one joint, shape (T, 3)."""
        return self.positions[:, JOINT_INDEX[name], :]


def validate_repetition(rep: MotionRepetition) -> List[str]:
    """Return the violated MotionRepetition invariants (empty if valid).

    Time ordering is checked before the frame count and the frame count
    before the duration; the first failure among those ends the check.
    """

    violations = []
    positions = rep.positions
    if positions.ndim != 3 or positions.shape[1:] != (len(JOINTS), 3):
        violations.append('wrong joint set')
        return violations
    if positions.shape[0] != rep.times.shape[0]:
        violations.append('frame count mismatch')
        return violations
    if not np.all(np.isfinite(positions)):
        violations.append('non-finite coordinates')
    if not np.all(np.isfinite(rep.times)):
        violations.append('non-finite time')
        return violations
    if rep.num_frames and rep.times[0] < 0:
        violations.append('negative time')

    if rep.num_frames > 1 and np.any(np.diff(rep.times) <= 0):
        violations.append('non-monotone time')
        return violations
    if rep.num_frames < MIN_FRAMES:
        violations.append('too few frames')
        return violations
    if not MIN_DURATION <= rep.duration <= MAX_DURATION:
        violations.append('duration out of range')
    return violations


@dataclasses.dataclass(frozen=True, eq=False)
class Dataset(object):
    subjects: Tuple[SubjectMeta, ...]
    repetitions: Tuple[MotionRepetition, ...]

    def __post_init__(self):
        object.__setattr__(self, 'subjects', tuple(self.subjects))
        object.__setattr__(self, 'repetitions', tuple(self.repetitions))
        by_id = {}
        for s in self.subjects:
            if s.subject_id in by_id:
                raise ValueError(
                    'duplicate subject: {}'.format(s.subject_id))
            by_id[s.subject_id] = s
        seen = set()
        for rep in self.repetitions:
            meta = by_id.get(rep.subject_id)
            if meta is None:
                raise UnknownSubject(rep.subject_id)
            if rep.side is Side.DOMINANT and meta.cohort is not Cohort.HEALTHY:
                raise ValueError(
                    'side=dominant is only valid for healthy subjects '
                    '({})'.format(rep.subject_id))
            if rep.key in seen:
                raise ValueError('duplicate repetition: {}'.format(
                    _format_key(rep.key)))
            seen.add(rep.key)

    @property
    def subject_ids(self) -> List[str]:
        return [s.subject_id for s in self.subjects]

    def subject(self, subject_id: str) -> SubjectMeta:
        for s in self.subjects:
            if s.subject_id == subject_id:
                return s
        raise UnknownSubject(subject_id)

    def filter(self,
               exercise: Optional[Exercise] = None,
               side: Optional[Side] = None,
               subject_id: Optional[str] = None) -> 'Dataset':
        """Keep matching repetitions; subjects left without any are dropped."""
        reps = [r for r in self.repetitions
                if (exercise is None or r.exercise is exercise) and
                (side is None or r.side is side) and
                (subject_id is None or r.subject_id == subject_id)]
        used = {r.subject_id for r in reps}
        return Dataset(
            subjects=tuple(s for s in self.subjects if s.subject_id in used),
            repetitions=tuple(reps))

    def get_repetition(self,
                       subject_id: str,
                       exercise: Exercise,
                       side: Side,
                       rep_index: int) -> MotionRepetition:
        key = (subject_id, exercise, side, rep_index)
        for rep in self.repetitions:
            if rep.key == key:
                return rep
        if subject_id not in self.subject_ids:
            raise UnknownSubject(subject_id)
        raise KeyError('no repetition {}'.format(_format_key(key)))


def _format_key(key: Tuple[str, Exercise, Side, int]) -> str:
    subject_id, exercise, side, rep_index = key
    return '{}/{}/{}/{}'.format(
        subject_id, exercise.value, side.value, rep_index)


def split_by_subject(ds: Dataset, held_out: str) -> Tuple[Dataset, Dataset]:
    """Partition a dataset into (all other subjects, the held-out subject)."""

    if held_out not in ds.subject_ids:
        raise UnknownSubject(held_out)
    train = Dataset(
        subjects=tuple(s for s in ds.subjects if s.subject_id != held_out),
        repetitions=tuple(
            r for r in ds.repetitions if r.subject_id != held_out))
    test = Dataset(
        subjects=tuple(s for s in ds.subjects if s.subject_id == held_out),
        repetitions=tuple(
            r for r in ds.repetitions if r.subject_id == held_out))
    return train, test
