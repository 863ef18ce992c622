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

"""Kinematic feature extraction.

Every repetition is turned into 15 time series, each summarized by a fixed
set of statistics into a named FeatureVector ("elbow_flexion.max", ...).

    Angles (degrees)
        elbow_flexion       180 - interior elbow angle.
        shoulder_flexion    upper arm vs. trunk-down in the sagittal plane.
        elbow_extension     interior elbow angle (its max is 180 - min
                            flexion).
        shoulder_abduction  upper arm vs. trunk-down in the frontal plane.
        head_tilt           Neck->Head vs. the up axis.
        spine_tilt          SpineBase->SpineShoulder vs. the up axis.
        shoulder_tilt       deviation of the shoulder line from horizontal.
    Derivatives of the wrist and elbow paths (m/s, m/s^2, m/s^3)
        {wrist,elbow}_{speed,accel,jerk}
    Distances (unitless, divided by the trunk length)
        headwrist_dist, headelbow_dist
"""

import concurrent.futures
import dataclasses
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
import pandas as pd

from rehab_assess.data.motion import COMPONENTS
from rehab_assess.data.motion import Dataset
from rehab_assess.data.motion import Exercise
from rehab_assess.data.motion import JointName
from rehab_assess.data.motion import MotionRepetition
from rehab_assess.data.motion import Side
from rehab_assess.data.motion import validate_repetition
from rehab_assess.errors import ConfigError
from rehab_assess.errors import DegenerateGeometry
from rehab_assess.errors import DimensionMismatch
from rehab_assess.errors import DomainError
from rehab_assess.errors import IoError
from rehab_assess.errors import LengthMismatch
from rehab_assess.errors import NonMonotoneTime

GEOMETRY_EPS = 1e-9
TRUNK_EPS = 1e-6

SERIES = (
    'elbow_flexion', 'shoulder_flexion', 'elbow_extension',
    'shoulder_abduction', 'head_tilt', 'spine_tilt', 'shoulder_tilt',
    'wrist_speed', 'wrist_accel', 'wrist_jerk',
    'elbow_speed', 'elbow_accel', 'elbow_jerk',
    'headwrist_dist', 'headelbow_dist',
)
SUMMARIES = ('max', 'min', 'range', 'mean', 'std')
DEFAULT_SUMMARIES = ('max', 'range', 'mean', 'std')

SERIES_FAMILY = {
    'elbow_flexion': 'rom',
    'shoulder_flexion': 'rom',
    'elbow_extension': 'rom',
    'shoulder_abduction': 'rom',
    'headwrist_dist': 'rom',
    'headelbow_dist': 'rom',
    'wrist_accel': 'smoothness',
    'wrist_jerk': 'smoothness',
    'elbow_accel': 'smoothness',
    'elbow_jerk': 'smoothness',
    'wrist_speed': 'speed',
    'elbow_speed': 'speed',
    'head_tilt': 'compensation',
    'spine_tilt': 'compensation',
    'shoulder_tilt': 'compensation',
}

META_COLUMNS = ('subject', 'exercise', 'side', 'rep', 'label') + tuple(
    'label_{}'.format(c) for c in COMPONENTS)


def feature_family(feature_name: str) -> str:
    """Family of a feature name such as "headwrist_dist.range"."""
    series = feature_name.split('.', 1)[0]
    try:
        return SERIES_FAMILY[series]
    except KeyError:
        raise DomainError('unknown feature: {}'.format(feature_name))


@dataclasses.dataclass(frozen=True)
class FeatureConfig(object):
    """Feature extraction settings.

    side - Moving arm, "left" or "right"; None resolves it per repetition.
    summaries - Statistics computed for every series.
    trunk_norm_joints - Segment whose length normalizes distances.
    up_axis - Vertical direction of the camera frame.
    smoothing - Apply a centered moving average to joint paths first.
    """

    side: Optional[str] = None
    summaries: Tuple[str, ...] = DEFAULT_SUMMARIES
    trunk_norm_joints: Tuple[JointName, JointName] = (
        JointName.SPINE_BASE, JointName.SPINE_SHOULDER)
    up_axis: Tuple[float, float, float] = (0., 1., 0.)
    smoothing: bool = False
    smoothing_window: int = 5

    def __post_init__(self):
        if self.side not in (None, 'left', 'right'):
            raise ConfigError('features.side must be left, right or null')
        summaries = tuple(self.summaries)
        if not summaries:
            raise ConfigError('at least one summary statistic is required')
        unknown = set(summaries) - set(SUMMARIES)
        if unknown:
            raise ConfigError('unknown summaries: {}'.format(
                ', '.join(sorted(unknown))))
        # Canonical order keeps feature names stable across configs.
        object.__setattr__(self, 'summaries', tuple(
            s for s in SUMMARIES if s in summaries))
        object.__setattr__(self, 'trunk_norm_joints', tuple(
            JointName.parse(j) if isinstance(j, str) else j
            for j in self.trunk_norm_joints))
        if len(self.trunk_norm_joints) != 2:
            raise ConfigError('trunk_norm_joints must name two joints')
        up = np.asarray(self.up_axis, dtype=np.float64)
        if up.shape != (3,) or np.linalg.norm(up) < GEOMETRY_EPS:
            raise ConfigError('up_axis must be a non-zero 3-vector')
        object.__setattr__(self, 'up_axis', tuple(float(v) for v in up))
        if self.smoothing_window < 1:
            raise ConfigError('smoothing_window must be positive')

    @property
    def feature_names(self) -> Tuple[str, ...]:
        return tuple('{}.{}'.format(series, summary)
                     for series in SERIES for summary in self.summaries)

    @property
    def dim(self) -> int:
        return len(SERIES) * len(self.summaries)

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> 'FeatureConfig':
        config = dict(config)
        for key in ('summaries', 'trunk_norm_joints', 'up_axis'):
            if key in config:
                config[key] = tuple(config[key])
        return cls(**config)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'side': self.side,
            'summaries': list(self.summaries),
            'trunk_norm_joints': [j.value for j in self.trunk_norm_joints],
            'up_axis': list(self.up_axis),
            'smoothing': self.smoothing,
            'smoothing_window': self.smoothing_window,
        }


@dataclasses.dataclass(frozen=True, eq=False)
class FeatureVector(object):
    """Named scalar features of one repetition with an acquisition mask."""

    names: Tuple[str, ...]
    values: np.ndarray
    mask: Optional[np.ndarray] = None

    def __post_init__(self):
        names = tuple(self.names)
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (len(names),):
            raise DimensionMismatch(
                'expected {} values, got shape {}'.format(
                    len(names), values.shape))
        if not np.all(np.isfinite(values)):
            raise DomainError('feature values must be finite')
        values.setflags(write=False)
        object.__setattr__(self, 'names', names)
        object.__setattr__(self, 'values', values)
        if self.mask is not None:
            mask = np.array(self.mask, dtype=np.int32)
            if mask.shape != values.shape:
                raise DimensionMismatch('mask length must equal {}'.format(
                    len(names)))
            if np.any((mask != 0) & (mask != 1)):
                raise DomainError('mask bits must be 0 or 1')
            mask.setflags(write=False)
            object.__setattr__(self, 'mask', mask)

    @property
    def dim(self) -> int:
        return len(self.names)

    @property
    def effective_mask(self) -> np.ndarray:
        if self.mask is None:
            return np.ones(self.dim, dtype=np.int32)
        return self.mask

    def with_mask(self, mask: Optional[np.ndarray]) -> 'FeatureVector':
        return FeatureVector(self.names, self.values, mask)

    def masked_values(self) -> np.ndarray:
        """Values with unacquired features zeroed."""
        return self.values * self.effective_mask

    def as_dict(self) -> Dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.values)}


def _angle_between(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    dot = np.sum(u * v, axis=-1)
    return np.degrees(np.arctan2(cross, dot))


def _check_rays(rays: Sequence[np.ndarray], what: str) -> None:
    for ray in rays:
        norms = np.linalg.norm(np.atleast_2d(ray), axis=-1)
        bad = np.flatnonzero(norms < GEOMETRY_EPS)
        if bad.size:
            frame = int(bad[0]) if np.ndim(ray) > 1 else None
            raise DegenerateGeometry(
                '{} has (almost) zero length'.format(what), frame=frame)


def joint_angle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Angle at vertex b between b->a and b->c in degrees, within [0, 180].

    Points may be single 3-vectors or per-frame arrays of shape (T, 3).
    """

    u = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    v = np.asarray(c, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    _check_rays([u, v], 'ray')
    angle = _angle_between(u, v)
    return float(angle) if np.ndim(angle) == 0 else angle


def tilt_angle(top: np.ndarray,
               bottom: np.ndarray,
               up_axis: np.ndarray) -> np.ndarray:
    """Angle between the segment bottom->top and up_axis in degrees."""

    seg = np.asarray(top, dtype=np.float64) - np.asarray(
        bottom, dtype=np.float64)
    _check_rays([seg], 'segment')
    up = np.broadcast_to(np.asarray(up_axis, dtype=np.float64), seg.shape)
    angle = _angle_between(seg, up)
    return float(angle) if np.ndim(angle) == 0 else angle


def derivative_series(xs: np.ndarray,
                      ts: np.ndarray,
                      order: int) -> np.ndarray:
    """Time derivative of the given order by repeated finite differences.

    Central differences inside, one-sided at the ends, using the actual
    (possibly non-uniform) spacing of ts. xs may carry trailing axes.
    """

    if order not in (1, 2, 3):
        raise DomainError('order must be 1, 2 or 3, got {}'.format(order))
    xs = np.asarray(xs, dtype=np.float64)
    ts = np.asarray(ts, dtype=np.float64)
    if ts.ndim != 1 or xs.shape[0] != ts.shape[0]:
        raise LengthMismatch('xs and ts must have the same length')
    if ts.shape[0] < max(order + 1, 2):
        raise LengthMismatch(
            'order {} needs at least {} samples'.format(order, order + 1))
    if np.any(np.diff(ts) <= 0):
        raise NonMonotoneTime('ts must be strictly increasing')
    out = xs
    for _ in range(order):
        out = np.gradient(out, ts, axis=0, edge_order=1)
    return out


def smooth_positions(positions: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average over frames; shrinks at the ends."""
    n_frames = positions.shape[0]
    frame = pd.DataFrame(positions.reshape(n_frames, -1))
    smoothed = frame.rolling(window, center=True, min_periods=1).mean()
    return smoothed.to_numpy().reshape(positions.shape)


def resolve_arm(rep: MotionRepetition, cfg: FeatureConfig) -> str:
    """Moving arm: config override, record field, else the longer path."""
    if cfg.side is not None:
        return cfg.side
    if rep.arm is not None:
        return rep.arm
    path = {}
    for arm, joint in (('left', JointName.WRIST_LEFT),
                       ('right', JointName.WRIST_RIGHT)):
        path[arm] = np.linalg.norm(
            np.diff(rep.joint(joint), axis=0), axis=-1).sum()
    return 'left' if path['left'] > path['right'] else 'right'


def _trunk_length(positions: Dict[JointName, np.ndarray],
                  cfg: FeatureConfig) -> np.ndarray:
    a, b = cfg.trunk_norm_joints
    length = np.linalg.norm(positions[a] - positions[b], axis=-1)
    bad = np.flatnonzero(length <= TRUNK_EPS)
    if bad.size:
        raise DegenerateGeometry('trunk segment collapsed', frame=int(bad[0]))
    return length


def _joint_paths(rep: MotionRepetition,
                 cfg: FeatureConfig) -> Dict[JointName, np.ndarray]:
    positions = rep.positions
    if cfg.smoothing:
        positions = smooth_positions(positions, cfg.smoothing_window)
    return {j: positions[:, i, :] for i, j in enumerate(JointName)}


def relative_distance_series(rep: MotionRepetition,
                             joint: JointName,
                             cfg: Optional[FeatureConfig] = None
                             ) -> np.ndarray:
    """Per-frame |Head - joint| divided by the trunk normalization length."""

    cfg = cfg or FeatureConfig()
    paths = _joint_paths(rep, cfg)
    trunk = _trunk_length(paths, cfg)
    dist = np.linalg.norm(paths[JointName.HEAD] - paths[joint], axis=-1)
    return dist / trunk


def _plane_angle(vec: np.ndarray,
                 normal: np.ndarray,
                 reference: np.ndarray) -> np.ndarray:
    """Angle to `reference` after projecting out `normal`; 0 if degenerate."""
    proj = vec - np.sum(vec * normal, axis=-1, keepdims=True) * normal
    norms = np.linalg.norm(proj, axis=-1)
    angle = _angle_between(proj, reference)
    return np.where(norms < GEOMETRY_EPS, 0., angle)


def _body_frame(paths: Dict[JointName, np.ndarray]):
    up = paths[JointName.SPINE_SHOULDER] - paths[JointName.SPINE_BASE]
    _check_rays([up], 'trunk segment')
    up = up / np.linalg.norm(up, axis=-1, keepdims=True)
    lateral = paths[JointName.SHOULDER_RIGHT] - paths[JointName.SHOULDER_LEFT]
    lateral = lateral - np.sum(lateral * up, axis=-1, keepdims=True) * up
    _check_rays([lateral], 'shoulder line')
    lateral = lateral / np.linalg.norm(lateral, axis=-1, keepdims=True)
    forward = np.cross(up, lateral)
    return up, lateral, forward


def compute_series(rep: MotionRepetition,
                   cfg: Optional[FeatureConfig] = None
                   ) -> Dict[str, np.ndarray]:
    """All 15 per-frame series of one repetition, keyed by series name."""

    cfg = cfg or FeatureConfig()
    paths = _joint_paths(rep, cfg)
    arm = resolve_arm(rep, cfg)
    if arm == 'right':
        shoulder = paths[JointName.SHOULDER_RIGHT]
        elbow = paths[JointName.ELBOW_RIGHT]
        wrist = paths[JointName.WRIST_RIGHT]
    else:
        shoulder = paths[JointName.SHOULDER_LEFT]
        elbow = paths[JointName.ELBOW_LEFT]
        wrist = paths[JointName.WRIST_LEFT]
    up_axis = np.asarray(cfg.up_axis)
    up_axis = up_axis / np.linalg.norm(up_axis)

    up, lateral, forward = _body_frame(paths)
    interior = joint_angle(shoulder, elbow, wrist)
    upper_arm = elbow - shoulder
    _check_rays([upper_arm], 'upper arm')
    shoulder_line_tilt = tilt_angle(
        paths[JointName.SHOULDER_RIGHT], paths[JointName.SHOULDER_LEFT],
        up_axis)

    series = {
        'elbow_flexion': 180. - interior,
        'shoulder_flexion': _plane_angle(upper_arm, lateral, -up),
        'elbow_extension': interior,
        'shoulder_abduction': _plane_angle(upper_arm, forward, -up),
        'head_tilt': tilt_angle(
            paths[JointName.HEAD], paths[JointName.NECK], up_axis),
        'spine_tilt': tilt_angle(
            paths[JointName.SPINE_SHOULDER], paths[JointName.SPINE_BASE],
            up_axis),
        'shoulder_tilt': np.abs(90. - shoulder_line_tilt),
    }
    for name, path in (('wrist', wrist), ('elbow', elbow)):
        for order, suffix in ((1, 'speed'), (2, 'accel'), (3, 'jerk')):
            series['{}_{}'.format(name, suffix)] = np.linalg.norm(
                derivative_series(path, rep.times, order), axis=-1)
    trunk = _trunk_length(paths, cfg)
    head = paths[JointName.HEAD]
    series['headwrist_dist'] = np.linalg.norm(head - wrist, axis=-1) / trunk
    series['headelbow_dist'] = np.linalg.norm(head - elbow, axis=-1) / trunk
    return series


def summarize(values: np.ndarray, summary: str) -> float:
    if summary == 'max':
        return float(np.max(values))
    if summary == 'min':
        return float(np.min(values))
    if summary == 'range':
        return float(np.ptp(values))
    if summary == 'mean':
        return float(np.mean(values))
    if summary == 'std':
        return float(np.std(values))
    raise DomainError('unknown summary: {}'.format(summary))


def extract_features(rep: MotionRepetition,
                     cfg: Optional[FeatureConfig] = None) -> FeatureVector:
    """Summarize one repetition into cfg.dim named features (all acquired)."""

    cfg = cfg or FeatureConfig()
    violations = validate_repetition(rep)
    if violations:
        raise DomainError('invalid repetition {}: {}'.format(
            rep.subject_id, '; '.join(violations)))
    series = compute_series(rep, cfg)
    values = [summarize(series[s], summary)
              for s in SERIES for summary in cfg.summaries]
    return FeatureVector(names=cfg.feature_names, values=np.array(values),
                         mask=np.ones(cfg.dim, dtype=np.int32))


@dataclasses.dataclass(frozen=True, eq=False)
class FeatureTable(object):
    """Feature matrix of a dataset with per-row metadata.

    Label columns hold -1 where a repetition is unlabeled.
    """

    names: Tuple[str, ...]
    values: np.ndarray
    subjects: np.ndarray
    exercises: np.ndarray
    sides: np.ndarray
    reps: np.ndarray
    labels: np.ndarray
    components: np.ndarray

    def __post_init__(self):
        n_rows = self.values.shape[0]
        if self.values.ndim != 2 or self.values.shape[1] != len(self.names):
            raise DimensionMismatch('values must have shape (N, {})'.format(
                len(self.names)))
        for field in ('subjects', 'exercises', 'sides', 'reps', 'labels'):
            if len(getattr(self, field)) != n_rows:
                raise LengthMismatch('{} must have {} rows'.format(
                    field, n_rows))
        if self.components.shape != (n_rows, len(COMPONENTS)):
            raise LengthMismatch('components must have shape (N, {})'.format(
                len(COMPONENTS)))
        object.__setattr__(self, 'names', tuple(self.names))

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def has_labels(self) -> bool:
        return bool(len(self)) and bool(np.all(self.labels >= 0))

    @property
    def has_components(self) -> bool:
        return bool(len(self)) and bool(np.all(self.components >= 0))

    @property
    def subject_ids(self) -> List[str]:
        """Subjects in order of first appearance."""
        return list(dict.fromkeys(self.subjects.tolist()))

    def take(self, rows: np.ndarray) -> 'FeatureTable':
        rows = np.asarray(rows)
        return FeatureTable(
            names=self.names, values=self.values[rows],
            subjects=self.subjects[rows], exercises=self.exercises[rows],
            sides=self.sides[rows], reps=self.reps[rows],
            labels=self.labels[rows], components=self.components[rows])

    def filter(self,
               exercise: Optional[Exercise] = None,
               side: Optional[Side] = None,
               subject_id: Optional[str] = None) -> 'FeatureTable':
        keep = np.ones(len(self), dtype=bool)
        if exercise is not None:
            keep &= self.exercises == Exercise(exercise).value
        if side is not None:
            keep &= self.sides == Side(side).value
        if subject_id is not None:
            keep &= self.subjects == subject_id
        return self.take(np.flatnonzero(keep))

    def row_index(self,
                  subject_id: str,
                  exercise: Exercise,
                  side: Side,
                  rep_index: int) -> int:
        rows = np.flatnonzero(
            (self.subjects == subject_id) &
            (self.exercises == Exercise(exercise).value) &
            (self.sides == Side(side).value) & (self.reps == rep_index))
        if not rows.size:
            raise KeyError('no repetition {}/{}/{}/{}'.format(
                subject_id, Exercise(exercise).value, Side(side).value,
                rep_index))
        return int(rows[0])

    def vector(self, row: int) -> FeatureVector:
        return FeatureVector(self.names, self.values[row],
                             np.ones(len(self.names), dtype=np.int32))

    def to_frame(self) -> pd.DataFrame:
        meta = {
            'subject': self.subjects,
            'exercise': self.exercises,
            'side': self.sides,
            'rep': self.reps,
            'label': self.labels,
        }
        for i, c in enumerate(COMPONENTS):
            meta['label_{}'.format(c)] = self.components[:, i]
        frame = pd.DataFrame(meta, columns=list(META_COLUMNS))
        features = pd.DataFrame(self.values, columns=list(self.names))
        return pd.concat([frame, features], axis=1)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> 'FeatureTable':
        columns = list(frame.columns)
        if columns[:len(META_COLUMNS)] != list(META_COLUMNS):
            raise DomainError('feature table must start with columns {}'
                              .format(', '.join(META_COLUMNS)))
        names = tuple(columns[len(META_COLUMNS):])
        return cls(
            names=names,
            values=frame[list(names)].to_numpy(dtype=np.float64),
            subjects=frame['subject'].astype(str).to_numpy(),
            exercises=frame['exercise'].astype(str).to_numpy(),
            sides=frame['side'].astype(str).to_numpy(),
            reps=frame['rep'].to_numpy(dtype=np.int64),
            labels=frame['label'].to_numpy(dtype=np.int64),
            components=frame[['label_{}'.format(c) for c in COMPONENTS]]
            .to_numpy(dtype=np.int64))

    def to_csv(self, path: str) -> None:
        try:
            self.to_frame().to_csv(path, index=False, float_format='%.17g')
        except OSError as e:
            raise IoError('cannot write {}: {}'.format(path, e)) from e


def read_feature_csv(path: str) -> FeatureTable:
    """Inverse of FeatureTable.to_csv (values round-trip exactly)."""
    try:
        frame = pd.read_csv(path, float_precision='round_trip',
                            dtype={'subject': str})
    except OSError as e:
        raise IoError('cannot read {}: {}'.format(path, e)) from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise IoError('malformed feature CSV {}: {}'.format(path, e)) from e
    return FeatureTable.from_frame(frame)


def feature_table(ds: Dataset,
                  cfg: Optional[FeatureConfig] = None,
                  threads: int = 1) -> FeatureTable:
    """Extract features for every repetition of a dataset, in dataset order."""

    cfg = cfg or FeatureConfig()
    reps = ds.repetitions
    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(threads) as pool:
            vectors = list(pool.map(lambda r: extract_features(r, cfg), reps))
    else:
        vectors = [extract_features(r, cfg) for r in reps]
    n_rows = len(reps)
    labels = np.full(n_rows, -1, dtype=np.int64)
    components = np.full((n_rows, len(COMPONENTS)), -1, dtype=np.int64)
    for i, rep in enumerate(reps):
        if rep.label is not None:
            labels[i] = rep.label.overall
            if rep.label.components is not None:
                components[i] = [rep.label.components.get(c, -1)
                                 for c in COMPONENTS]
    values = (np.stack([v.values for v in vectors]) if vectors
              else np.zeros((0, cfg.dim)))
    return FeatureTable(
        names=cfg.feature_names,
        values=values,
        subjects=np.array([r.subject_id for r in reps], dtype=object),
        exercises=np.array([r.exercise.value for r in reps], dtype=object),
        sides=np.array([r.side.value for r in reps], dtype=object),
        reps=np.array([r.rep_index for r in reps], dtype=np.int64),
        labels=labels,
        components=components)
