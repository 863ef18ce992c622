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

"""Synthetic upper-limb exercise corpus with injectable impairments.

A repetition is a reach-hold-return movement of one wrist between a rest
pose and an exercise goal, each phase following the minimum-jerk profile.
The elbow is placed by two-link inverse kinematics and the upper body can
lean toward the moving arm. Impairments:

    rom_scale       - fraction of the rest-to-goal displacement achieved.
    jerk_noise_amp  - amplitude (m) of 2-6 Hz positional noise on the wrist.
    trunk_lean_deg  - peak lateral lean of the upper body toward the arm.

Oracle labels follow fixed thresholds on the impairment (LabelThresholds).
"""

import dataclasses
from typing import Any
from typing import Dict
from typing import Optional
from typing import Tuple
from typing import Union

import numpy as np

from rehab_assess.data.motion import Cohort
from rehab_assess.data.motion import Dataset
from rehab_assess.data.motion import Exercise
from rehab_assess.data.motion import FRAME_RATE
from rehab_assess.data.motion import JOINTS
from rehab_assess.data.motion import JOINT_INDEX
from rehab_assess.data.motion import JointName
from rehab_assess.data.motion import MotionRepetition
from rehab_assess.data.motion import QualityLabel
from rehab_assess.data.motion import Side
from rehab_assess.data.motion import SubjectMeta
from rehab_assess.errors import DomainError

# Upper-body pose relative to SpineBase (x lateral, y up, z away from the
# camera); the subject faces the camera so "forward" is -z.
BODY_OFFSETS = {
    JointName.SPINE_BASE: (0., 0., 0.),
    JointName.SPINE_MID: (0., 0.25, 0.),
    JointName.SPINE_SHOULDER: (0., 0.50, 0.),
    JointName.NECK: (0., 0.58, 0.),
    JointName.HEAD: (0., 0.72, 0.),
    JointName.SHOULDER_LEFT: (-0.18, 0.48, 0.),
    JointName.SHOULDER_RIGHT: (0.18, 0.48, 0.),
}
CAMERA_OFFSET = np.array([0., -0.30, 2.50])
UPPER_ARM_LEN = 0.30
FOREARM_LEN = 0.27

# Wrist positions relative to the moving shoulder; x is mirrored for the
# left arm.
REST_OFFSET = np.array([0.05, -0.52, -0.08])
GOAL_OFFSETS = {
    Exercise.E1_CUP: np.array([-0.18, 0.12, -0.10]),
    Exercise.E2_LIGHT: np.array([0.10, 0.25, -0.40]),
    Exercise.E3_CANE: np.array([0.05, -0.35, -0.38]),
}
ELBOW_POLE = np.array([0.3, -1.0, 0.3])

REACH_FRACTION = 0.4
HOLD_FRACTION = 0.2
GOAL_JITTER = 0.02
NOISE_BAND_HZ = (2.0, 6.0)
NOISE_COMPONENTS = 3


def min_jerk_scalar(x0: float, xf: float, tau: float) -> float:
    """Minimum-jerk interpolation x0 + (xf - x0)(10t^3 - 15t^4 + 6t^5)."""
    if not 0. <= tau <= 1.:
        raise DomainError('tau must lie in [0, 1], got {}'.format(tau))
    return x0 + (xf - x0) * (10 * tau ** 3 - 15 * tau ** 4 + 6 * tau ** 5)


def min_jerk(x0: float, xf: float, tau: np.ndarray) -> np.ndarray:
    """Vectorized min_jerk_scalar."""
    tau = np.asarray(tau, dtype=np.float64)
    if np.any(tau < 0.) or np.any(tau > 1.):
        raise DomainError('tau must lie in [0, 1]')
    return x0 + (xf - x0) * (10 * tau ** 3 - 15 * tau ** 4 + 6 * tau ** 5)


@dataclasses.dataclass(frozen=True)
class ImpairmentSpec(object):
    rom_scale: float = 1.0
    jerk_noise_amp: float = 0.0
    trunk_lean_deg: float = 0.0

    def __post_init__(self):
        if not 0. < self.rom_scale <= 1.:
            raise DomainError(
                'rom_scale must lie in (0, 1], got {}'.format(self.rom_scale))
        if self.jerk_noise_amp < 0.:
            raise DomainError('jerk_noise_amp must be non-negative')
        if not 0. <= self.trunk_lean_deg <= 60.:
            raise DomainError('trunk_lean_deg must lie in [0, 60]')


@dataclasses.dataclass(frozen=True)
class LabelThresholds(object):
    """Impairment levels that still count as a correct repetition."""

    rom_scale: float = 0.8
    jerk_noise_amp: float = 0.01
    trunk_lean_deg: float = 5.0

    def label(self, impairment: ImpairmentSpec) -> QualityLabel:
        return QualityLabel.from_components({
            'rom': int(impairment.rom_scale >= self.rom_scale),
            'smoothness': int(
                impairment.jerk_noise_amp <= self.jerk_noise_amp),
            'compensation': int(
                impairment.trunk_lean_deg <= self.trunk_lean_deg),
        })


@dataclasses.dataclass(frozen=True)
class CorpusSpec(object):
    n_patients: int = 15
    n_healthy: int = 11
    reps_per_patient_side: int = 10
    reps_per_healthy: int = 15
    exercises: Tuple[Exercise, ...] = tuple(Exercise)
    seed: int = 0
    thresholds: LabelThresholds = LabelThresholds()

    def __post_init__(self):
        object.__setattr__(self, 'exercises', tuple(
            Exercise(e) if not isinstance(e, Exercise) else e
            for e in self.exercises))
        if self.n_patients < 0 or self.n_healthy < 0:
            raise DomainError('subject counts must be non-negative')
        if self.n_patients + self.n_healthy < 1:
            raise DomainError('the corpus needs at least one subject')
        if self.reps_per_patient_side < 1 or self.reps_per_healthy < 1:
            raise DomainError('repetition counts must be at least 1')
        if not self.exercises:
            raise DomainError('at least one exercise is required')

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> 'CorpusSpec':
        config = dict(config)
        if 'thresholds' in config:
            config['thresholds'] = LabelThresholds(**config['thresholds'])
        if 'exercises' in config:
            config['exercises'] = tuple(config['exercises'])
        return cls(**config)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n_patients': self.n_patients,
            'n_healthy': self.n_healthy,
            'reps_per_patient_side': self.reps_per_patient_side,
            'reps_per_healthy': self.reps_per_healthy,
            'exercises': [e.value for e in self.exercises],
            'seed': self.seed,
            'thresholds': dataclasses.asdict(self.thresholds),
        }


def reach_profile(t: np.ndarray, duration: float) -> np.ndarray:
    """Normalized progress toward the goal: reach, hold, then return."""
    reach = REACH_FRACTION * duration
    hold_end = (REACH_FRACTION + HOLD_FRACTION) * duration
    s = np.ones_like(t)
    rising = t < reach
    s[rising] = min_jerk(0., 1., t[rising] / reach)
    falling = t > hold_end
    s[falling] = min_jerk(
        1., 0., np.clip((t[falling] - hold_end) / reach, 0., 1.))
    return s


def band_limited_noise(t: np.ndarray,
                       amplitude: float,
                       rnd: np.random.RandomState) -> np.ndarray:
    """Sum of random-phase sinusoids in NOISE_BAND_HZ, shape (T, 3)."""
    freqs = rnd.uniform(*NOISE_BAND_HZ, size=(NOISE_COMPONENTS, 3))
    phases = rnd.uniform(0., 2 * np.pi, size=(NOISE_COMPONENTS, 3))
    waves = np.sin(2 * np.pi * freqs[None] * t[:, None, None] + phases[None])
    return amplitude / NOISE_COMPONENTS * waves.sum(axis=1)


def solve_elbow(shoulder: np.ndarray,
                wrist: np.ndarray,
                upper_len: float,
                fore_len: float,
                pole: np.ndarray) -> np.ndarray:
    """Two-link inverse kinematics; the elbow bends toward `pole`."""
    reach = wrist - shoulder
    dist = np.linalg.norm(reach, axis=-1, keepdims=True)
    axis = reach / np.maximum(dist, 1e-9)
    dist = np.clip(dist, abs(upper_len - fore_len) + 1e-6,
                   upper_len + fore_len - 1e-6)
    along = (upper_len ** 2 - fore_len ** 2 + dist ** 2) / (2 * dist)
    height = np.sqrt(np.maximum(upper_len ** 2 - along ** 2, 0.))
    perp = pole - np.sum(pole * axis, axis=-1, keepdims=True) * axis
    perp_len = np.linalg.norm(perp, axis=-1, keepdims=True)
    fallback = np.cross(axis, np.array([1., 0., 0.]))
    perp = np.where(perp_len > 1e-9, perp, fallback)
    perp = perp / np.maximum(
        np.linalg.norm(perp, axis=-1, keepdims=True), 1e-12)
    return shoulder + along * axis + height * perp


def _rotation_z(angle_rad: np.ndarray) -> np.ndarray:
    c, s = np.cos(angle_rad), np.sin(angle_rad)
    rot = np.zeros(angle_rad.shape + (3, 3))
    rot[..., 0, 0] = c
    rot[..., 0, 1] = -s
    rot[..., 1, 0] = s
    rot[..., 1, 1] = c
    rot[..., 2, 2] = 1.
    return rot


def synth_repetition(exercise: Union[Exercise, str],
                     impairment: ImpairmentSpec,
                     duration: float,
                     seed: int,
                     subject_id: str = 'S01',
                     side: Side = Side.AFFECTED,
                     arm: str = 'right',
                     body_scale: float = 1.0,
                     rep_index: int = 0,
                     thresholds: Optional[LabelThresholds] = None
                     ) -> Tuple[MotionRepetition, QualityLabel]:
    """Generate one labeled 30 Hz repetition.

    Identical arguments give bit-identical output.
    """

    exercise = Exercise(exercise) if not isinstance(
        exercise, Exercise) else exercise
    if not 1. <= duration <= 10.:
        raise DomainError('duration must lie in [1, 10] s')
    if arm not in ('left', 'right'):
        raise DomainError('arm must be "left" or "right"')
    if not 0.5 <= body_scale <= 2.:
        raise DomainError('body_scale must lie in [0.5, 2]')
    thresholds = thresholds or LabelThresholds()
    rnd = np.random.RandomState(seed)

    n_frames = int(np.floor(duration * FRAME_RATE + 1e-9)) + 1
    t = np.arange(n_frames) / FRAME_RATE
    span = t[-1]
    progress = reach_profile(t, span)

    mirror = np.array([1. if arm == 'right' else -1., 1., 1.])
    shoulder_joint = (JointName.SHOULDER_RIGHT if arm == 'right'
                      else JointName.SHOULDER_LEFT)
    body = {j: np.asarray(o) * body_scale for j, o in BODY_OFFSETS.items()}
    shoulder = body[shoulder_joint]

    goal_jitter = rnd.uniform(-GOAL_JITTER, GOAL_JITTER, size=3)
    rest = shoulder + REST_OFFSET * mirror * body_scale
    goal = shoulder + (GOAL_OFFSETS[exercise] * mirror + goal_jitter) * (
        body_scale)
    wrist = rest + impairment.rom_scale * (goal - rest) * progress[:, None]
    noise = band_limited_noise(t, impairment.jerk_noise_amp, rnd)
    if impairment.jerk_noise_amp > 0.:
        wrist = wrist + noise
    elbow = solve_elbow(
        np.broadcast_to(shoulder, wrist.shape), wrist,
        UPPER_ARM_LEN * body_scale, FOREARM_LEN * body_scale,
        ELBOW_POLE * mirror)

    arm_joints = {
        'right': (JointName.ELBOW_RIGHT, JointName.WRIST_RIGHT),
        'left': (JointName.ELBOW_LEFT, JointName.WRIST_LEFT),
    }
    other = 'left' if arm == 'right' else 'right'
    other_shoulder = body[JointName.SHOULDER_RIGHT if other == 'right'
                          else JointName.SHOULDER_LEFT]
    other_mirror = np.array([1. if other == 'right' else -1., 1., 1.])
    other_wrist = other_shoulder + REST_OFFSET * other_mirror * body_scale
    other_elbow = solve_elbow(
        other_shoulder[None], other_wrist[None],
        UPPER_ARM_LEN * body_scale, FOREARM_LEN * body_scale,
        ELBOW_POLE * other_mirror)[0]

    positions = np.zeros((n_frames, len(JOINTS), 3))
    for joint, offset in body.items():
        positions[:, JOINT_INDEX[joint]] = offset
    positions[:, JOINT_INDEX[arm_joints[arm][0]]] = elbow
    positions[:, JOINT_INDEX[arm_joints[arm][1]]] = wrist
    positions[:, JOINT_INDEX[arm_joints[other][0]]] = other_elbow
    positions[:, JOINT_INDEX[arm_joints[other][1]]] = other_wrist

    if impairment.trunk_lean_deg > 0.:
        # The upper body pivots about SpineBase toward the moving arm.
        lean = np.deg2rad(impairment.trunk_lean_deg) * progress
        rot = _rotation_z(-mirror[0] * lean)
        base = positions[:, JOINT_INDEX[JointName.SPINE_BASE]][:, None]
        positions = base + np.einsum(
            'tij,tkj->tki', rot, positions - base)

    positions = positions + CAMERA_OFFSET
    label = thresholds.label(impairment)
    rep = MotionRepetition(
        subject_id=subject_id, exercise=exercise, side=side, times=t,
        positions=positions, label=label, rep_index=rep_index, arm=arm)
    return rep, label


def _draw_patient_severity(rnd: np.random.RandomState) -> ImpairmentSpec:
    if rnd.rand() < 0.25:
        return ImpairmentSpec(rom_scale=rnd.uniform(0.85, 1.0),
                              jerk_noise_amp=rnd.uniform(0., 0.006),
                              trunk_lean_deg=rnd.uniform(0., 3.))
    impaired = rnd.rand(3) < 0.6
    if not impaired.any():
        impaired[rnd.randint(3)] = True
    return ImpairmentSpec(
        rom_scale=(rnd.uniform(0.35, 0.75) if impaired[0]
                   else rnd.uniform(0.85, 1.0)),
        jerk_noise_amp=(rnd.uniform(0.02, 0.06) if impaired[1]
                        else rnd.uniform(0., 0.006)),
        trunk_lean_deg=(rnd.uniform(10., 30.) if impaired[2]
                        else rnd.uniform(0., 3.)))


def _jitter_impairment(base: ImpairmentSpec,
                       rnd: np.random.RandomState) -> ImpairmentSpec:
    return ImpairmentSpec(
        rom_scale=float(np.clip(
            base.rom_scale + rnd.uniform(-0.08, 0.08), 0.05, 1.0)),
        jerk_noise_amp=base.jerk_noise_amp * rnd.uniform(0.7, 1.3),
        trunk_lean_deg=float(np.clip(
            base.trunk_lean_deg + rnd.uniform(-2., 2.), 0., 60.)))


def _fugl_meyer(severity: ImpairmentSpec) -> int:
    score = ((1. - severity.rom_scale) / 0.65 +
             severity.jerk_noise_amp / 0.06 +
             severity.trunk_lean_deg / 30.) / 3.
    return int(np.clip(round(66 * (1. - score)), 0, 66))


def synth_dataset(spec: CorpusSpec) -> Dataset:
    """Generate a labeled corpus shaped like the clinical dataset.

    Patients get affected-side repetitions around a per-patient severity and
    unimpaired unaffected-side repetitions; healthy subjects get unimpaired
    dominant-side repetitions. Deterministic in spec.seed.
    """

    rnd = np.random.RandomState(spec.seed)
    subjects = []
    plans = []
    for i in range(spec.n_patients):
        severity = _draw_patient_severity(rnd)
        affected_arm = 'right' if rnd.rand() < 0.5 else 'left'
        body_scale = rnd.uniform(0.92, 1.08)
        meta = SubjectMeta('P{:02d}'.format(i + 1), Cohort.PATIENT,
                           _fugl_meyer(severity))
        subjects.append(meta)
        unaffected_arm = 'left' if affected_arm == 'right' else 'right'
        plans.append((meta, body_scale, [
            (Side.AFFECTED, affected_arm, severity,
             spec.reps_per_patient_side),
            (Side.UNAFFECTED, unaffected_arm, None,
             spec.reps_per_patient_side)]))
    for i in range(spec.n_healthy):
        dominant_arm = 'right' if rnd.rand() < 0.9 else 'left'
        body_scale = rnd.uniform(0.92, 1.08)
        meta = SubjectMeta('H{:02d}'.format(i + 1), Cohort.HEALTHY)
        subjects.append(meta)
        plans.append((meta, body_scale, [
            (Side.DOMINANT, dominant_arm, None, spec.reps_per_healthy)]))

    reps = []
    for exercise in spec.exercises:
        for meta, body_scale, sides in plans:
            for side, arm, severity, n_reps in sides:
                for k in range(n_reps):
                    if severity is None:
                        impairment = ImpairmentSpec()
                    else:
                        impairment = _jitter_impairment(severity, rnd)
                    duration = rnd.uniform(1.6, 2.6)
                    seed = rnd.randint(2 ** 31 - 1)
                    rep, _ = synth_repetition(
                        exercise, impairment, duration, seed,
                        subject_id=meta.subject_id, side=side, arm=arm,
                        body_scale=body_scale, rep_index=k,
                        thresholds=spec.thresholds)
                    reps.append(rep)
    return Dataset(subjects=tuple(subjects), repetitions=tuple(reps))
