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

"""Normal-motion profiles and corrective feedback.

Affected repetitions are z-scored against the patient's own normal motions
feature by feature; features beyond the threshold are flagged and the
strongest deviation of each feature family is turned into a message.
"""

import dataclasses
import logging
import os
from typing import Any
from typing import Dict
from typing import List
from typing import Mapping
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from rehab_assess.data.motion import Exercise
from rehab_assess.data.motion import Side
from rehab_assess.errors import ConfigError
from rehab_assess.errors import InsufficientNormals
from rehab_assess.errors import MissingTemplate
from rehab_assess.errors import NameOrderMismatch
from rehab_assess.kinematics import FeatureTable
from rehab_assess.kinematics import FeatureVector
from rehab_assess.kinematics import feature_family
from rehab_assess.obs_norm import STD_MIN_VALUE
from rehab_assess.util import create_logger
from rehab_assess.util import dumps_json
from rehab_assess.util import load_yaml

MIN_NORMALS = 3
DEFAULT_THRESHOLD = 2.0
DEFAULT_TEMPLATES = os.path.join(
    os.path.dirname(os.path.abspath(__file__)), 'feedback_templates.yaml')


@dataclasses.dataclass(frozen=True, eq=False)
class NormalProfile(object):
    """Per-feature mean and floored population std of normal motions."""

    names: Tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    sources: Mapping[str, int] = dataclasses.field(default_factory=dict)

    @property
    def num_normals(self) -> int:
        return int(sum(self.sources.values()))

    def to_dict(self) -> Dict[str, Any]:
        return {'names': list(self.names), 'mean': self.mean.tolist(),
                'std': self.std.tolist(), 'sources': dict(self.sources)}


def fit_normal_profile(normals: Sequence[FeatureVector],
                       sources: Optional[Mapping[str, int]] = None,
                       std_min_value: float = STD_MIN_VALUE) -> NormalProfile:
    """Profile from raw (unstandardized) feature vectors."""

    if len(normals) < MIN_NORMALS:
        raise InsufficientNormals(
            'need at least {} normal repetitions, got {}'.format(
                MIN_NORMALS, len(normals)))
    names = normals[0].names
    for fv in normals[1:]:
        if fv.names != names:
            raise NameOrderMismatch('normal vectors disagree on names')
    values = np.stack([fv.values for fv in normals])
    return NormalProfile(
        names=names, mean=values.mean(axis=0),
        std=np.maximum(values.std(axis=0), std_min_value),
        sources=dict(sources or {'normal': len(normals)}))


@dataclasses.dataclass(frozen=True)
class DeviationScore(object):
    feature: str
    z: float
    value: float
    mean: float

    @property
    def family(self) -> str:
        return feature_family(self.feature)

    @property
    def direction(self) -> str:
        return 'above' if self.z > 0 else 'below'


def deviation_scores(profile: NormalProfile,
                     fv: FeatureVector,
                     mask: Optional[np.ndarray] = None
                     ) -> List[DeviationScore]:
    """z = (value - mean) / std for every acquired feature, in name order."""

    if fv.names != profile.names:
        raise NameOrderMismatch('feature names differ from the profile')
    if mask is None:
        mask = fv.effective_mask
    z = (fv.values - profile.mean) / profile.std
    return [DeviationScore(feature=name, z=float(z[i]),
                           value=float(fv.values[i]),
                           mean=float(profile.mean[i]))
            for i, name in enumerate(fv.names) if mask[i]]


def load_templates(path: Optional[str] = None) -> Dict[str, Any]:
    """Templates per family and direction, plus 'good' and 'review'."""
    path = path or DEFAULT_TEMPLATES
    templates = load_yaml(path)
    if not isinstance(templates, dict):
        raise ConfigError('templates must be a mapping: {}'.format(path))
    return templates


@dataclasses.dataclass(frozen=True)
class FeedbackItem(object):
    feature: str
    family: str
    z: float
    direction: str
    flagged: bool
    value: float
    mean: float
    message: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class FeedbackReport(object):
    items: Tuple[FeedbackItem, ...]
    messages: Tuple[str, ...]
    label: int
    probability: Optional[float] = None
    components: Optional[Mapping[str, int]] = None
    subject: Optional[str] = None
    repetition: Optional[str] = None

    @property
    def flagged(self) -> List[FeedbackItem]:
        return [item for item in self.items if item.flagged]

    @property
    def flagged_families(self) -> List[str]:
        return list(dict.fromkeys(item.family for item in self.flagged))

    def to_dict(self) -> Dict[str, Any]:
        return {'subject': self.subject,
                'repetition': self.repetition,
                'label': self.label,
                'probability': self.probability,
                'components': (None if self.components is None
                               else dict(self.components)),
                'items': [item.to_dict() for item in self.items],
                'messages': list(self.messages)}

    def to_json(self) -> str:
        return dumps_json(self.to_dict())

    def render_text(self) -> str:
        lines = []
        if self.subject is not None:
            lines.append('Subject: {}'.format(self.subject))
        if self.repetition is not None:
            lines.append('Repetition: {}'.format(self.repetition))
        assessed = 'correct' if self.label == 1 else 'incorrect'
        if self.probability is None:
            lines.append('Assessment: {}'.format(assessed))
        else:
            lines.append('Assessment: {} (p={:.4f})'.format(
                assessed, self.probability))
        if self.components:
            lines.append('Components: ' + ', '.join(
                '{}={}'.format(k, v) for k, v in self.components.items()))
        lines.append('Feedback:')
        lines.extend('  - ' + m for m in self.messages)
        flagged = self.flagged
        if flagged:
            lines.append('Flagged features:')
            for item in flagged:
                lines.append('  {:<28s} z={:+.2f} value={:.4g} normal={:.4g}'
                             .format(item.feature, item.z, item.value,
                                     item.mean))
        return '\n'.join(lines) + '\n'


def _template(templates: Mapping[str, Any], family: str,
              direction: str) -> str:
    entry = templates.get(family)
    if isinstance(entry, str):
        return entry
    if not isinstance(entry, Mapping) or direction not in entry:
        raise MissingTemplate(family)
    return entry[direction]


def generate_feedback(scores: Sequence[DeviationScore],
                      label: int,
                      templates: Mapping[str, Any],
                      threshold: float = DEFAULT_THRESHOLD,
                      **report_kwargs) -> FeedbackReport:
    """Flag |z| > threshold and render one message per flagged family.

    Messages follow |z| in decreasing order. With nothing flagged the report
    carries the 'good' message for a correct label and the 'review' message
    otherwise.
    """

    for score in scores:
        family = score.family
        if family not in templates:
            raise MissingTemplate(family)

    flagged = [s for s in scores if abs(s.z) > threshold]
    ranked = sorted(flagged, key=lambda s: -abs(s.z))
    families = set()
    messages = {}
    for score in ranked:
        if score.family in families:
            continue
        families.add(score.family)
        text = _template(templates, score.family, score.direction)
        messages[score.feature] = text.format(
            feature=score.feature, z=score.z, abs_z=abs(score.z),
            value=score.value, mean=score.mean)

    items = tuple(FeedbackItem(
        feature=s.feature, family=s.family, z=s.z, direction=s.direction,
        flagged=abs(s.z) > threshold, value=s.value, mean=s.mean,
        message=messages.get(s.feature)) for s in scores)

    if messages:
        ordered = tuple(messages.values())
    else:
        key = 'good' if int(label) == 1 else 'review'
        if key not in templates:
            raise MissingTemplate(key)
        ordered = (templates[key],)
    return FeedbackReport(items=items, messages=ordered, label=int(label),
                          **report_kwargs)


def normal_pool(table: FeatureTable,
                subject_id: str,
                exercise: Exercise,
                min_normals: int = MIN_NORMALS,
                logger: logging.Logger = None
                ) -> Tuple[List[FeatureVector], Dict[str, int]]:
    """Raw normal vectors for one patient and exercise.

    The patient's unaffected-side repetitions are used; with fewer than
    min_normals of them the healthy cohort's repetitions are used instead.

    Returns:
        The vectors and their source counts.
    """

    if logger is None:
        logger = create_logger(name='Feedback')
    own = table.filter(exercise=exercise, side=Side.UNAFFECTED,
                       subject_id=subject_id)
    if len(own) >= min_normals:
        return ([own.vector(i) for i in range(len(own))],
                {'unaffected': len(own)})
    healthy = table.filter(exercise=exercise, side=Side.DOMINANT)
    healthy = healthy.take(np.flatnonzero(healthy.subjects != subject_id))
    logger.info('Subject {0} has {1} unaffected repetitions of {2}; '
                'using {3} healthy repetitions'.format(
                    subject_id, len(own), Exercise(exercise).value,
                    len(healthy)))
    return ([healthy.vector(i) for i in range(len(healthy))],
            {'healthy': len(healthy)})


def profile_for(table: FeatureTable,
                subject_id: str,
                exercise: Exercise,
                logger: logging.Logger = None) -> NormalProfile:
    vectors, sources = normal_pool(table, subject_id, exercise,
                                   logger=logger)
    return fit_normal_profile(vectors, sources)
