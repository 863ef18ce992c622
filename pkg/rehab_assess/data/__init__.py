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

from .motion import Cohort
from .motion import COMPONENTS
from .motion import Dataset
from .motion import Exercise
from .motion import JointName
from .motion import MotionRepetition
from .motion import QualityLabel
from .motion import Side
from .motion import SubjectMeta
from .motion import split_by_subject
from .motion import validate_repetition
from .io import dump_dataset
from .io import parse_dataset
from .io import serialize_dataset
from .synth import CorpusSpec
from .synth import ImpairmentSpec
from .synth import LabelThresholds
from .synth import min_jerk_scalar
from .synth import synth_dataset
from .synth import synth_repetition


__all__ = ['Cohort', 'COMPONENTS', 'Dataset', 'Exercise', 'JointName',
           'MotionRepetition', 'QualityLabel', 'Side', 'SubjectMeta',
           'split_by_subject', 'validate_repetition', 'dump_dataset',
           'parse_dataset', 'serialize_dataset', 'CorpusSpec',
           'ImpairmentSpec', 'LabelThresholds', 'min_jerk_scalar',
           'synth_dataset', 'synth_repetition']
