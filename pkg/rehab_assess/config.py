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

"""Run configuration: one YAML/JSON document per experiment."""

import dataclasses
from typing import Any
from typing import Dict
from typing import Optional
from typing import Tuple

from rehab_assess.algo.double_q import RlConfig
from rehab_assess.data.synth import CorpusSpec
from rehab_assess.errors import ConfigError
from rehab_assess.errors import RehabError
from rehab_assess.evaluation import METHODS
from rehab_assess.evaluation import check_methods
from rehab_assess.feedback import DEFAULT_THRESHOLD
from rehab_assess.kinematics import FeatureConfig
from rehab_assess.trainer import TrainConfig
from rehab_assess.util import load_yaml


def _check_keys(section: str, config: Any, allowed) -> Dict[str, Any]:
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ConfigError('{} must be a mapping'.format(section))
    unknown = sorted(set(config) - set(allowed))
    if unknown:
        raise ConfigError('unknown keys in {}: {}'.format(
            section, ', '.join(unknown)))
    return dict(config)


def build_section(section: str, cls, config: Any):
    """Strictly build a config dataclass, reporting failures as ConfigError."""
    config = _check_keys(
        section, config, [f.name for f in dataclasses.fields(cls)])
    try:
        if hasattr(cls, 'from_dict'):
            return cls.from_dict(config)
        return cls(**config)
    except ConfigError:
        raise
    except (RehabError, TypeError, ValueError) as e:
        raise ConfigError('invalid {}: {}'.format(section, e)) from e


@dataclasses.dataclass(frozen=True)
class PathsConfig(object):
    corpus: Optional[str] = None
    features: Optional[str] = None
    models: Optional[str] = None
    outputs: Optional[str] = None


@dataclasses.dataclass(frozen=True)
class FeedbackConfig(object):
    threshold: float = DEFAULT_THRESHOLD
    templates: Optional[str] = None

    def __post_init__(self):
        if self.threshold <= 0:
            raise ConfigError('feedback.threshold must be positive')


@dataclasses.dataclass(frozen=True)
class EvaluationConfig(object):
    """LOSO settings.

    methods - Subset of RL, RFE and FullNN.
    seeds - Run seeds; None uses the run seed.
    tp_agreement - Optional therapist agreement side file.
    exercises - Exercise codes to evaluate; None evaluates all present.
    """

    methods: Tuple[str, ...] = METHODS
    seeds: Optional[Tuple[int, ...]] = None
    tp_agreement: Optional[str] = None
    exercises: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, 'methods', check_methods(self.methods))
        if self.seeds is not None:
            object.__setattr__(self, 'seeds', tuple(
                int(s) for s in self.seeds))
            if not self.seeds:
                raise ConfigError('evaluation.seeds must not be empty')
        if self.exercises is not None:
            object.__setattr__(self, 'exercises', tuple(self.exercises))


SECTIONS = {
    'paths': PathsConfig,
    'corpus': CorpusSpec,
    'features': FeatureConfig,
    'train': TrainConfig,
    'rl': RlConfig,
    'feedback': FeedbackConfig,
    'evaluation': EvaluationConfig,
}


@dataclasses.dataclass(frozen=True)
class RunConfig(object):
    """Every setting of a run. The run seed overrides the section seeds."""

    seed: int = 0
    threads: int = 1
    paths: PathsConfig = PathsConfig()
    corpus: CorpusSpec = CorpusSpec()
    features: FeatureConfig = FeatureConfig()
    train: TrainConfig = TrainConfig()
    rl: RlConfig = RlConfig()
    feedback: FeedbackConfig = FeedbackConfig()
    evaluation: EvaluationConfig = EvaluationConfig()

    def __post_init__(self):
        if self.threads < 1:
            raise ConfigError('threads must be at least 1')

    @classmethod
    def from_dict(cls, config: Optional[Dict[str, Any]]) -> 'RunConfig':
        config = _check_keys(
            'run config', config, ['seed', 'threads'] + list(SECTIONS))
        sections = {name: build_section(name, section_cls,
                                        config.get(name))
                    for name, section_cls in SECTIONS.items()}
        run = cls(threads=int(config.get('threads', 1)), **sections)
        return run.with_seed(int(config.get('seed', 0)))

    def with_seed(self, seed: int) -> 'RunConfig':
        return dataclasses.replace(
            self, seed=seed,
            corpus=dataclasses.replace(self.corpus, seed=seed),
            train=dataclasses.replace(self.train, seed=seed),
            rl=dataclasses.replace(self.rl, seed=seed))

    def with_threads(self, threads: int) -> 'RunConfig':
        return dataclasses.replace(self, threads=threads)

    @property
    def eval_seeds(self) -> Tuple[int, ...]:
        return self.evaluation.seeds or (self.seed,)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seed': self.seed,
            'threads': self.threads,
            'paths': dataclasses.asdict(self.paths),
            'corpus': self.corpus.to_dict(),
            'features': self.features.to_dict(),
            'train': self.train.to_dict(),
            'rl': self.rl.to_dict(),
            'feedback': dataclasses.asdict(self.feedback),
            'evaluation': {
                'methods': list(self.evaluation.methods),
                'seeds': (None if self.evaluation.seeds is None
                          else list(self.evaluation.seeds)),
                'tp_agreement': self.evaluation.tp_agreement,
                'exercises': (None if self.evaluation.exercises is None
                              else list(self.evaluation.exercises)),
            },
        }


def load_run_config(path: Optional[str] = None) -> RunConfig:
    """Defaults when path is None."""
    if path is None:
        return RunConfig()
    return RunConfig.from_dict(load_yaml(path))
