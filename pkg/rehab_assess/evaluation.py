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

"""Leave-one-subject-out comparison of the quality-assessment methods.

For every exercise and held-out subject, normalization, predictor grid
search, RFE and the acquisition policy are fitted on the remaining subjects
only and scored on the held-out subject's repetitions. Results aggregate to
mean +/- std of per-subject F1, laid out as a method-by-exercise results table.
"""

import concurrent.futures
import dataclasses
import logging
import time
from typing import Any
from typing import Dict
from typing import List
from typing import Mapping
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np

from rehab_assess.algo.double_q import RlConfig
from rehab_assess.algo.double_q import evaluate_selector
from rehab_assess.algo.double_q import train_selector
from rehab_assess.algo.rfe import rfe_select
from rehab_assess.data.motion import Dataset
from rehab_assess.data.motion import Exercise
from rehab_assess.errors import ConfigError
from rehab_assess.errors import DegenerateLabels
from rehab_assess.errors import DomainError
from rehab_assess.errors import RehabError
from rehab_assess.kinematics import FeatureConfig
from rehab_assess.kinematics import FeatureTable
from rehab_assess.kinematics import feature_table
from rehab_assess.metrics import accuracy
from rehab_assess.metrics import f1_score
from rehab_assess.metrics import mean_std
from rehab_assess.obs_norm import apply_zscore
from rehab_assess.obs_norm import fit_zscore_matrix
from rehab_assess.policy.mlp import predict_proba
from rehab_assess.trainer import TrainConfig
from rehab_assess.trainer import Trainer
from rehab_assess.util import create_logger
from rehab_assess.util import dumps_json
from rehab_assess.util import read_json

METHODS = ('RL', 'RFE', 'FullNN')
METHOD_ROWS = {'RL': 'ML - RL', 'RFE': 'ML - RFE', 'FullNN': 'ML - NN'}
TP_ROW = 'TP'
MIN_SUBJECTS = 3


def check_methods(methods: Sequence[str]) -> Tuple[str, ...]:
    methods = tuple(methods)
    unknown = [m for m in methods if m not in METHODS]
    if unknown or not methods:
        raise ConfigError('methods must be a non-empty subset of {}, got {}'
                          .format(METHODS, list(methods)))
    # Canonical order keeps result bytes independent of the request order.
    return tuple(m for m in METHODS if m in methods)


@dataclasses.dataclass(frozen=True)
class Fold(object):
    exercise: str
    subject: str
    index: int
    train_rows: np.ndarray
    test_rows: np.ndarray


def loso_folds(table: FeatureTable, exercise: Exercise) -> List[Fold]:
    """One fold per subject of the exercise, in order of first appearance."""
    exercise = Exercise(exercise)
    rows = np.flatnonzero(table.exercises == exercise.value)
    subjects = list(dict.fromkeys(table.subjects[rows].tolist()))
    if len(subjects) < MIN_SUBJECTS:
        raise DomainError('{} has {} subjects; LOSO needs at least {}'.format(
            exercise.value, len(subjects), MIN_SUBJECTS))
    folds = []
    for i, subject in enumerate(subjects):
        held_out = table.subjects[rows] == subject
        folds.append(Fold(exercise=exercise.value, subject=subject, index=i,
                          train_rows=rows[~held_out],
                          test_rows=rows[held_out]))
    return folds


@dataclasses.dataclass(frozen=True)
class FoldResult(object):
    exercise: str
    subject: str
    index: int
    seed: int
    n_train: int
    n_test: int
    f1: Mapping[str, float]
    accuracy: Mapping[str, float]
    mean_acquired: Optional[float] = None
    rfe_subset: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {'exercise': self.exercise, 'subject': self.subject,
                'fold': self.index, 'seed': self.seed,
                'n_train': self.n_train, 'n_test': self.n_test,
                'f1': dict(self.f1), 'accuracy': dict(self.accuracy),
                'mean_acquired': self.mean_acquired,
                'rfe_subset': self.rfe_subset}


@dataclasses.dataclass(frozen=True)
class EvalResult(object):
    """Per-fold scores of every method on every exercise."""

    exercises: Tuple[str, ...]
    methods: Tuple[str, ...]
    folds: Tuple[FoldResult, ...]
    num_features: int
    seeds: Tuple[int, ...] = (0,)

    def per_subject(self, method: str, exercise: str) -> Dict[str, float]:
        """Held-out subject -> F1, averaged over seeds."""
        scores = {}
        for fold in self.folds:
            if fold.exercise == exercise:
                scores.setdefault(fold.subject, []).append(fold.f1[method])
        return {s: float(np.mean(v)) for s, v in scores.items()}

    def summary(self, method: str, exercise: str) -> Tuple[float, float]:
        return mean_std(list(self.per_subject(method, exercise).values()))

    def overall(self, method: str) -> Tuple[float, float]:
        """Mean of per-exercise means; std over all per-subject scores."""
        means = [self.summary(method, e)[0] for e in self.exercises]
        pooled = [f for e in self.exercises
                  for f in self.per_subject(method, e).values()]
        return float(np.mean(means)), mean_std(pooled)[1]

    def mean_acquired(self, exercise: Optional[str] = None) -> Optional[float]:
        values = [f.mean_acquired for f in self.folds
                  if f.mean_acquired is not None and
                  (exercise is None or f.exercise == exercise)]
        return float(np.mean(values)) if values else None

    def to_dict(self) -> Dict[str, Any]:
        summary = {}
        for method in self.methods:
            summary[method] = {
                e: dict(zip(('mean', 'std'), self.summary(method, e)))
                for e in self.exercises}
            summary[method]['Overall'] = dict(
                zip(('mean', 'std'), self.overall(method)))
        return {'exercises': list(self.exercises),
                'methods': list(self.methods),
                'num_features': self.num_features,
                'seeds': list(self.seeds),
                'summary': summary,
                'per_subject': {
                    m: {e: self.per_subject(m, e) for e in self.exercises}
                    for m in self.methods},
                'mean_acquired': {
                    e: self.mean_acquired(e) for e in self.exercises},
                'folds': [f.to_dict() for f in self.folds]}

    def to_json(self) -> str:
        return dumps_json(self.to_dict())


def _binary_predictions(model, values, mask) -> np.ndarray:
    return (predict_proba(model, values, mask) >= 0.5).astype(np.int64)


class LosoEvaluator(object):
    """Runs the held-out-subject protocol for the requested methods."""

    def __init__(self,
                 train_cfg: TrainConfig,
                 rl_cfg: RlConfig,
                 methods: Sequence[str] = METHODS,
                 threads: int = 1,
                 logger: logging.Logger = None):
        if logger is None:
            self._logger = create_logger(name='LosoEvaluator')
        else:
            self._logger = logger
        self.train_cfg = train_cfg
        self.rl_cfg = rl_cfg
        self.methods = check_methods(methods)
        self._threads = max(1, threads)

    def run_fold(self, table: FeatureTable, fold: Fold,
                 seed: int) -> FoldResult:
        start_time = time.perf_counter()
        fold_seed = seed ^ fold.index
        train_cfg = dataclasses.replace(self.train_cfg, seed=fold_seed)
        rl_cfg = dataclasses.replace(self.rl_cfg, seed=fold_seed)
        train_y = table.labels[fold.train_rows]
        test_y = table.labels[fold.test_rows]
        if len(np.unique(train_y)) < 2:
            raise DegenerateLabels(
                'fold {}/{}: training labels hold one class only'.format(
                    fold.exercise, fold.subject))
        norm = fit_zscore_matrix(table.values[fold.train_rows], table.names)
        train_x = apply_zscore(norm, table.values[fold.train_rows])
        test_x = apply_zscore(norm, table.values[fold.test_rows])
        full_mask = np.ones(len(table.names))

        trainer = Trainer(train_cfg, logger=self._logger)
        f1s, accs = {}, {}
        mean_acquired, rfe_subset = None, None
        try:
            if 'FullNN' in self.methods:
                model, report = trainer.fit(train_x, train_y)
                pred = _binary_predictions(model, test_x, full_mask)
                f1s['FullNN'] = f1_score(pred, test_y)
                accs['FullNN'] = accuracy(pred, test_y)
            else:
                report = trainer.search(train_x, train_y)
            best = report.best
            if 'RFE' in self.methods:
                rfe = rfe_select(train_x, train_y, train_cfg,
                                 hidden_dims=best.hidden_dims,
                                 learning_rate=best.learning_rate,
                                 logger=self._logger)
                pred = _binary_predictions(rfe.model, test_x, rfe.support)
                f1s['RFE'] = f1_score(pred, test_y)
                accs['RFE'] = accuracy(pred, test_y)
                rfe_subset = rfe.subset_size
            if 'RL' in self.methods:
                selector = train_selector(
                    train_x, train_y, rl_cfg, hidden_dims=best.hidden_dims,
                    logger=self._logger)
                rollout = evaluate_selector(selector, test_x, test_y,
                                            logger=self._logger)
                pred = rollout['predictions']
                f1s['RL'] = f1_score(pred, test_y)
                accs['RL'] = accuracy(pred, test_y)
                mean_acquired = float(rollout['masks'].sum(axis=1).mean())
        except RehabError:
            self._logger.error('Fold {0}/{1} failed'.format(
                fold.exercise, fold.subject))
            raise
        self._logger.info(
            'Fold {0}/{1}: {2}, time={3:.2f}s'.format(
                fold.exercise, fold.subject,
                ', '.join('{}={:.4f}'.format(m, f1s[m])
                          for m in self.methods),
                time.perf_counter() - start_time))
        return FoldResult(
            exercise=fold.exercise, subject=fold.subject, index=fold.index,
            seed=fold_seed, n_train=int(fold.train_rows.size),
            n_test=int(fold.test_rows.size), f1=f1s, accuracy=accs,
            mean_acquired=mean_acquired, rfe_subset=rfe_subset)

    def evaluate(self,
                 table: FeatureTable,
                 exercises: Optional[Sequence[Exercise]] = None,
                 seeds: Sequence[int] = (0,)) -> EvalResult:
        if not table.has_labels:
            raise DomainError('LOSO evaluation needs every repetition labeled')
        if exercises is None:
            present = set(table.exercises.tolist())
            exercises = [e for e in Exercise if e.value in present]
        exercises = [Exercise(e) for e in exercises]
        jobs = [(fold, seed) for e in exercises
                for fold in loso_folds(table, e) for seed in seeds]
        self._logger.info('LOSO: exercises={0}, folds={1}, methods={2}'
                          .format([e.value for e in exercises], len(jobs),
                                  list(self.methods)))
        if self._threads > 1:
            with concurrent.futures.ThreadPoolExecutor(self._threads) as pool:
                results = list(pool.map(
                    lambda job: self.run_fold(table, *job), jobs))
        else:
            results = [self.run_fold(table, *job) for job in jobs]
        return EvalResult(exercises=tuple(e.value for e in exercises),
                          methods=self.methods, folds=tuple(results),
                          num_features=len(table.names),
                          seeds=tuple(int(s) for s in seeds))


def loso_evaluate(data: Union[Dataset, FeatureTable],
                  methods: Sequence[str] = METHODS,
                  seeds: Sequence[int] = (0,),
                  train_cfg: Optional[TrainConfig] = None,
                  rl_cfg: Optional[RlConfig] = None,
                  feature_cfg: Optional[FeatureConfig] = None,
                  exercises: Optional[Sequence[Exercise]] = None,
                  threads: int = 1,
                  logger: logging.Logger = None) -> EvalResult:
    """LOSO evaluation of a dataset or an already extracted feature table."""
    if isinstance(data, Dataset):
        data = feature_table(data, feature_cfg, threads=threads)
    evaluator = LosoEvaluator(train_cfg or TrainConfig(), rl_cfg or RlConfig(),
                              methods=methods, threads=threads, logger=logger)
    return evaluator.evaluate(data, exercises=exercises, seeds=seeds)


def load_tp_agreement(path: str) -> Dict[str, Tuple[float, float]]:
    """Therapist agreement side file: {"E1": {"mean": m, "std": s}, ...}.

    Values may also be given as [mean, std] pairs.
    """
    data = read_json(path)
    if not isinstance(data, dict):
        raise ConfigError('{} must hold a JSON object'.format(path))
    out = {}
    for key, value in data.items():
        if isinstance(value, dict):
            value = (value.get('mean'), value.get('std'))
        try:
            mean, std = (float(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigError('{}: entry {} needs a mean and a std'.format(
                path, key))
        out[str(key)] = (mean, std)
    return out


def format_cell(mean: float, std: float) -> str:
    return '{:.4f} ± {:.4f}'.format(mean, std)


def exercise_title(code: str) -> str:
    return 'Exercise {} ({})'.format(code[1:], code)


def emit_results_table(res: EvalResult,
                       tp_agreement: Optional[
                           Mapping[str, Tuple[float, float]]] = None
                       ) -> str:
    """Fixed-width text table, one row per method plus an optional TP row."""

    header = ['Method'] + [exercise_title(e) for e in res.exercises] + [
        'Overall']
    rows = []
    for method in res.methods:
        rows.append([METHOD_ROWS[method]] + [
            format_cell(*res.summary(method, e)) for e in res.exercises] + [
            format_cell(*res.overall(method))])
    if tp_agreement:
        rows.append([TP_ROW] + [
            format_cell(*tp_agreement[key]) if key in tp_agreement else '-'
            for key in list(res.exercises) + ['Overall']])
    widths = [max(len(r[i]) for r in [header] + rows)
              for i in range(len(header))]
    lines = []
    for r in [header] + rows:
        cells = [r[0].ljust(widths[0])] + [
            c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append('  '.join(cells).rstrip())
    return '\n'.join(lines) + '\n'
