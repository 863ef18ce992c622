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

"""Recursive feature elimination with the masked-input quality predictor.

Each round trains the predictor on the surviving features, scores them by
the mean absolute input-layer weight of their value inputs and drops the
lowest tenth (at least one). The subset size is picked by validation F1.
"""

import dataclasses
import logging
import time
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from rehab_assess.errors import DimensionMismatch
from rehab_assess.errors import DomainError
from rehab_assess.metrics import f1_score
from rehab_assess.policy.mlp import MlpModel
from rehab_assess.policy.mlp import predict_proba
from rehab_assess.trainer import TrainConfig
from rehab_assess.trainer import Trainer
from rehab_assess.trainer import check_labels
from rehab_assess.trainer import fit_network
from rehab_assess.trainer import stratified_split
from rehab_assess.util import create_logger

DROP_FRACTION = 0.1


@dataclasses.dataclass(frozen=True)
class RfeResult(object):
    """Feature ranking (best first), chosen size and the subset model."""

    ranking: Tuple[int, ...]
    subset_size: int
    scores: Tuple[Tuple[int, float], ...]
    hidden_dims: Tuple[int, ...]
    learning_rate: float
    model: Optional[MlpModel] = None

    @property
    def num_features(self) -> int:
        return len(self.ranking)

    @property
    def support(self) -> np.ndarray:
        return rfe_subset(self.ranking, self.subset_size)

    @property
    def ranks(self) -> np.ndarray:
        """1 for the best feature, F for the first one eliminated."""
        ranks = np.zeros(self.num_features, dtype=np.int64)
        ranks[list(self.ranking)] = np.arange(1, self.num_features + 1)
        return ranks

    def to_dict(self,
                feature_names: Optional[Sequence[str]] = None
                ) -> Dict[str, Any]:
        out = {'ranking': list(self.ranking),
               'subset_size': self.subset_size,
               'scores': [{'size': k, 'val_f1': f} for k, f in self.scores],
               'hidden_dims': list(self.hidden_dims),
               'learning_rate': self.learning_rate}
        if feature_names is not None:
            out['ranked_names'] = [feature_names[i] for i in self.ranking]
        return out


def feature_importance(model: MlpModel) -> np.ndarray:
    """Mean |weight| from each feature's value input to the first layer."""
    kernel = np.asarray(model.params['params']['Dense_0']['kernel'])
    num_features = model.arch.input_dim // 2
    return np.abs(kernel[:num_features]).mean(axis=1)


def rfe_subset(ranking: Sequence[int], k: int) -> np.ndarray:
    """Mask of the k best-ranked features."""
    if not 1 <= k <= len(ranking):
        raise DomainError('subset size {} outside [1, {}]'.format(
            k, len(ranking)))
    mask = np.zeros(len(ranking), dtype=np.int32)
    mask[list(ranking[:k])] = 1
    return mask


class RecursiveFeatureEliminator(object):
    """Fixed-subset baseline for the per-instance selector."""

    def __init__(self,
                 cfg: TrainConfig,
                 hidden_dims: Sequence[int],
                 learning_rate: float,
                 drop_fraction: float = DROP_FRACTION,
                 logger: logging.Logger = None):
        if logger is None:
            self._logger = create_logger(name='RFE')
        else:
            self._logger = logger
        if not 0. < drop_fraction < 1.:
            raise DomainError('drop_fraction must lie in (0, 1)')
        self.cfg = cfg
        self.hidden_dims = tuple(hidden_dims)
        self.learning_rate = float(learning_rate)
        self.drop_fraction = drop_fraction

    def _val_f1(self, model, values, labels, mask) -> float:
        predictions = (predict_proba(model, values, mask) >= 0.5).astype(
            np.int64)
        return f1_score(predictions, labels)

    def eliminate(self,
                  values: np.ndarray,
                  labels: np.ndarray
                  ) -> Tuple[Tuple[int, ...], List[Tuple[int, float]]]:
        """Run elimination rounds down to one feature.

        Returns:
            The ranking (best first) and (subset size, validation F1) per
            round.
        """

        num_features = values.shape[1]
        train_idx, val_idx = stratified_split(
            labels, self.cfg.val_fraction, self.cfg.seed)
        active = list(range(num_features))
        eliminated = []
        scores = []
        while True:
            mask = np.zeros(num_features)
            mask[active] = 1.
            model, _, _ = fit_network(
                values[train_idx], labels[train_idx], self.hidden_dims,
                self.learning_rate, self.cfg, self.cfg.seed, mask)
            val_f1 = self._val_f1(model, values[val_idx], labels[val_idx],
                                  mask)
            scores.append((len(active), val_f1))
            self._logger.debug('RFE size={0}, val_f1={1:.4f}'.format(
                len(active), val_f1))
            if len(active) == 1:
                break
            importance = feature_importance(model)[active]
            n_drop = max(1, int(np.floor(self.drop_fraction * len(active))))
            order = np.argsort(importance, kind='stable')[:n_drop]
            dropped = [active[i] for i in order]
            eliminated.extend(dropped)
            active = [i for i in active if i not in set(dropped)]
        ranking = tuple(active + eliminated[::-1])
        return ranking, scores

    def fit(self, values: np.ndarray, labels: np.ndarray) -> RfeResult:
        start_time = time.perf_counter()
        values = np.asarray(values, dtype=np.float64)
        labels = np.asarray(labels).astype(np.int64)
        if values.ndim != 2 or labels.shape != (values.shape[0],):
            raise DimensionMismatch('need values (N, F) and labels (N,)')
        check_labels(labels)
        ranking, scores = self.eliminate(values, labels)
        # Higher F1 wins; ties go to the smaller subset.
        subset_size = max(scores, key=lambda s: (s[1], -s[0]))[0]
        model, _, _ = fit_network(
            values, labels, self.hidden_dims, self.learning_rate, self.cfg,
            self.cfg.seed, rfe_subset(ranking, subset_size))
        self._logger.info(
            'RFE done: rounds={0}, subset={1}/{2}, time={3:.2f}s'.format(
                len(scores), subset_size, values.shape[1],
                time.perf_counter() - start_time))
        return RfeResult(ranking=ranking, subset_size=subset_size,
                         scores=tuple(scores), hidden_dims=self.hidden_dims,
                         learning_rate=self.learning_rate, model=model)


def rfe_select(values: np.ndarray,
               labels: np.ndarray,
               cfg: TrainConfig,
               hidden_dims: Optional[Sequence[int]] = None,
               learning_rate: Optional[float] = None,
               logger: logging.Logger = None) -> RfeResult:
    """RFE on standardized features.

    Without an architecture, the predictor grid is searched once on all
    features and its best cell is used for every round.
    """

    if hidden_dims is None or learning_rate is None:
        labels = np.asarray(labels).astype(np.int64)
        check_labels(labels)
        best = Trainer(cfg, logger=logger).search(values, labels).best
        hidden_dims, learning_rate = best.hidden_dims, best.learning_rate
    return RecursiveFeatureEliminator(
        cfg, hidden_dims, learning_rate, logger=logger).fit(values, labels)
