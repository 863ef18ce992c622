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

from typing import Sequence
from typing import Tuple

import numpy as np
from sklearn import metrics

from rehab_assess.errors import DomainError
from rehab_assess.errors import LengthMismatch


def _binary(values: Sequence[int], what: str) -> np.ndarray:
    arr = np.asarray(values).astype(np.int64).ravel()
    if np.any((arr != 0) & (arr != 1)):
        raise DomainError('{} must be binary'.format(what))
    return arr


def _pair(predictions: Sequence[int],
          truths: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    pred = _binary(predictions, 'predictions')
    truth = _binary(truths, 'truths')
    if pred.shape != truth.shape or pred.size < 1:
        raise LengthMismatch('predictions and truths need equal length >= 1')
    return pred, truth


def confusion(predictions: Sequence[int],
              truths: Sequence[int]) -> Tuple[int, int, int, int]:
    """(tp, fp, fn, tn) with 1 (correct repetition) as the positive class."""
    pred, truth = _pair(predictions, truths)
    tn, fp, fn, tp = metrics.confusion_matrix(
        truth, pred, labels=[0, 1]).ravel()
    return int(tp), int(fp), int(fn), int(tn)


def f1_score(predictions: Sequence[int], truths: Sequence[int]) -> float:
    """F1 of the positive class; 0 when precision + recall is 0."""
    pred, truth = _pair(predictions, truths)
    return float(metrics.f1_score(truth, pred, pos_label=1,
                                  zero_division=0))


def accuracy(predictions: Sequence[int], truths: Sequence[int]) -> float:
    pred, truth = _pair(predictions, truths)
    return float(metrics.accuracy_score(truth, pred))


def mean_std(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and population std; (0, 0) for an empty sequence."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return 0., 0.
    return float(arr.mean()), float(arr.std())
