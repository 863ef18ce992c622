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

"""Exceptions raised by the assessment pipeline."""

from typing import Optional


class RehabError(Exception):
    """Base class of all pipeline errors."""


class IoError(RehabError, OSError):
    """A file could not be read or written."""


class SchemaError(RehabError, ValueError):
    """A dataset record violates the file format or a data invariant."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__('line {}: {}'.format(line, reason))


class UnknownSubject(RehabError, KeyError):

    def __init__(self, subject_id: str):
        self.subject_id = subject_id
        super().__init__(subject_id)

    def __str__(self) -> str:
        return 'unknown subject: {}'.format(self.subject_id)


class DomainError(RehabError, ValueError):
    """An argument lies outside its valid domain."""


class DegenerateGeometry(RehabError, ValueError):
    """A segment or ray collapsed to (almost) zero length."""

    def __init__(self, reason: str, frame: Optional[int] = None):
        self.frame = frame
        if frame is not None:
            reason = 'frame {}: {}'.format(frame, reason)
        super().__init__(reason)


class LengthMismatch(RehabError, ValueError):
    pass


class NonMonotoneTime(RehabError, ValueError):
    pass


class EmptyTrainingSet(RehabError, ValueError):
    pass


class DimensionMismatch(RehabError, ValueError):
    pass


class ShapeMismatch(RehabError, ValueError):
    pass


class DegenerateLabels(RehabError, ValueError):
    """Only one class is present in the training labels."""


class IllegalAction(RehabError, ValueError):
    pass


class InsufficientNormals(RehabError, ValueError):
    pass


class NameOrderMismatch(RehabError, ValueError):
    pass


class MissingTemplate(RehabError, KeyError):

    def __init__(self, family: str):
        self.family = family
        super().__init__(family)

    def __str__(self) -> str:
        return 'no feedback template for feature family: {}'.format(
            self.family)


class FeatureNameMismatch(RehabError, ValueError):
    """A checkpoint was trained on a different feature layout."""


class ConfigError(RehabError, ValueError):
    pass
