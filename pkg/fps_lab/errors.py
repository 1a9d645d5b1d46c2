# fps_lab/errors.py
"""
Exception hierarchy shared by every app.

Each error carries a short slug and the process exit code the command line
returns for it. Codes:

  0  success
  1  unexpected failure
  2  bad flags or invalid configuration
  3  missing input file
  4  data ingestion / validation error
  5  alignment error
  6  training error (divergence, empty training set)
  7  evaluation error (undefined metric, no eligible anchors, empty schedule)
  8  failed invariant (aggregate mismatch, gradient check above tolerance)
"""

EXIT_CODES = {
    "ok": 0,
    "unexpected": 1,
    "config-error": 2,
    "missing-file": 3,
    "data-error": 4,
    "alignment-error": 5,
    "training-error": 6,
    "evaluation-error": 7,
    "invariant-failed": 8,
}


class FpsError(Exception):
    slug = "unexpected"

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.slug]

    def one_line(self) -> str:
        detail = " ".join(str(self).split())
        return f"{self.slug}: {detail}"


class ConfigError(FpsError):
    slug = "config-error"


class MissingFileError(FpsError):
    slug = "missing-file"


class DataError(FpsError):
    slug = "data-error"


class AlignmentError(FpsError):
    slug = "alignment-error"


class DegenerateWindowError(AlignmentError):
    """A compared window has zero norm after centering."""


class TrainingError(FpsError):
    slug = "training-error"


class DivergedError(TrainingError):
    pass


class ShapeError(TrainingError):
    pass


class EvaluationError(FpsError):
    slug = "evaluation-error"


class UndefinedMetricError(EvaluationError):
    pass


class ConstantSequenceError(EvaluationError):
    pass


class InvariantError(FpsError):
    slug = "invariant-failed"
