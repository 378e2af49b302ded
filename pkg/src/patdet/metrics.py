"""Detection metrics: frame/video detection rates, ROC curve, AUC, and the
confusion matrix. Adversarial is the positive class throughout.

FDR counts agreement between predicted and true frame labels over all
frames, clean frames included. VDR applies the video rule first (a video is
adversarial iff at least `threshold` frames are flagged) and then counts
agreement over videos. The ROC sweep groups tied scores into a single step,
which is exactly the convention that makes trapezoidal AUC equal the
pairwise probability that a positive outranks a negative (ties worth 1/2).

All accumulation is done in 64-bit.
"""

from dataclasses import dataclass

import numpy as np

from .core import FrameLabel
from .errors import ConfigError


@dataclass(frozen=True)
class RocCurve:
    """(false positive rate, true positive rate) points, threshold descending.

    Starts at (0, 0), ends at (1, 1), both coordinates non-decreasing.
    """

    points: tuple

    def __post_init__(self):
        pts = self.points
        if len(pts) < 2 or pts[0] != (0.0, 0.0) or pts[-1] != (1.0, 1.0):
            raise ConfigError("ROC curve must run from (0,0) to (1,1)")
        prev = (0.0, 0.0)
        for x, y in pts:
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ConfigError(f"ROC point ({x}, {y}) outside the unit square")
            if x < prev[0] or y < prev[1]:
                raise ConfigError("ROC coordinates must be non-decreasing")
            prev = (x, y)


def _labels_array(labels, name):
    arr = np.asarray([int(l) for l in labels], dtype=np.int64)
    if arr.size == 0:
        raise ConfigError(f"{name} is empty")
    if not np.isin(arr, (0, 1)).all():
        raise ConfigError(f"{name} contains values other than 0/1")
    return arr


def fdr(predicted, truth) -> float:
    """Fraction of frames whose predicted label matches the ground truth."""
    p = _labels_array(predicted, "predicted")
    t = _labels_array(truth, "truth")
    if p.size != t.size:
        raise ConfigError(f"length mismatch: {p.size} predicted vs {t.size} truth")
    return float(np.mean(p == t))


def video_verdict(flags, threshold) -> FrameLabel:
    """Adversarial iff at least `threshold` frames are flagged adversarial."""
    if not isinstance(threshold, (int, np.integer)) or threshold < 1:
        raise ConfigError(f"threshold must be a positive integer, got {threshold!r}")
    n_adv = int(np.sum(_labels_array(flags, "flags")))
    return FrameLabel.ADVERSARIAL if n_adv >= threshold else FrameLabel.CLEAN


def vdr(per_video_flags, truth, threshold) -> float:
    """Fraction of videos whose threshold verdict matches the ground truth."""
    if len(per_video_flags) == 0:
        raise ConfigError("no videos given")
    verdicts = [video_verdict(flags, threshold) for flags in per_video_flags]
    t = _labels_array(truth, "truth")
    if t.size != len(verdicts):
        raise ConfigError(f"{len(verdicts)} videos but {t.size} truth labels")
    v = np.asarray([int(x) for x in verdicts], dtype=np.int64)
    return float(np.mean(v == t))


def roc_curve(scores, truth) -> RocCurve:
    """Sweep all distinct score thresholds, highest first.

    Needs at least one positive and one negative example. Equal scores are
    grouped into a single step.
    """
    s = np.asarray(scores, dtype=np.float64)
    t = _labels_array(truth, "truth")
    if s.size != t.size:
        raise ConfigError(f"length mismatch: {s.size} scores vs {t.size} truth")
    n_pos = int(t.sum())
    n_neg = int(t.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ConfigError("ROC needs at least one positive and one negative example")

    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    t_sorted = t[order]
    # index just past each group of equal scores
    group_ends = np.flatnonzero(np.diff(s_sorted) != 0) + 1
    group_ends = np.append(group_ends, s_sorted.size)
    tp = np.cumsum(t_sorted)[group_ends - 1]
    fp = group_ends - tp
    points = [(0.0, 0.0)]
    points.extend((fp_i / n_neg, tp_i / n_pos) for fp_i, tp_i in zip(fp, tp))
    return RocCurve(points=tuple(points))


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the ROC curve."""
    pts = curve.points
    area = 0.0
    for (x0, y0), (x1, y1) in zip(pts[:-1], pts[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return float(area)


def auc_from_scores(scores, truth) -> float:
    return auc(roc_curve(scores, truth))


@dataclass(frozen=True)
class ConfusionMatrix:
    true_positive: int
    false_positive: int
    true_negative: int
    false_negative: int

    def __post_init__(self):
        for name, v in self.as_dict().items():
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ConfigError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def total(self):
        return (self.true_positive + self.false_positive
                + self.true_negative + self.false_negative)

    def as_dict(self):
        return {
            "true_positive": self.true_positive,
            "false_positive": self.false_positive,
            "true_negative": self.true_negative,
            "false_negative": self.false_negative,
        }


def confusion(verdicts, truth) -> ConfusionMatrix:
    """Standard 2x2 counts with Adversarial as the positive class."""
    v = _labels_array(verdicts, "verdicts")
    t = _labels_array(truth, "truth")
    if v.size != t.size:
        raise ConfigError(f"length mismatch: {v.size} verdicts vs {t.size} truth")
    return ConfusionMatrix(
        true_positive=int(np.sum((v == 1) & (t == 1))),
        false_positive=int(np.sum((v == 1) & (t == 0))),
        true_negative=int(np.sum((v == 0) & (t == 0))),
        false_negative=int(np.sum((v == 0) & (t == 1))),
    )
