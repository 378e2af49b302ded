"""Surrogate attacks and the detection metrics.

The sparse surrogate perturbs a fraction of frames with Gaussian noise; the
dense surrogate adds one uniform pattern to every frame, rolled down a row
per frame. This script attacks a small test set, evaluates a quickly
trained detector, and prints FDR, VDR, AUC, and the confusion matrix.
"""

import numpy as np

import patdet
from patdet import FrameLabel, RngSeed, SynthConfig, TrainConfig

train_videos = patdet.synth_videos(SynthConfig(video_count=30, seed=RngSeed(1)))
model, _ = patdet.train(train_videos, TrainConfig(epochs=6, seed=RngSeed(2)))
test_videos = patdet.synth_videos(SynthConfig(video_count=10, seed=RngSeed(3)))
rng = np.random.default_rng(4)

for name, attack in (
    ("sparse", lambda v: patdet.surrogate_sparse_attack(v, 0.25, 0.03, rng)),
    ("dense", lambda v: patdet.surrogate_dense_attack(v, 0.03, rng)),
):
    frame_pred, frame_truth = [], []
    video_flags, video_truth, video_scores = [], [], []
    for video in test_videos:                      # clean half
        scores = patdet.video_scores(model, video)
        flags = [FrameLabel.ADVERSARIAL if s >= 0.5 else FrameLabel.CLEAN for s in scores]
        frame_pred += flags
        frame_truth += [FrameLabel.CLEAN] * video.length
        video_flags.append(flags)
        video_truth.append(FrameLabel.CLEAN)
        video_scores.append(scores.max())
    for video in test_videos:                      # attacked half
        attacked, labels = attack(video)
        scores = patdet.video_scores(model, attacked)
        flags = [FrameLabel.ADVERSARIAL if s >= 0.5 else FrameLabel.CLEAN for s in scores]
        frame_pred += flags
        frame_truth += labels
        video_flags.append(flags)
        video_truth.append(FrameLabel.ADVERSARIAL)
        video_scores.append(scores.max())

    fdr = patdet.fdr(frame_pred, frame_truth)
    vdr = patdet.vdr(video_flags, video_truth, threshold=3)
    auc = patdet.auc_from_scores(video_scores, video_truth)
    verdicts = [patdet.video_verdict(f, 3) for f in video_flags]
    cm = patdet.confusion(verdicts, video_truth)
    print(f"{name:6s}: FDR {fdr:.3f}  VDR {vdr:.3f}  AUC {auc:.3f}  "
          f"confusion TP={cm.true_positive} FP={cm.false_positive} "
          f"TN={cm.true_negative} FN={cm.false_negative}")
