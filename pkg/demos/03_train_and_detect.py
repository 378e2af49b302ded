"""Train the detector on clean synthetic videos, then score fresh ones.

Scaled down so it finishes in about a minute. The training corpus contains
only clean videos; the adversarial class is manufactured on the fly from
pseudo perturbations. Detection feeds a video's transition frames through
the network and applies the >= 3 flagged frames rule.
"""

import numpy as np

import patdet
from patdet import RngSeed, SynthConfig, TrainConfig

train_videos = patdet.synth_videos(SynthConfig(video_count=30, seed=RngSeed(1)))
config = TrainConfig(epochs=6, seed=RngSeed(2))
print(f"training on {len(train_videos)} videos, {config.epochs} epochs ...")
model, history = patdet.train(train_videos, config)
for i, (loss, acc) in enumerate(zip(history.losses, history.accuracies), 1):
    print(f"  epoch {i}: loss {loss:.4f}  accuracy {acc:.3f}")

test_videos = patdet.synth_videos(SynthConfig(video_count=4, seed=RngSeed(3)))
rng = np.random.default_rng(4)

print("\nclean videos:")
for video in test_videos:
    report = patdet.detect_video(model, video)
    print(f"  {video.id}: verdict {report.video_verdict.name}, "
          f"{report.flagged_count}/{video.length} frames flagged")

print("sparse-attacked videos (rho 0.25, sigma 0.03):")
for video in test_videos:
    attacked, labels = patdet.surrogate_sparse_attack(video, 0.25, 0.03, rng)
    report = patdet.detect_video(model, attacked)
    truth = [int(l) for l in labels]
    pred = [int(f) for f in report.per_frame_flags]
    agree = sum(p == t for p, t in zip(pred, truth))
    print(f"  {video.id}: verdict {report.video_verdict.name}, "
          f"{report.flagged_count}/{video.length} flagged, "
          f"frame agreement {agree}/{video.length}")
