"""Quick throughput measurements on this machine.

Transition-frame generation is two adds and a subtract per pixel, so it
runs at thousands of frames per second; per-video detection cost is one
CNN forward pass over the transition frames.
"""

import time

import numpy as np

import patdet
from patdet.transition import transition_stack

rng = np.random.default_rng(0)
stack = rng.uniform(0, 1, (40, 112, 112, 3)).astype(np.float32)

reps = 50
t0 = time.perf_counter()
for _ in range(reps):
    transition_stack(stack)
dt = time.perf_counter() - t0
print(f"transition generation: {reps * 40 / dt:,.0f} frames/s at 112x112x3")

arch = patdet.default_architecture((112, 112, 3))
model = patdet.model_init(arch, np.random.default_rng(1))
video = patdet.video_from_array(stack, id="bench")
patdet.detect_video(model, video)  # warm up buffers
times = []
for _ in range(5):
    report = patdet.detect_video(model, video)
    times.append(report.elapsed_seconds)
print(f"per-video detection (40 frames, transition + forward): "
      f"{np.mean(times) * 1e3:.0f} ms")
