"""Pseudo perturbations: Gaussian noise with a freshly drawn magnitude.

The detector never sees a real attack during training. Instead, each epoch
every clean transition frame gets a Gaussian mask whose standard deviation
is drawn uniformly from [0.0001, 0.05], so the network learns "deviation
from a plausible transition frame" rather than one attack's fingerprint.
"""

import numpy as np

import patdet
from patdet import FixedSigma, VaryingSigma

rng = np.random.default_rng(42)
mode = VaryingSigma(0.0001, 0.05)

sigmas = [patdet.sample_sigma(rng, mode) for _ in range(100_000)]
print(f"sigma draws: min {min(sigmas):.6f}  max {max(sigmas):.6f}  "
      f"mean {np.mean(sigmas):.5f} (analytic mean 0.02505)")

mask = patdet.gaussian_mask(rng, (256, 64, 64), 0.03)
print(f"mask at sigma 0.03: sample std {mask.data.std():.5f}, "
      f"sample mean {mask.data.mean():+.2e}")

# A pseudo-adversarial transition frame is just transition + mask, unclamped.
tr = patdet.frame_new(64, 64, 3, np.zeros((64, 64, 3), dtype=np.float32))
for sigma in (0.0001, 0.01, 0.05):
    adv = patdet.pseudo_adversarial(tr, rng, FixedSigma(sigma))
    print(f"sigma {sigma:<7}: mean |pixel change| = {np.abs(adv.data).mean():.6f}")
print("(at 0.0001 the change is visually irrelevant; at 0.05 the frame is noise)")
