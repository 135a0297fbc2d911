"""
Human reconstruction metrics
============================

MPJPE and its Procrustes-aligned version, PCK at 50 mm (strict), AUC over
0..200 mm, and part-orientation angle errors (MPJAE).
"""

# %%
import numpy as np

from hoieval.geometry import SimilarityTransform, axis_angle_matrix, random_rotation, transform_points
from hoieval.human_metrics import HumanFrame, auc, mpjae, mpjpe, mpjpe_pa, pck, score_human_track

rng = np.random.default_rng(7)
gt = rng.uniform([-0.25, -0.9, -0.15], [0.25, 0.9, 0.15], size=(24, 3)) + [0, 0, 3.0]

# %% [markdown]
# A prediction that is right up to scale, rotation and translation has a
# large MPJPE but (near) zero MPJPE-PA.

# %%
pred = transform_points(SimilarityTransform(1.1, random_rotation(rng), np.array([0.1, 0, 0.2])), gt)
print("MPJPE %.1f mm, MPJPE-PA %.2e mm" % (mpjpe(pred, gt), mpjpe_pa(pred, gt)[0]))

# %% [markdown]
# PCK uses a strict boundary: 49 mm counts, 51 mm does not.

# %%
dirs = rng.normal(size=gt.shape)
dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
for mm in (49.0, 51.0):
    p = gt + dirs * mm / 1000
    print(f"{mm} mm offset: PCK {pck(p, gt)}, AUC {auc(p, gt):.4f}, MPJPE {mpjpe(p, gt):.6f}")

# %%
parts = np.stack([random_rotation(rng) for _ in range(9)])
tilted = parts @ axis_angle_matrix([1, 0, 0], np.radians(20))
print("MPJAE for a 20 degree twist of every part:", mpjae(tilted, parts))

# %%
frames = [HumanFrame(str(i), gt, gt + rng.normal(0, 0.02, gt.shape)) for i in range(20)]
print(score_human_track(frames).aggregates)
