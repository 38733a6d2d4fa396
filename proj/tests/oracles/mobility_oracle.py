"""Waypoint motion by fine sub-stepping, and the expected error of a
least-squares extrapolation under Gaussian position noise."""
import math
import numpy as np

points = [np.array(p, float) for p in [(0, 0, 0), (3, 0, 0), (3, 4, 0), (0, 4, 0)]]
speed = 1.7
dt = 1.0
substeps = 200000


def walk(pos, nxt, dist):
    # Tiny fixed steps; the cursor turns whenever a vertex is reached.
    h = dist / substeps
    for _ in range(substeps):
        if nxt >= len(points):
            break
        d = points[nxt] - pos
        n = np.linalg.norm(d)
        if n <= h:
            pos = points[nxt].copy()
            nxt += 1
        else:
            pos = pos + d / n * h
    return pos, nxt


pos, nxt = points[0].copy(), 1
for step in range(1, 8):
    pos, nxt = walk(pos, nxt, speed * dt)
    print(f"waypoint_step{step}", " ".join(f"{v:.9f}" for v in pos))

# Straight-line fit over H equally spaced samples, extrapolated one step.
H = 10
sigma = 0.1
t = np.arange(H, dtype=float)
var = sigma ** 2 * (1 / H + (H - t.mean()) ** 2 / ((t - t.mean()) ** 2).sum())
sd = math.sqrt(var)
# Mean norm of an isotropic 3-D Gaussian error.
print(f"ls_k1_error_sd_per_axis {sd:.9f}")
print(f"ls_k1_mean_error_3d {sd * 2 * math.sqrt(2 / math.pi):.9f}")
