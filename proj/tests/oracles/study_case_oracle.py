"""Brute-force best-server map of the default study case and the zone
changes along the default straight trajectory."""
import numpy as np

F = 28.0
BS = np.array([0.0, 50.0, 10.0])
OBSTACLES = [((30, 62, 0), (38, 72, 15)), ((30, 28, 0), (38, 38, 15)),
             ((62, 84, 0), (70, 100, 15)), ((62, 0, 0), (70, 16, 15))]
IRS = [(np.array([50, 100, 5.0]), -np.pi / 2), (np.array([50, 0, 5.0]), np.pi / 2),
       (np.array([100, 75, 5.0]), np.pi), (np.array([100, 25, 5.0]), np.pi)]
N = 64


def fspl(d):
    return 32.4 + 20 * np.log10(F) + 20 * np.log10(d)


def blocked(a, b):
    d = b - a
    for lo, hi in OBSTACLES:
        lo = np.array(lo, float)
        hi = np.array(hi, float)
        t0, t1, hit = 0.0, 1.0, True
        for k in range(3):
            if d[k] == 0:
                if a[k] < lo[k] or a[k] > hi[k]:
                    hit = False
                    break
            else:
                ta, tb = sorted(((lo[k] - a[k]) / d[k], (hi[k] - a[k]) / d[k]))
                t0, t1 = max(t0, ta), min(t1, tb)
                if t0 > t1:
                    hit = False
                    break
        if hit:
            return True
    return False


def label(ue):
    best, best_se = "outage", 0.0
    if not blocked(BS, ue):
        snr = 30 - fspl(np.linalg.norm(ue - BS)) + 10 * np.log10(N) + 84
        best, best_se = "direct", np.log2(1 + 10 ** (snr / 10))
    for i, (p, az) in enumerate(IRS):
        normal = np.array([np.cos(az), np.sin(az), 0.0])
        if np.dot(ue - p, normal) <= 0 or blocked(BS, p) or blocked(p, ue):
            continue
        snr = 30 - fspl(np.linalg.norm(p - BS)) - fspl(np.linalg.norm(ue - p)) + 10 * np.log10(N) \
            + 20 * np.log10(N) + 84
        se = np.log2(1 + 10 ** (snr / 10))
        if se > best_se:
            best, best_se = f"irs{i}", se
    return best


counts = {}
for row in range(100):
    for col in range(100):
        z = label(np.array([col + 0.5, row + 0.5, 1.5]))
        counts[z] = counts.get(z, 0) + 1
for k in sorted(counts):
    print(f"zone {k} {counts[k]}")

# 10 m/s sampled every 0.01 s from (85, 5) to (85, 95).
prev = None
for e in range(900):
    z = label(np.array([85.0, 5.0 + 0.1 * e, 1.5]))
    if z == "outage":
        continue
    if prev is not None and z != prev:
        print(f"transition slot {e * 100} {prev} -> {z}")
    prev = z
