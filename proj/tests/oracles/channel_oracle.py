"""Link-level reference values: path loss, SNRs, array factors, SE."""
import numpy as np

C = 299792458.0
F = 28.0


def fspl(d, f=F):
    return 32.4 + 20 * np.log10(f) + 20 * np.log10(d)


def ula_gain(n, beam, true):
    k = np.arange(n)
    return abs(np.exp(1j * np.pi * k * (beam - true)).sum()) ** 2 / n


lam = C / (F * 1e9)
kw = 2 * np.pi / lam
print(f"fspl_250m_28ghz {fspl(250):.15f}")
print(f"direct_snr_50m {30 - fspl(50) + 10 * np.log10(64) + 84:.15f}")
print(f"half_bin_gain_64 {ula_gain(64, 0.0, 1 / 64):.15f}")
print(f"se_20db {np.log2(1 + 10 ** 2):.15f}")

# BS at origin facing +x, IRS 30 m away facing +y, UE 20 m in front of it.
bs = np.array([0.0, 0.0, 0.0])
irs = np.array([30.0, 0.0, 0.0])
ue = np.array([30.0, 20.0, 0.0])
print(f"cascaded_snr_30_20 {30 - fspl(30) - fspl(20) + 10 * np.log10(64) + 20 * np.log10(64) + 84:.15f}")


def elements(centre, normal_az, n):
    axis = np.array([-np.sin(normal_az), np.cos(normal_az), 0.0])
    return np.array([centre + (m - (n - 1) / 2) * lam / 2 * axis for m in range(n)])


def af(phases, centre, normal_az, tx, rx):
    e = elements(centre, normal_az, len(phases))
    psi = kw * (np.linalg.norm(e - tx, axis=1) + np.linalg.norm(e - rx, axis=1))
    return abs(np.exp(1j * (phases + psi)).sum())


# Unconfigured surface (all phases zero) on an oblique geometry.
irs2 = np.array([40.0, 10.0, 5.0])
ue2 = np.array([45.0, 30.0, 1.5])
print(f"af_zero_phases {af(np.zeros(16), irs2, 1.2, np.array([0.0, 0.0, 10.0]), ue2):.15f}")
# Phases ramped linearly.
print(f"af_ramp_phases {af(0.3 * np.arange(16), irs2, 1.2, np.array([0.0, 0.0, 10.0]), ue2):.15f}")
