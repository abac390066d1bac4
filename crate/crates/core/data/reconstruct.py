"""Regenerate electron_diffraction_reconstruction.csv.

The source figure is not available as numbers, so this file is a synthetic
stand-in: wave numbers follow k + a/v_P with v_P = 1.3e8 m/s, plus seeded
Gaussian scatter whose size reproduces a classical/modified mean squared
residual ratio near 2.3. Wavelengths are rounded to four significant digits.
"""
import numpy as np

H = 6.62607015e-34
E = 1.602176634e-19
M = 9.1093837015e-31
VP = 1.3e8
N = 24
SEED = 1927
TARGET_RATIO = 2.29

volts = np.linspace(40.0, 600.0, N)
v = np.sqrt(2 * E * volts / M)
k = M * v / H
a = k * v / 2
shift = a / VP
sigma = np.sqrt(np.sum(shift**2) / (TARGET_RATIO * (N - 1) - N))
rng = np.random.default_rng(SEED)
k_exp = k + shift + rng.normal(0.0, sigma, N)
lam = 1.0 / k_exp

print("# Synthetic reconstruction of an electron diffraction wavelength series.")
print("# Not measured data. Generated by reconstruct.py in this directory:")
print(f"# modified model with v_P = {VP:.2e} m/s, seed {SEED}, scatter sigma_k = {sigma:.3e} 1/m.")
print("voltage_volts,wavelength_meters")
for V, L in zip(volts, lam):
    print(f"{V:.1f},{float(f'{L:.4g}'):.4e}")
