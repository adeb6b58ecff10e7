# Two-mode Gaussian states: symplectic spectra and von Neumann entropy.
#
# Run:  python demos/01_gaussian_entropy.py
import numpy as np

from cvqkd.gaussian import (
    TwoModeCovariance,
    entropy_g,
    entropy_two_mode,
    symplectic_eigenvalues_numeric,
    symplectic_spectrum,
    two_mode_squeezed,
)

# g(x) is the entropy of one thermal mode; g(1) = 0 is the vacuum
for x in (1.0, 3.0, 10.0, 1e6):
    print(f"g({x:g}) = {entropy_g(x):.12f} bits")

# A two-mode squeezed (EPR) state is pure: both symplectic eigenvalues are 1
epr = two_mode_squeezed(20.0)
print("\nEPR state, V = 20")
print(epr.matrix)
print(symplectic_spectrum(epr))
print("entropy:", entropy_two_mode(epr))

# Send one arm through a lossy channel: the state becomes mixed
T, chi = 0.5, 1.1
V = 20.0
lossy = TwoModeCovariance(
    V * np.eye(2),
    T * (V + chi) * np.eye(2),
    np.sqrt(T * (V * V - 1)) * np.diag([1.0, -1.0]),
)
spec = symplectic_spectrum(lossy)
print("\nafter a T = 0.5 channel")
print(f"  from invariants : s1 = {spec.s1:.12f}, s2 = {spec.s2:.12f}")
print("  from |eig(i Omega gamma)| :", symplectic_eigenvalues_numeric(lossy))
print(f"  entropy = {entropy_two_mode(lossy):.6f} bits")
