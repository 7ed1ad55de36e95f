"""
Radial points and linearization spectra
=======================================

A Morse critical point of the boundary potential with value below the
energy carries two radial points nu = +-sqrt(sigma - V0(z)).  Each
Hessian eigenvalue 2 a_j contributes the ratio pair

    r_j = 1/2 - sqrt(1/4 - a_j / (sigma - V0(z))),   1 - r_j,

real and negative over descent directions, in (0, 1/2) over gentle
ascent directions, and complex with real part 1/2 past the Hessian
threshold sigma = V0(z) + 4 a_j.
"""

from fractions import Fraction

import numpy as np

from radialscope import (CriticalPointSpec, classify_radial, hessian_thresholds,
                         linearization_eigenvectors, linearization_spectrum)
from radialscope.radial import HessianThresholdError, numerical_jacobian

cp = CriticalPointSpec("mixed", value=Fraction(0),
                       hessian=(Fraction(-4), Fraction(3, 8)))
rp = linearization_spectrum(cp, sigma=Fraction(1), sign=+1)
print("nu =", rp.nu, " lambda =", rp.lam)
print("r list (sorted):", rp.r_list)
print("block partition [s, m] =", [rp.layout.s, rp.layout.m])
print("classification:", classify_radial(rp), " (one descent direction)")

# eigenforms of the linearization, checked against the numerical Jacobian
lin = linearization_eigenvectors(rp)
J = numerical_jacobian(rp, 1.0)
for j in range(2):
    v = lin.form_vector(lin.f_forms[j], j)
    resid = np.linalg.norm(J.T @ v - lin.eigenvalue_f(j) * v)
    print(f"f~_{j + 1} eigenvalue {lin.eigenvalue_f(j):.4g}, Jacobian residual {resid:.1e}")

# the symplectic normalization: S = A - (lambda/2) Id is in sp(2(n-1))
S = lin.matrix_a - float(rp.lam) / 2 * np.eye(4)
print("omega-antisymmetry of S:", np.linalg.norm(S.T @ lin.omega + lin.omega @ S))

# Hessian thresholds bound the energies where the block structure degenerates
print("thresholds of", cp.label, "->", hessian_thresholds(cp))
try:
    linearization_spectrum(cp, sigma=Fraction(3, 4), sign=+1)
except HessianThresholdError as exc:
    print("threshold refused:", exc)
