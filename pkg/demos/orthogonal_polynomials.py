"""Half-line sequences as recursion coefficients of orthogonal polynomials.

Complex sequences on n >= 1 give a measure on the circle whose Hessenberg
matrix is read off F directly; real ones also give a Jacobi matrix on
[-2, 2].  Both are compared with Gram-Schmidt on the measure itself.

Run with ``python3 demos/orthogonal_polynomials.py``.
"""

import numpy as np

from nlft import CoefficientSequence
from nlft.jacobi_bridge import jacobi_from_F, jacobi_m_check, jacobi_oracle
from nlft.opuc_bridge import gram_schmidt_oracle, hessenberg_entries, measure_density_finite, szego_check

F = CoefficientSequence(1, [0.5, -0.3j, 0.2 + 0.4j, -0.1])
w = measure_density_finite(F)
print(f"circle measure on {w.M} nodes, total mass {w.total_mass:.15f}")
band = hessenberg_entries(F, 6)
oracle = gram_schmidt_oracle(w, 6).band(6)
print("Hessenberg diagonal from F:       ", np.round(band.diag, 4))
print("Hessenberg diagonal, Gram-Schmidt:", np.round(oracle.diag, 4))
print(f"largest band difference {max(np.max(np.abs(band.diag - oracle.diag)), np.max(np.abs(band.subdiag - oracle.subdiag))):.1e}")

r = szego_check(F, 16)
print(f"\nprediction error {r.lhs:.12f}, exp mean log w {r.rhs:.12f}, prod(1 - |F_n|^2) {r.product:.12f}")

R = CoefficientSequence(1, [0.4, -0.3, 0.2, 0.1, -0.2])
J = jacobi_from_F(R, 4)
O = jacobi_oracle(R, 4).matrix
print("\nJacobi diagonal from F:      ", np.round(J.diag, 6))
print("Jacobi diagonal, moments:    ", np.round(O.diag, 6))
print("Jacobi off-diagonal from F:  ", np.round(J.offdiag, 6))
print("Jacobi off-diagonal, moments:", np.round(O.offdiag, 6))
report = jacobi_m_check(R, 0.3j)
print(f"Stieltjes function at w = 0.3i agrees with the pair formula to {report.deviation:.1e} "
      f"(constant {report.constant:.12f})")
