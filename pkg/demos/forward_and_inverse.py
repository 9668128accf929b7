"""Transform a short sequence, check the conserved quantities, then peel it back.

Run with ``python3 demos/forward_and_inverse.py``.
"""

import numpy as np

from nlft import CoefficientSequence, layer_strip_finite, nlft_finite, plancherel_check, random_batch, sum_rules

F = CoefficientSequence(-1, [0.3, -0.4j, 0.5 + 0.2j, 0.1])
p = nlft_finite(F)
print("sequence F_n for n =", F.start, "..", F.stop - 1)
print("  ", np.round(F.values, 3))
print("a has exponents", p.a.lo, "..", p.a.hi, "and a(inf) =", round(p.a_at_infinity(), 6))
print("b has exponents", p.b.lo, "..", p.b.hi)

lhs, rhs = plancherel_check(F)
print(f"\nmean of log|a| on the circle  {lhs:.15f}")
print(f"-1/2 sum log(1 - |F_n|^2)     {rhs:.15f}")
rules = sum_rules(F)
print(f"first moment of log|a|: {rules.k1_lhs:.12f} vs {rules.k1_rhs:.12f}")

G = layer_strip_finite(p)
print("\nlayer stripping recovers F to", f"{np.max(np.abs(G.restrict(-1, 2).values - F.values)):.1e}")

print("\nRecovery error grows with the size of a (eps * max|a|^2):")
eps = np.finfo(float).eps
for F in random_batch(6, 48, 0.95, seed=2):
    p = nlft_finite(F)
    size = float(np.max(np.abs(p.a.coeffs)))
    try:
        G = layer_strip_finite(p)
        err = f"{np.max(np.abs(G.restrict(F.start, F.stop - 1).values - F.values)):.1e}"
    except Exception as exc:  # peeling can diverge once eps * max|a|^2 nears 1
        err = type(exc).__name__
    print(f"  max|a| {size:9.2e}   eps*max|a|^2 {eps * size ** 2:8.1e}   error {err}")
