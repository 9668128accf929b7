"""A pair with a pole of b on the circle has more than one preimage.

The pair a = 2z/(z - 1), b = (z + 1)/(z - 1) is inverted twice with
opposite factorization policies; both sequences transform back to it.
The same pair is then split at its circle pole in several ways.

Run with ``python3 demos/two_inversions.py``.
"""

import numpy as np

from nlft import RationalFunction, SU11Pair, classify_poles, energy, invert_full_line
from nlft.inverse_nlft import retransform_deviation
from nlft.riemann_hilbert import reconstruction_deviation, shared_pole_factorization, triple_factorization_rational

p = SU11Pair(RationalFunction([0, 2], [-1, 1]), RationalFunction([1, 1], [-1, 1]))
print(f"energy log a(inf) = {energy(p):.6f} (log 2 = {np.log(2):.6f})")

for policy in ("min-right", "max-right"):
    inv = invert_full_line(p, steps=200, policy=policy)
    lo, hi = inv.sequence.support()
    window = inv.sequence.restrict(-3, 3).values.real
    print(f"\n{policy}: support {lo}..{hi}")
    print("  F_-3..F_3 =", np.round(window, 4))
    print(f"  transform of the recovered sequence deviates by {retransform_deviation(inv, p):.1e}")

t = triple_factorization_rational(p)
print("\nleft / middle / right energies:", {k: round(v, 6) for k, v in t.energies().items()})
print(f"reconstruction {reconstruction_deviation(t, p):.1e}")

print("\nSharing the pole between the factors with mu_+ mu_- = 1/4:")
for mu_plus in (0.3, 0.5, 0.8):
    f = shared_pole_factorization(p, {1.0: (1, 1, mu_plus, 0.25 / mu_plus)})
    (q,) = classify_poles(f, p)
    print(f"  mu_+ {mu_plus:.2f}: energies left {energy(f.left):.4f}, right {energy(f.right):.4f}, "
          f"read back mu_+ {q.mu_plus:.4f}, reconstruction {reconstruction_deviation(f, p):.1e}")
