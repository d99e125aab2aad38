# Red copy of the cyclic repetition family: a toric code on an L x L torus.
import numpy as np

from twistedhgp import distance_report, rate_report, triple_code


def rep(L):
    H = np.zeros((L, L), dtype=np.uint8)
    for i in range(L):
        H[i, i] = H[i, (i + 1) % L] = 1
    return H


for L in range(2, 6):
    tc = triple_code(rep(L), rep(L))
    rates = rate_report(tc)
    d = distance_report(tc, copies=("r",)).distances["r"]["d"]
    print(f"L={L}  n={tc.n_qubits['r']:3d}  k={rates.k['r']}  d={d}")

# every copy plus the twisted count
print()
print(distance_report(triple_code(rep(3), rep(3))).table())
