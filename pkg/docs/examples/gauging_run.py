"""Gauging measurement on the 24-qubit rep-2 instance.

The dense engine explores every outcome of the green generator measurements,
so the Born probabilities below are exact rather than sampled.
"""
import numpy as np

from twistedhgp.protocol import DenseProtocol, plan_fountain
from twistedhgp.skeleton import triple_code

H = np.array([[1, 1], [1, 1]], dtype=np.uint8)
tc = triple_code(H, H)
plan = plan_fountain(tc)
print("plan:", plan.red, plan.blue, "pairs:", plan.pairs)

eng = DenseProtocol(tc, plan)
print("P(rho):", eng.rho_distribution())

for mu, leaf in sorted(eng.leaves.items())[:4]:
    eta, br = next(iter(leaf["branches"].items()))
    pair = br["logical"].pairs[0]
    print(mu, "rho", leaf["rho"], "magic %.6f  |11> %.6f" % (pair["fidelity_magic"], pair["fidelity_11"]))

# a few seeded trials through the cached branch tree
rng = np.random.default_rng(0)
for _ in range(5):
    t = eng.transcript(*eng.sample(rng), seed=None)
    print(t.rho, t.correction)
