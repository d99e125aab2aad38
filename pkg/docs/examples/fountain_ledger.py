# Two-cluster fountain on a doubled-check code, run symbolically (88 qubits).
import numpy as np

from twistedhgp.protocol import logical_born, plan_fountain, run_ledger
from twistedhgp.skeleton import intersection_tensor, triple_code

H = np.array([[1, 1, 0], [1, 1, 0], [0, 1, 1], [0, 1, 1]], dtype=np.uint8)
tc = triple_code(H, H)
print("qubits:", tc.total_qubits)
print("nonzero T:", np.argwhere(intersection_tensor(tc)).tolist())

plan = plan_fountain(tc)
print("clusters:", plan.clusters)
print("pairs:", plan.pairs, "certificate ok:", plan.certificate["ok"])
print("P(rho):", logical_born(tc, plan))

t = run_ledger(tc, plan, seed=4)
print("mu", t.mu, "rho", t.rho)
for stage, entries in t.stages.items():
    labels = sorted({e.label for e in entries})
    print(stage, len(entries), labels)
