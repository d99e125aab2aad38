# The three cup-site rules side by side; only the default survives every check.
import numpy as np

from twistedhgp.operators import closure_report, entangler, twisted_stabilizers
from twistedhgp.skeleton import ADJACENCY_RULES, invariance_check, stokes_check, triple_code

H = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], dtype=np.uint8)

for rule in ADJACENCY_RULES:
    tc = triple_code(H, H, rule)
    st = stokes_check(tc)
    cl = closure_report(twisted_stabilizers(tc))
    print(
        f"{rule:15s} leibniz={len(st.leibniz_failures):3d} "
        f"shifts={len(invariance_check(tc, 50)):3d} closure={len(cl.failures):3d} "
        f"entangler={entangler(tc).ok}"
    )
