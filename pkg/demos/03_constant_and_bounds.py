# The constant b and the deterministic bounds built on it.
import math

from rainstick import GBlockQuery, compute_b, escape_prob, j_of_t, log_pG, pk_upper_bound, ratio_bound_check
from rainstick.analytics import LOG2, mean_bound

b = compute_b()
print("b =", b)

# Escape probability against its lower bound exp(-b/p)
for p in (0.05, 0.1, 0.3, 0.5, 0.9):
    print(f"p={p:4}: escape {escape_prob(p):.4e}  lower bound {math.exp(-b / p):.4e}")

# Expected block size bound (1/p) e^(b/p): grows very fast as p falls
for p in (0.5, 0.3, 0.2, 0.1):
    print(f"p={p}: E K <= {mean_bound(p):.4g}")

# P[G_{j,t}]: exactly the sites 1..j are wet at time t. At t = log 2 the
# most likely j is k itself.
k, p = 20, 0.3
print("j(log 2) =", j_of_t(LOG2, p, k))
for j in range(17, 24):
    print(j, round(log_pG(GBlockQuery(j, k, LOG2, p)), 4))

# Upper bounds on P[K = k]
print([round(pk_upper_bound(k, 0.3), 4) for k in range(1, 8)])

# The ratio P[G_k] / P[G_j(t)] decays much faster than t^-2
for t in (3 * LOG2, 5, 10, 50):
    r = ratio_bound_check(100, 0.05, t, 2)
    print(f"t={t:.3g}: log ratio {r.log_ratio:.1f}, log t^-2 {math.log(r.bound):.2f}")
