# Block sizes from exponential clocks, compared with the drop-by-drop process.
import numpy as np

from rainstick import GeometricLaw, sample_block_clocks, sample_block_discrete
from rainstick.blocks import run_clocks
from rainstick.montecarlo import law_equality_test

rng = np.random.default_rng(1)
law = GeometricLaw(0.3)

# Site j rings at T_j = E_j / p_j. K is the first k whose clocks all ring
# before any clock to its right. Clocks are stored as logs.
out, state = run_clocks(law, site_cap=10**8, rng=rng)
print("K =", out.k, " log eta =", round(out.log_eta, 3))
print("clocks realized:", state.horizon)
print("first ten log clocks:", np.round(state.log_clock[:10], 2))

# Everything past the realized horizon is summarized by the minimum of the
# tail clocks. K grows like exp(b/p), so small p gets expensive quickly.
for p in (0.3, 0.2, 0.1):
    ks = [sample_block_clocks(GeometricLaw(p), 10**8, rng).k for _ in range(200)]
    print(f"p={p}: median K {np.median(ks):.0f}, max {max(ks)}")

# The discrete process gives the same law for K, and also the drop count N
law = GeometricLaw(0.5)
a = [sample_block_clocks(law, 10**8, rng).k for _ in range(20_000)]
b = [sample_block_discrete(law, 2**62, rng) for _ in range(20_000)]
print("chi-square p-value, clocks vs drops:", round(law_equality_test(a, [o.k for o in b], 15), 3))
print("median N at p=0.5:", np.median([o.n_drops for o in b]))
