# Reading the first block off an explicit sequence of drops.
import numpy as np

from rainstick import first_block_from_stream, GeometricLaw

# Sites 3, 1, 4, 1, 3, 1, 2 get hit in that order. Sites 1..4 are wet after
# the 7th drop and nothing beyond 4 is, so the block closes there.
res = first_block_from_stream([3, 1, 4, 1, 3, 1, 2])
print(res)
print("permutation prefix:", res.prefix)

# A stream that runs out before closing a block reports what it saw so far
print(first_block_from_stream([2, 5, 2]))

# Feeding real Geo(1/2) drops: the stream is consumed lazily
rng = np.random.default_rng(0)
law = GeometricLaw(0.5)
drops = (law.sample(rng) for _ in range(10**6))
res = first_block_from_stream(drops)
print("K =", res.k, "after N =", res.n, "drops")
