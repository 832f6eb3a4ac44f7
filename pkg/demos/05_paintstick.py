# The paintstick: block sizes of Geo(p)-shifted permutations.
import numpy as np

from rainstick import paintstick_step, sample_paintstick, summarize
from rainstick.paintstick import PaintState

# Red sites form an initial interval, so one integer is the whole state
state = PaintState()
for x in (4, 1, 2, 1):
    done = state.advance(x)
    print(f"ball at {x}: {state.red} red", "(block complete)" if done else "")

print(paintstick_step(1, 5))

# The distribution is heavy-tailed: compare mean, median and trimmed mean
rng = np.random.default_rng(5)
for p in (0.5, 0.4, 0.3):
    k = [sample_paintstick(p, 10**8, rng).k_prime for _ in range(20_000)]
    s = summarize(k)
    print(f"p={p}: mean {s.mean:.2f}  median {s.median:.0f}  trimmed {s.trimmed_mean:.2f}  p log mean {p * np.log(s.mean):.3f}")
