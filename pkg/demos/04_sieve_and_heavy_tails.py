# Random stick-breaking laws and a law whose first block may never close.
import numpy as np

from rainstick import Experiment, RunConfig, run_replicated, sieve_realize, summarize

# One realization of the uniform Bernoulli sieve: a random law, fixed once drawn
rng = np.random.default_rng(3)
law = sieve_realize("uniform", 8, rng)
print("weights:", np.round(law.weights[:8], 3))
print("p_1..p_8:", np.round(law.pmf(np.arange(1, 9)), 3))
print("mass left past site 8:", law.remaining_mass(8))

# Averaged over realizations, E K = 3 and Var K = 11
s = run_replicated(Experiment("sieve", {"weights": "uniform"}), RunConfig(7, 20_000))
summ = summarize(s.k)
print(f"sieve: mean {summ.mean:.3f} +- {summ.ci95:.3f}, variance {summ.variance:.2f}")

# Stretched exponential tails: a sizeable fraction of runs never close a
# block. Raising the site cap does not change that fraction.
for cap in (10**3, 10**4):
    s = run_replicated(Experiment("stretched", {"alpha": 0.5}), RunConfig(7, 300, site_cap=cap))
    print(f"site cap {cap}: capped fraction {(~s.complete).mean():.3f}, largest closed block {s.k[s.complete].max()}")
