# %% [markdown]
# # What an adversary can and cannot learn
#
# Each check below pins the other individuals, looks at the channel from one
# individual to the output and compares what it leaks with the audited budget.

# %%
from fractions import Fraction

from noiseless import (
    DatasetSpec,
    FiniteRange,
    IntervalUnion,
    LinearQuantizer,
    PriorSpec,
    QuerySpec,
    capacity_check,
    estimation_error_check,
    hypothesis_analysis,
    leakage_chain,
    maximal_leakage_check,
)

ds = DatasetSpec((FiniteRange(range(6)), FiniteRange(range(3))), QuerySpec.sum())
mech = LinearQuantizer(3, 0, 7)

# %% The information chain I* <= L0s <= L0 <= eps*
chain = leakage_chain(ds, mech, 0, (2,))
print("I*, L0s, L0, eps* =", chain.as_tuple(), "holds:", chain.holds)

# %% Zero-error codes through the induced channel never beat the budget
check = capacity_check(ds, mech, 0, (2,))
print("code sizes:", check.sizes, "rates:", [round(r, 3) for r in check.rates], "eps*:", round(check.epsilon, 3))

# %% Binary hypothesis tests between two values of individual 1
for xa, xb in ((0, 5), (0, 1)):
    r = hypothesis_analysis(ds, mech, 0, xa, xb, (2,))
    print(f"{xa} vs {xb}:", r.to_text().replace("\n", "; "))

# %% Maximal leakage under a skewed prior
prior = PriorSpec.discrete({x: Fraction(x + 1, 21) for x in range(6)})
print(maximal_leakage_check(ds, mech, 0, (2,), prior))

# %% Estimation error stays above its lower bound
unit = DatasetSpec((IntervalUnion.interval(0, 1),), QuerySpec.mean())
uniform = PriorSpec.uniform(unit.domains[0])
for q in (2, 4, 8):
    c = estimation_error_check(unit, LinearQuantizer(q, 0, 1), 0, uniform, 2, seed=q)
    print(f"q={q}: MSE {c.empirical:.5f} (exact {1 / (12 * q * q):.5f}), bound {c.bound:.2e}")
