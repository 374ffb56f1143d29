# %% [markdown]
# # Non-stochastic information measures
#
# Uncertain variables are described only by their ranges. This demo builds a
# small joint range and evaluates every measure on it.

# %%
import math

from noiseless import (
    ChannelSpec,
    FiniteRange,
    IntervalUnion,
    JointRelation,
    PriorSpec,
    differential_entropy0,
    hartley_entropy,
    maximal_leakage,
    maximin_information,
    nonstochastic_information,
    nonstochastic_leakage,
    pentagon_channel,
    symmetrized_leakage,
    zero_error_code_search,
)

# %% Hartley entropy of finite ranges and h0 of interval unions
print("H0 of 8 values:", hartley_entropy(FiniteRange(range(8))))
print("h0 of [0, e] in nats:", differential_entropy0(IntervalUnion.interval(0, math.e)))
print("h0 of [0, .5] u [2, 2.5]:", differential_entropy0(IntervalUnion([(0, 0.5), (2, 2.5)])))

# %% Leakage in both directions. Seeing y=a leaves two candidates for x.
rel = JointRelation([(1, "a"), (2, "a"), (3, "b")])
for direction in ("xy", "yx"):
    print(direction, "L0 =", nonstochastic_leakage(rel, direction), "I0 =", nonstochastic_information(rel, direction))
print("symmetrized L0 =", symmetrized_leakage(rel))

# %% Maximin information counts the blocks of the overlap partition
chain = JointRelation([("a", 1), ("b", 1), ("b", 2), ("c", 2), ("d", 3)])
bits, part = maximin_information(chain)
print("I* =", bits, "blocks =", [list(b) for b in part.blocks])

# %% Maximal leakage of a deterministic map depends only on the image size
prior = PriorSpec.discrete({0: 0.1, 1: 0.2, 2: 0.3, 3: 0.2, 4: 0.2})
print("maximal leakage =", maximal_leakage({0: "a", 1: "a", 2: "b", 3: "c", 4: "c"}, prior), "=", math.log2(3))

# %% Zero-error codes. The pentagon sends 2 words alone but 5 in pairs.
for k in (1, 2):
    r = zero_error_code_search(pentagon_channel(), k)
    print(f"pentagon k={k}: {r.size} codewords, rate {r.rate:.4f}, code {r.code}")
parity = ChannelSpec.deterministic(range(6), lambda x: x % 3)
print("mod-3 channel rate:", zero_error_code_search(parity, 2).rate)
