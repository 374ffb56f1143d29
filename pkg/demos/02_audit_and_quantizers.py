# %% [markdown]
# # Auditing mechanisms and synthesizing quantizers
#
# A deterministic mechanism has budget epsilon when, with everyone else fixed,
# no individual can move the output over more than 2**epsilon values.

# %%
import math
from fractions import Fraction

from noiseless import (
    Compose,
    Constant,
    DatasetSpec,
    FiniteRange,
    Identity,
    IntervalUnion,
    LinearQuantizer,
    QuerySpec,
    audit,
    audit_local,
    quantizer_levels,
    synthesize_quantizer,
)

bits = DatasetSpec((FiniteRange([0, 1]),) * 2, QuerySpec.mean())
unit = DatasetSpec((IntervalUnion.interval(0, 1),) * 2, QuerySpec.mean())

# %% Exact audits on finite and continuous data
print(audit(bits, Identity()).to_text())
print("constant:", audit(unit, Constant(0)).epsilon_star)
print("q=2 on the mean of two:", audit(unit, LinearQuantizer(2, 0, 1)).epsilon_star)
print("identity on [0,1]^2:", audit(unit, Identity()).epsilon_star)
print("local audit of 8 values:", audit_local(DatasetSpec((FiniteRange(range(8)),) * 2, QuerySpec.mean()), Identity()).epsilon_star)

# %% [markdown]
# The image of one individual is an interval of width S. Placing q = 2**eps * W/S
# cells looks natural, but such an interval can straddle one more cell than that.
# The strict rule keeps the count within floor(2**eps).

# %%
for eps in (1, 2, 3):
    nominal = synthesize_quantizer(unit, eps, rule="nominal")
    strict = synthesize_quantizer(unit, eps)
    print(f"eps={eps}: nominal q={nominal.levels} audits to {audit(unit, nominal).epsilon_star:.3f}, "
          f"strict q={strict.levels} audits to {audit(unit, strict).epsilon_star:.3f}")

# %% Level counts for a mean of four on [0, 1]
for eps in (0.5, 1, math.log2(3), 2, 3):
    print(f"eps={eps:.3f}: strict {quantizer_levels(eps, 0, 1, Fraction(1, 4))}, "
          f"nominal {quantizer_levels(eps, 0, 1, Fraction(1, 4), rule='nominal')}")

# %% Releasing two quantized views costs at most the sum of their budgets
a, b = LinearQuantizer(2, 0, 1), LinearQuantizer(3, 0, 1)
print("parts:", audit(unit, a).epsilon_star, audit(unit, b).epsilon_star,
      "together:", audit(unit, Compose((a, b))).epsilon_star)

# %% Non-affine queries fall back to a grid, which gives a lower bound
product = DatasetSpec(unit.domains, QuerySpec.custom(lambda x: x[0] * x[1], (0, 1)))
report = audit(product, LinearQuantizer(4, 0, 1), grid_step=Fraction(1, 16))
print(report.mode, report.epsilon_star, "lower bound" if report.lower_bound else "exact")
