"""The inapproximability gap factor and the inequalities behind it.

With the vertex-cover promise constants c_min ~ 0.5103 and c_max ~ 0.5155,
the welfare values of yes- and no-instances separate by the factor
mu = (2(1+alpha)/3)^(-gamma/2.5).  The separation argument leans on four
strict ratio inequalities; they hold exactly for every alpha strictly
between 1/3 and 1/2 and degrade to equalities at the endpoints.
"""

from fractions import Fraction

from nswlab import hardness_constants, improving_move_inequalities

print("gap factor mu for several alpha (defaults c_min=0.5103, c_max=0.5155):")
for alpha in (Fraction(1, 3), Fraction(2, 5), Fraction(5, 12), Fraction(11, 24)):
    hc = hardness_constants(alpha)
    print(f"  alpha={str(alpha):5s}  beta={hc.beta:.4f}  gamma={hc.gamma:.6f}  mu={hc.mu:.7f}")

print("\n(the headline mu ~ 1.00008 uses alpha = 1/3, the interval's edge;")
print(" instance construction requires the open interval unless overridden)")

print("\nimproving-move ratios, exact:")
for alpha in (Fraction(1, 3), Fraction(2, 5), Fraction(1, 2)):
    checks = improving_move_inequalities(alpha)
    summary = "  ".join(f"[{c.rule}] {c.ratio} {'>' if c.holds else '='} 1" for c in checks)
    print(f"  alpha={str(alpha):4s}: {summary}")

print("\nstrictness of all four is what forces the normal form:")
print("each violated rule yields a swap that multiplies the product by more than 1.")
