"""Tour of the symmetric step distributions.

Every step law in the library is continuous and symmetric about 0, which
is what makes the stopping problems tractable: signs, magnitude
comparisons, and the triangle event of three absolute steps are all
mutually independent.  This script builds one member of each family and
shows the primitives the solvers consume.
"""

import numpy as np

from rankstop import (
    IntervalUnionUniform,
    Laplace,
    PowerFold,
    TabulatedCdf,
    Uniform,
    from_spec,
)

dists = {
    "uniform on (-1, 1)": Uniform(1),
    "standard Laplace": Laplace(1),
    "power-folded, |X| ~ x^2 on (0, 1)": PowerFold(2),
    "uniform on (-2, -1) u (1, 2)": IntervalUnionUniform(1, 2),
    "piecewise-linear table": TabulatedCdf([[0, 0.5], [0.2, 0.58], [0.5, 0.75], [0.8, 0.9], [1.2, 1.0]]),
}

print("CDF symmetry, median quantile, folded CDF")
print("-" * 60)
for label, d in dists.items():
    xs = np.linspace(*(b if np.isfinite(b) else s * 8 for b, s in zip(d.support, (-1, 1))), 501)
    sym = float(np.max(np.abs(d.cdf(xs) + d.cdf(-xs) - 1.0)))
    print(f"{label}")
    print(f"  support {d.support}")
    print(f"  max |F(x) + F(-x) - 1| on a grid: {sym:.2e}")
    print(f"  quantile(1/2) = {d.quantile(0.5)}  (always exactly 0)")
    print(f"  G(x) = 2F(x) - 1 at x = 0.5: {float(d.folded_cdf(0.5)):.6f}")

print()
print("Inverse-CDF sampling is reproducible from (seed, stream)")
print("-" * 60)
rng_a, rng_b = np.random.default_rng(7), np.random.default_rng(7)
lap = dists["standard Laplace"]
draws_a, draws_b = lap.sample(rng_a, 5), lap.sample(rng_b, 5)
print("two generators, same seed:", np.array_equal(draws_a, draws_b))
print("first draws:", np.round(draws_a, 4))

big = lap.sample(np.random.default_rng(42), 10**6)
print(f"10^6 Laplace draws: mean {big.mean():+.5f} (CLT band +-0.004), "
      f"P(X > 0) = {np.mean(big > 0):.4f}")

print()
print("Distributions round-trip through a JSON spec")
print("-" * 60)
spec = dists["uniform on (-2, -1) u (1, 2)"].spec()
print("spec:", spec)
clone = from_spec(spec)
print("clone CDF at 1.5:", float(clone.cdf(1.5)), "(mass splits evenly per interval)")
