"""The dyadic family 0, 1, 1/2, 1/4, ... forces cubic net-refinement work."""
from atsp.bench import cubic_lower_bound, run_bench, sharpness_family

print("family for n = 6:", sharpness_family(6).ravel().tolist())

## One point joins the net per level, and every level rescans the residual
result = run_bench([16, 32, 64, 128], family="sharpness")
for rec in result.records:
    count = rec.meter["net-refinement"]
    print(f"n = {rec.n:4d}: levels {rec.levels:4d}  refinement pairs {count:9d}  "
          f"n^3/32 = {cubic_lower_bound(rec.n):9.0f}")
print(f"log-log slope {result.slope:.3f} (cubic growth gives 3)")

## A uniform random cloud refines in far fewer levels
uniform = run_bench([100, 200, 400], family="uniform-random", seed=0)
for rec in uniform.records:
    print(f"uniform n = {rec.n}: levels {rec.levels}, "
          f"refinement pairs {rec.meter['net-refinement']}")
print(f"uniform slope {uniform.slope:.3f}")
