"""Defeat the Gauss-Kronrod error estimator on purpose.

A piecewise-constant function whose plateau boundaries sit exactly on the
rule's abscissas looks locally smooth to every aligned panel: the Gauss and
Kronrod sums each average the plateaus to something plausible, their
difference stays tiny, and the estimator happily under-reports. The
adaptive scheme only escapes by brute force -- refinement has to push past
the alignment depth, and the leaf count roughly doubles with every level
baked into the function.
"""

from quadprice import QuadSpec, analytic_E0, blowup_profile

N = 7
EPS = 1e-4
e0 = analytic_E0(N, EPS)
print(f"n={N} eps={EPS:g}  analytic single-panel deception error E0 = {e0:.6e}")
print()
print(f"{'level':>5} {'leaves':>7} {'fevals':>8} {'value':>16} "
      f"{'true error':>12} {'estimate':>12} {'deceived':>8}")
for level in range(1, 7):
    tr = blowup_profile(N, level, EPS, spec=QuadSpec(abs_tol=1e-10, rel_tol=1e-6))
    print(f"{level:>5} {tr.leaves:>7} {tr.fevals:>8} {tr.value:>16.12f} "
          f"{tr.true_error:>12.3e} {tr.error_estimate:>12.3e} "
          f"{str(tr.deceived):>8}")

print()
print("The integral is exactly 2 and the integrand never strays more than")
print("1e-4 from a constant, yet the leaf count doubles per level and the")
print("last row burns over a million evaluations. Even then the reported")
print("estimate sits below the error actually committed: deceived end to")
print("end. Error estimates are evidence, not proof.")
