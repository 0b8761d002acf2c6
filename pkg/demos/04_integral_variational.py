"""Integral and variational expressions for perspectives.

Every operator convex function carries an integral representation whose
kernel atoms are parallel sums; evaluating it term by term must reproduce the
direct calculus.  Lower bounds come from piecewise-constant vector
decompositions, with closed-form minimizers attaining the parallel-sum
infima.
"""

import numpy as np

from pwcalc import (
    catalog,
    evaluate_state,
    integral_eval_91,
    integral_eval_92,
    optimal_decomposition,
    parallel_sum,
    perspective_apply,
    quadratic_form,
)
from pwcalc.functions import approximants
from pwcalc.suites import RandomSpec, gen_pair, random_state
from pwcalc.variational import (
    make_quadrature,
    optimizer_decomposition,
    repr77_tlogt,
    repr97_t_alpha,
    variational_bound_94,
    variational_envelope,
)

np.set_printoptions(precision=6, suppress=True)

spec = RandomSpec(4, 4, "well_conditioned", seed=3)
A, B = gen_pair(spec, 0)
rho = random_state(np.random.default_rng(1), 4)

# --- quadrature sanity --------------------------------------------------------
mu = make_quadrature("tlogt", 200)
t = 2.0
print("kernel integral at t=2:",
      mu.integrate(lambda l: t / (1 + l) - t / (t + l)),
      " (2 log 2 =", 2 * np.log(2.0), ")")
nu = make_quadrature("t_alpha", 200, alpha=1.5)
print("t^1.5 kernel at t=3:  ",
      nu.integrate(lambda l: 9.0 / (3.0 + l)), " (3^1.5 =", 3.0 ** 1.5, ")")

# --- integral vs direct evaluation ---------------------------------------------
r = repr77_tlogt(200)
via_integral = integral_eval_91(r, A, B, rho)
direct = evaluate_state(perspective_apply(catalog("tlogt"), A, B).value, rho)
print("\ntlogt by parallel-sum integral:", via_integral)
print("tlogt by direct calculus:      ", direct)

r97 = repr97_t_alpha(1.5, 200)
via_integral = integral_eval_92(r97, A, B, rho)
direct = evaluate_state(perspective_apply(catalog("power", 1.5), A, B).value,
                        rho)
print("t^1.5 by integral:", via_integral, " direct:", direct)

# --- variational lower bounds ---------------------------------------------------
rng = np.random.default_rng(7)
xi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
target = quadratic_form(perspective_apply(catalog("tlogt"), A, B).value, xi)
print("\ntarget form value:", target)
env = variational_envelope(r, A, B, xi, (1, 2, 4, 8, 16, 32))
for n, v in env:
    print(f"  n = {n:3d}: optimizer bound {v:.8f}")

# any admissible decomposition stays below the target; the closed-form
# minimizer attains the parallel-sum infimum exactly
n = 4
app = approximants(r, n)
dec = optimizer_decomposition(app.nu_n, A, B, xi, 1.0 / n, float(n))
print("bound with optimizer pieces:",
      variational_bound_94(r, A, B, xi, n, dec))
t = 0.7
eta, zeta = optimal_decomposition(A, B, xi, t)
cost = float(np.vdot(eta, A @ eta).real) + t * float(np.vdot(zeta, B @ zeta).real)
ps = float(np.vdot(xi, parallel_sum(A, t * B) @ xi).real)
print(f"minimizer cost at t={t}: {cost:.12f}  parallel sum form: {ps:.12f}")
