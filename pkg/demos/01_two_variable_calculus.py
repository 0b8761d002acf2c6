"""Tour of the two-variable functional calculus on PSD matrix pairs.

Builds the compatible representation of a pair, applies a homogeneous
function through it, and shows how genuinely infinite parts arise and where
they live.
"""

import numpy as np

from pwcalc import (
    catalog,
    compatible_representation,
    evaluate_state,
    perspective_of,
    pw_apply,
    pw_commuting_oracle,
    quadratic_form,
)
from pwcalc.linalg import vector_state

np.set_printoptions(precision=6, suppress=True)

# --- the compatible representation -----------------------------------------
# For any PSD pair (A, B), there is a unique pair of positive contractions
# R + S = I on the range of A+B with T*RT = A and T*ST = B, T = (A+B)^(1/2).
A = np.array([[1.0, 1.0], [1.0, 1.0]])
B = np.diag([1.0, 2.0])
rep = compatible_representation(A, B)
print("R eigenvalues:", np.linalg.eigvalsh(rep.r))
print("reconstruction error |T*RT - A|:",
      np.abs(rep.t_map.conj().T @ rep.r @ rep.t_map - A).max())

# --- a bounded calculus value ----------------------------------------------
# The perspective of t^2 is phi(x, y) = x^2/y with boundary conventions;
# on this invertible pair it lands on 1.5 * A with operator norm 3.
phi = perspective_of(catalog("power", 2))
out = pw_apply(phi, A, B)
print("\nphi_{t^2}(A, B) =\n", out.form_matrix().real)
print("operator norm:", out.operator_norm())

# --- a genuinely unbounded value -------------------------------------------
# Two projections with trivial intersection: the squared perspective is
# infinite on the part of P that Q cannot absolutely-continuously see.
P = np.diag([1.0, 0.0])
Q = 0.5 * np.ones((2, 2))
out = pw_apply(phi, P, Q)
print("\nprojection pair: infinity part dimension =", out.infinity_dim)
print("essential subspace basis:\n", out.essential.basis.real)
print("value at the state on e1:", evaluate_state(out, vector_state([1, 0])))
print("value at the state on e2:", evaluate_state(out, vector_state([0, 1])))

# --- the commuting oracle ---------------------------------------------------
# On commuting pairs the calculus must reduce to the joint scalar formula;
# the oracle evaluates it independently of the compatible representation.
A = np.diag([1.0, 2.0, 0.0])
B = np.diag([2.0, 2.0, 1.0])
pf = perspective_of(catalog("tlogt"))
direct = pw_apply(pf, A, B)
oracle = pw_commuting_oracle(pf, A, B)
xi = np.array([0.3, 0.5, 0.8])
print("\ncommuting pair, tlogt perspective:")
print("  direct form value :", quadratic_form(direct, xi))
print("  oracle form value :", quadratic_form(oracle, xi))
