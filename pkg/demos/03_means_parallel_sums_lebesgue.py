"""Kubo-Ando connections, parallel sums and the Lebesgue decomposition.

Connections are the always-bounded face of the calculus; the parallel sum
drives both the Lebesgue decomposition of one PSD matrix with respect to
another and the exact norm criterion for the squared perspective.
"""

import numpy as np

from pwcalc import (
    connection,
    connection_generator,
    is_absolutely_continuous,
    lebesgue_decomposition,
    parallel_sum,
    t2_bound,
)
from pwcalc.suites import haar_unitary

np.set_printoptions(precision=6, suppress=True)

# --- operator means ----------------------------------------------------------
A = np.diag([1.0, 4.0])
B = np.eye(2)
print("geometric mean of diag(1,4) and I:\n",
      connection(connection_generator("geometric"), A, B).real)
print("arithmetic mean:\n",
      connection(connection_generator("arithmetic"), A, B).real)

# --- parallel sum ------------------------------------------------------------
# A : B = A - A (A+B)^+ A; for projections P : nQ = n/(1+n) (P ^ Q).
P = np.diag([1.0, 1.0, 0.0])
Q = np.diag([0.0, 1.0, 1.0])
for n in (1, 10, 1000):
    out = parallel_sum(P, n * Q)
    print(f"P : {n}Q has middle entry {out[1, 1].real:.6f} "
          f"(expected {n / (1 + n):.6f})")

# --- Lebesgue decomposition ----------------------------------------------------
# Split A into a B-absolutely continuous part and a B-singular part; the
# singular part comes from the eigenvalue-one block of the representation
# and equals the limit of A - A:nB.
rng = np.random.default_rng(5)
U = haar_unitary(rng, 3)
A = U @ np.diag([2.0, 1.0, 0.5]) @ U.conj().T
B = U @ np.diag([1.0, 0.0, 0.0]) @ U.conj().T  # rank one
A = (A + A.conj().T) / 2
B = (B + B.conj().T) / 2
dec = lebesgue_decomposition(A, B)
print("\nB-singular part norm:", np.linalg.norm(dec.singular_part, 2))
print("absolutely continuous:", is_absolutely_continuous(A, B))
print("residual |ac + singular - A|:",
      np.abs(dec.ac_part + dec.singular_part - A).max())
limit = parallel_sum(A, 1e8 * B)
print("limit cross-check |[B]A - A:(1e8 B)|:",
      np.abs(dec.ac_part - limit).max())

# --- the exact t^2 boundedness criterion ---------------------------------------
# The squared perspective is bounded iff A^2 <= lambda B for some lambda,
# and its operator norm is the least such lambda.
A = np.array([[1.0, 1.0], [1.0, 1.0]])
B = np.diag([1.0, 2.0])
res = t2_bound(A, B)
print("\nA^2 <= lambda B holds with least lambda:", res.lambda_min)
print("certified from above:", res.upper_certified,
      "| fails just below:", res.lower_fails)
