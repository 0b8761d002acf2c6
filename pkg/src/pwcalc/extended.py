"""Finite-dimensional extended lower-semibounded self-adjoint elements.

An element is a Hermitian operator on an *essential* subspace together with
the value +inf on the orthogonal complement (the infinity part).  Evaluation
against states, the form order, form sums and congruences all live here.

Conventions enforced throughout: 0 * inf = 0, inf + finite = inf, and
inf - inf is a trapped logic error (never a silent NaN).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    Subspace,
    eigh,
    full_space,
    hermitian_part,
    require_state,
    subspace_meet,
    zero_subspace,
    EPS,
)

INF = math.inf

# A state numerically orthogonal to the infinity part evaluates finite:
# the infinity mass threshold is STATE_INF_REL_TOL * Tr(rho).
STATE_INF_REL_TOL = 1e-12

# Principal-angle cosine tolerance for the domain-containment half of the
# form order; decoupled from the eigenvalue slack on purpose.
CONTAINMENT_COS_TOL = 1e-8

# Relative amplitude below which a direction counts as clear of the infinity
# part when congruences split kernels.  Consistent with STATE_INF_REL_TOL:
# an amplitude fraction of 1e-12 carries mass 1e-24, far under the state
# threshold, so both classifications agree on which vectors evaluate finite.
KERNEL_REL_TOL = 1e-12


class FormArithmeticError(ArithmeticError):
    """inf - inf or NaN reached extended-real arithmetic."""


def _check_no_nan(x: float) -> float:
    if math.isnan(x):
        raise FormArithmeticError("NaN in extended-real arithmetic")
    return x


def xmul(a: float, b: float) -> float:
    """Extended-real product with the 0 * inf = 0 convention."""
    _check_no_nan(a), _check_no_nan(b)
    if a == 0.0 or b == 0.0:
        return 0.0
    if a == -INF or b == -INF:
        raise FormArithmeticError("-inf is not a permitted value")
    return _check_no_nan(a * b)


def xadd(*values: float) -> float:
    """Extended-real sum; inf - inf is trapped."""
    total = 0.0
    seen_inf = False
    for v in values:
        _check_no_nan(v)
        if v == -INF:
            raise FormArithmeticError("-inf is not a permitted value")
        if v == INF:
            seen_inf = True
        else:
            total += v
    return INF if seen_inf else _check_no_nan(total)


@dataclass(frozen=True)
class ExtendedSelfAdjoint:
    """Hermitian operator on an essential subspace, +inf on its complement.

    finite_part is expressed in the coordinates of essential.basis; the
    quadratic form on the ambient space is q(xi) = <F V* xi, V* xi> for xi in
    the essential part and +inf otherwise.
    """

    ambient_dim: int
    essential: Subspace
    finite_part: np.ndarray = field(repr=False)
    lower_bound: float = 0.0

    def __post_init__(self):
        F = hermitian_part(np.asarray(self.finite_part, dtype=complex))
        object.__setattr__(self, "finite_part", F)
        k = self.essential.dim
        if self.essential.ambient_dim != self.ambient_dim:
            raise ValueError("essential subspace has wrong ambient dimension")
        if F.shape != (k, k):
            raise ValueError(
                f"finite_part shape {F.shape} does not match essential dim {k}"
            )

    @property
    def infinity_dim(self) -> int:
        return self.ambient_dim - self.essential.dim

    @property
    def is_bounded(self) -> bool:
        return self.infinity_dim == 0

    def form_matrix(self) -> np.ndarray:
        """V F V* on the ambient space; valid as a form only on the essential part."""
        V = self.essential.basis
        return hermitian_part(V @ self.finite_part @ V.conj().T)

    def infinity_projector(self) -> np.ndarray:
        V = self.essential.basis
        return np.eye(self.ambient_dim, dtype=complex) - V @ V.conj().T

    def finite_eigenvalues(self) -> np.ndarray:
        w, _ = eigh(self.finite_part)
        return w

    def operator_norm(self) -> float:
        """max |eigenvalue|, +inf when the infinity part is nonzero."""
        if not self.is_bounded:
            return INF
        w = self.finite_eigenvalues()
        return float(np.abs(w).max(initial=0.0))

    def trace(self) -> float:
        """Trace; +inf when the infinity part is nonzero."""
        if not self.is_bounded:
            return INF
        return float(np.trace(self.finite_part).real)


def from_matrix(M: np.ndarray) -> ExtendedSelfAdjoint:
    """Wrap a bounded Hermitian matrix (full essential part, identity basis)."""
    M = hermitian_part(M)
    n = M.shape[0]
    w, _ = eigh(M)
    lb = float(w.min(initial=0.0))
    return ExtendedSelfAdjoint(n, full_space(n), M, lower_bound=min(lb, 0.0))


def zero_element(n: int) -> ExtendedSelfAdjoint:
    return from_matrix(np.zeros((n, n), dtype=complex))


def make_extended(pairs) -> ExtendedSelfAdjoint:
    """Assemble an element from orthonormal (eigenvalue, eigenvector) pairs.

    Eigenvalues may be +inf; those eigenvectors form the infinity part.  The
    vectors must be orthonormal and span the ambient space.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("make_extended needs at least one eigenpair")
    vecs = np.column_stack([np.asarray(v, dtype=complex).reshape(-1) for _, v in pairs])
    n, k = vecs.shape
    if k != n:
        raise ValueError(f"eigenvectors must span the space: got {k} vectors in C^{n}")
    gram = vecs.conj().T @ vecs
    dev = np.abs(gram - np.eye(n))
    if dev.max() > 1e-10:
        i, j = np.unravel_index(int(dev.argmax()), dev.shape)
        raise ValueError(
            f"eigenvectors not orthonormal: Gram[{i}][{j}] deviates by {dev[i, j]:.3e}"
        )
    values = [float(v) for v, _ in pairs]
    for v in values:
        _check_no_nan(v)
        if v == -INF:
            raise ValueError("-inf eigenvalue not permitted (lower semibounded)")
    fin = [i for i, v in enumerate(values) if v != INF]
    basis = vecs[:, fin]
    F = np.diag([values[i] for i in fin]).astype(complex)
    # the raw eigenvector basis is orthonormal but re-span for numerical hygiene
    ess = Subspace(basis) if basis.shape[1] else zero_subspace(n)
    lb = min((values[i] for i in fin), default=0.0)
    return ExtendedSelfAdjoint(n, ess, F, lower_bound=min(lb, 0.0))


def infinity_on(sub: Subspace) -> ExtendedSelfAdjoint:
    """Element that is +inf on `sub` and 0 on its complement."""
    comp = sub.complement()
    k = comp.dim
    return ExtendedSelfAdjoint(sub.ambient_dim, comp, np.zeros((k, k), dtype=complex))


def evaluate_state(T: ExtendedSelfAdjoint, rho: np.ndarray) -> float:
    """m(rho): finite-branch trace pairing, +inf when rho loads the inf part.

    Returns Tr(rho compressed to the essential part * finite_part) when
    Tr(rho P_inf) <= STATE_INF_REL_TOL * Tr(rho), else +inf.  The threshold
    realizes the exact 0 * inf = 0 convention numerically.
    """
    rho = require_state(rho)
    if rho.shape[0] != T.ambient_dim:
        raise ValueError(
            f"dimension mismatch: state is {rho.shape[0]}-dim, element is "
            f"{T.ambient_dim}-dim"
        )
    tr = float(np.trace(rho).real)
    if T.infinity_dim:
        Pinf = T.infinity_projector()
        inf_mass = float(np.trace(rho @ Pinf).real)
        if inf_mass > STATE_INF_REL_TOL * tr:
            return INF
    V = T.essential.basis
    compressed = V.conj().T @ rho @ V
    return float(np.trace(compressed @ T.finite_part).real)


def quadratic_form(T: ExtendedSelfAdjoint, xi: np.ndarray) -> float:
    """q_T(xi) = m(omega_xi); 0 at xi = 0."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    if xi.shape[0] != T.ambient_dim:
        raise ValueError("vector dimension mismatch")
    nrm2 = float(np.vdot(xi, xi).real)
    if nrm2 == 0.0:
        return 0.0
    if T.infinity_dim:
        V = T.essential.basis
        coords = V.conj().T @ xi
        inf_mass = nrm2 - float(np.vdot(coords, coords).real)
        if inf_mass > STATE_INF_REL_TOL * nrm2:
            return INF
        return float(np.vdot(coords, T.finite_part @ coords).real)
    coords = T.essential.basis.conj().T @ xi
    return float(np.vdot(coords, T.finite_part @ coords).real)


def add(T1: ExtendedSelfAdjoint, T2: ExtendedSelfAdjoint) -> ExtendedSelfAdjoint:
    """Form sum: essential parts intersect, finite forms add on the meet."""
    if T1.ambient_dim != T2.ambient_dim:
        raise ValueError("dimension mismatch in form sum")
    if T1.is_bounded and T2.is_bounded:
        return from_matrix(T1.form_matrix() + T2.form_matrix())
    meet = subspace_meet(T1.essential, T2.essential)
    W = meet.basis
    G = T1.form_matrix() + T2.form_matrix()
    F = hermitian_part(W.conj().T @ G @ W)
    w, _ = eigh(F)
    lb = float(w.min(initial=0.0))
    return ExtendedSelfAdjoint(T1.ambient_dim, meet, F, lower_bound=min(lb, 0.0))


def scale(alpha: float, T: ExtendedSelfAdjoint) -> ExtendedSelfAdjoint:
    """alpha * T for alpha >= 0; scale(0, T) is the zero bounded element."""
    if alpha < 0:
        raise ValueError("scale factor must be nonnegative")
    if alpha == 0.0:
        return zero_element(T.ambient_dim)
    return ExtendedSelfAdjoint(
        T.ambient_dim, T.essential, alpha * T.finite_part,
        lower_bound=min(alpha * T.lower_bound, 0.0),
    )


def congruence(C: np.ndarray, T: ExtendedSelfAdjoint) -> ExtendedSelfAdjoint:
    """C* T C for a rectangular C mapping K -> H (shape dim_H x dim_K).

    The result lives on K with q(xi) = q_T(C xi); its essential part is the
    preimage of T's essential part, computed from the SVD kernel of P_inf C.
    """
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    if C.shape[0] != T.ambient_dim:
        raise ValueError(
            f"shape mismatch: C maps into C^{C.shape[0]}, element lives on "
            f"C^{T.ambient_dim}"
        )
    dim_k = C.shape[1]
    G = T.form_matrix()
    if T.is_bounded:
        return from_matrix(C.conj().T @ G @ C)
    W_inf = T.infinity_projector() @ C  # rows annihilating the new essential part
    U, s, Vh = np.linalg.svd(W_inf)
    tol = max(max(W_inf.shape) * EPS, KERNEL_REL_TOL) * (s.max(initial=0.0))
    rank = int(np.sum(s > tol))
    kernel = Vh[rank:].conj().T  # dim_k x (dim_k - rank), orthonormal
    ess = Subspace(kernel) if kernel.shape[1] else zero_subspace(dim_k)
    CW = C @ kernel
    F = hermitian_part(CW.conj().T @ G @ CW)
    w, _ = eigh(F)
    lb = float(w.min(initial=0.0))
    return ExtendedSelfAdjoint(dim_k, ess, F, lower_bound=min(lb, 0.0))


def form_leq(T1: ExtendedSelfAdjoint, T2: ExtendedSelfAdjoint, slack: float):
    """Form order T1 <= T2 up to slack, with a witness on failure.

    True iff essential(T2) is contained in essential(T1) (principal-angle
    cosines within CONTAINMENT_COS_TOL) and the compression of q2 - q1 to
    essential(T2) has min eigenvalue >= -slack.  On failure returns a vector
    xi with q1(xi) > q2(xi) + slack.
    """
    if T1.ambient_dim != T2.ambient_dim:
        raise ValueError("dimension mismatch in form order")
    V2 = T2.essential.basis
    if T2.essential.dim and not T1.essential.contains(T2.essential,
                                                      CONTAINMENT_COS_TOL):
        # direction of essential(T2) farthest from essential(T1): q1 = inf there
        if T1.essential.dim == 0:
            witness = V2[:, 0]
        else:
            _, sv, Vh = np.linalg.svd(T1.essential.basis.conj().T @ V2)
            if len(sv) < T2.essential.dim:
                idx = T2.essential.dim - 1
            else:
                idx = int(np.argmin(sv))
            witness = V2 @ Vh[idx].conj()
        return False, witness
    if T2.essential.dim == 0:
        return True, None
    D = hermitian_part(V2.conj().T @ (T2.form_matrix() - T1.form_matrix()) @ V2)
    w, Q = eigh(D)
    if w[0] >= -slack:
        return True, None
    return False, V2 @ Q[:, 0]


def approx_equal(T1: ExtendedSelfAdjoint, T2: ExtendedSelfAdjoint,
                 slack: float) -> bool:
    """Mutual form order: the elements agree as quadratic forms up to slack."""
    le, _ = form_leq(T1, T2, slack)
    ge, _ = form_leq(T2, T1, slack)
    return le and ge


BOUNDED = "bounded"
DENSE_DOMAIN = "dense_domain"  # collapses into bounded at finite dimension
PROPER_INFINITY = "proper_infinity_part"


def classify(T: ExtendedSelfAdjoint) -> str:
    """'bounded' iff the infinity part is zero-dimensional.

    At finite dimension a dense domain forces boundedness, so the
    dense_domain label is never produced; it exists for interface parity.
    """
    return BOUNDED if T.is_bounded else PROPER_INFINITY


# ---------------------------------------------------------------------------
# Serialization: {"n": ..., "essential_basis": re/im grids (n x k),
#                 "finite_part": re/im grids (k x k)}
# ---------------------------------------------------------------------------

def _grids(M: np.ndarray):
    return ([[float(x.real) for x in row] for row in M],
            [[float(x.imag) for x in row] for row in M])


def to_json_dict(T: ExtendedSelfAdjoint) -> dict:
    bre, bim = _grids(T.essential.basis)
    fre, fim = _grids(T.finite_part)
    return {
        "n": T.ambient_dim,
        "essential_basis": {"re": bre, "im": bim},
        "finite_part": {"re": fre, "im": fim},
    }


def dump_json(T: ExtendedSelfAdjoint, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_json_dict(T), fh)
        fh.write("\n")


def from_json_dict(payload: dict) -> ExtendedSelfAdjoint:
    n = payload["n"]
    eb = payload["essential_basis"]
    basis = np.array(eb["re"], dtype=float) + 1j * np.array(eb["im"], dtype=float)
    basis = basis.reshape(n, -1)
    fp = payload["finite_part"]
    k = basis.shape[1]
    F = (np.array(fp["re"], dtype=float) + 1j * np.array(fp["im"], dtype=float))
    F = F.reshape(k, k)
    sub = Subspace(basis) if k else zero_subspace(n)
    return ExtendedSelfAdjoint(n, sub, F)
