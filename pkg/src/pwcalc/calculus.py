"""Two-variable functional calculus for pairs of PSD matrices.

A homogeneous function phi on the closed positive quadrant is applied to a
pair (A, B) through the compatible representation (T, R, S) of the pair:
T = (A+B)^{1/2} restricted to the range closure of A+B, R + S = I there,
T*RT = A and T*ST = B.  The calculus is phi(A, B) = T* phi(R, S) T, assembled
from the eigenvalues of R through the diagonal t -> phi(t, 1-t).

Eigenvalues of R within ENDPOINT_TOL of 0 or 1 take the corner values
phi(0,1) / phi(1,0): the corner conventions are exact set distinctions that
numerics must discretize, and this single constant is the one semantic
tolerance of the library.  A diagonal that diverges continuously near an
endpoint (t^2/(1-t) near 1, say) therefore produces a large finite value for
eigenvalues just outside the tolerance band and +inf inside it; there is no
smoothing across that cliff, only the exposed tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .extended import (
    ExtendedSelfAdjoint,
    FormArithmeticError,
    INF,
    congruence,
    form_leq,
    from_matrix,
    infinity_on,
    make_extended,
    quadratic_form,
    xmul,
    zero_element,
)
from .functions import (
    CLOSED_POS,
    DomainError,
    ExtendedFunction,
    calculus,
)
from .linalg import (
    Subspace,
    default_rank_tol,
    eigh,
    hermitian_part,
    pinv_sqrt,
    psd_sqrt,
    range_subspace,
    require_psd,
    span,
    spectral_norm,
)

# Endpoint classification tolerance on eigenvalues of R (which lie in [0,1]).
ENDPOINT_TOL = 1e-10


class PreconditionError(ValueError):
    """A documented precondition of an operation is violated."""


@dataclass(frozen=True)
class HomogeneousFunction:
    """Homogeneous two-variable function via its diagonal t -> phi(t, 1-t).

    The diagonal lives on [0,1] (full variant) or (0,1] / [0,1) (restricted
    variants); the corner values phi(1,0), phi(0,1) extend it to the axes and
    phi(0,0) = 0 always.  Bivariate evaluation routes through the diagonal at
    t = x/(x+y), which is equivalent for homogeneous functions and keeps a
    single tolerance policy.
    """

    name: str
    diagonal: ExtendedFunction
    corner_x: float  # phi(1, 0)
    corner_y: float  # phi(0, 1)
    variant: str = "full"  # full | ge | le

    def __post_init__(self):
        if self.variant not in ("full", "ge", "le"):
            raise ValueError(f"unknown variant {self.variant!r}")
        for v in (self.corner_x, self.corner_y):
            if math.isnan(v) or v == -INF:
                raise ValueError("corner values must be in (-inf, inf]")
        # corners must agree with the diagonal where its domain is closed
        d = self.diagonal.domain
        if d.hi == 1.0 and d.closed_hi:
            v = self.diagonal(1.0)
            if not (v == self.corner_x or abs(v - self.corner_x) <= 1e-12 * (
                    1 + abs(v) if math.isfinite(v) else 1)):
                raise ValueError(
                    f"{self.name}: diagonal(1) = {v} disagrees with "
                    f"phi(1,0) = {self.corner_x}")
        if d.lo == 0.0 and d.closed_lo:
            v = self.diagonal(0.0)
            if not (v == self.corner_y or abs(v - self.corner_y) <= 1e-12 * (
                    1 + abs(v) if math.isfinite(v) else 1)):
                raise ValueError(
                    f"{self.name}: diagonal(0) = {v} disagrees with "
                    f"phi(0,1) = {self.corner_y}")

    def diagonal_value(self, t: float, endpoint_tol: float = ENDPOINT_TOL) -> float:
        """phi(t, 1-t) with endpoint classification at the corners."""
        if t >= 1.0 - endpoint_tol:
            if self.variant == "le":
                raise PreconditionError(
                    f"{self.name}: eigenvalue {t} hits the excluded endpoint 1"
                )
            return self.corner_x
        if t <= endpoint_tol:
            if self.variant == "ge":
                raise PreconditionError(
                    f"{self.name}: eigenvalue {t} hits the excluded endpoint 0"
                )
            return self.corner_y
        return self.diagonal(t)  # NaN traps inside the evaluator

    def bivariate(self, x: float, y: float,
                  endpoint_tol: float = ENDPOINT_TOL,
                  zero_tol: float = 0.0) -> float:
        """phi(x, y) on the closed quadrant; phi(0,0) = 0.

        Arguments with x + y <= zero_tol count as the origin: callers that
        feed eigenvalue pairs pass the rank tolerance of A + B here, so the
        kernel convention matches the compatible-representation path.
        """
        if x < 0 or y < 0:
            raise DomainError(f"{self.name}: bivariate arguments must be >= 0")
        s = x + y
        if s <= zero_tol:
            return 0.0
        return xmul(s, self.diagonal_value(x / s, endpoint_tol))


def homogeneous_from_diagonal(name: str, diagonal: ExtendedFunction,
                              corner_x: float, corner_y: float,
                              variant: str = "full") -> HomogeneousFunction:
    return HomogeneousFunction(name, diagonal, corner_x, corner_y, variant)


@dataclass(frozen=True)
class CompatibleRepresentation:
    """(T, R, S) for a pair (A, B):  R + S = I on the range of A+B,
    T*RT = A and T*ST = B, with T the square root of A+B in range coordinates.
    """

    subspace: Subspace                      # H_{A,B}, the range closure of A+B
    t_map: np.ndarray = field(repr=False)   # k x n, maps H into H_{A,B} coords
    r: np.ndarray = field(repr=False)       # k x k, eigenvalues in [0, 1]
    s: np.ndarray = field(repr=False)       # k x k, identity minus r


def compatible_representation(A: np.ndarray, B: np.ndarray,
                              rank_tol: float | None = None
                              ) -> CompatibleRepresentation:
    """Compute the unique positive-contraction pair over the range of A+B.

    R is the compression of (A+B)^{-1/2} A (A+B)^{-1/2} to the range, with
    eigenvalues clipped into [0,1] (floating error can push them to 1+1e-16,
    which would crash diagonal evaluators).
    """
    A = require_psd(A, name="A", atol=1e-9)
    B = require_psd(B, name="B", atol=1e-9)
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    S_sum = hermitian_part(A + B)
    sq = psd_sqrt(S_sum)
    inv_half, h_ab = pinv_sqrt(S_sum, rank_tol=rank_tol)
    U = h_ab.basis
    t_map = U.conj().T @ sq
    R = hermitian_part(U.conj().T @ inv_half @ A @ inv_half @ U)
    if R.shape[0]:
        w, Q = eigh(R)
        w = np.clip(w, 0.0, 1.0)
        R = hermitian_part((Q * w) @ Q.conj().T)
    S = np.eye(R.shape[0], dtype=complex) - R
    return CompatibleRepresentation(h_ab, t_map, R, S)


class PwDiagnostics(NamedTuple):
    r_eigenvalues: np.ndarray
    hits_at_zero: int
    hits_at_one: int


def _assemble(phi: HomogeneousFunction, rep: CompatibleRepresentation,
              ambient_dim: int, endpoint_tol: float):
    k = rep.subspace.dim
    if k == 0:
        return zero_element(ambient_dim), PwDiagnostics(np.zeros(0), 0, 0)
    t, Q = eigh(rep.r)
    t = np.clip(t, 0.0, 1.0)
    hits0 = hits1 = 0
    pairs = []
    for i, ti in enumerate(t):
        ti = float(ti)
        if ti >= 1.0 - endpoint_tol:
            hits1 += 1
        elif ti <= endpoint_tol:
            hits0 += 1
        pairs.append((phi.diagonal_value(ti, endpoint_tol), Q[:, i]))
    M = make_extended(pairs)
    result = congruence(rep.t_map, M)
    return result, PwDiagnostics(t, hits0, hits1)


def pw_apply(phi: HomogeneousFunction, A: np.ndarray, B: np.ndarray,
             endpoint_tol: float = ENDPOINT_TOL,
             with_diagnostics: bool = False):
    """phi(A, B) = T* phi(R, S) T, extended by 0 on ker(A+B).

    Full-domain variant only; eigenvalues of R are classified to {0}, (0,1),
    {1} with endpoint_tol and the corner values apply at the endpoints.
    """
    if phi.variant != "full":
        raise PreconditionError(
            f"{phi.name} is a restricted variant; use pw_apply_restricted"
        )
    rep = compatible_representation(A, B)
    result, diag = _assemble(phi, rep, A.shape[0], endpoint_tol)
    if with_diagnostics:
        return result, diag
    return result


def pw_apply_restricted(phi: HomogeneousFunction, A: np.ndarray, B: np.ndarray,
                        side: str = "ge",
                        endpoint_tol: float = ENDPOINT_TOL,
                        with_diagnostics: bool = False):
    """Restricted-domain calculus on dominated pairs.

    side='ge' requires A >= alpha B for some alpha > 0, certified by the
    minimum eigenvalue of R exceeding endpoint_tol; side='le' symmetrically
    requires the maximum eigenvalue of R below 1 - endpoint_tol.  Endpoint
    eigenvalues inside the excluded end are a precondition violation, not an
    infinite value.
    """
    if side not in ("ge", "le"):
        raise ValueError("side must be 'ge' or 'le'")
    rep = compatible_representation(A, B)
    k = rep.subspace.dim
    if k:
        w, _ = eigh(rep.r)
        if side == "ge" and w[0] <= endpoint_tol:
            raise PreconditionError(
                f"pair is not in the >= cone: min eigenvalue of R is {w[0]:.3e}"
            )
        if side == "le" and w[-1] >= 1.0 - endpoint_tol:
            raise PreconditionError(
                f"pair is not in the <= cone: min eigenvalue of S is "
                f"{1.0 - w[-1]:.3e}"
            )
    result, diag = _assemble(phi, rep, A.shape[0], endpoint_tol)
    if with_diagnostics:
        return result, diag
    return result


def _grouped_joint_eigensystem(A: np.ndarray, B: np.ndarray):
    """Joint eigenpairs of a commuting Hermitian pair, by block diagonalization."""
    wA, VA = eigh(A)
    n = len(wA)
    group_tol = 1e-7 * (1.0 + float(np.abs(wA).max(initial=0.0)))
    pairs = []
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and wA[stop] - wA[stop - 1] <= group_tol:
            stop += 1
        Vg = VA[:, start:stop]
        Bg = hermitian_part(Vg.conj().T @ B @ Vg)
        wB, QB = eigh(Bg)
        joint = Vg @ QB
        x = float(np.mean(wA[start:stop]))
        for j in range(stop - start):
            pairs.append((x, float(wB[j]), joint[:, j]))
        start = stop
    return pairs


def pw_commuting_oracle(phi: HomogeneousFunction, A: np.ndarray, B: np.ndarray,
                        endpoint_tol: float = ENDPOINT_TOL) -> ExtendedSelfAdjoint:
    """Independent evaluation for commuting pairs via joint diagonalization.

    This is the oracle pw_apply is checked against: it never touches the
    compatible representation, only the joint spectrum and the bivariate
    evaluator phi(x, y) = (x+y) * diagonal(x/(x+y)).
    """
    A = require_psd(A, name="A", atol=1e-9)
    B = require_psd(B, name="B", atol=1e-9)
    comm = spectral_norm(A @ B - B @ A)
    bound = 1e-9 * spectral_norm(A) * spectral_norm(B)
    if comm > max(bound, 1e-13):
        raise PreconditionError(
            f"pair does not commute: |AB - BA| = {comm:.3e} > {bound:.3e}"
        )
    w_sum, _ = eigh(A + B)
    kernel_floor = default_rank_tol(w_sum)
    pairs = []
    for x, y, v in _grouped_joint_eigensystem(A, B):
        x, y = max(x, 0.0), max(y, 0.0)
        pairs.append((phi.bivariate(x, y, endpoint_tol, kernel_floor), v))
    return make_extended(pairs)


class SpecialValues(NamedTuple):
    with_scalar_right: ExtendedSelfAdjoint   # phi(A, alpha I)
    with_scalar_left: ExtendedSelfAdjoint    # phi(alpha I, A)
    scaled_pair: ExtendedSelfAdjoint         # phi(alpha A, beta A)


def special_values(phi: HomogeneousFunction, A: np.ndarray, alpha: float,
                   beta: float,
                   endpoint_tol: float = ENDPOINT_TOL) -> SpecialValues:
    """Closed-form specializations through the scalar calculus.

    phi(A, alpha I) is the spectral calculus of t -> phi(t, alpha), and
    phi(alpha A, beta A) = phi(alpha, beta) A, where an infinite scalar means
    +inf on the range of A and 0 on its kernel.
    """
    if alpha < 0 or beta < 0:
        raise ValueError("scalars must be nonnegative")
    A = require_psd(A, name="A", atol=1e-9)

    right = ExtendedFunction(
        f"{phi.name}(t,{alpha})", CLOSED_POS,
        lambda t: phi.bivariate(t, alpha, endpoint_tol),
    )
    left = ExtendedFunction(
        f"{phi.name}({alpha},t)", CLOSED_POS,
        lambda t: phi.bivariate(alpha, t, endpoint_tol),
    )
    scalar = phi.bivariate(alpha, beta, endpoint_tol)
    if math.isinf(scalar):
        scaled = infinity_on(range_subspace(A))
    else:
        scaled = from_matrix(scalar * A)
    return SpecialValues(calculus(right, A), calculus(left, A), scaled)


def _inv_sqrt_of_invertible(M: np.ndarray) -> np.ndarray:
    w, V = eigh(M)
    return hermitian_part((V / np.sqrt(w)) @ V.conj().T)


def invertible_formula(phi: HomogeneousFunction, A: np.ndarray, B: np.ndarray,
                       endpoint_tol: float = ENDPOINT_TOL) -> ExtendedSelfAdjoint:
    """phi(A,B) through the one-sided sandwich when A or B is invertible.

    B invertible: B^{1/2} g(B^{-1/2} A B^{-1/2}) B^{1/2} with g(t) = phi(t,1);
    A invertible symmetrically with g(t) = phi(1,t).  Must agree with
    pw_apply whenever applicable.
    """
    A = require_psd(A, name="A", atol=1e-9)
    B = require_psd(B, name="B", atol=1e-9)
    wB, _ = eigh(B)
    wA, _ = eigh(A)
    b_invertible = wB.size and wB[0] > default_rank_tol(wB)
    a_invertible = wA.size and wA[0] > default_rank_tol(wA)
    if b_invertible:
        inv_half = _inv_sqrt_of_invertible(B)
        W = hermitian_part(inv_half @ A @ inv_half)
        g = ExtendedFunction(f"{phi.name}(t,1)", CLOSED_POS,
                             lambda t: phi.bivariate(t, 1.0, endpoint_tol))
        return congruence(psd_sqrt(B), calculus(g, W))
    if a_invertible:
        inv_half = _inv_sqrt_of_invertible(A)
        W = hermitian_part(inv_half @ B @ inv_half)
        g = ExtendedFunction(f"{phi.name}(1,t)", CLOSED_POS,
                             lambda t: phi.bivariate(1.0, t, endpoint_tol))
        return congruence(psd_sqrt(A), calculus(g, W))
    raise PreconditionError("invertible_formula needs A or B invertible")


@dataclass
class HomogeneityReport:
    skipped: bool
    reason: str | None
    ok: bool
    max_deviation: float
    witness: np.ndarray | None


def check_homogeneity(phi: HomogeneousFunction, A: np.ndarray, B: np.ndarray,
                      C: np.ndarray, slack: float | None = None,
                      probe_vectors: int = 10, seed: int = 0) -> HomogeneityReport:
    """Operator homogeneity phi(C*AC, C*BC) = C* phi(A,B) C.

    The postulate requires range(A+B) inside the range closure of C; pairs
    violating it are reported as skipped, not failed.
    """
    C = np.atleast_2d(np.asarray(C, dtype=complex))
    ran_ab = range_subspace(np.asarray(A) + np.asarray(B))
    ran_c = span(C)
    if not ran_c.contains(ran_ab, 1e-8):
        return HomogeneityReport(True, "range(A+B) not contained in range(C)",
                                 True, 0.0, None)
    lhs = pw_apply(phi, hermitian_part(C.conj().T @ A @ C),
                   hermitian_part(C.conj().T @ B @ C))
    rhs = congruence(C, pw_apply(phi, A, B))
    if slack is None:
        scale = 1.0 + max(np.abs(lhs.finite_part).max(initial=0.0),
                          np.abs(rhs.finite_part).max(initial=0.0))
        slack = 1e-8 * scale
    le, w1 = form_leq(lhs, rhs, slack)
    ge, w2 = form_leq(rhs, lhs, slack)
    rng = np.random.default_rng(seed)
    dev = 0.0
    k = C.shape[1]
    for _ in range(probe_vectors):
        xi = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        q1, q2 = quadratic_form(lhs, xi), quadratic_form(rhs, xi)
        if math.isinf(q1) != math.isinf(q2):
            dev = INF
        elif not math.isinf(q1):
            dev = max(dev, abs(q1 - q2))
    return HomogeneityReport(False, None, le and ge, dev,
                             w1 if w1 is not None else w2)


def check_restricted_bounded(phi: HomogeneousFunction,
                             deltas=(1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6),
                             coarse: int = 129, refine: int = 16):
    """Local boundedness of the diagonal on (0,1] (or [0,1) for 'le').

    For each delta the diagonal is sampled on [delta, 1] at two resolutions;
    a non-finite value, or a max that grows by more than 10x under
    refinement (an interior pole slipping between grid points), reports
    unbounded.  Returns (bool, per-delta details).
    """
    details = []
    ok = True
    for delta in deltas:
        if phi.variant == "le":
            lo, hi = 0.0, 1.0 - delta
        else:
            lo, hi = delta, 1.0
        interior = phi.diagonal.domain
        lo = max(lo, interior.lo + (0.0 if interior.closed_lo else 1e-12))
        hi = min(hi, interior.hi - (0.0 if interior.closed_hi else 1e-12))
        grid1 = np.linspace(lo, hi, coarse)
        grid2 = np.linspace(lo, hi, coarse * refine + 1)
        try:
            v1 = np.array([phi.diagonal(float(t)) for t in grid1])
            v2 = np.array([phi.diagonal(float(t)) for t in grid2])
        except (DomainError, FormArithmeticError):
            ok = False
            details.append({"delta": delta, "bounded": False})
            continue
        finite = bool(np.isfinite(v1).all() and np.isfinite(v2).all())
        m1 = float(np.abs(v1).max()) if finite else INF
        m2 = float(np.abs(v2).max()) if finite else INF
        bounded = finite and m2 <= 10.0 * max(1.0, m1)
        details.append({"delta": delta, "bounded": bounded,
                        "max_coarse": m1, "max_fine": m2})
        ok = ok and bounded
    return ok, details
