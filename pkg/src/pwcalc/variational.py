"""Integral and variational expressions for operator perspectives.

Both integral evaluators route every measure through weighted atoms, so a
single parallel-sum integration path serves atomic and quadrature measures
alike.  Measures whose true mass is infinite carry a flag; their divergent
branch is decided by evaluating the state against the relevant singular
part, which is exactly what the tail of the integral converges to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from .extended import (
    ExtendedSelfAdjoint,
    INF,
    add,
    evaluate_state,
    from_matrix,
    infinity_on,
    xadd,
    xmul,
)
from .functions import (
    ExtendedFunction,
    IntegralRepr77,
    IntegralRepr97,
    Measure,
    approximants,
    catalog,
)
from .linalg import (
    hermitian_part,
    psd_pinv,
    range_subspace,
    require_hermitian,
    require_psd,
    require_state,
    spectral_norm,
)
from .perspectives import (
    lebesgue_decomposition,
    parallel_sum,
    perspective_apply,
)

# State mass on a singular part below this (relative) threshold counts as zero
# when deciding the divergent branch of an infinite-mass integral.
SINGULAR_MASS_REL_TOL = 1e-10


def _state_pairing(rho: np.ndarray, M: np.ndarray) -> float:
    return float(np.trace(rho @ M).real)


def _singular_mass(rho: np.ndarray, A, B) -> float:
    """rho evaluated against the B-singular part of A."""
    return _state_pairing(rho, lebesgue_decomposition(A, B).singular_part)


def _t2_term(A, B, rho) -> float:
    return evaluate_state(perspective_apply(catalog("power", 2), A, B).value, rho)


def integral_eval_91(r: IntegralRepr77, A: np.ndarray, B: np.ndarray,
                     rho: np.ndarray) -> float:
    """Perspective evaluation through the general integral expression.

    a0 rho(A) + b0 rho(B) + c phi_{t^2}(A,B)(rho) + d phi_{t^2}(B,A)(rho)
    + int [rho(A) + rho(B)/l - ((1+l)/l)^2 rho(A : lB)] dmu(l),
    with a0 = b - 2c + d and b0 = a - b + c - 2d.
    """
    A = require_psd(A, name="A", atol=1e-9)
    B = require_psd(B, name="B", atol=1e-9)
    rho = require_state(rho)
    a0 = r.b - 2.0 * r.c + r.d
    b0 = r.a - r.b + r.c - 2.0 * r.d
    rho_a = _state_pairing(rho, A)
    rho_b = _state_pairing(rho, B)
    terms = [a0 * rho_a, b0 * rho_b]
    if r.c > 0:
        terms.append(xmul(r.c, _t2_term(A, B, rho)))
    if r.d > 0:
        terms.append(xmul(r.d, _t2_term(B, A, rho)))
    tr = float(np.trace(rho).real)
    if r.mu.infinite_mass:
        mass = _singular_mass(rho, A, B)
        if mass > SINGULAR_MASS_REL_TOL * tr * (1.0 + spectral_norm(A)):
            return INF
    if r.mu.infinite_inv_mass:
        mass = _singular_mass(rho, B, A)
        if mass > SINGULAR_MASS_REL_TOL * tr * (1.0 + spectral_norm(B)):
            return INF
    total = 0.0
    for lam, w in zip(r.mu.locations, r.mu.weights):
        ps = _state_pairing(rho, parallel_sum(A, lam * B))
        total += w * (rho_a + rho_b / lam - ((1.0 + lam) / lam) ** 2 * ps)
    terms.append(total)
    return xadd(*terms)


def integral_eval_92(r: IntegralRepr97, A: np.ndarray, B: np.ndarray,
                     rho: np.ndarray) -> float:
    """Perspective evaluation for f with finite f'(0+).

    f'(0+) rho(A) + f(0+) rho(B) + c phi_{t^2}(A,B)(rho)
    + int [rho(A) - rho(A : lB)] dnu(l).
    """
    A = require_psd(A, name="A", atol=1e-9)
    B = require_psd(B, name="B", atol=1e-9)
    rho = require_state(rho)
    rho_a = _state_pairing(rho, A)
    rho_b = _state_pairing(rho, B)
    terms = [r.fp0 * rho_a, r.f0 * rho_b]
    if r.c > 0:
        terms.append(xmul(r.c, _t2_term(A, B, rho)))
    tr = float(np.trace(rho).real)
    if r.nu.infinite_mass:
        mass = _singular_mass(rho, A, B)
        if mass > SINGULAR_MASS_REL_TOL * tr * (1.0 + spectral_norm(A)):
            return INF
    total = 0.0
    for lam, w in zip(r.nu.locations, r.nu.weights):
        ps = _state_pairing(rho, parallel_sum(A, lam * B))
        total += w * (rho_a - ps)
    terms.append(total)
    return xadd(*terms)


# ---------------------------------------------------------------------------
# Two projections
# ---------------------------------------------------------------------------

def _coeff_times_psd(coeff: float, X: np.ndarray,
                     rank_tol: float | None = None) -> ExtendedSelfAdjoint:
    """coeff * X with inf * X meaning +inf on the range of X."""
    if math.isinf(coeff):
        return infinity_on(range_subspace(X, rank_tol=rank_tol))
    return from_matrix(coeff * X)


def two_projections(f: ExtendedFunction, P: np.ndarray, Q: np.ndarray
                    ) -> ExtendedSelfAdjoint:
    """Closed form for projection pairs:

    f(1) (P ^ Q) + f'(inf) (P - P ^ Q) + f(0+) (Q - P ^ Q),

    assembled as a form sum of three elements; infinite coefficients
    contribute infinity subspaces.  Agrees with the direct calculus.
    """
    from .linalg import subspace_meet  # local: avoids polluting module surface

    for name, X in (("P", P), ("Q", Q)):
        X = require_hermitian(X, atol=1e-10, name=name)
        idem = spectral_norm(X @ X - X)
        if idem > 1e-10:
            raise ValueError(f"{name} is not idempotent: |X^2 - X| = {idem:.3e}")
    P = hermitian_part(np.asarray(P, dtype=complex))
    Q = hermitian_part(np.asarray(Q, dtype=complex))
    alpha, beta = f.fprime_at_inf, f.f_at_0plus
    f1 = f.f_at_1 if f.f_at_1 is not None else f(1.0)
    if alpha is None or beta is None:
        raise ValueError(f"{f.name} is missing boundary metadata")
    meet = subspace_meet(range_subspace(P), range_subspace(Q))
    Pm = meet.projector()
    # P - Pm and Q - Pm are projections (Pm commutes with both), so their
    # eigenvalues are exactly {0, 1} up to meet-construction noise; a wide
    # rank cut keeps that noise out of the infinity subspaces
    terms = [
        from_matrix(f1 * Pm),
        _coeff_times_psd(alpha, hermitian_part(P - Pm), rank_tol=1e-6),
        _coeff_times_psd(beta, hermitian_part(Q - Pm), rank_tol=1e-6),
    ]
    out = terms[0]
    for t in terms[1:]:
        out = add(out, t)
    return out


# ---------------------------------------------------------------------------
# Variational bounds via piecewise-constant decompositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    """Piecewise-constant pair (eta, zeta) on [lo, hi] with eta + zeta = xi."""

    lo: float
    hi: float
    pieces: tuple  # ((lo_i, hi_i, eta_i, zeta_i), ...) sorted and contiguous
    target: np.ndarray = field(repr=False)

    def __post_init__(self):
        xi = np.asarray(self.target, dtype=complex).reshape(-1)
        object.__setattr__(self, "target", xi)
        if not self.pieces:
            raise ValueError("decomposition needs at least one piece")
        prev = self.lo
        for (a, b, eta, zeta) in self.pieces:
            if abs(a - prev) > 1e-9 * max(1.0, abs(prev)):
                raise ValueError(f"pieces do not partition: gap at {prev} -> {a}")
            if b < a:
                raise ValueError("piece with reversed endpoints")
            dev = np.abs(np.asarray(eta) + np.asarray(zeta) - xi).max()
            if dev > 1e-12 * max(1.0, float(np.abs(xi).max(initial=0.0))):
                raise ValueError(f"eta + zeta != xi on piece [{a}, {b}]: {dev:.3e}")
            prev = b
        if abs(prev - self.hi) > 1e-9 * max(1.0, abs(self.hi)):
            raise ValueError(f"pieces stop at {prev}, expected {self.hi}")

    def at(self, t: float):
        for (a, b, eta, zeta) in self.pieces:
            if a - 1e-12 <= t <= b + 1e-12:
                return np.asarray(eta, dtype=complex), np.asarray(zeta, dtype=complex)
        raise ValueError(f"point {t} outside decomposition interval")


def constant_decomposition(lo: float, hi: float, eta, zeta) -> Decomposition:
    eta = np.asarray(eta, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    return Decomposition(lo, hi, ((lo, hi, eta, zeta),), eta + zeta)


def optimal_decomposition(A: np.ndarray, B: np.ndarray, xi: np.ndarray,
                          t: float):
    """Minimizer of <A eta, eta> + t <B zeta, zeta> subject to eta + zeta = xi.

    zeta = (A + tB)^+ A xi and eta = xi - zeta; components of xi in
    ker(A + tB) land in eta, where they cost nothing (any assignment of the
    zero-cost directions is a minimizer; this one is deterministic).
    Achieves the parallel-sum value <(A : tB) xi, xi>.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    pinv = psd_pinv(hermitian_part(A + t * B))
    zeta = pinv @ (A @ xi)
    return xi - zeta, zeta


def optimizer_decomposition(nu: Measure, A: np.ndarray, B: np.ndarray,
                            xi: np.ndarray, lo: float, hi: float
                            ) -> Decomposition:
    """One piece per atom of nu, each carrying the closed-form minimizer."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    order = np.argsort(nu.locations)
    locs = nu.locations[order]
    if len(locs) == 0:
        return constant_decomposition(lo, hi, xi, np.zeros_like(xi))
    cuts = [lo] + [float((a + b) / 2) for a, b in zip(locs, locs[1:])] + [hi]
    pieces = []
    for i, t in enumerate(locs):
        eta, zeta = optimal_decomposition(A, B, xi, float(t))
        pieces.append((cuts[i], cuts[i + 1], eta, zeta))
    return Decomposition(lo, hi, tuple(pieces), xi)


def variational_bound_94(r: IntegralRepr77, A: np.ndarray, B: np.ndarray,
                         xi: np.ndarray, n: int,
                         decomposition: Decomposition) -> float:
    """Lower bound for phi_f(A,B)(omega_xi) from one decomposition:

    alpha_n <A xi, xi> + beta_n <B xi, xi>
    - int (1+t)/t (<A eta(t), eta(t)> + t <B zeta(t), zeta(t)>) dnu_n(t).

    Any admissible decomposition stays below the direct value; the supremum
    over decompositions and n attains it.
    """
    A = require_psd(A, name="A", atol=1e-9)
    B = require_psd(B, name="B", atol=1e-9)
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    app = approximants(r, n)
    lo, hi = 1.0 / n, float(n)
    if decomposition.lo > lo + 1e-12 or decomposition.hi < hi - 1e-12:
        raise ValueError(
            f"decomposition covers [{decomposition.lo}, {decomposition.hi}], "
            f"needs [{lo}, {hi}]"
        )
    if np.abs(decomposition.target - xi).max(initial=0.0) > 1e-12:
        raise ValueError("decomposition target differs from xi")
    qa = float(np.vdot(xi, A @ xi).real)
    qb = float(np.vdot(xi, B @ xi).real)
    total = app.alpha_n * qa + app.beta_n * qb
    for t, w in zip(app.nu_n.locations, app.nu_n.weights):
        eta, zeta = decomposition.at(float(t))
        cost = (float(np.vdot(eta, A @ eta).real)
                + t * float(np.vdot(zeta, B @ zeta).real))
        total -= w * (1.0 + t) / t * cost
    return total


def variational_envelope(r: IntegralRepr77, A: np.ndarray, B: np.ndarray,
                         xi: np.ndarray, n_list=(1, 2, 4, 8, 16, 32)):
    """Per-n suprema via optimizer decompositions; nondecreasing in n.

    The n -> inf monotone envelope realizes the no-cutoff variational
    expression, whose tail contributions are exactly the closed forms the
    envelope already captures at finite precision.
    """
    out = []
    for n in n_list:
        app = approximants(r, n)
        dec = optimizer_decomposition(app.nu_n, A, B, xi, 1.0 / n, float(n))
        out.append((n, variational_bound_94(r, A, B, xi, n, dec)))
    return out


# ---------------------------------------------------------------------------
# Quadrature-backed measures and stock representations
# ---------------------------------------------------------------------------

def _gauss_legendre_01(nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return (x + 1.0) / 2.0, w / 2.0


def make_quadrature(kind: str, nodes: int = 200,
                    alpha: float | None = None) -> Measure:
    """Fixed-node quadrature measures under the substitution l = s/(1-s).

    kind='tlogt' is the Lebesgue measure dl for the representation
    t log t = int (t/(1+l) - t/(t+l)) dl, on Gauss-Legendre nodes (the
    substituted integrand is smooth).  kind='t_alpha' is the density
    sin((a-1)pi)/pi * l^(a-2) dl with 1 < a < 2, on a Gauss-Jacobi rule
    matched to the substituted endpoint exponents s^(a-2), (1-s)^(1-a)
    (Gauss-Legendre converges only at O(1/n) against those singularities).
    """
    if nodes < 16:
        raise ValueError("nodes must be >= 16")
    if kind == "tlogt":
        s, w = _gauss_legendre_01(nodes)
        lam = s / (1.0 - s)
        weights = w / (1.0 - s) ** 2
        return Measure(lam, weights, infinite_mass=True, infinite_inv_mass=True)
    if kind == "t_alpha":
        if alpha is None or not 1.0 < alpha < 2.0:
            raise ValueError("t_alpha requires an exponent in (1, 2)")
        aj = 1.0 - alpha   # exponent of (1-x) on [-1, 1]
        bj = alpha - 2.0   # exponent of (1+x)
        x, w = roots_jacobi(nodes, aj, bj)
        s = (x + 1.0) / 2.0
        coeff = math.sin((alpha - 1.0) * math.pi) / math.pi
        # the (0,1)-map scale factor 0.5^(aj+bj+1) is exactly 1 here
        weights = coeff * w / (1.0 - s)
        lam = s / (1.0 - s)
        return Measure(lam, weights, infinite_mass=True, infinite_inv_mass=True)
    raise ValueError(f"unknown quadrature kind {kind!r}")


def repr77_square_minus() -> IntegralRepr77:
    """(t-1)^2: pure c-term."""
    return IntegralRepr77(0.0, 0.0, 1.0, 0.0, Measure.zero())


def repr77_linear() -> IntegralRepr77:
    """t - 1: pure b-term."""
    return IntegralRepr77(0.0, 1.0, 0.0, 0.0, Measure.zero())


def repr77_atom(lam: float, weight: float = 1.0) -> IntegralRepr77:
    """weight * (t-1)^2/(t+lam): single kernel atom."""
    return IntegralRepr77(0.0, 0.0, 0.0, 0.0,
                          Measure(np.array([lam]), np.array([weight])))


def repr77_tlogt(nodes: int = 200) -> IntegralRepr77:
    """t log t = t - 1 + int (t-1)^2/(t+l) * l/(1+l)^2 dl.

    The density has infinite total mass (that is alpha = inf); under the
    substitution the weighted integrands decay, so Gauss-Legendre applies.
    """
    s, w = _gauss_legendre_01(nodes)
    lam = s / (1.0 - s)
    weights = w * s / (1.0 - s)  # density l/(1+l)^2 times Jacobian ds/(1-s)^2
    mu = Measure(lam, weights, infinite_mass=True, infinite_inv_mass=False)
    return IntegralRepr77(0.0, 1.0, 0.0, 0.0, mu)


def repr97_square() -> IntegralRepr97:
    """t^2: pure c-term of the finite-slope representation."""
    return IntegralRepr97(0.0, 0.0, 1.0, Measure.zero())


def repr97_t_alpha(alpha: float, nodes: int = 200) -> IntegralRepr97:
    """t^alpha = sin((a-1)pi)/pi int t^2/(t+l) l^(a-2) dl, 1 < alpha < 2."""
    return IntegralRepr97(0.0, 0.0, 0.0, make_quadrature("t_alpha", nodes, alpha))
