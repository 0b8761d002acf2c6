"""Hermitian linear-algebra substrate shared by every other module.

Complex Hermitian matrices throughout; real symmetric input is the
zero-imaginary special case.  All functions are pure: they never mutate
their arguments and the returned arrays are freshly allocated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

EPS = float(np.finfo(float).eps)

# Absolute conjugate-symmetry tolerance for validated Hermitian input.
HERMITIAN_ATOL = 1e-12
# Looser tolerance for matrices arriving from files.
FILE_HERMITIAN_ATOL = 1e-9
# Principal-angle cosine threshold for subspace intersection.
MEET_COS_TOL = 1e-10


class NotHermitianError(ValueError):
    """Input violates conjugate symmetry beyond tolerance."""


class NotPsdError(ValueError):
    """Input has an eigenvalue below the PSD tolerance."""


class EigenSolverError(RuntimeError):
    """The eigensolver failed to converge."""


class MatrixFileError(ValueError):
    """A matrix file is malformed; the message names the offending field."""


def hermitian_part(M: np.ndarray) -> np.ndarray:
    """(M + M*)/2 — used to re-symmetrize every matrix we construct."""
    M = np.asarray(M, dtype=complex)
    return (M + M.conj().T) / 2


def require_hermitian(M, atol: float = HERMITIAN_ATOL, name: str = "matrix") -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotHermitianError(f"{name} must be square, got shape {M.shape}")
    dev = np.abs(M - M.conj().T).max(initial=0.0)
    if dev > atol:
        raise NotHermitianError(
            f"{name} is not Hermitian: max |M - M*| = {dev:.3e} > {atol:.1e}"
        )
    return hermitian_part(M)


def eigh(M: np.ndarray):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, unitary eigenvector matrix).  Backed by
    LAPACK through numpy; deterministic for identical input bytes.
    """
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    try:
        w, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigenSolverError(f"eigensolver did not converge on {M.shape[0]}x"
                               f"{M.shape[1]} input: {exc}") from exc
    return w, V


def psd_tol(eigenvalues: np.ndarray, n: int | None = None) -> float:
    """Scale-invariant PSD slack: n * eps * max |eigenvalue|."""
    if n is None:
        n = len(eigenvalues)
    top = float(np.abs(eigenvalues).max(initial=0.0))
    return n * EPS * top


def default_rank_tol(eigenvalues: np.ndarray, n: int | None = None) -> float:
    """Rank cut n * eps * lambda_max; defines the range of a PSD matrix."""
    if n is None:
        n = len(eigenvalues)
    top = float(eigenvalues.max(initial=0.0))
    return n * EPS * max(top, 0.0)


def require_psd(M, name: str = "matrix", atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Validate Hermitian + PSD (smallest eigenvalue >= -psd_tol)."""
    M = require_hermitian(M, atol=atol, name=name)
    w, _ = eigh(M)
    tol = psd_tol(w)
    if w.size and w[0] < -tol:
        raise NotPsdError(
            f"{name} is not PSD: min eigenvalue {w[0]:.3e} < -{tol:.3e}"
        )
    return M


def psd_sqrt(M: np.ndarray) -> np.ndarray:
    """Principal square root of a PSD matrix.

    Eigenvalues within the PSD slack below zero are clamped to 0 before the
    root; anything lower raises NotPsdError.  Eigenvalues under the rank
    tolerance are floored to 0 so the root is rank-consistent with
    pinv_sqrt (a sub-tolerance eigenvalue would otherwise surface as a
    sqrt-amplified spurious direction of size ~1e-8).
    """
    M = np.asarray(M, dtype=complex)
    w, V = eigh(M)
    tol = psd_tol(w)
    if w.size and w[0] < -tol:
        raise NotPsdError(f"psd_sqrt: min eigenvalue {w[0]:.3e} < -{tol:.3e}")
    w = np.where(w > default_rank_tol(w), w, 0.0)
    return hermitian_part((V * np.sqrt(w)) @ V.conj().T)


@dataclass(frozen=True)
class Subspace:
    """Subspace of C^n represented by an n x k isometry (orthonormal columns)."""

    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex)
        if B.ndim != 2:
            raise ValueError(f"subspace basis must be 2-d, got ndim {B.ndim}")
        object.__setattr__(self, "basis", B)
        if B.shape[1]:
            gram = B.conj().T @ B
            dev = np.abs(gram - np.eye(B.shape[1])).max()
            if dev > 1e-10:
                raise ValueError(
                    f"subspace basis columns not orthonormal: |B*B - I| = {dev:.3e}"
                )

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def complement(self) -> "Subspace":
        """Orthogonal complement, via the trailing eigenvectors of the projector."""
        n, k = self.basis.shape
        if k == 0:
            return full_space(n)
        if k == n:
            return zero_subspace(n)
        w, V = eigh(self.projector())
        return Subspace(V[:, : n - k])

    def contains(self, other: "Subspace", cos_tol: float = 1e-8) -> bool:
        """True iff every principal-angle cosine of `other` against self is ~1."""
        if other.dim == 0:
            return True
        if self.dim == 0:
            return False
        sv = np.linalg.svd(self.basis.conj().T @ other.basis, compute_uv=False)
        if len(sv) < other.dim:
            return False
        return bool(sv.min() >= 1.0 - cos_tol)

    def same_as(self, other: "Subspace", cos_tol: float = 1e-8) -> bool:
        return (self.dim == other.dim and self.contains(other, cos_tol)
                and other.contains(self, cos_tol))


def full_space(n: int) -> Subspace:
    return Subspace(np.eye(n, dtype=complex))


def zero_subspace(n: int) -> Subspace:
    return Subspace(np.zeros((n, 0), dtype=complex))


def span(columns: np.ndarray, rank_tol: float | None = None) -> Subspace:
    """Orthonormalize arbitrary columns into a Subspace (rank-revealing SVD)."""
    C = np.atleast_2d(np.asarray(columns, dtype=complex))
    if C.shape[1] == 0:
        return zero_subspace(C.shape[0])
    U, s, _ = np.linalg.svd(C, full_matrices=False)
    if rank_tol is None:
        rank_tol = max(C.shape) * EPS * (s.max(initial=0.0))
    r = int(np.sum(s > rank_tol))
    return Subspace(U[:, :r])


def pinv_sqrt(M: np.ndarray, rank_tol: float | None = None):
    """Moore-Penrose pseudo-inverse of psd_sqrt(M) plus the range subspace.

    Eigenvalues <= rank_tol (default n*eps*lambda_max) are treated as zero;
    the returned Subspace is spanned by the eigenvectors above the cut.
    """
    M = np.asarray(M, dtype=complex)
    w, V = eigh(M)
    tol = psd_tol(w)
    if w.size and w[0] < -tol:
        raise NotPsdError(f"pinv_sqrt: min eigenvalue {w[0]:.3e} < -{tol:.3e}")
    if rank_tol is None:
        rank_tol = default_rank_tol(w)
    keep = w > rank_tol
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    P = hermitian_part((V * inv) @ V.conj().T)
    return P, Subspace(V[:, keep])


def psd_pinv(M: np.ndarray, rank_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a PSD matrix via its eigensystem."""
    M = np.asarray(M, dtype=complex)
    w, V = eigh(M)
    if rank_tol is None:
        rank_tol = default_rank_tol(w)
    keep = w > rank_tol
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    return hermitian_part((V * inv) @ V.conj().T)


def range_subspace(M: np.ndarray, rank_tol: float | None = None) -> Subspace:
    """Range of a PSD matrix at the rank_tol cut."""
    w, V = eigh(np.asarray(M, dtype=complex))
    if rank_tol is None:
        rank_tol = default_rank_tol(w)
    return Subspace(V[:, w > rank_tol])


def subspace_meet(P: Subspace, Q: Subspace, cos_tol: float = MEET_COS_TOL) -> Subspace:
    """Intersection of two subspaces via principal angles.

    Directions whose principal-angle cosine is >= 1 - cos_tol count as shared.
    """
    if P.ambient_dim != Q.ambient_dim:
        raise ValueError(
            f"ambient dimension mismatch: {P.ambient_dim} vs {Q.ambient_dim}"
        )
    if P.dim == 0 or Q.dim == 0:
        return zero_subspace(P.ambient_dim)
    U, sv, _ = np.linalg.svd(P.basis.conj().T @ Q.basis)
    shared = sv >= 1.0 - cos_tol
    k = int(np.sum(shared))
    if k == 0:
        return zero_subspace(P.ambient_dim)
    return Subspace(P.basis @ U[:, :k])


def spectral_norm(M: np.ndarray) -> float:
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def require_state(rho, name: str = "state") -> np.ndarray:
    """Validate a state: PSD with strictly positive trace."""
    rho = require_psd(rho, name=name)
    tr = float(np.trace(rho).real)
    if tr <= 0.0:
        raise ValueError(f"{name} must have strictly positive trace, got {tr:.3e}")
    return rho


def vector_state(xi: np.ndarray) -> np.ndarray:
    """Rank-one state omega_xi = |xi><xi|."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    return np.outer(xi, xi.conj())


# ---------------------------------------------------------------------------
# Matrix file I/O: UTF-8 text object {"n": int, "re": [[...]], "im": [[...]]},
# im optional (all zeros).  Doubles round-trip exactly through repr.
# ---------------------------------------------------------------------------

def _check_grid(grid, n: int, field_name: str, path) -> np.ndarray:
    if not isinstance(grid, list) or len(grid) != n:
        raise MatrixFileError(
            f"{path}: field '{field_name}' must be an {n}x{n} grid, "
            f"got {len(grid) if isinstance(grid, list) else type(grid).__name__} rows"
        )
    out = np.zeros((n, n))
    for i, row in enumerate(grid):
        if not isinstance(row, list) or len(row) != n:
            raise MatrixFileError(
                f"{path}: field '{field_name}' row {i} has length "
                f"{len(row) if isinstance(row, list) else 'non-list'}; expected {n}"
            )
        for j, v in enumerate(row):
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise MatrixFileError(
                    f"{path}: field '{field_name}' entry [{i}][{j}] is not a number"
                )
            out[i, j] = float(v)
    return out


def read_matrix(path) -> np.ndarray:
    """Read a Hermitian matrix from the text format; validates all fields."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MatrixFileError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise MatrixFileError(f"{path}: top-level object expected")
    if "n" not in payload:
        raise MatrixFileError(f"{path}: missing field 'n'")
    n = payload["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n <= 0:
        raise MatrixFileError(f"{path}: field 'n' must be a positive integer")
    if "re" not in payload:
        raise MatrixFileError(f"{path}: missing field 're'")
    re = _check_grid(payload["re"], n, "re", path)
    if payload.get("im") is not None:
        im = _check_grid(payload["im"], n, "im", path)
    else:
        im = np.zeros((n, n))
    M = re + 1j * im
    try:
        return require_hermitian(M, atol=FILE_HERMITIAN_ATOL, name=str(path))
    except NotHermitianError as exc:
        raise MatrixFileError(str(exc)) from exc


def write_matrix(path, M: np.ndarray) -> None:
    """Write a Hermitian matrix in the text format (lossless doubles)."""
    M = require_hermitian(M, atol=FILE_HERMITIAN_ATOL, name="matrix")
    n = M.shape[0]
    payload = {
        "n": n,
        "re": [[float(M[i, j].real) for j in range(n)] for i in range(n)],
        "im": [[float(M[i, j].imag) for j in range(n)] for i in range(n)],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")
