"""Dense complex linear algebra used by every other module.

Matrices are plain :class:`numpy.ndarray` objects. Nothing here mutates its
arguments.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ShapeError, ValidationError

HERM_TOL = 1e-10
PSD_TOL = 1e-9

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=float) / np.sqrt(2.0)


def as_matrix(m, *, square: bool = False) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D array, keeping a real dtype when possible."""
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if a.dtype != np.float64 and not np.issubdtype(a.dtype, np.complexfloating):
        a = a.astype(float)
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    if square and a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def inf_norm(m: np.ndarray) -> float:
    """Induced infinity norm (maximum absolute row sum)."""
    return float(np.linalg.norm(m, np.inf))


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(factors: Iterable) -> np.ndarray:
    out = np.ones((1, 1))
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def partial_trace(m, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep`` (0-based indices).

    Kept factors appear in ascending order in the result.
    """
    m = as_matrix(m, square=True)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or int(np.prod(dims)) != m.shape[0]:
        raise ShapeError(f"dims {dims} do not factor side length {m.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ShapeError(f"keep indices {keep} out of range for {len(dims)} factors")
    t = m.reshape(dims + dims)
    n = len(dims)
    for axis in reversed(range(len(dims))):
        if axis in keep:
            continue
        t = np.trace(t, axis1=axis, axis2=axis + n)
        n -= 1
    side = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(side, side)


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def schatten_norm(m, p: float = 1.0) -> float:
    """Schatten p-norm; ``p=np.inf`` gives the operator norm."""
    if not (p >= 1):
        raise DomainError(f"Schatten norm needs p >= 1, got {p}", p=p)
    s = singular_values(m)
    if np.isinf(p):
        return float(s.max())
    return float(np.sum(s**p) ** (1.0 / p))


def frobenius_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product tr(a^dagger b)."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def hermitian_defect(m: np.ndarray) -> float:
    return inf_norm(m - dagger(m))


def is_hermitian(m, tol: float = HERM_TOL) -> bool:
    m = as_matrix(m, square=True)
    return hermitian_defect(m) <= tol * max(1.0, inf_norm(m))


@dataclass(frozen=True)
class HermitianEig:
    """Eigenvalues ascending; eigenvectors as columns of a unitary matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def _fix_phases(v: np.ndarray) -> np.ndarray:
    # first component of largest modulus made real nonnegative
    idx = np.argmax(np.abs(v) > np.abs(v).max(axis=0) * (1 - 1e-12), axis=0)
    pivots = v[idx, np.arange(v.shape[1])]
    phases = np.where(np.abs(pivots) > 0, np.conj(pivots) / np.abs(pivots), 1.0)
    return v * phases


def hermitian_eig(m, herm_tol: float = HERM_TOL) -> HermitianEig:
    m = as_matrix(m, square=True)
    defect = hermitian_defect(m)
    if defect > herm_tol * max(1.0, inf_norm(m)):
        raise ValidationError(
            f"matrix is not Hermitian (defect {defect:.3e})", defect=defect
        )
    h = 0.5 * (m + dagger(m))
    w, v = np.linalg.eigh(h)
    return HermitianEig(w, _fix_phases(v))


def eigvalsh(m) -> np.ndarray:
    m = as_matrix(m, square=True)
    return np.linalg.eigvalsh(0.5 * (m + dagger(m)))


def is_psd(m, tol: float = PSD_TOL) -> bool:
    m = as_matrix(m, square=True)
    return bool(eigvalsh(m)[0] >= -tol * max(1.0, inf_norm(m)))


def psd_sqrt(m) -> np.ndarray:
    """Principal square root of a PSD matrix (negative noise clipped)."""
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ dagger(v)


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = as_matrix(u, square=True)
    return bool(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0])) <= tol * u.shape[0])


def is_projector(p, tol: float = 1e-10) -> bool:
    p = as_matrix(p, square=True)
    return is_hermitian(p, tol) and bool(np.linalg.norm(p @ p - p) <= tol * max(1, p.shape[0]))


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    flat = m.reshape(-1)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [float(x) for x in np.real(flat)],
        "im": [float(x) for x in np.imag(flat)],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros(rows * cols)), dtype=float)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed matrix JSON: {exc}") from exc
    if re.size != rows * cols or im.size != rows * cols:
        raise ShapeError(f"matrix JSON declares {rows}x{cols} but carries {re.size} entries")
    if not np.any(im):
        return as_matrix(re.reshape(rows, cols))
    return as_matrix((re + 1j * im).reshape(rows, cols))
