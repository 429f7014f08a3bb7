"""Density matrices, pure states and the qubit Bloch ball."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import matcore
from .errors import DomainError, ShapeError, ValidationError

STATE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A positive semidefinite, unit-trace matrix.

    Validated eagerly. Use :meth:`repair` for matrices that are densities up
    to round-off; it clips eigenvalues in ``[-tol, 0)`` and renormalizes.
    """

    mat: np.ndarray
    tol: float = STATE_TOL
    repaired: bool = False
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = matcore.as_matrix(self.mat, square=True)
        object.__setattr__(self, "mat", m)
        if not self.validate:
            return
        scale = max(1.0, matcore.inf_norm(m))
        defect = matcore.hermitian_defect(m)
        if defect > self.tol * scale:
            raise ValidationError(f"density is not Hermitian (defect {defect:.3e})", defect=defect)
        tr = np.trace(m)
        if abs(tr - 1) > self.tol:
            raise ValidationError(f"density trace is {tr.real:.12g}, expected 1", trace=float(tr.real))
        lo = float(matcore.eigvalsh(m)[0])
        if lo < -self.tol * scale:
            raise ValidationError(f"density has negative eigenvalue {lo:.3e}", min_eigenvalue=lo)

    @classmethod
    def repair(cls, mat, tol: float = STATE_TOL) -> "DensityMatrix":
        m = matcore.as_matrix(mat, square=True)
        m = 0.5 * (m + matcore.dagger(m))
        w, v = np.linalg.eigh(m)
        if w[0] < -tol * max(1.0, abs(w).max()):
            raise ValidationError(f"eigenvalue {w[0]:.3e} too negative to repair", min_eigenvalue=float(w[0]))
        clipped = np.clip(w, 0.0, None)
        total = clipped.sum()
        if total <= 0:
            raise ValidationError("matrix has no positive spectrum")
        fixed = (v * (clipped / total)) @ matcore.dagger(v)
        changed = bool(np.any(w < 0) or abs(total - 1) > 0)
        return cls(fixed, tol=tol, repaired=changed)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def purity(self) -> float:
        return float(np.real(np.vdot(self.mat, self.mat)))

    def to_json(self) -> dict:
        return {"kind": "density", **matcore.matrix_to_json(self.mat)}

    @classmethod
    def from_json(cls, obj: dict) -> "DensityMatrix":
        return cls(matcore.matrix_from_json(obj))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.mat, dtype=dtype)


@dataclass(frozen=True, eq=False)
class PureState:
    """A unit vector (ket)."""

    ket: np.ndarray
    tol: float = STATE_TOL

    def __post_init__(self):
        k = np.asarray(self.ket)
        if k.ndim != 1 or k.size == 0:
            raise ShapeError(f"ket must be a non-empty vector, got shape {k.shape}")
        if not np.issubdtype(k.dtype, np.complexfloating):
            k = k.astype(float)
        nrm = np.linalg.norm(k)
        if abs(nrm - 1) > self.tol:
            raise ValidationError(f"ket has norm {nrm:.12g}, expected 1", norm=float(nrm))
        object.__setattr__(self, "ket", k)

    @classmethod
    def normalized(cls, vec) -> "PureState":
        v = np.asarray(vec)
        if not np.issubdtype(v.dtype, np.complexfloating):
            v = v.astype(float)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ValidationError("cannot normalize the zero vector")
        return cls(v / nrm)

    @property
    def dim(self) -> int:
        return self.ket.size


@dataclass(frozen=True)
class BlochVector:
    u: float
    v: float
    w: float

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.u**2 + self.v**2 + self.w**2))


def _ket(psi) -> np.ndarray:
    return psi.ket if isinstance(psi, PureState) else PureState(psi).ket


def density_from_vector(psi) -> DensityMatrix:
    k = _ket(psi)
    return DensityMatrix(np.outer(k, np.conj(k)))


def bloch_to_density(b: BlochVector, tol: float = STATE_TOL) -> DensityMatrix:
    if b.norm > 1 + tol:
        raise DomainError(f"Bloch vector norm {b.norm:.12g} exceeds 1", norm=b.norm)
    m = 0.5 * (matcore.PAULI_I + b.u * matcore.PAULI_X + b.v * matcore.PAULI_Y + b.w * matcore.PAULI_Z)
    return DensityMatrix(m, tol=max(tol, STATE_TOL))


def density_to_bloch(rho: DensityMatrix) -> BlochVector:
    m = rho.mat if isinstance(rho, DensityMatrix) else matcore.as_matrix(rho)
    if m.shape != (2, 2):
        raise ShapeError(f"Bloch coordinates need a 2x2 density, got {m.shape}")
    return BlochVector(
        float(np.real(np.trace(m @ matcore.PAULI_X))),
        float(np.real(np.trace(m @ matcore.PAULI_Y))),
        float(np.real(np.trace(m @ matcore.PAULI_Z))),
    )


def rank_class(rho: DensityMatrix, tol: float = STATE_TOL) -> int:
    """Number of eigenvalues above ``tol``."""
    return int(np.sum(matcore.eigvalsh(rho.mat) > tol))


def is_pure(rho: DensityMatrix, tol: float = STATE_TOL) -> bool:
    return bool(np.linalg.norm(rho.mat @ rho.mat - rho.mat) <= tol * rho.dim)


def mix(terms: Iterable[tuple[float, DensityMatrix]], tol: float = STATE_TOL) -> DensityMatrix:
    terms = list(terms)
    if not terms:
        raise ValidationError("mix needs at least one term")
    weights = np.array([float(w) for w, _ in terms])
    if np.any(weights < 0):
        raise DomainError("mixture weights must be nonnegative", weights=weights.tolist())
    if abs(weights.sum() - 1) > tol:
        raise DomainError(f"mixture weights sum to {weights.sum():.12g}", weights=weights.tolist())
    dims = {r.dim for _, r in terms}
    if len(dims) != 1:
        raise ShapeError(f"mixing densities of different dimensions {sorted(dims)}")
    return DensityMatrix(sum(w * r.mat for w, r in zip(weights, (r for _, r in terms))))


def product_density(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(np.kron(a.mat, b.mat))


def reduced_density(rho: DensityMatrix, dims: Sequence[int], keep) -> DensityMatrix:
    return DensityMatrix(matcore.partial_trace(rho.mat, dims, keep))


def maximally_mixed(n: int) -> DensityMatrix:
    return DensityMatrix(np.eye(n) / n)
