"""Observables, sharp and unsharp measurements, and Born-rule laws."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import DomainError, ShapeError, ValidationError
from .states import DensityMatrix, PureState

MEAS_TOL = 1e-9
CLUSTER_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Observable:
    mat: np.ndarray
    tol: float = matcore.HERM_TOL

    def __post_init__(self):
        m = matcore.as_matrix(self.mat, square=True)
        if not matcore.is_hermitian(m, self.tol):
            raise ValidationError(
                f"observable is not self-adjoint (defect {matcore.hermitian_defect(m):.3e})"
            )
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def _as_obs(a) -> np.ndarray:
    return a.mat if isinstance(a, Observable) else Observable(a).mat


def _as_rho(rho) -> np.ndarray:
    return rho.mat if isinstance(rho, DensityMatrix) else DensityMatrix(rho).mat


@dataclass(frozen=True, eq=False)
class DiscreteLaw:
    """Outcome labels with probabilities summing to one."""

    support: tuple
    probs: np.ndarray
    tol: float = 1e-9

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if len(self.support) != p.size:
            raise ShapeError("support and probabilities differ in length")
        if np.any(p < -self.tol):
            raise ValidationError(f"negative probability {p.min():.3e}")
        if abs(p.sum() - 1) > self.tol:
            raise ValidationError(f"probabilities sum to {p.sum():.12g}")
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "probs", p)

    def __getitem__(self, outcome) -> float:
        for s, p in zip(self.support, self.probs):
            if s == outcome:
                return float(p)
        return 0.0

    def mean(self) -> float:
        return float(np.dot(np.asarray(self.support, dtype=float), self.probs))

    def as_dict(self) -> dict:
        return {s: float(p) for s, p in zip(self.support, self.probs)}

    def to_csv(self) -> str:
        rows = ["outcome,probability"]
        rows += [f"{_fmt_label(s)},{p:.12g}" for s, p in zip(self.support, self.probs)]
        return "\n".join(rows) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {"support": [_json_label(s) for s in self.support], "probs": [float(p) for p in self.probs]}
        )


def _fmt_label(s) -> str:
    if isinstance(s, (float, np.floating)):
        return f"{float(s):.12g}"
    return str(s)


def _json_label(s):
    if isinstance(s, (np.integer,)):
        return int(s)
    if isinstance(s, (np.floating,)):
        return float(s)
    return s


@dataclass(frozen=True, eq=False)
class SpectralDecomp:
    eigenvalues: np.ndarray
    projectors: tuple

    def reconstruct(self) -> np.ndarray:
        return sum(lam * p for lam, p in zip(self.eigenvalues, self.projectors))

    def as_pvm(self) -> "PVM":
        return PVM(tuple(float(x) for x in self.eigenvalues), self.projectors)


def _check_effects(effects, tol, *, sharp: bool) -> None:
    dims = {e.shape for e in effects}
    if len(dims) != 1:
        raise ShapeError(f"effects have differing shapes {sorted(dims)}")
    n = effects[0].shape[0]
    eye = np.eye(n)
    for i, e in enumerate(effects):
        if not matcore.is_hermitian(e, tol):
            raise ValidationError(f"effect {i} is not Hermitian", invariant="hermitian", index=i)
        w = matcore.eigvalsh(e)
        if w[0] < -tol or w[-1] > 1 + tol:
            raise ValidationError(
                f"effect {i} has spectrum [{w[0]:.3e}, {w[-1]:.6g}] outside [0, 1]",
                invariant="0<=E<=I", index=i,
            )
        if sharp and np.linalg.norm(e @ e - e) > tol * n:
            raise ValidationError(f"element {i} is not idempotent", invariant="projector", index=i)
    total = sum(effects)
    defect = float(np.linalg.norm(total - eye))
    if defect > tol * n:
        raise ValidationError(f"effects sum to identity only within {defect:.3e}", invariant="sum=I", defect=defect)
    if sharp:
        for i in range(len(effects)):
            for j in range(i + 1, len(effects)):
                if np.linalg.norm(effects[i] @ effects[j]) > tol * n:
                    raise ValidationError(
                        f"projectors {i} and {j} are not orthogonal", invariant="orthogonal", index=[i, j]
                    )


@dataclass(frozen=True, eq=False)
class POVM:
    outcomes: tuple
    effects: tuple
    tol: float = MEAS_TOL

    def __post_init__(self):
        effects = tuple(matcore.as_matrix(e, square=True) for e in self.effects)
        if len(effects) != len(self.outcomes) or not effects:
            raise ShapeError("need one effect per outcome")
        _check_effects(effects, self.tol, sharp=self._sharp)
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "outcomes", tuple(self.outcomes))

    _sharp = False

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]


class PVM(POVM):
    """A POVM whose effects are mutually orthogonal projectors."""

    _sharp = True

    @property
    def projectors(self) -> tuple:
        return self.effects


def computational_pvm(n: int) -> PVM:
    projs = []
    for k in range(n):
        p = np.zeros((n, n))
        p[k, k] = 1.0
        projs.append(p)
    return PVM(tuple(range(n)), tuple(projs))


def spectral_decompose(a, cluster_tol: float = CLUSTER_TOL) -> SpectralDecomp:
    """Group eigenvalues closer than ``cluster_tol * max(1, max|lambda|)`` into one projector."""
    eig = matcore.hermitian_eig(_as_obs(a))
    w, v = eig.eigenvalues, eig.eigenvectors
    scale = max(1.0, float(np.abs(w).max()))
    groups: list[list[int]] = [[0]]
    for i in range(1, w.size):
        if w[i] - w[groups[-1][-1]] <= cluster_tol * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    values, projs = [], []
    for g in groups:
        cols = v[:, g]
        values.append(float(np.mean(w[g])))
        p = cols @ matcore.dagger(cols)
        if not np.any(np.iscomplex(p)):
            p = p.real
        projs.append(p)
    return SpectralDecomp(np.array(values), tuple(projs))


def law(a, rho, cluster_tol: float = CLUSTER_TOL) -> DiscreteLaw:
    """Born-rule law of ``a`` in the state ``rho``: p_k = tr(rho P_k)."""
    r = _as_rho(rho)
    sd = spectral_decompose(a, cluster_tol)
    if sd.projectors[0].shape != r.shape:
        raise ShapeError(f"observable {sd.projectors[0].shape} vs state {r.shape}")
    probs = [float(np.real(np.vdot(p, r))) for p in sd.projectors]
    return DiscreteLaw(tuple(float(x) for x in sd.eigenvalues), np.array(probs))


def pvm_law(pvm: PVM, rho) -> DiscreteLaw:
    r = _as_rho(rho)
    return DiscreteLaw(pvm.outcomes, np.array([float(np.real(np.vdot(p, r))) for p in pvm.effects]))


def expectation(a, rho) -> float:
    a, r = _as_obs(a), _as_rho(rho)
    if a.shape != r.shape:
        raise ShapeError(f"observable {a.shape} vs state {r.shape}")
    return float(np.real(np.trace(r @ a)))


def variance(a, rho) -> float:
    a = _as_obs(a)
    e = expectation(a, rho)
    return expectation(a @ a, rho) - e * e


def covariance(a, b, rho) -> complex:
    a, b, r = _as_obs(a), _as_obs(b), _as_rho(rho)
    eye = np.eye(a.shape[0])
    at = a - expectation(a, r) * eye
    bt = b - expectation(b, r) * eye
    return complex(np.trace(r @ matcore.dagger(at) @ bt))


def uncertainty_gap(a, b, rho) -> float:
    """var(a) var(b) - (|<[a,b]>|/2)^2 - (Re cov(a,b))^2; never negative."""
    a, b, r = _as_obs(a), _as_obs(b), _as_rho(rho)
    comm = complex(np.trace(r @ (a @ b - b @ a)))
    return variance(a, r) * variance(b, r) - (abs(comm) / 2) ** 2 - covariance(a, b, r).real ** 2


def bernoulli_law(t, x, y, z, u, v, w, tol: float = 1e-12) -> DiscreteLaw:
    """Closed-form law of tI + xX + yY + zZ in the qubit state with Bloch vector (u, v, w)."""
    r = float(np.sqrt(x * x + y * y + z * z))
    if r == 0:
        raise DomainError("observable is a multiple of the identity; its law is a point mass at t", t=t)
    if np.sqrt(u * u + v * v + w * w) > 1 + tol:
        raise DomainError("Bloch vector lies outside the unit ball")
    s = (u * x + v * y + w * z) / r
    p_minus = float(np.clip(0.5 * (1 - s), 0.0, 1.0))
    p_plus = float(np.clip(0.5 * (1 + s), 0.0, 1.0))
    return DiscreteLaw((t - r, t + r), np.array([p_minus, p_plus]))


def rank_one_law(psi, u) -> tuple[float, float]:
    """(|<psi|u>|^2, 1 - |<psi|u>|^2)."""
    a = psi.ket if isinstance(psi, PureState) else PureState(psi).ket
    b = u.ket if isinstance(u, PureState) else PureState(u).ket
    p1 = min(1.0, abs(np.vdot(a, b)) ** 2)
    return p1, 1.0 - p1


def povm_probabilities(m: POVM, rho) -> DiscreteLaw:
    r = _as_rho(rho)
    if m.dim != r.shape[0]:
        raise ShapeError(f"POVM dimension {m.dim} vs state {r.shape[0]}")
    return DiscreteLaw(m.outcomes, np.array([float(np.real(np.vdot(e, r))) for e in m.effects]))


def neumark_dilate(m: POVM) -> tuple[np.ndarray, PVM]:
    """Isometry V into C^(N*d) and block PVM with V^dagger P_x V = E_x.

    Block x of V is the square root of E_x; P_x projects onto block x.
    """
    d, n_out = m.dim, len(m.effects)
    v = np.vstack([matcore.psd_sqrt(e) for e in m.effects])
    if not np.any(np.iscomplex(v)):
        v = v.real
    projs = []
    for x in range(n_out):
        sel = np.zeros((n_out, n_out))
        sel[x, x] = 1.0
        projs.append(np.kron(sel, np.eye(d)))
    return v, PVM(m.outcomes, tuple(projs))


def event_eq(a, value: float, cluster_tol: float = CLUSTER_TOL) -> np.ndarray:
    """Projector onto the eigenspace of ``a`` for eigenvalue ``value`` (zero if absent)."""
    sd = spectral_decompose(a, cluster_tol)
    scale = max(1.0, float(np.abs(sd.eigenvalues).max()))
    out = np.zeros_like(sd.projectors[0])
    for lam, p in zip(sd.eigenvalues, sd.projectors):
        if abs(lam - value) <= cluster_tol * scale:
            out = out + p
    return out


def event_leq(a, x: float, cluster_tol: float = CLUSTER_TOL) -> np.ndarray:
    """Spectral projector of the event {a <= x}."""
    sd = spectral_decompose(a, cluster_tol)
    return sum((p for lam, p in zip(sd.eigenvalues, sd.projectors) if lam <= x), np.zeros_like(sd.projectors[0]))


def event_lt(a, x: float, cluster_tol: float = CLUSTER_TOL) -> np.ndarray:
    """Spectral projector of the event {a < x}."""
    sd = spectral_decompose(a, cluster_tol)
    return sum((p for lam, p in zip(sd.eigenvalues, sd.projectors) if lam < x), np.zeros_like(sd.projectors[0]))
