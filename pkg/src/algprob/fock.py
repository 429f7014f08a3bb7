"""One-mode interacting Fock spaces and orthogonal polynomials.

Indexing: ``omega[0]`` holds omega_1, the first recurrence coefficient, and
``alpha[0]`` holds alpha_1. The normalization omega_0 = 1 never enters a
matrix.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError, ValidationError

MAX_ATOMS = 64


@dataclass(frozen=True, eq=False)
class JacobiSequence:
    """Recurrence data (omega_n, alpha_n).

    ``m0`` is the finite-type cutoff: omega_{m0+1} = 0 and every later omega
    vanishes. ``None`` marks infinite type (as far as the stored entries go).
    """

    omega: np.ndarray
    alpha: np.ndarray
    m0: int | None = None

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float).reshape(-1)
        al = np.asarray(self.alpha, dtype=float).reshape(-1)
        if np.any(om < 0):
            raise DomainError("Jacobi omegas must be nonnegative", omega=om.tolist())
        zeros = np.nonzero(om == 0)[0]
        m0 = self.m0
        if zeros.size:
            first = int(zeros[0])
            if np.any(om[first:] != 0):
                raise ValidationError("once an omega vanishes all later omegas must vanish")
            if m0 is None:
                m0 = first
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "alpha", al)
        object.__setattr__(self, "m0", m0)

    @property
    def finite(self) -> bool:
        return self.m0 is not None

    def omega_at(self, k: int) -> float:
        """omega_k for k >= 1, zero-padded beyond the cutoff."""
        if k <= len(self.omega):
            return float(self.omega[k - 1])
        if self.finite and k > self.m0:
            return 0.0
        raise ShapeError(f"omega_{k} not available ({len(self.omega)} stored)")

    def alpha_at(self, k: int) -> float:
        if k <= len(self.alpha):
            return float(self.alpha[k - 1])
        if self.finite and k > self.m0 + 1:
            return 0.0
        raise ShapeError(f"alpha_{k} not available ({len(self.alpha)} stored)")

    def lambdas(self) -> np.ndarray:
        """lambda_n = omega_1 ... omega_n, with lambda_0 = 1."""
        return np.concatenate([[1.0], np.cumprod(self.omega)])


@dataclass(frozen=True, eq=False)
class LadderOps:
    trunc: int
    create: np.ndarray
    annihilate: np.ndarray
    preserve: np.ndarray
    number: np.ndarray

    @property
    def field(self) -> np.ndarray:
        """Z = B+ + B0 + B-."""
        return self.create + self.preserve + self.annihilate


def ladder_matrices(js: JacobiSequence, trunc: int) -> LadderOps:
    if trunc < 1:
        raise DomainError("truncation must be at least 1")
    create = np.zeros((trunc, trunc))
    for n in range(trunc - 1):
        create[n + 1, n] = np.sqrt(js.omega_at(n + 1))
    preserve = np.diag([js.alpha_at(n + 1) for n in range(trunc)])
    number = np.diag(np.arange(trunc, dtype=float))
    return LadderOps(trunc, create, create.T.copy(), preserve, number)


def q_jacobi(q: float, n: int) -> JacobiSequence:
    """omega_k = [k]_q = 1 + q + ... + q^(k-1); zero after the first vanishing entry."""
    if not -1 <= q <= 1:
        raise DomainError(f"q must lie in [-1, 1], got {q}")
    om = np.array([sum(q**j for j in range(k)) for k in range(1, n + 1)], dtype=float)
    om[np.abs(om) < 1e-15] = 0.0
    zeros = np.nonzero(om == 0)[0]
    if zeros.size:
        om[zeros[0]:] = 0.0
    return JacobiSequence(om, np.zeros(n))


def field_moments(js: JacobiSequence, max_order: int) -> np.ndarray:
    """m_k = <e_0| Z^k |e_0> for k = 1..max_order.

    The truncation floor(max_order/2) + 1 is exact: a closed walk of length k
    from level 0 never climbs above level k/2.
    """
    trunc = max_order // 2 + 1
    z = ladder_matrices(js, trunc).field
    v = np.zeros(trunc)
    v[0] = 1.0
    out = []
    for _ in range(max_order):
        v = z @ v
        out.append(v[0])
    return np.array(out)


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float).reshape(-1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if a.size == 0 or a.size != w.size:
            raise ShapeError("atoms and weights must be non-empty and of equal length")
        if np.any(w <= 0):
            raise ValidationError("weights must be positive")
        if abs(w.sum() - 1) > 1e-9:
            raise ValidationError(f"weights sum to {w.sum():.12g}")
        order = np.argsort(a, kind="stable")
        a, w = a[order], w[order]
        if np.any(np.diff(a) <= 0):
            raise ValidationError("atoms must be distinct")
        object.__setattr__(self, "atoms", a)
        object.__setattr__(self, "weights", w)

    def moment(self, k: int) -> float:
        return float(np.dot(self.weights, self.atoms**k))

    def to_json(self) -> dict:
        return {"atoms": self.atoms.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, obj) -> "DiscreteMeasure":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            return cls(obj["atoms"], obj["weights"])
        except KeyError as exc:
            raise ValidationError(f"measure JSON missing {exc}") from exc


def _lanczos(measure: DiscreteMeasure, steps: int):
    """Stieltjes/Lanczos on diag(atoms) from sqrt(weights), with full reorthogonalization.

    Returns (alphas, betas, Q) where the columns of Q are sqrt(w) * Q_j(x) for
    the orthonormal polynomials Q_j. Runs in extended precision.
    """
    x = measure.atoms.astype(np.longdouble)
    q = np.sqrt(measure.weights.astype(np.longdouble))
    qs = [q]
    alphas, betas = [], []
    for j in range(steps + 1):
        xq = x * qs[-1]
        a = np.dot(qs[-1], xq)
        alphas.append(a)
        if j == steps:
            break
        r = xq - a * qs[-1]
        if j:
            r = r - betas[-1] * qs[-2]
        for _ in range(2):
            for prev in qs:
                r = r - np.dot(prev, r) * prev
        b = np.sqrt(np.dot(r, r))
        betas.append(b)
        qs.append(r / b)
    return (np.array(alphas, dtype=float), np.array(betas, dtype=float),
            np.stack([np.asarray(v, dtype=float) for v in qs], axis=1))


def jacobi_from_measure(nu: DiscreteMeasure, n: int) -> JacobiSequence:
    """alpha_1..alpha_{n+1} and omega_1..omega_n of the monic orthogonal polynomials of ``nu``."""
    m0 = nu.atoms.size - 1
    if nu.atoms.size > MAX_ATOMS:
        raise ValidationError(f"measures are limited to {MAX_ATOMS} atoms")
    if n > m0:
        raise ValidationError(
            f"a measure with {m0 + 1} atoms has finite type m0={m0}; cannot extract n={n}", m0=m0
        )
    alphas, betas, _ = _lanczos(nu, n)
    return JacobiSequence(betas**2, alphas, m0=m0)


@dataclass(frozen=True, eq=False)
class JacobiMatrix:
    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float).reshape(-1)
        o = np.asarray(self.offdiag, dtype=float).reshape(-1)
        if o.size != max(d.size - 1, 0):
            raise ShapeError("off-diagonal must have one fewer entry than the diagonal")
        if np.any(o < 0):
            raise ValidationError("off-diagonal entries (sqrt omega) must be nonnegative")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", o)

    def matrix(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def jacobi_matrix(js: JacobiSequence, n: int) -> JacobiMatrix:
    """(n+1) x (n+1) tridiagonal matrix with alpha_1..alpha_{n+1} and sqrt(omega_1..omega_n)."""
    return JacobiMatrix(
        [js.alpha_at(k) for k in range(1, n + 2)],
        np.sqrt([js.omega_at(k) for k in range(1, n + 1)]),
    )


def measure_from_jacobi(jm: JacobiMatrix, weight_floor: float = 1e-15) -> DiscreteMeasure:
    """Spectral measure of e_0: atoms are eigenvalues, weights |<e_0|v_i>|^2."""
    w, v = np.linalg.eigh(jm.matrix())
    weights = v[0, :] ** 2
    keep = weights > weight_floor
    weights = weights[keep] / weights[keep].sum()
    return DiscreteMeasure(w[keep], weights)


def _orthonormal_polys_qr(nu: DiscreteMeasure, n: int) -> np.ndarray:
    # Chebyshev basis on the scaled support, then QR; same polynomial span as
    # monomials, far better conditioned.
    a = nu.atoms
    lo, hi = a.min(), a.max()
    t = (2 * a - lo - hi) / (hi - lo) if hi > lo else np.zeros_like(a)
    vander = np.polynomial.chebyshev.chebvander(t, n)
    q, r = np.linalg.qr(np.sqrt(nu.weights)[:, None] * vander)
    return q * np.sign(np.diag(r))


def quantum_decomposition_check(nu: DiscreteMeasure, n: int) -> float:
    """||M_x - (C+ + C0 + C-)||_F in the orthonormal polynomial basis.

    M_x is built from an independent QR orthonormalization of the polynomial
    space; the C-parts are ladder matrices of the extracted Jacobi sequence.
    """
    js = jacobi_from_measure(nu, n)
    q = _orthonormal_polys_qr(nu, n)
    mx = q.T @ (nu.atoms[:, None] * q)
    ops = ladder_matrices(js, n + 1)
    return float(np.linalg.norm(mx - ops.field))


def favard_roundtrip(nu: DiscreteMeasure) -> tuple[DiscreteMeasure, float, float]:
    """measure -> Jacobi data -> tridiagonal -> spectral measure.

    Returns (recovered measure, max atom error, max weight error).
    """
    n = nu.atoms.size - 1
    js = jacobi_from_measure(nu, n)
    back = measure_from_jacobi(jacobi_matrix(js, n))
    if back.atoms.size != nu.atoms.size:
        return back, float("inf"), float("inf")
    return (back, float(np.abs(back.atoms - nu.atoms).max()),
            float(np.abs(back.weights - nu.weights).max()))
