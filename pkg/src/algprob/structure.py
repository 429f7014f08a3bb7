"""Unital *-subalgebras of M_n(C): closure, commutant, centre, factor blocks.

An algebra is stored as a Frobenius-orthonormal basis. Subspace comparisons
go through principal angles.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import matcore
from .errors import NumericalError, ShapeError, ValidationError
from .measure import spectral_decompose

SPAN_TOL = 1e-9
MAX_RETRIES = 8


class _Span:
    """Incremental orthonormal basis of flattened matrices."""

    def __init__(self, dim: int, tol: float = SPAN_TOL):
        self.dim = dim
        self.tol = tol
        self.vectors: list[np.ndarray] = []

    def add(self, m: np.ndarray) -> bool:
        v = np.asarray(m, dtype=complex).reshape(-1)
        scale = max(1.0, float(np.linalg.norm(v)))
        r = v
        for _ in range(2):
            for q in self.vectors:
                r = r - np.vdot(q, r) * q
        nrm = np.linalg.norm(r)
        if nrm <= self.tol * scale:
            return False
        self.vectors.append(r / nrm)
        return True

    def matrices(self) -> list[np.ndarray]:
        return [v.reshape(self.dim, self.dim) for v in self.vectors]


@dataclass(frozen=True, eq=False)
class AlgebraBasis:
    ambient_dim: int
    basis: tuple

    @property
    def dim(self) -> int:
        return len(self.basis)

    def stacked(self) -> np.ndarray:
        """Basis as columns of an (n^2 x dim) matrix."""
        return np.stack([b.reshape(-1) for b in self.basis], axis=1)

    def coefficients(self, a) -> np.ndarray:
        a = np.asarray(a).reshape(-1)
        return matcore.dagger(self.stacked()) @ a

    def span_residual(self, a) -> float:
        a = np.asarray(a)
        c = self.coefficients(a)
        back = (self.stacked() @ c).reshape(a.shape)
        return float(np.linalg.norm(back - a))

    def contains(self, a, tol: float = SPAN_TOL) -> bool:
        return self.span_residual(a) <= tol * max(1.0, float(np.linalg.norm(a)))

    def element(self, coeffs) -> np.ndarray:
        return (self.stacked() @ np.asarray(coeffs)).reshape(self.ambient_dim, self.ambient_dim)

    def hermitian_spanning_set(self) -> list[np.ndarray]:
        out = []
        for b in self.basis:
            for h in (0.5 * (b + matcore.dagger(b)), -0.5j * (b - matcore.dagger(b))):
                if np.linalg.norm(h) > SPAN_TOL:
                    out.append(h)
        return out


def _from_span(span: _Span) -> AlgebraBasis:
    return AlgebraBasis(span.dim, tuple(span.matrices()))


def generate_algebra(generators: Iterable, n: int, tol: float = SPAN_TOL) -> AlgebraBasis:
    """Smallest unital *-closed algebra containing ``generators``."""
    span = _Span(n, tol)
    span.add(np.eye(n))
    for g in generators:
        g = matcore.as_matrix(g, square=True)
        if g.shape[0] != n:
            raise ShapeError(f"generator of side {g.shape[0]} in ambient dimension {n}")
        span.add(g)
        span.add(matcore.dagger(g))
    while True:
        mats = span.matrices()
        grew = False
        for a in mats:
            for b in mats:
                grew |= span.add(a @ b)
            grew |= span.add(matcore.dagger(a))
        if not grew or len(span.vectors) == n * n:
            break
    return _from_span(span)


def full_algebra(n: int) -> AlgebraBasis:
    return AlgebraBasis(n, tuple(np.eye(n * n)[k].reshape(n, n).astype(complex) for k in range(n * n)))


def diagonal_algebra(n: int) -> AlgebraBasis:
    mats = []
    for k in range(n):
        d = np.zeros((n, n), dtype=complex)
        d[k, k] = 1.0
        mats.append(d)
    return AlgebraBasis(n, tuple(mats))


def _null_space(m: np.ndarray, tol: float) -> np.ndarray:
    if m.shape[0] == 0:
        return np.eye(m.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(m)
    scale = max(1.0, float(s.max()) if s.size else 1.0)
    rank = int(np.sum(s > tol * scale))
    return matcore.dagger(vh[rank:])


def commutant(alg: AlgebraBasis, tol: float = SPAN_TOL) -> AlgebraBasis:
    """All X with [X, b] = 0 for every basis element b, as one linear system."""
    n = alg.ambient_dim
    eye = np.eye(n)
    # row-major vec: vec(bX) = (b kron I) vec(X), vec(Xb) = (I kron b^T) vec(X)
    rows = [np.kron(b, eye) - np.kron(eye, b.T) for b in alg.basis]
    ns = _null_space(np.vstack(rows), tol)
    return AlgebraBasis(n, tuple(ns[:, k].reshape(n, n) for k in range(ns.shape[1])))


def center(alg: AlgebraBasis, tol: float = SPAN_TOL) -> AlgebraBasis:
    """alg intersected with its commutant."""
    cols = []
    for bk in alg.basis:
        cols.append(np.concatenate([(bk @ bi - bi @ bk).reshape(-1) for bi in alg.basis]))
    coeffs = _null_space(np.stack(cols, axis=1), tol)
    return AlgebraBasis(alg.ambient_dim, tuple(alg.element(coeffs[:, k]) for k in range(coeffs.shape[1])))


def is_commutative(alg: AlgebraBasis, tol: float = SPAN_TOL) -> bool:
    return all(
        np.linalg.norm(a @ b - b @ a) <= tol for i, a in enumerate(alg.basis) for b in alg.basis[i + 1:]
    )


def is_masa(alg: AlgebraBasis, tol: float = SPAN_TOL) -> bool:
    return is_commutative(alg, tol) and commutant(alg, tol).dim == alg.dim


def principal_angles(a: AlgebraBasis, b: AlgebraBasis) -> np.ndarray:
    """Principal angles between two subspaces of M_n (radians, ascending).

    Small angles come from sines (the residual of b after projecting onto a),
    since arccos cannot resolve angles below about 1e-8 in double precision.
    """
    qa, qb = a.stacked(), b.stacked()
    proj = matcore.dagger(qa) @ qb
    cos = np.sort(np.clip(np.linalg.svd(proj, compute_uv=False), 0.0, 1.0))[::-1]
    sin = np.sort(np.clip(np.linalg.svd(qb - qa @ proj, compute_uv=False), 0.0, 1.0))
    k = min(cos.size, sin.size)
    cos, sin = cos[:k], sin[:k]
    return np.where(cos > np.sqrt(0.5), np.arcsin(sin), np.arccos(cos))


def same_span(a: AlgebraBasis, b: AlgebraBasis, tol: float = 1e-8) -> bool:
    if a.dim != b.dim:
        return False
    return bool(principal_angles(a, b).max() < tol)


@dataclass(frozen=True, eq=False)
class CenterDecomp:
    """Minimal central projections with block data (n_k, m_k, l_k).

    ``transform`` is unitary; ``transform^dagger A transform`` is block
    diagonal, block k being diag(A_k, ..., A_k) with l_k copies of an
    m_k x m_k matrix.
    """

    central_projections: tuple
    block_dims: tuple
    transform: np.ndarray

    def blocks(self, a) -> list[np.ndarray]:
        """The m_k x m_k representative of ``a`` in each factor."""
        t = matcore.dagger(self.transform) @ np.asarray(a) @ self.transform
        out, start = [], 0
        for n_k, m_k, _ in self.block_dims:
            out.append(t[start:start + m_k, start:start + m_k])
            start += n_k
        return out

    def canonical_form(self, a) -> np.ndarray:
        parts = [np.kron(np.eye(l_k), blk) for blk, (_, _, l_k) in zip(self.blocks(a), self.block_dims)]
        n = self.transform.shape[0]
        out = np.zeros((n, n), dtype=complex)
        start = 0
        for p in parts:
            out[start:start + p.shape[0], start:start + p.shape[0]] = p
            start += p.shape[0]
        return out

    def block_residual(self, a) -> float:
        t = matcore.dagger(self.transform) @ np.asarray(a) @ self.transform
        return float(np.linalg.norm(t - self.canonical_form(a)))


def _range_basis(p: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (p + matcore.dagger(p)))
    return v[:, w > 0.5]


def _random_hermitian(mats: Sequence[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    return sum(rng.standard_normal() * m for m in mats)


def _factor_frame(alg: AlgebraBasis, p: np.ndarray, m: int, l: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Orthonormal columns spanning range(p), ordered so the factor reads I_l kron A_hat."""
    w = _range_basis(p)
    compressed = [matcore.dagger(w) @ b @ w for b in alg.basis]
    herm = [h for h in (0.5 * (c + matcore.dagger(c)) for c in compressed)] + \
           [-0.5j * (c - matcore.dagger(c)) for c in compressed]
    for _ in range(MAX_RETRIES):
        h = _random_hermitian(herm, rng)
        sd = spectral_decompose(h, cluster_tol=1e-7)
        if len(sd.projectors) != m or any(abs(np.trace(e).real - l) > 1e-6 for e in sd.projectors):
            continue
        es = sd.projectors
        a = sum((rng.standard_normal() + 1j * rng.standard_normal()) * c for c in compressed)
        f = _range_basis(es[0])
        partials = [es[0]]
        ok = True
        for e in es[1:]:
            x = e @ a @ es[0]
            c = np.sqrt(np.real(np.vdot(x, x)) / l)
            if c < 1e-6:
                ok = False
                break
            partials.append(x / c)
        if not ok:
            continue
        cols = [w @ v @ f[:, s] for s in range(l) for v in partials]
        return np.stack(cols, axis=1)
    raise NumericalError("could not build matrix units for a factor after retries")


def factor_decompose(alg: AlgebraBasis, rng: np.random.Generator | None = None,
                     tol: float = SPAN_TOL) -> CenterDecomp:
    rng = np.random.default_rng(0) if rng is None else rng
    z = center(alg, tol)
    herm = z.hermitian_spanning_set()
    projs = None
    for _ in range(MAX_RETRIES):
        h = _random_hermitian(herm, rng)
        sd = spectral_decompose(h, cluster_tol=1e-7)
        if len(sd.projectors) == z.dim and all(z.contains(p, 1e-7) for p in sd.projectors):
            projs = sd.projectors
            break
    if projs is None:
        raise NumericalError("generic central element stayed degenerate after retries")
    dims, frames = [], []
    for p in projs:
        n_k = int(round(np.trace(p).real))
        span = _Span(alg.ambient_dim, tol)
        for b in alg.basis:
            span.add(p @ b @ p)
        d_k = len(span.vectors)
        m_k = int(round(np.sqrt(d_k)))
        if m_k * m_k != d_k or n_k % m_k:
            raise NumericalError(f"block with rank {n_k} has compressed dimension {d_k}")
        l_k = n_k // m_k
        dims.append((n_k, m_k, l_k))
        frames.append(_factor_frame(alg, p, m_k, l_k, rng))
    order = sorted(range(len(dims)), key=lambda k: (-dims[k][0], -dims[k][1]))
    transform = np.hstack([frames[k] for k in order])
    return CenterDecomp(tuple(projs[k] for k in order), tuple(dims[k] for k in order), transform)


def regular_representation(alg: AlgebraBasis, a, tol: float = SPAN_TOL) -> np.ndarray:
    """Matrix of left multiplication by ``a`` in the orthonormal basis."""
    a = np.asarray(a)
    res = alg.span_residual(a)
    if res > tol * max(1.0, float(np.linalg.norm(a))):
        raise ValidationError(f"element lies outside the algebra (residual {res:.3e})", residual=res)
    return np.stack([alg.coefficients(a @ b) for b in alg.basis], axis=1)


def gns_inner(alg: AlgebraBasis, a, b, state_values) -> complex:
    """<a, b> = phi(a^dagger b) for the functional with phi(b_i) = state_values[i]."""
    c = alg.coefficients(matcore.dagger(np.asarray(a)) @ np.asarray(b))
    return complex(np.dot(c, np.asarray(state_values)))


def gns_gram(alg: AlgebraBasis, state_values) -> np.ndarray:
    return np.array([[gns_inner(alg, bi, bj, state_values) for bj in alg.basis] for bi in alg.basis])


def state_values(alg: AlgebraBasis, rho) -> np.ndarray:
    """phi(b_i) = tr(rho b_i) for a density ``rho``."""
    r = rho.mat if hasattr(rho, "mat") else np.asarray(rho)
    return np.array([np.trace(r @ b) for b in alg.basis])


def density_of_state(alg: AlgebraBasis, phi, tol: float = 1e-9) -> np.ndarray:
    """The unique r in the algebra with tr(r b_i) = phi_i for every basis element."""
    phi = np.asarray(phi, dtype=complex)
    if phi.size != alg.dim:
        raise ShapeError(f"need {alg.dim} functional values, got {phi.size}")
    for i, b in enumerate(alg.basis):
        c = alg.coefficients(matcore.dagger(b))
        if abs(np.dot(c, phi) - np.conj(phi[i])) > tol * max(1.0, float(np.abs(phi).max())):
            raise ValidationError("functional is not *-consistent", index=i)
    gram = np.array([[np.trace(bi @ bk) for bk in alg.basis] for bi in alg.basis])
    x, *_ = np.linalg.lstsq(gram, phi, rcond=None)
    resid = float(np.linalg.norm(gram @ x - phi))
    if resid > tol * max(1.0, float(np.linalg.norm(phi))):
        raise ValidationError(f"functional cannot be represented (residual {resid:.3e})", residual=resid)
    r = alg.element(x)
    return r.real if not np.any(np.abs(r.imag) > 1e-14) else r
