"""Completely positive maps in Kraus form and their Choi matrices.

Vectorization is column-major throughout: ``vec(X)[j*n + i] = X[i, j]``, so
``vec(A X B) = (B^T kron A) vec(X)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Mapping, Sequence

import numpy as np

from . import matcore
from .errors import NotCPError, NumericalError, ShapeError, ValidationError, ZeroProbabilityError
from .measure import PVM, Observable
from .states import DensityMatrix

CHANNEL_TOL = 1e-9
PROB_TOL = 1e-12
FIXED_POINT_TOL = 1e-8

Normalization = Literal["raw", "normalized"]


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int | None = None) -> np.ndarray:
    return np.asarray(v).reshape(rows, rows if cols is None else cols, order="F")


def _clean(m: np.ndarray) -> np.ndarray:
    return m.real if np.iscomplexobj(m) and not np.any(m.imag) else m


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A CP map X -> sum_k K_k X K_k^dagger with K_k of shape (out_dim, in_dim)."""

    kraus_ops: tuple
    in_dim: int = 0
    out_dim: int = 0
    tol: float = CHANNEL_TOL

    def __post_init__(self):
        ops = tuple(matcore.as_matrix(k) for k in self.kraus_ops)
        if not ops:
            raise ValidationError("a Kraus channel needs at least one operator")
        shapes = {k.shape for k in ops}
        if len(shapes) != 1:
            raise ShapeError(f"Kraus operators have differing shapes {sorted(shapes)}")
        out_dim, in_dim = ops[0].shape
        if (self.in_dim and self.in_dim != in_dim) or (self.out_dim and self.out_dim != out_dim):
            raise ShapeError(
                f"declared dims ({self.in_dim}->{self.out_dim}) disagree with operators {ops[0].shape}"
            )
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "in_dim", in_dim)
        object.__setattr__(self, "out_dim", out_dim)

    def tp_defect(self) -> float:
        s = sum(matcore.dagger(k) @ k for k in self.kraus_ops)
        return float(np.linalg.norm(s - np.eye(self.in_dim)))

    def unital_defect(self) -> float:
        s = sum(k @ matcore.dagger(k) for k in self.kraus_ops)
        return float(np.linalg.norm(s - np.eye(self.out_dim)))

    @property
    def is_tp(self) -> bool:
        return self.tp_defect() <= self.tol * self.in_dim

    @property
    def is_unital(self) -> bool:
        return self.unital_defect() <= self.tol * self.out_dim

    def __call__(self, x) -> np.ndarray:
        """Action on an arbitrary in_dim x in_dim matrix (no TP requirement)."""
        x = matcore.as_matrix(x, square=True)
        if x.shape[0] != self.in_dim:
            raise ShapeError(f"channel input dimension {self.in_dim}, got {x.shape[0]}")
        return sum(k @ x @ matcore.dagger(k) for k in self.kraus_ops)

    def adjoint(self, b) -> np.ndarray:
        """Heisenberg-picture action sum K^dagger B K."""
        b = matcore.as_matrix(b, square=True)
        return sum(matcore.dagger(k) @ b @ k for k in self.kraus_ops)

    def to_json(self) -> dict:
        return {
            "kraus": [matcore.matrix_to_json(k) for k in self.kraus_ops],
            "in_dim": self.in_dim,
            "out_dim": self.out_dim,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "KrausChannel":
        try:
            ops = [matcore.matrix_from_json(m) for m in obj["kraus"]]
        except KeyError as exc:
            raise ValidationError("channel JSON needs a 'kraus' list") from exc
        return cls(tuple(ops), int(obj.get("in_dim", 0)), int(obj.get("out_dim", 0)))


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """Choi matrix sum_ij E_ij kron Phi(E_ij), optionally divided by ``in_dim``."""

    mat: np.ndarray
    in_dim: int
    out_dim: int
    normalization: Normalization = "raw"

    def __post_init__(self):
        m = matcore.as_matrix(self.mat, square=True)
        if m.shape[0] != self.in_dim * self.out_dim:
            raise ShapeError(f"Choi side {m.shape[0]} != {self.in_dim}*{self.out_dim}")
        if self.normalization not in ("raw", "normalized"):
            raise ValidationError(f"unknown Choi normalization {self.normalization!r}")
        object.__setattr__(self, "mat", m)

    def raw(self) -> np.ndarray:
        return self.mat * self.in_dim if self.normalization == "normalized" else self.mat

    def block(self, i: int, j: int) -> np.ndarray:
        """Phi(E_ij) read off the raw Choi matrix."""
        o = self.out_dim
        return self.raw()[i * o:(i + 1) * o, j * o:(j + 1) * o]

    def __call__(self, x) -> np.ndarray:
        x = matcore.as_matrix(x, square=True)
        if x.shape[0] != self.in_dim:
            raise ShapeError(f"map input dimension {self.in_dim}, got {x.shape[0]}")
        n, o = self.in_dim, self.out_dim
        blocks = self.raw().reshape(n, o, n, o)
        return np.einsum("ij,iajb->ab", x, blocks)

    def to_json(self) -> dict:
        return {
            "choi": matcore.matrix_to_json(self.mat),
            "in_dim": self.in_dim,
            "out_dim": self.out_dim,
            "normalization": self.normalization,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ChoiMatrix":
        try:
            return cls(
                matcore.matrix_from_json(obj["choi"]),
                int(obj["in_dim"]),
                int(obj["out_dim"]),
                obj.get("normalization", "raw"),
            )
        except KeyError as exc:
            raise ValidationError(f"Choi JSON missing field {exc}") from exc


def _matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n))
    e[i, j] = 1.0
    return e


def choi_of_map(fn: Callable[[np.ndarray], np.ndarray], in_dim: int, out_dim: int,
                normalization: Normalization = "raw") -> ChoiMatrix:
    """Choi matrix of an arbitrary linear map given as a callable."""
    blocks = [[np.asarray(fn(_matrix_unit(in_dim, i, j))) for j in range(in_dim)] for i in range(in_dim)]
    c = np.block(blocks)
    if normalization == "normalized":
        c = c / in_dim
    return ChoiMatrix(_clean(c), in_dim, out_dim, normalization)


def choi_of(ch: KrausChannel, normalization: Normalization = "raw") -> ChoiMatrix:
    # sum_k |K_k>> <<K_k| with column-major vec equals sum_ij E_ij kron Phi(E_ij)
    vs = np.stack([vec(k) for k in ch.kraus_ops], axis=1)
    c = vs @ matcore.dagger(vs)
    if normalization == "normalized":
        c = c / ch.in_dim
    return ChoiMatrix(_clean(c), ch.in_dim, ch.out_dim, normalization)


def transpose_map_choi(n: int) -> ChoiMatrix:
    """Choi matrix of X -> X^T (the SWAP operator); positive but not CP."""
    return choi_of_map(lambda x: x.T, n, n)


def channel_properties(obj, tol: float = CHANNEL_TOL) -> dict:
    """CP / TP / unital / Hermiticity-preserving flags from the Choi matrix."""
    c = choi_of(obj) if isinstance(obj, KrausChannel) else obj
    raw = c.raw()
    n, o = c.in_dim, c.out_dim
    w = matcore.eigvalsh(raw)
    herm = matcore.is_hermitian(raw, tol)
    tr_out = matcore.partial_trace(raw, (n, o), keep=[0])
    tr_in = matcore.partial_trace(raw, (n, o), keep=[1])
    return {
        "cp": bool(herm and w[0] >= -tol * max(1.0, matcore.inf_norm(raw))),
        "tp": bool(np.linalg.norm(tr_out - np.eye(n)) <= tol * n),
        "unital": bool(np.linalg.norm(tr_in - np.eye(o)) <= tol * o),
        "hermiticity": bool(herm),
        "min_choi_eigenvalue": float(w[0]),
    }


def kraus_from_choi(c: ChoiMatrix, rank_tol: float | None = None) -> KrausChannel:
    """Kraus operators sqrt(lambda_j) unvec(v_j) from the Choi eigenpairs."""
    raw = c.raw()
    eig = matcore.hermitian_eig(raw, herm_tol=CHANNEL_TOL)
    w, v = eig.eigenvalues, eig.eigenvectors
    scale = max(1.0, abs(float(np.real(np.trace(raw)))))
    if w[0] < -CHANNEL_TOL * scale:
        raise NotCPError(f"Choi matrix has negative eigenvalue {w[0]:.6g}", min_eigenvalue=float(w[0]))
    if rank_tol is None:
        rank_tol = 1e-10 * scale
    keep = np.nonzero(w > rank_tol)[0][::-1]
    if keep.size == 0:
        return KrausChannel((np.zeros((c.out_dim, c.in_dim)),))
    ops = tuple(_clean(np.sqrt(w[j]) * unvec(v[:, j], c.out_dim, c.in_dim)) for j in keep)
    return KrausChannel(ops)


def compose(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    """The map a after b, Kraus set {A_i B_j}."""
    if b.out_dim != a.in_dim:
        raise ShapeError(f"cannot compose: inner output {b.out_dim} vs outer input {a.in_dim}")
    return KrausChannel(tuple(ka @ kb for ka in a.kraus_ops for kb in b.kraus_ops))


def tensor(a: KrausChannel, b: KrausChannel) -> KrausChannel:
    return KrausChannel(tuple(np.kron(ka, kb) for ka in a.kraus_ops for kb in b.kraus_ops))


def identity_channel(n: int) -> KrausChannel:
    return KrausChannel((np.eye(n),))


def unitary_channel(u) -> KrausChannel:
    u = matcore.as_matrix(u, square=True)
    if not matcore.is_unitary(u):
        raise ValidationError("matrix is not unitary")
    return KrausChannel((u,))


def depolarizing(lam: float) -> KrausChannel:
    """Qubit map rho -> lam rho + (1 - lam) I/2, valid CP for -1/3 <= lam <= 1.

    Uses Kraus weights (1+3 lam)/4 on I and (1-lam)/4 on each Pauli; outside
    the CP range a weight is negative and this raises.
    """
    w0, w1 = (1 + 3 * lam) / 4, (1 - lam) / 4
    if w0 < -1e-15 or w1 < -1e-15:
        raise NotCPError(f"depolarizing parameter {lam} is outside the CP range [-1/3, 1]")
    w0, w1 = max(w0, 0.0), max(w1, 0.0)
    paulis = (matcore.PAULI_X, matcore.PAULI_Y, matcore.PAULI_Z)
    return KrausChannel((np.sqrt(w0) * matcore.PAULI_I,) + tuple(np.sqrt(w1) * p for p in paulis))


def depolarizing_choi(lam: float) -> ChoiMatrix:
    """Choi matrix of the depolarizing map for any real ``lam`` (CP or not)."""
    return choi_of_map(lambda x: lam * x + (1 - lam) * np.trace(x) * np.eye(2) / 2, 2, 2)


def measure_and_prepare(pvm: PVM, states: Sequence) -> KrausChannel:
    """X -> sum_x tr(P_x X) sigma_x with each sigma_x a density."""
    ops = []
    for p, s in zip(pvm.projectors, states):
        s = s.mat if isinstance(s, DensityMatrix) else DensityMatrix(s).mat
        w, v = np.linalg.eigh(p)
        sw, sv = np.linalg.eigh(0.5 * (s + matcore.dagger(s)))
        for a in np.nonzero(w > 0.5)[0]:
            for b in np.nonzero(sw > 1e-14)[0]:
                ops.append(np.sqrt(sw[b]) * np.outer(sv[:, b], np.conj(v[:, a])))
    return KrausChannel(tuple(_clean(o) for o in ops))


def apply(ch: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    if not ch.is_tp:
        raise ValidationError(f"channel is not trace preserving (defect {ch.tp_defect():.3e})")
    r = rho.mat if isinstance(rho, DensityMatrix) else DensityMatrix(rho).mat
    return DensityMatrix(ch(r))


def superoperator(ch: KrausChannel) -> np.ndarray:
    """Matrix S with vec(Phi(X)) = S vec(X) under column-major vec."""
    return sum(np.kron(np.conj(k), k) for k in ch.kraus_ops)


def spectral_radius(ch: KrausChannel) -> float:
    return float(np.abs(np.linalg.eigvals(superoperator(ch))).max())


def _null_space(m: np.ndarray, tol: float) -> np.ndarray:
    _, s, vh = np.linalg.svd(m)
    return matcore.dagger(vh[s <= tol])


def fixed_point(ch: KrausChannel, tol: float = FIXED_POINT_TOL) -> DensityMatrix:
    """A density r with Phi(r) = r.

    With a one-dimensional fixed space the eigenvector is used directly; with
    a degenerate fixed space the spectral projector onto eigenvalue 1 is
    applied to I/n, which yields the Cesaro limit of Phi^k(I/n).
    """
    if ch.in_dim != ch.out_dim or not ch.is_tp:
        raise ValidationError("fixed points need a trace-preserving channel with in_dim == out_dim")
    n = ch.in_dim
    s = superoperator(ch)
    shifted = s - np.eye(n * n)
    right = _null_space(shifted, 1e-10 * n)
    if right.shape[1] == 0:
        w, vs = np.linalg.eig(s)
        j = int(np.argmin(np.abs(w - 1)))
        if abs(w[j] - 1) > tol:
            raise NumericalError(f"no eigenvalue within {tol} of 1 (closest {w[j]})")
        right = vs[:, [j]]
    if right.shape[1] == 1:
        r = unvec(right[:, 0], n)
    else:
        left = _null_space(matcore.dagger(shifted), 1e-10 * n)
        if left.shape[1] != right.shape[1]:
            raise NumericalError("left and right fixed spaces differ in dimension")
        proj = right @ np.linalg.solve(matcore.dagger(left) @ right, matcore.dagger(left))
        r = unvec(proj @ vec(np.eye(n) / n), n)
    tr = np.trace(r)
    if abs(tr) < 1e-14:
        raise NumericalError("fixed-point eigenvector has zero trace")
    r = r / tr
    r = 0.5 * (r + matcore.dagger(r))
    w, v = np.linalg.eigh(r)
    w = np.clip(w, 0.0, None)
    r = (v * (w / w.sum())) @ matcore.dagger(v)
    residual = matcore.schatten_norm(ch(r) - r, 1)
    if residual > tol:
        raise NumericalError(f"fixed-point residual {residual:.3e} exceeds {tol}")
    return DensityMatrix(_clean(r))


def _pvm_projectors(pvm) -> tuple:
    if isinstance(pvm, PVM):
        return pvm.projectors
    return PVM(tuple(range(len(pvm))), tuple(pvm)).projectors


def conditional_expectation(a, pvm):
    """Pinching a -> sum_j p_j a p_j onto the block-diagonal algebra of ``pvm``.

    Accepts any square matrix; an :class:`Observable` comes back as one.
    """
    m = a.mat if isinstance(a, Observable) else matcore.as_matrix(a, square=True)
    projs = _pvm_projectors(pvm)
    if projs[0].shape != m.shape:
        raise ShapeError(f"PVM acts on {projs[0].shape}, element is {m.shape}")
    out = sum(p @ m @ p for p in projs)
    return Observable(out) if isinstance(a, Observable) else out


def _check_projector(p) -> np.ndarray:
    p = matcore.as_matrix(p, square=True)
    if not matcore.is_projector(p, 1e-9):
        raise ValidationError("conditioning event is not an orthogonal projector")
    return p


def lueders_update(rho: DensityMatrix, p, prob_tol: float = PROB_TOL) -> tuple[float, DensityMatrix]:
    p = _check_projector(p)
    r = rho.mat
    prob = float(np.real(np.vdot(p, r)))
    if prob <= prob_tol:
        raise ZeroProbabilityError(f"cannot condition on an event of probability {prob:.3e}", probability=prob)
    return prob, DensityMatrix(p @ r @ p / prob)


def conditional_probability(q, p, rho: DensityMatrix, prob_tol: float = PROB_TOL) -> float:
    """tr(p rho p q) / tr(rho p)."""
    q = _check_projector(q)
    _, post = lueders_update(rho, p, prob_tol)
    return float(np.real(np.vdot(q, post.mat)))


@dataclass(frozen=True, eq=False)
class Instrument:
    """Outcome-labelled CP maps whose sum is trace preserving."""

    outcomes: tuple
    cp_maps: tuple
    tol: float = CHANNEL_TOL

    def __post_init__(self):
        if len(self.outcomes) != len(self.cp_maps) or not self.cp_maps:
            raise ShapeError("need one CP map per outcome")
        dims = {(m.in_dim, m.out_dim) for m in self.cp_maps}
        if len(dims) != 1:
            raise ShapeError(f"instrument maps have differing dimensions {sorted(dims)}")
        total = KrausChannel(tuple(k for m in self.cp_maps for k in m.kraus_ops))
        if not total.is_tp:
            raise ValidationError(
                f"summed instrument is not trace preserving (defect {total.tp_defect():.3e})"
            )
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        object.__setattr__(self, "cp_maps", tuple(self.cp_maps))

    def total(self) -> KrausChannel:
        return KrausChannel(tuple(k for m in self.cp_maps for k in m.kraus_ops))


def von_neumann_instrument(pvm: PVM) -> Instrument:
    return Instrument(pvm.outcomes, tuple(KrausChannel((p,)) for p in pvm.projectors))


def instrument_apply(ins: Instrument, rho: DensityMatrix,
                     prob_tol: float = PROB_TOL) -> dict:
    """Map each outcome to (probability, posterior density or None)."""
    out = {}
    for x, t in zip(ins.outcomes, ins.cp_maps):
        unnorm = t(rho.mat)
        prob = float(np.real(np.trace(unnorm)))
        post = DensityMatrix.repair(unnorm / prob) if prob > prob_tol else None
        out[x] = (max(prob, 0.0), post)
    return out


def instrument_marginal(ins: Instrument, rho: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(ins.total()(rho.mat))


def jamiolkowski_roundtrip(ch: KrausChannel) -> KrausChannel:
    """Channel -> normalized Choi (state of the maximally entangled vector) -> channel."""
    return kraus_from_choi(choi_of(ch, "normalized"))


def maximally_entangled(n: int) -> np.ndarray:
    """|W> = sum_i |i>|i> / sqrt(n)."""
    return vec(np.eye(n)) / np.sqrt(n)


def action_residual(a, b, dim: int) -> float:
    """max_ij ||a(E_ij) - b(E_ij)||_F for two linear maps given as callables."""
    return max(
        float(np.linalg.norm(a(_matrix_unit(dim, i, j)) - b(_matrix_unit(dim, i, j))))
        for i in range(dim) for j in range(dim)
    )
