"""An n-qubit digital quantum computer working on density matrices.

Basis states are big-endian: ``|k> = |x_0> (x) ... (x) |x_{n-1}>`` where
``x_0`` is the most significant bit of ``k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import matcore
from .errors import DomainError, ShapeError, ValidationError
from .measure import DiscreteLaw
from .states import DensityMatrix, PureState

UNITARY_TOL = 1e-10


def basis_ket(n: int, k: int) -> PureState:
    if n < 1 or not (0 <= k < 2**n):
        raise DomainError(f"basis index {k} out of range for {n} qubits", n=n, k=k)
    e = np.zeros(2**n)
    e[k] = 1.0
    return PureState(e)


def basis_density(n: int, k: int = 0) -> DensityMatrix:
    d = np.zeros((2**n, 2**n))
    d[k, k] = 1.0
    return DensityMatrix(d)


@dataclass(frozen=True, eq=False)
class QuantumCode:
    """A finite sequence of unitaries U_0 = I, U_1, ..., U_l."""

    n_qubits: int
    unitaries: tuple

    def __post_init__(self):
        dim = 2**self.n_qubits
        us = tuple(matcore.as_matrix(u, square=True) for u in self.unitaries)
        if not us:
            raise ValidationError("a quantum code has at least U_0 = I")
        checked = set()
        for j, u in enumerate(us):
            if u.shape != (dim, dim):
                raise ShapeError(f"U_{j} has shape {u.shape}, expected {(dim, dim)}")
            # repeated gates (e.g. Grover iterates) share one array; check it once
            if id(u) in checked:
                continue
            if not matcore.is_unitary(u, UNITARY_TOL):
                raise ValidationError(f"U_{j} is not unitary", index=j)
            checked.add(id(u))
        if np.linalg.norm(us[0] - np.eye(dim)) > UNITARY_TOL:
            raise ValidationError("U_0 must be the identity")
        object.__setattr__(self, "unitaries", us)

    @classmethod
    def from_gates(cls, n_qubits: int, gates: Sequence) -> "QuantumCode":
        return cls(n_qubits, (np.eye(2**n_qubits),) + tuple(gates))


def iterate_code(code: QuantumCode, rho0: DensityMatrix) -> Iterator[np.ndarray]:
    """Yield the raw density matrix after each U_j (unvalidated)."""
    r = rho0.mat
    if r.shape[0] != 2**code.n_qubits:
        raise ShapeError(f"initial state has dimension {r.shape[0]}, code acts on {2**code.n_qubits}")
    for u in code.unitaries:
        r = u @ r @ matcore.dagger(u)
        yield r


def run_code(code: QuantumCode, rho0: DensityMatrix) -> DensityMatrix:
    r = rho0.mat
    for r in iterate_code(code, rho0):
        pass
    return DensityMatrix(r)


def measure_law(rho: DensityMatrix) -> DiscreteLaw:
    """Law of the computational-basis readout: p_k = <k|rho|k>."""
    p = np.real(np.diag(rho.mat)).copy()
    p[p < 0] = 0.0
    return DiscreteLaw(tuple(range(p.size)), p / p.sum())


def rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by (seed, stream)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


@dataclass(frozen=True)
class ShotResult:
    counts: dict
    shots: int
    seed: int | None = None

    def frequency(self, outcome) -> float:
        return self.counts.get(outcome, 0) / self.shots if self.shots else 0.0

    def as_law(self) -> DiscreteLaw:
        keys = sorted(self.counts)
        return DiscreteLaw(tuple(keys), np.array([self.counts[k] / self.shots for k in keys]))


def sample(law: DiscreteLaw, shots: int, seed: int, stream: int = 0) -> ShotResult:
    """Inverse-CDF sampling; identical (seed, stream) give identical counts."""
    if shots < 0:
        raise DomainError("shots must be nonnegative")
    if shots == 0:
        return ShotResult({}, 0, seed)
    cdf = np.cumsum(np.clip(law.probs, 0.0, None))
    cdf /= cdf[-1]
    u = rng(seed, stream).random(shots)
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, len(cdf) - 1)
    hits = np.bincount(idx, minlength=len(cdf))
    counts = {law.support[i]: int(c) for i, c in enumerate(hits) if c}
    return ShotResult(counts, shots, seed)


def hadamard_layer(n: int) -> np.ndarray:
    """H^(x)n built as an exact +-1 sign matrix times 2^(-n/2).

    The scale is rounded once, so every entry carries at most half an ulp of
    error regardless of n (repeated Kronecker products would accumulate n).
    """
    if n < 1:
        raise DomainError("need at least one qubit")
    signs = matcore.kron_all([np.array([[1.0, 1.0], [1.0, -1.0]])] * n)
    scale = 2.0 ** -(n // 2) * (math.sqrt(0.5) if n % 2 else 1.0)
    return signs * scale


@dataclass(frozen=True)
class GroverSpec:
    n_qubits: int
    marked: int

    def __post_init__(self):
        if self.n_qubits < 2:
            raise DomainError("Grover search needs n >= 2 qubits")
        if not (0 <= self.marked < 2**self.n_qubits):
            raise DomainError(f"marked element {self.marked} out of range")

    @property
    def theta(self) -> float:
        return math.asin(2.0 ** (-self.n_qubits / 2))


def grover_operators(spec: GroverSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Oracle W1 = I - 2|a><a|, diffusion W2 = 2|Psi1><Psi1| - I, and U2 = W2 W1."""
    dim = 2**spec.n_qubits
    w1 = np.eye(dim)
    w1[spec.marked, spec.marked] = -1.0
    psi1 = np.full(dim, 1.0 / math.sqrt(dim))
    w2 = 2.0 * np.outer(psi1, psi1) - np.eye(dim)
    return w1, w2, w2 @ w1


def grover_code(spec: GroverSpec, k: int) -> QuantumCode:
    _, _, u2 = grover_operators(spec)
    return QuantumCode.from_gates(spec.n_qubits, [hadamard_layer(spec.n_qubits)] + [u2] * k)


def grover_run(spec: GroverSpec, k: int) -> np.ndarray:
    """Success probabilities p_0..p_k, p_j = <a|U2^j H^n rho_0 H^n U2^j|a>."""
    if k < 0:
        raise DomainError("iteration count must be nonnegative")
    code = grover_code(spec, k)
    rho0 = basis_density(spec.n_qubits, 0)
    a = spec.marked
    trace = [float(r[a, a].real) for j, r in enumerate(iterate_code(code, rho0)) if j >= 1]
    return np.array(trace)


def grover_closed_form(spec: GroverSpec, k: int) -> np.ndarray:
    j = np.arange(k + 1)
    return np.sin((2 * j + 1) * spec.theta) ** 2


def grover_optimal_k(n: int) -> int:
    theta = math.asin(2.0 ** (-n / 2))
    return max(0, int(round(math.pi / (4 * theta) - 0.5)))


def growth_claim_holds(p_trace: Sequence[float], n: int) -> list[bool]:
    """Whether p_j > 2^(2j) / 2^n for each j >= 1 (a flag, not an invariant)."""
    return [bool(p > 2.0 ** (2 * j - n)) for j, p in enumerate(p_trace) if j >= 1]


def ascii_bars(law_or_counts, width: int = 40) -> str:
    """Horizontal bar chart; bars are scaled so the largest value fills ``width``."""
    if isinstance(law_or_counts, ShotResult):
        items = sorted(law_or_counts.counts.items())
        fmt = "{:d}"
    else:
        items = list(zip(law_or_counts.support, law_or_counts.probs))
        fmt = "{:.12g}"
    if not items:
        return ""
    peak = max(v for _, v in items) or 1
    label_w = max(len(str(k)) for k, _ in items)
    lines = []
    for k, v in items:
        bar = "#" * int(round(width * v / peak))
        lines.append(f"{str(k).rjust(label_w)} | {bar.ljust(width)} {fmt.format(v)}")
    return "\n".join(lines) + "\n"


def histogram_csv(law_or_counts) -> str:
    if isinstance(law_or_counts, ShotResult):
        rows = ["outcome,count"] + [f"{k},{v}" for k, v in sorted(law_or_counts.counts.items())]
        return "\n".join(rows) + "\n"
    return law_or_counts.to_csv()
