import time

import numpy as np
import pytest

from algprob.channels import KrausChannel
from algprob.measure import POVM
from algprob.states import DensityMatrix

ACCEPTANCE_RESULTS: dict = {}
SUITE_BUDGET_S = 60.0
_session = {}


def random_unitary(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def random_density(rng, n, rank=None):
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    r = g @ g.conj().T
    return DensityMatrix(r / np.trace(r).real)


def random_ket(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_channel(rng, d_in, d_out=None, n_kraus=None):
    d_out = d_in if d_out is None else d_out
    n_kraus = int(rng.integers(1, 5)) if n_kraus is None else n_kraus
    z = rng.standard_normal((d_out * n_kraus, d_in)) + 1j * rng.standard_normal((d_out * n_kraus, d_in))
    v, _ = np.linalg.qr(z)
    return KrausChannel(tuple(v[k * d_out:(k + 1) * d_out, :] for k in range(n_kraus)))


def random_povm(rng, n, outcomes):
    parts = []
    for _ in range(outcomes):
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        parts.append(g @ g.conj().T)
    s = sum(parts)
    w, v = np.linalg.eigh(s)
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    return POVM(tuple(range(outcomes)), tuple(s_inv_half @ a @ s_inv_half for a in parts))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def pytest_sessionstart(session):
    _session["start"] = time.perf_counter()


def _fold_suite_runtime():
    # criterion 12 also bounds the wall time of the whole run
    if "12" not in ACCEPTANCE_RESULTS or "elapsed" in _session:
        return
    elapsed = time.perf_counter() - _session["start"]
    _session["elapsed"] = elapsed
    ok, detail = ACCEPTANCE_RESULTS["12"]
    within = elapsed < SUITE_BUDGET_S
    ACCEPTANCE_RESULTS["12"] = (ok and within, f"{detail}; suite runtime {elapsed:.1f}s (< {SUITE_BUDGET_S:.0f}s)")


def pytest_sessionfinish(session, exitstatus):
    _fold_suite_runtime()
    if "12" in ACCEPTANCE_RESULTS and not ACCEPTANCE_RESULTS["12"][0] and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    _fold_suite_runtime()
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=int):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
