"""Scriptable commands over the algprob library with JSON, CSV and plain-text output.

Exit codes: 0 success, 2 validation error (a JSON error object is written to
stderr), 1 numerical failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any

import numpy as np

from . import channels, contextuality, fock, matcore, measure, qpu, states, structure
from .errors import NumericalError, ValidationError

EX_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _default_tol() -> float:
    raw = os.environ.get("ALGPROB_DEFAULT_TOL")
    if raw is None:
        return 1e-9
    try:
        tol = float(raw)
    except ValueError as exc:
        raise UsageError(f"ALGPROB_DEFAULT_TOL is not a number: {raw!r}") from exc
    return tol


def _g(x: float) -> str:
    return f"{x:.12g}"


def _load(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def _load_map(path: str):
    obj = _load(path)
    if "choi" in obj:
        return channels.ChoiMatrix.from_json(obj)
    return channels.KrausChannel.from_json(obj)


def _load_density(path: str) -> states.DensityMatrix:
    return states.DensityMatrix(matcore.matrix_from_json(_load(path)))


def _load_povm(path: str) -> measure.POVM:
    obj = _load(path)
    try:
        effects = tuple(matcore.matrix_from_json(e) for e in obj["effects"])
    except KeyError as exc:
        raise ValidationError("POVM JSON needs an 'effects' list") from exc
    outcomes = tuple(obj.get("outcomes", range(len(effects))))
    return measure.POVM(outcomes, effects)


def _load_generators(path: str) -> tuple[int, list[np.ndarray]]:
    obj = _load(path)
    gens_json = obj["generators"] if isinstance(obj, dict) else obj
    gens = [matcore.matrix_from_json(g) for g in gens_json]
    if isinstance(obj, dict) and "n" in obj:
        n = int(obj["n"])
    elif gens:
        n = gens[0].shape[0]
    else:
        raise ValidationError("empty generator list needs an explicit 'n'")
    return n, gens


class Output:
    """Collects text and writes it once, to stdout or ``--out``."""

    def __init__(self, fmt: str):
        self.fmt = fmt
        self.chunks: list[str] = []

    def write(self, text: str) -> None:
        self.chunks.append(text if text.endswith("\n") else text + "\n")

    def json(self, obj: Any) -> None:
        self.write(json.dumps(obj, indent=2, default=_json_default))

    def flush(self, path: str | None) -> None:
        text = "".join(self.chunks)
        if path:
            with open(path, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# -- commands ---------------------------------------------------------------

def cmd_grover(args, out: Output) -> None:
    spec = qpu.GroverSpec(args.n, args.marked)
    iters = qpu.grover_optimal_k(args.n) if args.iters is None else args.iters
    trace = qpu.grover_run(spec, iters)
    final = qpu.measure_law(
        qpu.run_code(qpu.grover_code(spec, iters), qpu.basis_density(args.n, 0))
    )
    counts = None
    if args.shots:
        counts = qpu.sample(final, args.shots, _need_seed(args))
    if out.fmt == "json":
        out.json({
            "n": args.n, "marked": args.marked, "iters": iters,
            "optimal_k": qpu.grover_optimal_k(args.n),
            "p_trace": [float(p) for p in trace],
            "closed_form": [float(p) for p in qpu.grover_closed_form(spec, iters)],
            "growth_claim": qpu.growth_claim_holds(trace, args.n),
            "counts": {str(k): v for k, v in counts.counts.items()} if counts else {},
        })
    elif out.fmt == "csv":
        out.write(qpu.histogram_csv(counts if counts else final))
    else:
        out.write(f"Grover search: n={args.n}, marked={args.marked}, iterations={iters}")
        for j, p in enumerate(trace):
            out.write(f"  p_{j} = {_g(p)}")
        out.write(qpu.ascii_bars(counts if counts else final))


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required whenever shots are sampled")
    return args.seed


def cmd_hadamard(args, out: Output) -> None:
    code = qpu.QuantumCode.from_gates(1, [matcore.HADAMARD])
    law = qpu.measure_law(qpu.run_code(code, qpu.basis_density(1, 0)))
    shots = qpu.sample(law, args.shots, _need_seed(args)) if args.shots else None
    freq1 = shots.frequency(1) if shots else None
    if out.fmt == "json":
        out.json({
            "law": {str(k): v for k, v in law.as_dict().items()},
            "shots": args.shots, "seed": args.seed,
            "counts": {str(k): v for k, v in shots.counts.items()} if shots else {},
            "frequency_1": freq1,
        })
    elif out.fmt == "csv":
        out.write(qpu.histogram_csv(shots if shots else law))
    else:
        out.write("exact law of |0> after H:")
        out.write(qpu.ascii_bars(law))
        if shots:
            out.write(f"{args.shots} shots (seed {args.seed}), frequency of outcome 1: {_g(freq1)}")
            out.write(qpu.ascii_bars(shots))


def cmd_bernoulli(args, out: Output) -> None:
    law = measure.bernoulli_law(args.t, args.x, args.y, args.z, args.u, args.v, args.w)
    _emit_law(law, out, extra={"expectation": law.mean()})


def _emit_law(law: measure.DiscreteLaw, out: Output, extra: dict | None = None) -> None:
    if out.fmt == "json":
        out.json({"support": list(law.support), "probs": law.probs.tolist(), **(extra or {})})
    elif out.fmt == "csv":
        out.write(law.to_csv())
    else:
        out.write(qpu.ascii_bars(law))
        for k, v in (extra or {}).items():
            out.write(f"{k}: {_g(v)}")


def cmd_channel_check(args, out: Output) -> None:
    obj = _load_map(args.inp)
    props = channels.channel_properties(obj, args.tol)
    if out.fmt == "json":
        out.json(props)
        return
    rows = [
        ("Q = Q^dagger", "Q(A^dagger) = Q(A)^dagger", "Hermitian, *-linear", props["hermiticity"]),
        ("Q >= 0", "CP", "complete positivity", props["cp"]),
        ("tr_in Q = I_out", "Q(I) = I", "unital", props["unital"]),
        ("tr_out Q = I_in", "Q^dagger(I) = I", "trace preserving", props["tp"]),
    ]
    if out.fmt == "csv":
        out.write("property,choi_condition,map_condition,holds")
        for choi_c, map_c, name, ok in rows:
            out.write(f"{name},{choi_c},{map_c},{str(ok).lower()}")
        return
    out.write(f"{'Choi matrix':<18}{'map':<28}{'property':<22}holds")
    for choi_c, map_c, name, ok in rows:
        out.write(f"{choi_c:<18}{map_c:<28}{name:<22}{'yes' if ok else 'no'}")
    out.write(f"minimum Choi eigenvalue: {_g(props['min_choi_eigenvalue'])}")


def cmd_channel_choi(args, out: Output) -> None:
    obj = _load_map(args.inp)
    if isinstance(obj, channels.KrausChannel):
        obj = channels.choi_of(obj, args.normalization)
    out.json(obj.to_json())


def cmd_channel_kraus(args, out: Output) -> None:
    obj = _load_map(args.inp)
    if isinstance(obj, channels.KrausChannel):
        obj = channels.choi_of(obj)
    out.json(channels.kraus_from_choi(obj).to_json())


def cmd_channel_compose(args, out: Output) -> None:
    outer = channels.KrausChannel.from_json(_load(args.outer))
    inner = channels.KrausChannel.from_json(_load(args.inner))
    ch = channels.tensor(outer, inner) if args.tensor else channels.compose(outer, inner)
    out.json(ch.to_json())


def cmd_channel_fixed_point(args, out: Output) -> None:
    ch = channels.KrausChannel.from_json(_load(args.inp))
    r = channels.fixed_point(ch)
    payload = {"fixed_point": r.to_json(), "spectral_radius": channels.spectral_radius(ch)}
    if out.fmt == "json":
        out.json(payload)
    else:
        out.write(f"spectral radius: {_g(payload['spectral_radius'])}")
        for row in r.mat:
            out.write("  " + "  ".join(_fmt_entry(x) for x in row))


def _fmt_entry(x) -> str:
    x = complex(x)
    if abs(x.imag) < 1e-15:
        return _g(x.real)
    return f"{_g(x.real)}{'+' if x.imag >= 0 else '-'}{_g(abs(x.imag))}j"


def cmd_povm_check(args, out: Output) -> None:
    m = _load_povm(args.inp)
    payload = {"valid": True, "outcomes": list(m.outcomes), "dim": m.dim}
    if args.state:
        law = measure.povm_probabilities(m, _load_density(args.state))
        payload["probabilities"] = law.probs.tolist()
    if out.fmt == "json":
        out.json(payload)
    elif out.fmt == "csv" and "probabilities" in payload:
        out.write(law.to_csv())
    else:
        out.write(f"valid POVM on C^{m.dim} with {len(m.outcomes)} outcomes")
        if "probabilities" in payload:
            out.write(qpu.ascii_bars(law))


def cmd_povm_neumark(args, out: Output) -> None:
    m = _load_povm(args.inp)
    v, pvm = measure.neumark_dilate(m)
    residuals = [
        float(np.linalg.norm(matcore.dagger(v) @ p @ v - e)) for p, e in zip(pvm.projectors, m.effects)
    ]
    payload = {
        "isometry": matcore.matrix_to_json(v),
        "dilated_dim": int(v.shape[0]),
        "compression_residuals": residuals,
    }
    if out.fmt == "json":
        out.json(payload)
    else:
        out.write(f"dilated dimension {v.shape[0]}; max compression residual {_g(max(residuals))}")


def cmd_lueders(args, out: Output) -> None:
    rho = _load_density(args.state)
    p = matcore.matrix_from_json(_load(args.projector))
    prob, post = channels.lueders_update(rho, p)
    if out.fmt == "json":
        out.json({"probability": prob, "posterior": post.to_json()})
    else:
        out.write(f"probability: {_g(prob)}")
        for row in post.mat:
            out.write("  " + "  ".join(_fmt_entry(x) for x in row))


def cmd_instrument(args, out: Output) -> None:
    obj = _load(args.inp)
    maps = tuple(channels.KrausChannel.from_json(m) for m in obj["maps"])
    ins = channels.Instrument(tuple(obj.get("outcomes", range(len(maps)))), maps)
    rho = _load_density(args.state)
    res = channels.instrument_apply(ins, rho)
    marg = channels.instrument_marginal(ins, rho)
    if out.fmt == "json":
        out.json({
            "outcomes": [
                {"outcome": x, "probability": p, "posterior": post.to_json() if post else None}
                for x, (p, post) in res.items()
            ],
            "marginal": marg.to_json(),
        })
    elif out.fmt == "csv":
        out.write("outcome,probability")
        for x, (p, _) in res.items():
            out.write(f"{x},{_g(p)}")
    else:
        for x, (p, post) in res.items():
            out.write(f"outcome {x}: probability {_g(p)}" + ("" if post else " (no posterior)"))


def cmd_fock_moments(args, out: Output) -> None:
    js = fock.q_jacobi(args.q, args.order // 2 + 1)
    m = fock.field_moments(js, args.order)
    if out.fmt == "json":
        out.json({"q": args.q, "moments": m.tolist()})
    elif out.fmt == "csv":
        out.write("order,moment")
        for k, v in enumerate(m, start=1):
            out.write(f"{k},{_g(v)}")
    else:
        for k, v in enumerate(m, start=1):
            out.write(f"m_{k} = {_g(v)}")


def cmd_favard(args, out: Output) -> None:
    nu = fock.DiscreteMeasure.from_json(_load(args.measure))
    n = nu.atoms.size - 1
    js = fock.jacobi_from_measure(nu, n)
    back, atom_err, weight_err = fock.favard_roundtrip(nu)
    qd = fock.quantum_decomposition_check(nu, n)
    payload = {
        "alpha": js.alpha.tolist(), "omega": js.omega.tolist(), "m0": js.m0,
        "recovered": back.to_json(), "atom_error": atom_err, "weight_error": weight_err,
        "quantum_decomposition_residual": qd,
    }
    if out.fmt == "json":
        out.json(payload)
    else:
        out.write("alpha: " + " ".join(_g(a) for a in js.alpha))
        out.write("omega: " + " ".join(_g(w) for w in js.omega))
        out.write(f"round-trip atom error {_g(atom_err)}, weight error {_g(weight_err)}")
        out.write(f"quantum decomposition residual {_g(qd)}")


def cmd_algebra(args, out: Output) -> None:
    n, gens = _load_generators(args.generators)
    alg = structure.generate_algebra(gens, n)
    if args.action == "closure":
        payload = {"algebra_dim": alg.dim, "basis": [matcore.matrix_to_json(b) for b in alg.basis]}
    elif args.action == "commutant":
        com = structure.commutant(alg)
        payload = {"algebra_dim": alg.dim, "commutant_dim": com.dim,
                   "basis": [matcore.matrix_to_json(b) for b in com.basis]}
    else:
        dec = structure.factor_decompose(alg, np.random.default_rng(args.seed or 0))
        payload = {
            "blocks": [{"n": n_k, "m": m_k, "l": l_k} for n_k, m_k, l_k in dec.block_dims],
            "center_dim": len(dec.central_projections),
            "algebra_dim": alg.dim,
        }
    if out.fmt == "json":
        out.json(payload)
    else:
        for k, v in payload.items():
            if k != "basis":
                out.write(f"{k}: {v}")


def cmd_ks(args, out: Output) -> None:
    cfg = contextuality.ks_configuration()
    rep = contextuality.validate_configuration(cfg)
    par = contextuality.parity_argument(cfg)
    sols = contextuality.search_valuations(cfg)
    if out.fmt == "json":
        out.json({
            "contexts_valid": rep["contexts_valid"],
            "occurrences": {str(k): v for k, v in rep["occurrences"].items()},
            "solutions": len(sols),
            "parity": {"need": par["required_ones"], "have": par["double_count_parity"]},
            "contradiction": par["contradiction"],
        })
    else:
        out.write(contextuality.proof_transcript(cfg))


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="validation tolerance")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--shots", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("--out", default=None, help="write output here instead of stdout")

    p = _Parser(prog="algprob", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("grover", parents=[common], help="Grover search on n qubits")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--marked", type=int, required=True)
    g.add_argument("--iters", type=int, default=None, help="defaults to the optimal count")
    g.set_defaults(func=cmd_grover)

    h = sub.add_parser("hadamard-demo", parents=[common], help="H|0> readout with shot sampling")
    h.set_defaults(func=cmd_hadamard)

    b = sub.add_parser("bernoulli", parents=[common], help="law of tI+xX+yY+zZ in a Bloch state")
    for name in "txyzuvw":
        b.add_argument(f"--{name}", type=float, default=0.0)
    b.set_defaults(func=cmd_bernoulli)

    ch = sub.add_parser("channel", help="channel tools").add_subparsers(dest="action", parser_class=_Parser)
    c = ch.add_parser("check", parents=[common], help="CP/TP/unital table from the Choi matrix")
    c.add_argument("--in", dest="inp", required=True)
    c.set_defaults(func=cmd_channel_check)
    c = ch.add_parser("choi", parents=[common])
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--normalization", choices=("raw", "normalized"), default="raw")
    c.set_defaults(func=cmd_channel_choi)
    c = ch.add_parser("kraus", parents=[common], help="Kraus operators from a Choi matrix")
    c.add_argument("--in", dest="inp", required=True)
    c.set_defaults(func=cmd_channel_kraus)
    c = ch.add_parser("compose", parents=[common], help="outer after inner, or their tensor product")
    c.add_argument("--outer", required=True)
    c.add_argument("--inner", required=True)
    c.add_argument("--tensor", action="store_true")
    c.set_defaults(func=cmd_channel_compose)
    c = ch.add_parser("fixed-point", parents=[common])
    c.add_argument("--in", dest="inp", required=True)
    c.set_defaults(func=cmd_channel_fixed_point)

    pv = sub.add_parser("povm", help="POVM tools").add_subparsers(dest="action", parser_class=_Parser)
    c = pv.add_parser("check", parents=[common])
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--state", default=None)
    c.set_defaults(func=cmd_povm_check)
    c = pv.add_parser("neumark", parents=[common])
    c.add_argument("--in", dest="inp", required=True)
    c.set_defaults(func=cmd_povm_neumark)

    lu = sub.add_parser("lueders", parents=[common], help="condition a density on a projector")
    lu.add_argument("--state", required=True)
    lu.add_argument("--projector", required=True)
    lu.set_defaults(func=cmd_lueders)

    ins = sub.add_parser("instrument", parents=[common], help="apply an instrument to a density")
    ins.add_argument("--in", dest="inp", required=True)
    ins.add_argument("--state", required=True)
    ins.set_defaults(func=cmd_instrument)

    fk = sub.add_parser("fock", help="interacting Fock space tools").add_subparsers(dest="action", parser_class=_Parser)
    c = fk.add_parser("moments", parents=[common])
    c.add_argument("--q", type=float, required=True)
    c.add_argument("--order", type=int, required=True)
    c.set_defaults(func=cmd_fock_moments)
    c = fk.add_parser("favard", parents=[common])
    c.add_argument("--measure", required=True)
    c.set_defaults(func=cmd_favard)

    fv = sub.add_parser("favard", help="Favard round trip").add_subparsers(dest="action", parser_class=_Parser)
    c = fv.add_parser("roundtrip", parents=[common])
    c.add_argument("--measure", required=True)
    c.set_defaults(func=cmd_favard)

    al = sub.add_parser("algebra", help="*-subalgebra structure").add_subparsers(dest="action", parser_class=_Parser)
    for action in ("closure", "commutant", "decompose"):
        c = al.add_parser(action, parents=[common])
        c.add_argument("--generators", required=True)
        c.set_defaults(func=cmd_algebra)

    ks = sub.add_parser("ks", help="Kochen-Specker configuration").add_subparsers(dest="action", parser_class=_Parser)
    c = ks.add_parser("verify", parents=[common])
    c.set_defaults(func=cmd_ks)
    return p


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            raise UsageError(parser.format_help())
        if args.tol is None:
            args.tol = _default_tol()
        if args.tol <= 0:
            raise UsageError("--tol must be positive")
        out = Output(args.format)
        args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip() + "\n")
        return EX_USAGE
    except ValidationError as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), default=_json_default) + "\n")
        return 2
    except (NumericalError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    out.flush(args.out)
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
