"""Command-line front end.

Subcommands: spectrum, bound, psi, ensemble (concentration | discontinuity),
netbound (ic | mac), selftest. Results are emitted as JSON on stdout or to
--out. Randomized commands require an explicit --seed and are bit-stable
across --threads settings; the embedded manifest records everything that
determines the result (committed inputs, parameters, seed, tool version,
and a digest of the result payload). Wall-clock time goes to stderr so that
reruns stay byte-identical.

Exit codes: 0 success, 2 invalid input, 3 infeasible size.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .correlation import disagreement_bounds, exact_agreement, maximal_correlation
from .decomposition import spectrum, spectrum_fast_binary
from .ensemble import (
    EnsembleConfig,
    bsc_channel,
    concentration_experiment,
    discontinuity_experiment,
)
from .model import (
    BooleanFunction,
    DomainError,
    Marginal,
    PairSource,
    SizeLimitError,
    load_json_file,
    product_weights,
)
from .netbounds import ic_hz_bound, mac_hx_bound

CSV_NOTE = (
    "CSV side files: 'ensemble concentration --csv' writes one row per (n, sample) with "
    "columns n,sample,low_weight_mass,dictator_mass,total_mass,fallback_count; "
    "'ensemble discontinuity --csv' writes one row per (eps, sample) with columns "
    "eps,sample,estimate,half_width,bound_dictator,bound_full,total_p,total_q,"
    "dictator_p,dictator_q,fallback_first,fallback_second."
)


def _assert_finite(obj, path="result"):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _assert_finite(v, f"{path}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _assert_finite(v, f"{path}[{i}]")
    elif isinstance(obj, float) and not math.isfinite(obj):
        raise ArithmeticError(f"non-finite value at {path}")


def _digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("ascii")
    return hashlib.sha256(blob).hexdigest()


def _file_digest(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _emit(result: dict, command: list, config: dict, seed, out_path):
    _assert_finite(result)
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "tool_version": __version__,
        "result_digest": _digest(result),
    }
    payload = dict(result)
    payload["manifest"] = manifest
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_function(path) -> BooleanFunction:
    return BooleanFunction.from_json(load_json_file(path))


def _load_pair(path) -> PairSource:
    return PairSource.from_json(load_json_file(path))


def _marginal_from_args(args) -> Marginal:
    if args.bias is not None:
        return Marginal.bernoulli(args.bias)
    return Marginal.from_json(load_json_file(args.marginal))


def _mask_hex(i: int) -> str:
    return format(i, "#x")


def _cmd_spectrum(args) -> int:
    fn = _load_function(args.fn)
    source = _marginal_from_args(args)
    if args.fast:
        if source.d != 2:
            raise DomainError("--fast requires a binary marginal")
        sp = spectrum_fast_binary(fn, float(source.probs[1]))
    else:
        sp = spectrum(fn, source)
    result = {
        "total": float(sp.total),
        "k_profile": [float(v) for v in sp.weight_profile()],
    }
    if not args.profile:
        result["spectrum"] = {
            _mask_hex(i): float(v) for i, v in enumerate(sp.by_mask) if v != 0.0
        }
    config = {
        "fn": _file_digest(args.fn),
        "bias": args.bias,
        "marginal": _file_digest(args.marginal) if args.marginal else None,
        "fast": bool(args.fast),
        "profile": bool(args.profile),
    }
    _emit(result, ["spectrum"], config, None, args.out)
    return 0


def _cmd_bound(args) -> int:
    e = _load_function(args.fn_a)
    f = _load_function(args.fn_b)
    source = _load_pair(args.joint)
    report = disagreement_bounds(e, f, source, exact=True if args.exact else None)
    terms = {}
    for i in range(report.coefficients.size):
        p_i = float(report.spectrum_p.by_mask[i])
        q_i = float(report.spectrum_q.by_mask[i])
        if p_i != 0.0 or q_i != 0.0:
            terms[_mask_hex(i)] = [float(report.coefficients[i]), p_i, q_i]
    result = {
        "lower": report.lower,
        "upper": report.upper,
        "lower_simplified": report.lower_simplified,
        "raw_lower": report.raw_lower,
        "raw_upper": report.raw_upper,
        "exact_sigma": report.exact_sigma,
        "psi": report.psi.value,
        "psi_method": report.psi.method,
        "total_p": report.total_p,
        "total_q": report.total_q,
        "degenerate": report.degenerate,
        "terms": terms,
        "notes": list(report.notes),
    }
    config = {
        "fnA": _file_digest(args.fn_a),
        "fnB": _file_digest(args.fn_b),
        "joint": _file_digest(args.joint),
        "exact": bool(args.exact),
    }
    _emit(result, ["bound"], config, None, args.out)
    return 0


def _cmd_psi(args) -> int:
    mc = maximal_correlation(_load_pair(args.joint))
    result = {"psi": mc.value, "method": mc.method}
    _emit(result, ["psi"], {"joint": _file_digest(args.joint)}, None, args.out)
    return 0


def _ensemble_config(args, n: int) -> EnsembleConfig:
    return EnsembleConfig(
        n=n,
        rate=args.rate,
        source_bias=args.bias,
        channel=bsc_channel(args.flip),
        eps_typ=args.eps_typ,
        seed=args.seed,
    )


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _cmd_concentration(args) -> int:
    ns = [int(v) for v in args.n.split(",") if v]
    per_n = []
    csv_rows = []
    for n in ns:
        res = concentration_experiment(
            _ensemble_config(args, n),
            m=args.m,
            samples=args.samples,
            k=args.k,
            threads=args.threads,
        )
        per_n.append(
            {
                "n": n,
                "mean": res.mean,
                "std_err": res.std_err,
                "quantiles": {str(k): v for k, v in res.quantiles().items()},
                "mean_dictator_mass": float(res.dictator_mass.mean()),
                "mean_total_mass": float(res.total_mass.mean()),
                "mean_fallback": float(res.fallback_counts.mean()),
            }
        )
        for i in range(res.samples):
            csv_rows.append(
                [
                    n,
                    i,
                    repr(float(res.low_weight_mass[i])),
                    repr(float(res.dictator_mass[i])),
                    repr(float(res.total_mass[i])),
                    int(res.fallback_counts[i]),
                ]
            )
    if args.csv:
        _write_csv(
            args.csv,
            ["n", "sample", "low_weight_mass", "dictator_mass", "total_mass", "fallback_count"],
            csv_rows,
        )
    result = {"experiment": "concentration", "m": args.m, "samples": args.samples, "per_n": per_n}
    config = {
        "n": ns,
        "rate": args.rate,
        "m": args.m,
        "samples": args.samples,
        "k": args.k,
        "bias": args.bias,
        "flip": args.flip,
        "eps_typ": args.eps_typ,
    }
    _emit(result, ["ensemble", "concentration"], config, args.seed, args.out)
    return 0


def _cmd_discontinuity(args) -> int:
    eps_grid = [float(v) for v in args.eps.split(",") if v]
    report = discontinuity_experiment(
        _ensemble_config(args, int(args.n)),
        eps_grid,
        mode=args.mode,
        samples=args.samples,
        draws=args.draws,
        k=args.k,
        threads=args.threads,
    )
    records = [
        {
            "eps": r.eps,
            "sample": r.sample_index,
            "estimate": r.estimate,
            "half_width": r.half_width,
            "bound_dictator": r.bound_dictator,
            "bound_full": r.bound_full,
            "total_p": r.total_p,
            "total_q": r.total_q,
            "dictator_p": r.dictator_p,
            "dictator_q": r.dictator_q,
            "fallback_first": r.fallback_first,
            "fallback_second": r.fallback_second,
        }
        for r in report.records
    ]
    if args.csv:
        _write_csv(
            args.csv,
            [
                "eps",
                "sample",
                "estimate",
                "half_width",
                "bound_dictator",
                "bound_full",
                "total_p",
                "total_q",
                "dictator_p",
                "dictator_q",
                "fallback_first",
                "fallback_second",
            ],
            [
                [
                    repr(r.eps),
                    r.sample_index,
                    repr(r.estimate),
                    repr(r.half_width),
                    repr(r.bound_dictator),
                    repr(r.bound_full),
                    repr(r.total_p),
                    repr(r.total_q),
                    repr(r.dictator_p),
                    repr(r.dictator_q),
                    r.fallback_first,
                    r.fallback_second,
                ]
                for r in report.records
            ],
        )
    result = {
        "experiment": "discontinuity",
        "mode": report.mode,
        "draws": report.draws,
        "samples": report.samples,
        "per_eps": report.per_eps(),
        "records": records,
    }
    config = {
        "n": int(args.n),
        "rate": args.rate,
        "eps": eps_grid,
        "mode": args.mode,
        "samples": args.samples,
        "draws": args.draws,
        "k": args.k,
        "bias": args.bias,
        "flip": args.flip,
        "eps_typ": args.eps_typ,
    }
    _emit(result, ["ensemble", "discontinuity"], config, args.seed, args.out)
    return 0


def _cmd_netbound(args) -> int:
    if args.setting == "ic":
        value = ic_hz_bound(args.agreement, args.q)
        config = {"setting": "ic", "agreement": args.agreement, "q": args.q}
    else:
        value = mac_hx_bound(args.agreement, args.q, args.delta)
        config = {"setting": "mac", "agreement": args.agreement, "q": args.q, "delta": args.delta}
    _emit({"bound_bits": float(value)}, ["netbound", args.setting], config, None, args.out)
    return 0


def _selftest_checks():
    from .decomposition import real_transform

    tol = 1e-12
    uniform2 = Marginal.uniform(2)

    and2 = BooleanFunction(2, 2, np.array([0, 0, 0, 1]))
    sp = spectrum(and2, uniform2)
    assert abs(sp.total - 3.0 / 16.0) < tol
    for mask in (1, 2, 3):
        assert abs(sp.mass(mask) - 1.0 / 16.0) < tol
    yield "two-input conjunction spectrum"

    xor = BooleanFunction.parity(2)
    spx = spectrum(xor, uniform2)
    assert abs(spx.mass(3) - 0.25) < tol and spx.mass(1) < tol and spx.mass(2) < tol
    fast = spectrum_fast_binary(xor, 0.5)
    assert np.allclose(fast.by_mask, spx.by_mask, atol=1e-12)
    yield "two-input parity spectrum, both routes"

    rt = real_transform(xor, uniform2)
    assert abs(float(rt.values @ product_weights(uniform2, 2))) < tol
    yield "real transform centering"

    pair = PairSource.dsbs(0.1, 2)
    mc = maximal_correlation(pair)
    assert abs(mc.value - 0.8) < tol
    yield "maximal correlation of the symmetric binary pair"

    dic = BooleanFunction.dictator(2, 2, 0)
    rep = disagreement_bounds(dic, dic, pair)
    sig = exact_agreement(dic, dic, pair).sigma
    assert abs(rep.lower - 0.1) < 1e-9 and abs(sig - 0.1) < tol
    repx = disagreement_bounds(xor, xor, pair)
    sigx = exact_agreement(xor, xor, pair).sigma
    assert abs(repx.lower - 0.18) < 1e-9 and abs(sigx - 0.18) < tol
    yield "tight sandwich cases"

    rng = np.random.default_rng(20240811)
    for _ in range(64):
        ta = rng.integers(0, 2, size=4)
        tb = rng.integers(0, 2, size=4)
        e = BooleanFunction(2, 2, ta)
        f = BooleanFunction(2, 2, tb)
        r = disagreement_bounds(e, f, pair)
        s = exact_agreement(e, f, pair).sigma
        assert r.lower - 1e-9 <= s <= r.upper + 1e-9
    yield "sandwich on random two-letter pairs"

    assert abs(ic_hz_bound(1.0, 16) - 5.0) < tol
    assert abs(mac_hx_bound(0.0, 4, 0.1) - 1.0) < tol
    yield "network entropy bounds"


def _cmd_selftest(args) -> int:
    for label in _selftest_checks():
        sys.stderr.write(f"selftest: {label}: ok\n")
    _emit({"selftest": "pass"}, ["selftest"], {}, None, args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depspec",
        description="Dependency spectra, agreement bounds, and codebook experiments.",
        epilog=CSV_NOTE,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_spec = sub.add_parser("spectrum", help="dependency spectrum of a Boolean function")
    p_spec.add_argument("--fn", required=True, help='function JSON {"n","d","table"}')
    group = p_spec.add_mutually_exclusive_group(required=True)
    group.add_argument("--bias", type=float, help="binary marginal with P(X=1)=q")
    group.add_argument("--marginal", help='marginal JSON {"probs": [...]}')
    p_spec.add_argument("--fast", action="store_true", help="binary butterfly route")
    p_spec.add_argument(
        "--profile", action="store_true", help="emit only the total and per-weight profile"
    )
    p_spec.add_argument("--out")
    p_spec.set_defaults(run=_cmd_spectrum)

    p_bound = sub.add_parser("bound", help="disagreement sandwich for a function pair")
    p_bound.add_argument("--fnA", dest="fn_a", required=True)
    p_bound.add_argument("--fnB", dest="fn_b", required=True)
    p_bound.add_argument("--joint", required=True, help='pair JSON {"joint","n"}')
    p_bound.add_argument(
        "--exact", action="store_true", help="force exhaustive sigma (error if infeasible)"
    )
    p_bound.add_argument("--out")
    p_bound.set_defaults(run=_cmd_bound)

    p_psi = sub.add_parser("psi", help="maximal correlation of a letter pair")
    p_psi.add_argument("--joint", required=True)
    p_psi.add_argument("--out")
    p_psi.set_defaults(run=_cmd_psi)

    p_ens = sub.add_parser("ensemble", help="random-codebook experiments")
    ens_sub = p_ens.add_subparsers(dest="experiment", required=True)

    def _common_ensemble(p):
        p.add_argument("--rate", type=float, default=0.6)
        p.add_argument("--samples", type=int, default=50)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--bias", type=float, default=0.5, help="source P(X=1)")
        p.add_argument("--flip", type=float, default=0.1, help="test channel crossover")
        p.add_argument("--eps-typ", dest="eps_typ", type=float, default=None)
        p.add_argument("--k", type=int, default=0, help="output bit index")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--csv", help="per-sample rows (see bottom of --help)")
        p.add_argument("--out")

    p_conc = ens_sub.add_parser("concentration", help="low-weight mass across samples")
    p_conc.add_argument("--n", required=True, help="comma-separated blocklengths")
    p_conc.add_argument("--m", type=int, default=2, help="weight cutoff")
    _common_ensemble(p_conc)
    p_conc.set_defaults(run=_cmd_concentration)

    p_disc = ens_sub.add_parser("discontinuity", help="disagreement vs coupling sweep")
    p_disc.add_argument("--n", required=True, type=int)
    p_disc.add_argument("--eps", required=True, help="comma-separated couplings")
    p_disc.add_argument("--mode", choices=["shared", "independent"], default="shared")
    p_disc.add_argument("--draws", type=int, default=100_000)
    _common_ensemble(p_disc)
    p_disc.set_defaults(run=_cmd_discontinuity)

    p_net = sub.add_parser("netbound", help="closed-form network entropy bounds")
    net_sub = p_net.add_subparsers(dest="setting", required=True)
    p_ic = net_sub.add_parser("ic")
    p_ic.add_argument("--agreement", type=float, required=True)
    p_ic.add_argument("--q", type=int, required=True)
    p_ic.add_argument("--out")
    p_ic.set_defaults(run=_cmd_netbound)
    p_mac = net_sub.add_parser("mac")
    p_mac.add_argument("--agreement", type=float, required=True)
    p_mac.add_argument("--q", type=int, required=True)
    p_mac.add_argument("--delta", type=float, required=True)
    p_mac.add_argument("--out")
    p_mac.set_defaults(run=_cmd_netbound)

    p_self = sub.add_parser("selftest", help="run the built-in quick checks")
    p_self.add_argument("--out")
    p_self.set_defaults(run=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        code = args.run(args)
    except DomainError as exc:
        sys.stderr.write(f"depspec: error: {exc}\n")
        return 2
    except SizeLimitError as exc:
        sys.stderr.write(f"depspec: infeasible: {exc}\n")
        return 3
    sys.stderr.write(f"depspec: {args.command} finished in {time.perf_counter() - start:.3f}s\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
