"""Command-line front end.

Commands:
    list                       enumerate catalog entries
    reduce <id>                print the reduction data and matched target
    verify <id> | --all        run the verification pipeline, write reports
    sample <id> --out FILE     write plot-ready (tau, P, Q) samples as CSV

Exit codes: 0 success / all verifications passed, 1 verification failure,
2 operational error (unknown entry, bad arguments, I/O failure).

Output is byte-identical across runs for a fixed seed.  Complex numbers
serialize as {"re": ..., "im": ...}; expression strings use the engine's
infix grammar.  Coefficient samples are reported in the documented tau
frame of each entry, so the CSV rows satisfy the entry's closed-form
target equation directly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path as FsPath

import numpy as np

from . import catalog as cat
from . import expr as fe
from . import verify as ver
from .config import Config

__all__ = ["Config", "main", "console_entry"]


def _parse_param(text: str) -> tuple[str, Fraction]:
    if "=" not in text:
        raise ValueError(f"--param expects name=value, got {text!r}")
    name, _, raw = text.partition("=")
    name = name.strip()
    raw = raw.strip()
    try:
        value = Fraction(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(
            f"parameter {name!r} must be an exact rational, got {raw!r}") from exc
    return name, value


def _parse_basepoint(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"--basepoint expects re or re,im, got {text!r}")


def _parse_box(text: str) -> tuple[float, float, float, float]:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"box override expects re_lo,re_hi,im_lo,im_hi, got {text!r}")
    return tuple(parts)


def _config_from_args(args) -> Config:
    kw = {}
    if args.seed is not None:
        kw["seed"] = args.seed
    for name in ("frobenius", "flow", "independence", "match", "crossval"):
        val = getattr(args, f"tol_{name}", None)
        if val is not None:
            kw[f"tol_{name}"] = val
    if getattr(args, "basepoint", None):
        kw["basepoint"] = _parse_basepoint(args.basepoint)
    if getattr(args, "box_x", None):
        kw["box_x"] = _parse_box(args.box_x)
    if getattr(args, "box_t", None):
        kw["box_t"] = _parse_box(args.box_t)
    if getattr(args, "json", False):
        kw["output"] = "json"
    return Config(**kw)


def _overrides_from_args(args) -> dict | None:
    if not getattr(args, "param", None):
        return None
    return dict(_parse_param(p) for p in args.param)


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _atomic_write(path: FsPath, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _family_matches(entry_family: str, wanted: str) -> bool:
    return entry_family == wanted or entry_family.startswith(wanted)


def cmd_list(args, out) -> int:
    ids = cat.list_entries()
    neg = cat.list_negative_entries()
    if args.family:
        ids = [i for i in ids if _family_matches(cat.lookup(i).family, args.family)]
        neg = [i for i in neg if _family_matches(cat.lookup(i).family, args.family)]
    if args.json:
        docs = [cat.manifest(cat.lookup(i)) for i in (*ids, *neg)]
        out.write(_dump_json(docs))
        return 0
    for i in ids:
        e = cat.lookup(i)
        pars = ", ".join(f"{k}={v}" for k, v in sorted(e.params_exact.items()))
        out.write(f"{e.id:22s} family={e.family:10s} component={e.component:6s} "
                  f"target={e.expected_target.kind:10s} {pars}\n")
    for i in neg:
        e = cat.lookup(i)
        out.write(f"{e.id:22s} family={e.family:10s} NEGATIVE CONTROL "
                  f"({e.metadata.get('corrupted', 'corrupted entry')})\n")
    return 0


def cmd_reduce(args, out, err) -> int:
    config = _config_from_args(args)
    overrides = _overrides_from_args(args)
    try:
        entry = cat.lookup(args.entry, overrides)
        prep = ver.prepare(entry, config)
        dev, samples = ver.check_t_independence(
            prep, n_pairs=config.independence_pairs,
            tol=config.tol_independence, seed=config.entry_seed(entry.id))
        paper = [prep.to_paper_frame(*s) for s in samples]
        target, resid = ver.match_classical(paper, tol=config.tol_match)
    except cat.EntryNotFoundError as exc:
        err.write(f"error: {exc}\n")
        return 2
    except Exception as exc:  # noqa: BLE001
        err.write(f"error: reduction failed for {args.entry}: {exc}\n")
        return 2

    red_cf = entry.reduction_closed_forms
    doc = {
        "schema": "fuchs-reduce/1",
        "entry": entry.id,
        "f": fe.to_string(red_cf["f"]),
        "h": fe.to_string(red_cf["h"]),
        "R": fe.to_string(red_cf["R"]),
        "M": fe.to_string(red_cf["M"]),
        "case": prep.red.case_tag,
        "tau": fe.to_string(red_cf["tau"]),
        "gauge": fe.to_string(red_cf["gauge"]),
        "target": _target_doc(entry, target),
        "t_independence_max": dev,
        "match_residual": resid,
    }
    if prep.dec.exponent_A is not None:
        doc["exponent_a"] = {"re": prep.dec.exponent_A.real,
                             "im": prep.dec.exponent_A.imag}
    out.write(_dump_json(doc))
    return 0


def _target_doc(entry: cat.CatalogEntry, matched) -> dict:
    doc = matched.to_json()
    if matched.kind == "airy" and entry.documented_target_scale:
        doc["scale"] = entry.documented_target_scale
    return doc


def cmd_verify(args, out, err) -> int:
    config = _config_from_args(args)
    overrides = _overrides_from_args(args)
    if args.all:
        ids = [*cat.list_entries(), *cat.list_negative_entries()] if args.with_negative \
            else cat.list_entries()
    elif args.entry:
        ids = [args.entry]
    else:
        err.write("error: give an entry id or --all\n")
        return 2

    outdir = FsPath(args.out_dir) if args.out_dir else None
    all_ok = True
    reports = []
    try:
        for entry_id in ids:
            if entry_id not in (*cat.list_entries(), *cat.list_negative_entries()):
                raise cat.EntryNotFoundError(f"no catalog entry named {entry_id!r}")
            rep = ver.full_report(entry_id, config, overrides)
            reports.append(rep)
            expected_fail = args.all and rep.entry_id.startswith("negative.")
            # Under --all the negative controls must fail; anywhere else a
            # failing report is a failure.
            if rep.passed == expected_fail:
                all_ok = False
            if outdir is not None:
                _atomic_write(outdir / f"{rep.entry_id}.json",
                              _dump_json(rep.to_json()))
    except cat.EntryNotFoundError as exc:
        err.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return 2

    reports.sort(key=lambda r: r.entry_id)
    if config.output == "json":
        out.write(_dump_json([r.to_json() for r in reports]))
    else:
        for rep in reports:
            sub = []
            if rep.frobenius_max is not None:
                sub.append(f"frobenius={rep.frobenius_max:.3e}")
            if rep.flow_max is not None:
                sub.append(f"flow={rep.flow_max:.3e}")
            if rep.t_independence_max is not None:
                sub.append(f"t-indep={rep.t_independence_max:.3e}")
            if rep.match is not None:
                sub.append(f"match={rep.match.kind}")
            if rep.cross_validation_residual is not None:
                sub.append(f"crossval={rep.cross_validation_residual:.3e}")
            status = "PASS" if rep.passed else "FAIL"
            out.write(f"{status} {rep.entry_id:22s} " + " ".join(sub) + "\n")
            for e in rep.errors:
                out.write(f"     {rep.entry_id}: {e}\n")
    return 0 if all_ok else 1


def cmd_sample(args, out, err) -> int:
    config = _config_from_args(args)
    overrides = _overrides_from_args(args)
    n = args.count if args.count is not None else config.sample_count
    if n < 0:
        err.write("error: --count must be nonnegative\n")
        return 2
    try:
        entry = cat.lookup(args.entry, overrides)
        prep = ver.prepare(entry, config)
    except cat.EntryNotFoundError as exc:
        err.write(f"error: {exc}\n")
        return 2
    except Exception as exc:  # noqa: BLE001
        err.write(f"error: decomposition failed for {args.entry}: {exc}\n")
        return 2

    rng = np.random.default_rng(config.entry_seed(entry.id))
    rows = []
    attempts = 0
    while len(rows) < n and attempts < 200 * max(n, 1):
        attempts += 1
        x = entry.box_x.random(rng)
        t = entry.box_t.random(rng)
        try:
            tau = prep.red.tau_at(x, t)
            P, Q = prep.red.coefficients_at(x, t)
        except Exception:  # noqa: BLE001 - skip degenerate draws
            continue
        tau, P, Q = prep.to_paper_frame(tau, P, Q)
        rows.append((tau, P, Q, x, t))
    if len(rows) < n:
        err.write(f"error: could not collect {n} samples for {entry.id}\n")
        return 2

    lines = ["tau_re,tau_im,P_re,P_im,Q_re,Q_im,x_re,x_im,t_re,t_im"]
    for tau, P, Q, x, t in rows:
        vals = (tau.real, tau.imag, P.real, P.imag, Q.real, Q.imag,
                x.real, x.imag, t.real, t.imag)
        lines.append(",".join(repr(v) for v in vals))
    text = "\n".join(lines) + "\n"
    try:
        if args.out:
            _atomic_write(FsPath(args.out), text)
        else:
            out.write(text)
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return 2
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fuchs-reduce",
        description="Scalarize integrable 2x2 linear systems, reduce them to "
                    "deformation-free form, and certify the reduction numerically.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p, with_params=True):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--json", action="store_true",
                       help="machine-readable output")
        p.add_argument("--tol-frobenius", type=float, default=None)
        p.add_argument("--tol-flow", type=float, default=None)
        p.add_argument("--tol-independence", type=float, default=None)
        p.add_argument("--tol-match", type=float, default=None)
        p.add_argument("--tol-crossval", type=float, default=None)
        p.add_argument("--basepoint", type=str, default=None,
                       help="override the reduction basepoint, re[,im]")
        p.add_argument("--box-x", type=str, default=None, metavar="RE0,RE1,IM0,IM1",
                       help="override the spectral probe box")
        p.add_argument("--box-t", type=str, default=None, metavar="RE0,RE1,IM0,IM1",
                       help="override the deformation probe box")
        if with_params:
            p.add_argument("--param", action="append", default=None,
                           metavar="NAME=RATIONAL",
                           help="override an entry parameter (exact rational)")

    p_list = sub.add_parser("list", help="enumerate catalog entries")
    p_list.add_argument("--family", type=str, default=None,
                        help="filter by family prefix (e.g. PV)")
    p_list.add_argument("--json", action="store_true")

    p_red = sub.add_parser("reduce", help="print the reduction data for an entry")
    p_red.add_argument("entry")
    add_common(p_red)

    p_ver = sub.add_parser("verify", help="run the verification pipeline")
    p_ver.add_argument("entry", nargs="?")
    p_ver.add_argument("--all", action="store_true",
                       help="verify every positive entry")
    p_ver.add_argument("--with-negative", action="store_true",
                       help="with --all, also run the negative controls")
    p_ver.add_argument("--out-dir", type=str, default=None,
                       help="write one JSON report per entry")
    add_common(p_ver)

    p_s = sub.add_parser("sample", help="write (tau, P, Q) samples as CSV")
    p_s.add_argument("entry")
    p_s.add_argument("--out", type=str, default=None)
    p_s.add_argument("--count", type=int, default=None)
    add_common(p_s)
    return ap


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command == "list":
            return cmd_list(args, out)
        if args.command == "reduce":
            return cmd_reduce(args, out, err)
        if args.command == "verify":
            return cmd_verify(args, out, err)
        if args.command == "sample":
            return cmd_sample(args, out, err)
        err.write(f"error: unknown command {args.command!r}\n")
        return 2
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return 2


def console_entry() -> None:
    raise SystemExit(main())
