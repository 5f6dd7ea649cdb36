"""Command line front end: ``spectra coeffs | spectrum | verify | recover | check-wronskian``.

Every subcommand takes either flags or ``--config FILE`` (YAML or JSON with
complex numbers as [re, im] pairs); flags override the file.  Exit codes:
0 ok, 2 configuration, 3 math domain, 4 convergence, 5 hypothesis.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import replace

import jsonschema
import numpy as np
import yaml

from .errors import ConfigError, ConvergenceFailure, SpectraError
from .expansion import coefficient_table, c_coeffs, d_coeffs, eta, expansion_model
from .model import PotentialSpec, omega_power
from .sibuya import DEFAULT_CONFIG, wronskian, wronskian_asymptotic_check
from .spectrum import EigenvalueRecord, certify_completeness, find_eigenvalues, verify_expansion

log = logging.getLogger("ptspectra")

_NUM = {"type": "number"}
_COMPLEX = {"oneOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}]}
_POS = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "m": {"type": "integer", "minimum": 3},
        "ell": {"type": "integer", "minimum": 1},
        "a": {"type": "array", "items": _COMPLEX},
        "n_range": {"type": "array", "items": {"type": "integer", "minimum": 0},
                    "minItems": 2, "maxItems": 2},
        "tolerances": {
            "type": "object", "additionalProperties": False,
            "properties": {"root_tol": _POS, "oracle_tol": _POS,
                           "fit_n_min": {"type": "integer", "minimum": 0}},
        },
        "integrator": {
            "type": "object", "additionalProperties": False,
            "properties": {"init_tol": _POS, "start_radius_override": _POS},
        },
        "output": {
            "type": "object", "additionalProperties": False,
            "properties": {"format": {"enum": ["csv", "json"]}, "path": {"type": "string"}},
        },
    },
    "required": ["m", "ell"],
}

DEFAULTS = {
    "tolerances": {"root_tol": 1e-10, "oracle_tol": 1e-6, "fit_n_min": 10},
    "integrator": {},
    "output": {"format": "csv"},
}


# -- configuration ------------------------------------------------------------

def _parse_complex_list(text: str):
    try:
        return [complex(t.strip().replace("i", "j")) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse coefficient list {text!r}") from exc


def _parse_range(text: str):
    for sep in ("..", ":", ","):
        if sep in text:
            lo, hi = text.split(sep, 1)
            try:
                return [int(lo), int(hi)]
            except ValueError:
                break
    raise ConfigError(f"cannot parse index range {text!r}; use LO..HI")


def _load_file(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text) if path.endswith(".json") else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    return data


def build_config(args) -> dict:
    """Merge file, flags and defaults; validate; return the config dict."""
    cfg = _load_file(args.config) if getattr(args, "config", None) else {}
    if getattr(args, "m", None) is not None:
        cfg["m"] = args.m
    if getattr(args, "ell", None) is not None:
        cfg["ell"] = args.ell
    if getattr(args, "a", None) is not None:
        cfg["a"] = [[z.real, z.imag] for z in _parse_complex_list(args.a)]
    if getattr(args, "n", None) is not None:
        cfg["n_range"] = _parse_range(args.n)
    out = dict(cfg.get("output", {}))
    if getattr(args, "format", None):
        out["format"] = args.format
    if getattr(args, "output", None):
        out["path"] = args.output
    if out:
        cfg["output"] = out
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    for key, val in DEFAULTS.items():
        merged = dict(val)
        merged.update(cfg.get(key, {}))
        cfg[key] = merged
    if "n_range" in cfg and cfg["n_range"][0] > cfg["n_range"][1]:
        raise ConfigError(f"empty index range {cfg['n_range']}")
    return cfg


def _spec(cfg) -> PotentialSpec:
    m = cfg["m"]
    raw = cfg.get("a", [0] * m)
    a = tuple(complex(x[0], x[1]) if isinstance(x, list) else complex(x) for x in raw)
    return PotentialSpec(m, cfg["ell"], a)


def _integrator(cfg):
    ic = cfg["integrator"]
    out = DEFAULT_CONFIG
    if "init_tol" in ic:
        out = replace(out, init_tol=ic["init_tol"])
    if "start_radius_override" in ic:
        out = replace(out, start_radius=ic["start_radius_override"])
    return out


def _n_range(cfg):
    if "n_range" not in cfg:
        raise ConfigError("n_range is required for this command")
    return cfg["n_range"]


# -- output -------------------------------------------------------------------

class _Sink:
    """Row writer for CSV (streamed) or JSON (written on close)."""

    def __init__(self, cfg, columns, extra=None):
        self.fmt = cfg["output"]["format"]
        path = cfg["output"].get("path")
        self.fh = open(path, "w", newline="") if path else sys.stdout
        self.columns = list(columns)
        self.rows = []
        self.extra = extra if extra is not None else {}
        if self.fmt == "csv":
            self.writer = csv.DictWriter(self.fh, fieldnames=self.columns, extrasaction="ignore")
            self.writer.writeheader()

    def write(self, row: dict):
        if self.fmt == "csv":
            self.writer.writerow(row)
            self.fh.flush()
        else:
            self.rows.append(row)

    def close(self):
        if self.fmt == "json":
            body = {"rows": self.rows, **self.extra} if self.extra else self.rows
            json.dump(body, self.fh, indent=1)
            self.fh.write("\n")
        self.fh.flush()
        if self.fh is not sys.stdout:
            self.fh.close()


def read_records(path: str):
    """Eigenvalue records from a CSV or JSON file written by ``spectrum``."""
    try:
        with open(path, newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read eigenvalue file {path}: {exc}") from exc
    if text.lstrip().startswith(("[", "{")):
        rows = json.loads(text)
        rows = rows["rows"] if isinstance(rows, dict) else rows
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
    try:
        return [EigenvalueRecord(int(r["n"]), complex(float(r["re_lambda"]), float(r["im_lambda"])),
                                 float(r.get("residual", 0.0) or 0.0), str(r.get("provenance", "file")))
                for r in rows]
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed eigenvalue file {path}: {exc}") from exc


def _record_row(r: EigenvalueRecord) -> dict:
    return {"n": r.n, "re_lambda": r.lam.real, "im_lambda": r.lam.imag,
            "residual": r.residual, "provenance": r.provenance}


# -- subcommands --------------------------------------------------------------

def cmd_coeffs(cfg) -> int:
    spec = _spec(cfg)
    m = spec.m
    table = coefficient_table(spec)
    c = c_coeffs(spec, table)
    model = expansion_model(spec)
    d = d_coeffs(model)
    sink = _Sink(cfg, ["kind", "j", "k", "re", "im", "note"])
    for j in range(m + 2):
        for k in range(j + 1):
            v = complex(table.b[j, k])
            sink.write({"kind": "b", "j": j, "k": k, "re": v.real, "im": v.imag, "note": ""})
    for j in range(m + 2):
        for k in range(j + 1):
            sink.write({"kind": "K", "j": j, "k": k, "re": float(table.K[j, k]), "im": 0.0, "note": ""})
    for j in range(m + 2):
        note = ""
        if m % 2 == 0 and j == m // 2 + 1:
            note = "identically zero; eta used instead"
        elif j in (1, m + 1):
            note = "identically zero"
        sink.write({"kind": "c", "j": j, "k": "", "re": c[j].real, "im": c[j].imag, "note": note})
    e = eta(spec, table)
    sink.write({"kind": "eta", "j": m // 2 + 1 if m % 2 == 0 else "", "k": "",
                "re": e.real, "im": e.imag, "note": "constant term"})
    for j, v in enumerate(d):
        v = complex(v)
        sink.write({"kind": "d", "j": j, "k": "", "re": v.real, "im": v.imag, "note": ""})
    sink.close()
    return 0


def _chunks(lo, hi, size=10):
    start = lo
    while start <= hi:
        yield start, min(hi, start + size - 1)
        start += size


def cmd_spectrum(cfg, jobs=1, certify=False, oracle=False) -> int:
    spec = _spec(cfg)
    lo, hi = _n_range(cfg)
    tol = cfg["tolerances"]["root_tol"]
    icfg = _integrator(cfg)
    cols = ["n", "re_lambda", "im_lambda", "residual", "provenance"]
    if oracle:
        cols += ["re_oracle", "im_oracle", "oracle_gap"]
    orc = {}
    if oracle:
        from .oracle import collocation_spectrum, default_grid  # noqa: PLC0415
        count = hi + 1
        grid = default_grid(spec, count, N=max(800, 20 * count))
        orc = {r.n: r for r in collocation_spectrum(spec, count, grid,
                                                     rel_tol=cfg["tolerances"]["oracle_tol"])}
    sink = _Sink(cfg, cols)
    model = expansion_model(spec)
    records = []
    status = 0
    try:
        for a, b in _chunks(lo, hi):
            for r in find_eigenvalues(spec, a, b, icfg, tol=tol, jobs=jobs, model=model):
                row = _record_row(r)
                if oracle:
                    o = orc[r.n].lam
                    row.update(re_oracle=o.real, im_oracle=o.imag, oracle_gap=abs(o - r.lam))
                sink.write(row)
                records.append(r)
    except ConvergenceFailure as exc:
        log.error("%s", exc)
        status = exc.exit_code
    finally:
        sink.close()
    if certify and status == 0:
        from .expansion import estimate_eigenvalue  # noqa: PLC0415
        r_out = 0.5 * (abs(records[-1].lam) + abs(estimate_eigenvalue(model, hi + 1)))
        r_in = 0.0 if lo == 0 else 0.5 * (abs(records[0].lam) + abs(estimate_eigenvalue(model, lo - 1)))
        count = certify_completeness(spec, records, (r_in, r_out), icfg)
        print(f"annulus [{r_in:.6g}, {r_out:.6g}]: zeros {count}, records {len(records)}",
              file=sys.stderr)
        if count != len(records):
            return 4
    return status


def cmd_verify(cfg, jobs=1) -> int:
    spec = _spec(cfg)
    lo, hi = _n_range(cfg)
    model = expansion_model(spec)
    records = find_eigenvalues(spec, lo, hi, _integrator(cfg), tol=cfg["tolerances"]["root_tol"],
                               jobs=jobs, model=model)
    window = (max(lo, cfg["tolerances"]["fit_n_min"]), hi)
    table = verify_expansion(records, model, window)
    rho = 0.5 + 1.0 / spec.m
    sink = _Sink(cfg, ["n", "re_lambda", "im_lambda", "re_residual", "im_residual", "abs_residual"],
                 extra={"slope": table.slope, "expected_slope": -rho, "window": list(window)})
    for n, lam, res in zip(table.n, table.lam, table.residual):
        sink.write({"n": int(n), "re_lambda": lam.real, "im_lambda": lam.imag,
                    "re_residual": res.real, "im_residual": res.imag, "abs_residual": abs(res)})
    sink.close()
    print(f"fitted slope {table.slope:.4f} over n in {list(window)}; expected {-rho:.4f}",
          file=sys.stderr)
    return 0


def cmd_recover(cfg, input_path) -> int:
    from .inverse import classify_pt, fit_expansion, recover_potential  # noqa: PLC0415
    m, ell = cfg["m"], cfg["ell"]
    PotentialSpec(m, ell)  # validates (m, ell)
    records = read_records(input_path)
    n_min = cfg["tolerances"]["fit_n_min"]
    fit = fit_expansion(records, m, ell, n_min)
    rec = recover_potential(fit)
    verdict = classify_pt(records, m, ell, n_min=n_min)
    sink = _Sink(cfg, ["j", "re_a", "im_a", "sigma", "verdict"], extra={"verdict": verdict.value})
    for j, (aj, s) in enumerate(zip(rec.a, rec.sigma), start=1):
        sink.write({"j": j, "re_a": aj.real, "im_a": aj.imag, "sigma": float(s),
                    "verdict": verdict.value})
    sink.close()
    print(f"verdict: {verdict.value}", file=sys.stderr)
    return 0


def cmd_check_wronskian(cfg, lams, rays) -> int:
    spec = _spec(cfg)
    icfg = _integrator(cfg)
    m = spec.m
    mu = coefficient_table(spec).mu
    expected = 2 * omega_power(m, mu)
    sink = _Sink(cfg, ["check", "re_lambda", "im_lambda", "value", "rel_error"])
    from .model import g_transform  # noqa: PLC0415
    g1 = spec.with_a(g_transform(spec, 1))
    for lam in lams:
        w01 = wronskian(0, 1, spec, lam, icfg).full()
        sink.write({"check": "W01", "re_lambda": lam.real, "im_lambda": lam.imag,
                    "value": abs(w01), "rel_error": abs(w01 - expected) / abs(expected)})
        lhs = wronskian(1, 3, spec, lam, icfg)
        rhs = wronskian(0, 2, g1, omega_power(m, 2) * lam, icfg)
        ratio = lhs.value / (omega_power(m, -1) * rhs.value) * math.exp(lhs.log_scale - rhs.log_scale)
        sink.write({"check": "shift", "re_lambda": lam.real, "im_lambda": lam.imag,
                    "value": abs(lhs.full()), "rel_error": abs(ratio - 1)})
    for ray in rays:
        mags = [50.0, 200.0, 800.0]
        for mag, ratio in wronskian_asymptotic_check(spec, mags, ray, icfg):
            lam = mag * complex(math.cos(ray), math.sin(ray))
            sink.write({"check": "asymptotic", "re_lambda": lam.real, "im_lambda": lam.imag,
                        "value": abs(ratio), "rel_error": abs(ratio - 1)})
    sink.close()
    return 0


# -- entry point --------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="YAML or JSON run configuration")
    p.add_argument("--m", type=int)
    p.add_argument("--ell", type=int)
    p.add_argument("--a", help="comma separated coefficients a_1..a_m, e.g. 0,1+0.5j,-0.3")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--output", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spectra", description="Spectra of polynomial oscillators on Stokes rays.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="expansion coefficients b, K, c, eta, d")
    _common(p)

    p = sub.add_parser("spectrum", help="eigenvalues from the spectral determinant")
    _common(p)
    p.add_argument("--n", help="index range LO..HI")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--certify", action="store_true", help="argument-principle count")
    p.add_argument("--oracle", action="store_true", help="append finite-difference values")

    p = sub.add_parser("verify", help="residuals of the large-n expansion")
    _common(p)
    p.add_argument("--n", help="index range LO..HI")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("recover", help="recover a from an eigenvalue file")
    _common(p)
    p.add_argument("--input", required=True, help="CSV/JSON written by `spectrum`")

    p = sub.add_parser("check-wronskian", help="Wronskian identities and asymptotics")
    _common(p)
    p.add_argument("--lam", action="append", default=None,
                   help="spectral parameter (repeatable), e.g. 2+1j")
    p.add_argument("--ray", action="append", type=float, default=None,
                   help="arg lambda for the large-|lambda| ratio (repeatable)")
    return ap


def _setup_logging():
    level = os.environ.get("SPECTRA_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        if args.command == "coeffs":
            return cmd_coeffs(cfg)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, jobs=args.jobs, certify=args.certify, oracle=args.oracle)
        if args.command == "verify":
            return cmd_verify(cfg, jobs=args.jobs)
        if args.command == "recover":
            return cmd_recover(cfg, args.input)
        if args.command == "check-wronskian":
            lams = [complex(x.replace("i", "j")) for x in (args.lam or ["1.5", "2+1j", "-0.5+3j"])]
            return cmd_check_wronskian(cfg, lams, args.ray or [])
    except SpectraError as exc:
        print(f"spectra: {type(exc).__name__}: {exc}", file=sys.stderr)
        return getattr(exc, "exit_code", 1)
    except ValueError as exc:
        print(f"spectra: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
