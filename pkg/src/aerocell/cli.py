"""Command-line front end.

All four commands run in-process by default and against a remote server
when --server is given; both paths produce identical documents, so output
formatting lives here and nowhere else.  Every random quantity derives
from --seed: same flags, same bytes out.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any

import httpx

from . import service
from .analysis import AnalysisError
from .app import _build_params, _build_tol
from .montecarlo import SimulationError
from .params import ConfigError, InvalidParams
from .quadrature import NonConvergence
from .schemas import (
    AnalyzeResponse,
    SimulateResponse,
    SweepResponse,
    ValidateResponse,
)

EXIT_OK = 0
EXIT_FAIL = 1       # validate found a disagreement
EXIT_CONFIG = 2     # bad config, flags, or request
EXIT_NUMERIC = 3    # quadrature did not converge

_USER_ERRORS = (ConfigError, InvalidParams, service.ServiceError,
                SimulationError, AnalysisError)


class _RemoteError(RuntimeError):
    def __init__(self, status: int, detail: str):
        super().__init__(detail)
        self.status = status


def _fmt(x) -> str:
    if x is None:
        return "n/a"
    if isinstance(x, float):
        return "%.12g" % x
    return str(x)


def _parse_values(text: str) -> list[float]:
    """Comma list ("60,80,100") or inclusive range ("60:300:20")."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("range values must look like start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"bad range {text!r}: need stop >= start, step > 0")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(n)]
    return [float(p) for p in text.split(",") if p.strip()]


def _parse_overrides(pairs: list[str]) -> dict[str, float]:
    out: dict[str, float] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set needs KEY=VALUE, got {pair!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise ConfigError(f"--set {key}: value must be a number, got {value!r}")
    return out


def _load_config_doc(args) -> dict[str, Any]:
    doc: dict[str, Any] = {}
    if args.config is not None:
        try:
            doc = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
    doc.update(_parse_overrides(args.overrides))
    return doc


def _make_client(server: str) -> httpx.Client:
    # seam for tests: patched to an in-process ASGI client
    return httpx.Client(base_url=server, timeout=3600.0)


def _post(args, path: str, body: dict[str, Any]) -> dict[str, Any]:
    body = {k: v for k, v in body.items() if v is not None}
    with _make_client(args.server) as client:
        resp = client.post(path, json=body)
    if resp.status_code >= 400:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise _RemoteError(resp.status_code, str(detail))
    return resp.json()


def _emit(args, text: str) -> None:
    if args.out is not None:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# --- renderers -------------------------------------------------------------

def _render_analyze(doc: dict[str, Any]) -> str:
    lines = []
    for key in ("a_g", "a_a", "a_los", "a_nlos", "s_backhaul",
                "p_cov_g", "p_cov_a", "p_cov"):
        err = doc["errors"].get({"a_a": "a_g", "a_nlos": "a_los"}.get(key, key))
        tail = f"  (err <= {_fmt(err)})" if err is not None else ""
        lines.append(f"{key:<12} {_fmt(doc[key])}{tail}")
    lines.append(f"{'beta':<12} {_fmt(doc['beta'])}")
    lines.append(f"{'tau_b':<12} {_fmt(doc['tau_b'])}")
    return "\n".join(lines) + "\n"


def _render_simulate(doc: dict[str, Any]) -> str:
    lines = [f"{'metric':<12} {'value':>14} {'95% +/-':>12} {'trials':>8}  note"]
    for key, m in doc["metrics"].items():
        note = m["note"] if m["flagged"] else ""
        lines.append(f"{key:<12} {_fmt(m['value']):>14} "
                     f"{_fmt(m['half_width']):>12} {m['trials']:>8}  {note}".rstrip())
    lines.append(f"n_trials={doc['n_trials']} seed={doc['seed']} mode={doc['mode']}")
    return "\n".join(lines) + "\n"


def _render_sweep_csv(doc: dict[str, Any]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(doc["columns"])
    for row in doc["rows"]:
        writer.writerow(["" if c is None else _fmt(c) if not isinstance(c, str)
                         else c for c in row])
    return buf.getvalue()


def _render_validate(doc: dict[str, Any]) -> str:
    head = (f"{'metric':<22} {'reference':>14} {'estimate':>14} "
            f"{'gap':>12} {'tol':>12}  status")
    lines = [head]
    for r in doc["rows"]:
        status = "PASS" if r["passed"] else "FAIL"
        lines.append(f"{r['metric']:<22} {_fmt(r['reference']):>14} "
                     f"{_fmt(r['estimate']):>14} {_fmt(r['gap']):>12} "
                     f"{_fmt(r['tol']):>12}  {status}")
    n_pass = sum(r["passed"] for r in doc["rows"])
    verdict = "PASS" if doc["passed"] else "FAIL"
    lines.append(f"OVERALL: {verdict} ({n_pass}/{len(doc['rows'])} checks, "
                 f"n_trials={doc['n_trials']}, seed={doc['seed']})")
    return "\n".join(lines) + "\n"


def _render_json(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2) + "\n"


# --- commands --------------------------------------------------------------

def cmd_analyze(args) -> int:
    cfg = _load_config_doc(args)
    if args.server:
        doc = _post(args, "/analyze", {"config": cfg, "beta_db": args.beta_db,
                                       "tau_db": args.tau_db,
                                       "rel_tol": args.rel_tol,
                                       "abs_tol": args.abs_tol})
    else:
        params = _build_params(cfg, args.beta_db, args.tau_db)
        rep = service.run_analyze(params,
                                  tol=_build_tol(args.rel_tol, args.abs_tol))
        doc = AnalyzeResponse.from_report(rep).model_dump()
    _emit(args, _render_json(doc) if args.format == "json" else _render_analyze(doc))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_config_doc(args)
    if args.server:
        doc = _post(args, "/simulate",
                    {"config": cfg, "n_trials": args.trials, "seed": args.seed,
                     "mode": args.mode, "jobs": args.jobs,
                     "r_sim_scale": args.r_sim_scale,
                     "beta_db": args.beta_db, "tau_db": args.tau_db})
    else:
        params = _build_params(cfg, args.beta_db, args.tau_db)
        metrics = service.run_simulate(params, args.trials, args.seed,
                                       mode=args.mode, jobs=args.jobs,
                                       r_sim_scale=args.r_sim_scale)
        doc = SimulateResponse.from_metrics(metrics, args.trials, args.seed,
                                            args.mode).model_dump()
    _emit(args, _render_json(doc) if args.format == "json" else _render_simulate(doc))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config_doc(args)
    values = _parse_values(args.values)
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    if args.server:
        doc = _post(args, "/sweep",
                    {"config": cfg, "axis": args.axis, "values": values,
                     "metrics": metrics, "mode": args.mode,
                     "n_trials": args.trials, "seed": args.seed,
                     "jobs": args.jobs, "r_sim_scale": args.r_sim_scale,
                     "beta_db": args.beta_db, "tau_db": args.tau_db,
                     "rel_tol": args.rel_tol, "abs_tol": args.abs_tol})
    else:
        params = _build_params(cfg, args.beta_db, args.tau_db)
        spec = service.SweepSpec(axis=args.axis, values=tuple(values),
                                 metrics=tuple(metrics), mode=args.mode,
                                 n_trials=args.trials, seed=args.seed,
                                 jobs=args.jobs, r_sim_scale=args.r_sim_scale)
        out = service.run_sweep(params, spec,
                                tol=_build_tol(args.rel_tol, args.abs_tol))
        rows = [[c if isinstance(c, str) else (None if math.isnan(c) else c)
                 for c in row] for row in out.rows]
        doc = SweepResponse(axis=out.axis, columns=list(out.columns),
                            rows=rows).model_dump()
    _emit(args, _render_json(doc) if args.format == "json" else _render_sweep_csv(doc))
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load_config_doc(args)
    if args.server:
        doc = _post(args, "/validate",
                    {"config": cfg, "n_trials": args.trials, "seed": args.seed,
                     "jobs": args.jobs, "r_sim_scale": args.r_sim_scale,
                     "beta_db": args.beta_db, "tau_db": args.tau_db,
                     "rel_tol": args.rel_tol, "abs_tol": args.abs_tol})
    else:
        params = _build_params(cfg, args.beta_db, args.tau_db)
        rep = service.run_validation(params, args.trials, args.seed,
                                     jobs=args.jobs,
                                     tol=_build_tol(args.rel_tol, args.abs_tol),
                                     r_sim_scale=args.r_sim_scale)
        doc = ValidateResponse.from_report(rep).model_dump()
    _emit(args, _render_json(doc) if args.format == "json" else _render_validate(doc))
    return EXIT_OK if doc["passed"] else EXIT_FAIL


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("aerocell.app:app", host=args.host, port=args.port)
    return EXIT_OK


# --- parser ----------------------------------------------------------------

def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", metavar="PATH", help="JSON parameter document")
    sp.add_argument("--set", dest="overrides", action="append", default=[],
                    metavar="KEY=VALUE", help="override one config key (repeatable)")
    sp.add_argument("--beta-db", type=float, help="access SIR threshold in dB")
    sp.add_argument("--tau-db", type=float, help="backhaul SINR threshold in dB")
    sp.add_argument("--server", metavar="URL",
                    help="send the request to a running server instead")
    sp.add_argument("--out", metavar="PATH", help="write output here instead of stdout")


def _add_sim_flags(sp: argparse.ArgumentParser, default_trials: int) -> None:
    sp.add_argument("--trials", type=int, default=default_trials)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=None,
                    help="worker processes (speed only, never results)")
    sp.add_argument("--r-sim-scale", type=float, default=1.0,
                    help="scale factor on the simulation windows")


def _add_tol_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--rel-tol", type=float, default=None)
    sp.add_argument("--abs-tol", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aerocell",
        description="Coverage and backhaul probabilities for a hybrid "
                    "aerial/terrestrial downlink network.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", help="evaluate the analytic report")
    _add_common(sp)
    _add_tol_flags(sp)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("simulate", help="estimate metrics by simulation")
    _add_common(sp)
    _add_sim_flags(sp, default_trials=10_000)
    sp.add_argument("--mode", choices=("full", "center-uav"), default="full")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="sweep one parameter, emit CSV")
    _add_common(sp)
    _add_sim_flags(sp, default_trials=2000)
    _add_tol_flags(sp)
    sp.add_argument("--axis", required=True, choices=service.SWEEP_AXES)
    sp.add_argument("--values", required=True,
                    help='comma list "60,80" or range "60:300:20"')
    sp.add_argument("--metrics", default=",".join(service.METRICS),
                    help="comma list of metric names")
    sp.add_argument("--mode", choices=service.SWEEP_MODES, default="analytic")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="cross-check analytics against simulation")
    _add_common(sp)
    _add_sim_flags(sp, default_trials=20_000)
    _add_tol_flags(sp)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("serve", help="run the HTTP server")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.set_defaults(func=cmd_serve)

    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"error: quadrature did not converge: {exc}", file=sys.stderr)
        print(f"partial value={_fmt(exc.value)} error_bound={_fmt(exc.error)}",
              file=sys.stderr)
        return EXIT_NUMERIC
    except _RemoteError as exc:
        print(f"server error ({exc.status}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC if exc.status == 500 else EXIT_CONFIG
    except httpx.HTTPError as exc:
        print(f"cannot reach server: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
