"""Command-line front end.

The CLI is a thin client of the compute service: it resolves units and
profile specs into the service's request models, then either calls the
handlers in-process (default) or POSTs to a running server (``--server``).
Both paths execute the same handler code on the same models.

Unit convention: bandwidth suffixes denote ordinary frequency and are
converted to angular frequency by 2*pi (100GHz -> 2*pi*1e11 rad/s); times use
fs/ps/ns/us/ms/s. With ``--normalized`` every quantity is a bare number
(times in units of tau_a, bandwidths in 1/tau_a), which reproduces the
standard compensation curves directly.

Exit codes: 0 success, 1 numeric/validation failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import pydantic

from .errors import ConfigError, NumericsError
from .profiles import parse_profile_spec, parse_pump_spec
from .service import handlers, schemas
from .units import format_float, parse_frequency, parse_time

_REQUEST_TIMEOUT = 600.0


# ---------------------------------------------------------------- transport

def _remote_post(server: str, path: str, payload: dict, expect_json: bool = True):
    import httpx

    url = server.rstrip("/") + path
    try:
        response = httpx.post(url, json=payload, timeout=_REQUEST_TIMEOUT)
    except httpx.HTTPError as exc:
        raise NumericsError(f"request to {url} failed: {exc}") from exc
    if response.status_code == 400:
        try:
            error = response.json()["error"]
        except Exception:
            raise NumericsError(f"server error: {response.text}") from None
        if error.get("kind") == "config":
            raise ConfigError(error.get("message", "invalid request"))
        raise NumericsError(error.get("message", "numeric failure"))
    if response.status_code == 422:
        raise ConfigError(f"server rejected the request: {response.text}")
    if response.status_code != 200:
        raise NumericsError(f"server returned {response.status_code}: {response.text}")
    return response.json() if expect_json else response.text


def _run_concurrence(req: schemas.ConcurrenceRequest, server: Optional[str]) -> dict:
    if server:
        return _remote_post(server, "/concurrence", req.model_dump(mode="json"))
    resp = handlers.handle_concurrence(req)
    return resp.model_dump(mode="json", exclude_none=True)


def _run_optimize(req: schemas.OptimizeRequest, server: Optional[str]) -> dict:
    if server:
        return _remote_post(server, "/optimize", req.model_dump(mode="json"))
    return handlers.handle_optimize(req).model_dump(mode="json", exclude_none=True)


def _run_sweep(req: schemas.SweepRequest, server: Optional[str]) -> dict:
    if server:
        return _remote_post(server, "/sweep", req.model_dump(mode="json"))
    return handlers.handle_sweep(req).model_dump(mode="json")


def _run_validate(req: schemas.ValidateRequest, server: Optional[str]) -> dict:
    if server:
        return _remote_post(server, "/validate", req.model_dump(mode="json"))
    return handlers.handle_validate(req).model_dump(mode="json")


def _run_jsa_dump(req: schemas.JsaDumpRequest, server: Optional[str]) -> str:
    if server:
        return _remote_post(server, "/jsa", req.model_dump(mode="json"), expect_json=False)
    return handlers.handle_jsa_dump(req)


# ------------------------------------------------------------ config/parsing

def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path!r} must hold a JSON object")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def _setting(args: argparse.Namespace, config: dict, name: str, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return config.get(name, default)


def _require(value, flag: str):
    if value is None:
        raise ConfigError(f"missing required option {flag} (flag or config file)")
    return value


def _parse_range(text: str, parse_one) -> tuple[float, float]:
    lo, sep, hi = str(text).partition(":")
    if not sep:
        raise ConfigError(f"range must be lo:hi, got {text!r}")
    return parse_one(lo), parse_one(hi)


def _profile_model(spec: str, normalized: bool) -> schemas.ProfileModel:
    return schemas.ProfileModel.from_profile(parse_profile_spec(str(spec), normalized))


def _pump_model(spec: str, normalized: bool) -> schemas.PumpModel:
    return schemas.PumpModel.from_pump(parse_pump_spec(str(spec), normalized))


def _grid_override(args, config) -> Optional[schemas.GridOverride]:
    n = _setting(args, config, "grid_n")
    half = _setting(args, config, "grid_half_span")
    if n is None and half is None:
        return None
    if n is None:
        raise ConfigError("--grid-half-span needs --grid-n as well")
    normalized = bool(_setting(args, config, "normalized", False))
    half_value = parse_frequency(str(half), normalized) if half is not None else None
    return schemas.GridOverride(n=int(n), half_span=half_value)


def _write_bytes(path: str, text: str) -> None:
    with open(path, "wb") as fh:
        fh.write(text.encode())


def _emit_json(result: dict, out: Optional[str]) -> None:
    text = json.dumps(result, indent=2) + "\n"
    sys.stdout.write(text)
    if out:
        _write_bytes(out, text)


def _rho_csv(rho_re: list[list[float]], rho_im: list[list[float]]) -> str:
    lines = ["# two-qubit density matrix in the {s_a s_b, s_a s_b', s_a' s_b, s_a' s_b'} basis",
             "row,col,re,im"]
    for i in range(4):
        for j in range(4):
            lines.append(f"{i},{j},{format_float(rho_re[i][j])},{format_float(rho_im[i][j])}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- commands

def _gather_common(args) -> tuple[dict, bool, Optional[str]]:
    config = _load_config(getattr(args, "config", None))
    normalized = bool(getattr(args, "normalized", False) or config.get("normalized", False))
    server = _setting(args, config, "server")
    return config, normalized, server


def cmd_concurrence(args: argparse.Namespace) -> int:
    config, normalized, server = _gather_common(args)
    pump = _pump_model(_require(_setting(args, config, "pump"), "--pump"), normalized)
    filter_a = _profile_model(_require(_setting(args, config, "filter_a"), "--filter-a"),
                              normalized)
    filter_b = _profile_model(_require(_setting(args, config, "filter_b"), "--filter-b"),
                              normalized)
    tau_a = parse_time(str(_require(_setting(args, config, "tau_a"), "--tau-a")), normalized)
    tau_b = parse_time(str(_require(_setting(args, config, "tau_b"), "--tau-b")), normalized)

    req = schemas.ConcurrenceRequest(
        pump=pump, filter_a=filter_a, filter_b=filter_b, tau_a=tau_a, tau_b=tau_b,
        method=_setting(args, config, "method", "auto"),
        grid=_grid_override(args, config),
        include_rho=bool(args.dump_rho),
    )
    result = _run_concurrence(req, server)

    if args.dump_rho:
        _write_bytes(args.dump_rho, _rho_csv(result.pop("rho_re"), result.pop("rho_im")))
    if args.dump_jsi or args.dump_temporal:
        if pump.cw:
            raise ConfigError("grid dumps need a pulsed pump")
        for which, path in (("jsi", args.dump_jsi), ("temporal", args.dump_temporal)):
            if path:
                dump_req = schemas.JsaDumpRequest(
                    pump=pump, filter_a=filter_a, filter_b=filter_b, which=which,
                    tau_max=max(abs(tau_a), abs(tau_b)), grid=req.grid)
                _write_bytes(path, _run_jsa_dump(dump_req, server))

    _emit_json(result, args.out)
    return 0


def cmd_optimize(args: argparse.Namespace) -> int:
    config, normalized, server = _gather_common(args)
    pump = _pump_model(_require(_setting(args, config, "pump"), "--pump"), normalized)
    filter_a = _profile_model(_require(_setting(args, config, "filter_a"), "--filter-a"),
                              normalized)
    filter_b = _profile_model(_require(_setting(args, config, "filter_b"), "--filter-b"),
                              normalized)
    tau_a = parse_time(str(_require(_setting(args, config, "tau_a"), "--tau-a")), normalized)

    bracket = _setting(args, config, "bracket")
    bracket_lo = bracket_hi = None
    if bracket is not None:
        bracket_lo, bracket_hi = _parse_range(bracket, lambda s: parse_time(s, normalized))

    tol_raw = _setting(args, config, "tol")
    tol = parse_time(str(tol_raw), normalized) if tol_raw is not None else None

    req = schemas.OptimizeRequest(
        pump=pump, filter_a=filter_a, filter_b=filter_b, tau_a=tau_a,
        bracket_lo=bracket_lo, bracket_hi=bracket_hi,
        **({"tol": tol} if tol is not None else {}),
        method=_setting(args, config, "method", "auto"),
        paper_tau0=bool(_setting(args, config, "paper_tau0", False)),
        grid=_grid_override(args, config),
    )
    _emit_json(_run_optimize(req, server), args.out)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    config, normalized, server = _gather_common(args)
    axis = _require(_setting(args, config, "axis"), "--axis")
    if axis not in ("taub", "bp"):
        raise ConfigError(f"--axis must be taub or bp, got {axis!r}")
    parse_one = (lambda s: parse_time(s, normalized)) if axis == "taub" \
        else (lambda s: parse_frequency(s, normalized))
    start, stop = _parse_range(_require(_setting(args, config, "range"), "--range"), parse_one)
    points = int(_require(_setting(args, config, "points"), "--points"))

    pump = _pump_model(_require(_setting(args, config, "pump"), "--pump"), normalized)
    filter_a = _profile_model(_require(_setting(args, config, "filter_a"), "--filter-a"),
                              normalized)
    filter_b = _profile_model(_require(_setting(args, config, "filter_b"), "--filter-b"),
                              normalized)
    tau_a = parse_time(str(_require(_setting(args, config, "tau_a"), "--tau-a")), normalized)

    tol_raw = _setting(args, config, "tol")
    req = schemas.SweepRequest(
        axis=axis, start=start, stop=stop, points=points,
        pump=pump, filter_a=filter_a, filter_b=filter_b, tau_a=tau_a,
        **({"tol": parse_time(str(tol_raw), normalized)} if tol_raw is not None else {}),
        validate_points=bool(_setting(args, config, "validate", False)),
        grid=_grid_override(args, config),
    )
    result = _run_sweep(req, server)

    lines = [f"# {key}={value}" for key, value in result["metadata"].items()]
    lines.append("x,concurrence")
    for x, c in zip(result["x"], result["concurrence"]):
        lines.append(f"{format_float(x)},{format_float(c)}")
    csv_text = "\n".join(lines) + "\n"

    if args.out:
        _write_bytes(args.out, csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    config, _, server = _gather_common(args)
    req = schemas.ValidateRequest(
        gaussian_perturbation=float(_setting(args, config, "gaussian_perturbation", 0.0)))
    result = _run_validate(req, server)

    if args.json:
        sys.stdout.write(json.dumps(result, indent=2) + "\n")
    else:
        name_width = max(len(c["name"]) for c in result["checks"])
        for check in result["checks"]:
            status = "PASS" if check["passed"] else "FAIL"
            sys.stdout.write(
                f"{check['name']:<{name_width}}  {status}  "
                f"measured={check['measured']:.3e}  threshold={check['threshold']:.3e}\n")
        for note in result["notes"]:
            sys.stdout.write(f"note: {note}\n")
        sys.stdout.write(f"overall: {'PASS' if result['passed'] else 'FAIL'}\n")
    return 0 if result["passed"] else 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import app
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biphoton-pmd",
        description="Concurrence of polarization-entangled photon pairs under "
                    "first-order PMD, and optimal nonlocal compensation.",
        epilog="Bandwidth suffixes are ordinary frequency and get multiplied by "
               "2*pi (100GHz = 2*pi*1e11 rad/s). Profile specs: "
               "gaussian:B=100GHz[,offset=...], supergauss:n=3,B=..., "
               "table:file.csv, and 'cw' for the pump.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--server", help="base URL of a running service; default in-process")
    common.add_argument("--config", help="JSON file with defaults mirroring the flag names")
    common.add_argument("--normalized", action="store_true",
                        help="dimensionless units: times in tau_a, bandwidths in 1/tau_a")

    physics = argparse.ArgumentParser(add_help=False)
    physics.add_argument("--pump", help="pump spec or 'cw'")
    physics.add_argument("--filter-a", dest="filter_a", help="Alice filter spec")
    physics.add_argument("--filter-b", dest="filter_b", help="Bob filter spec")
    physics.add_argument("--tau-a", "--taua", dest="tau_a", help="DGD of Alice's fiber")
    physics.add_argument("--grid-n", dest="grid_n", type=int,
                         help="explicit per-axis grid size (power of two)")
    physics.add_argument("--grid-half-span", dest="grid_half_span",
                         help="explicit half-span per axis around the filter centers")

    p = sub.add_parser("concurrence", parents=[common, physics],
                       help="concurrence at one (tau_a, tau_b) setting")
    p.add_argument("--tau-b", "--taub", dest="tau_b", help="DGD of Bob's compensator")
    p.add_argument("--method", choices=["auto", "analytic", "numeric", "time-domain"])
    p.add_argument("--out", help="also write the JSON result to this file")
    p.add_argument("--dump-rho", help="write the 4x4 density matrix as CSV")
    p.add_argument("--dump-jsi", help="write |f(omega_a, omega_b)|^2 as CSV")
    p.add_argument("--dump-temporal", help="write |g(t_a, t_b)|^2 as CSV")
    p.set_defaults(func=cmd_concurrence)

    p = sub.add_parser("optimize", parents=[common, physics],
                       help="find the compensator DGD maximizing concurrence")
    p.add_argument("--bracket", help="search bracket lo:hi (default 0:2*tau_a)")
    p.add_argument("--tol", help="tau_b tolerance of the maximizer")
    p.add_argument("--method", choices=["auto", "analytic", "numeric"])
    p.add_argument("--paper-tau0", dest="paper_tau0", action="store_true",
                   help="also report the pump-only sensitivity scale 2/B_p")
    p.add_argument("--out", help="also write the JSON result to this file")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", parents=[common, physics],
                       help="concurrence curve along tau_b or pump bandwidth")
    p.add_argument("--axis", choices=["taub", "bp"])
    p.add_argument("--range", help="sweep range lo:hi (axis units)")
    p.add_argument("--points", type=int, help="number of grid points")
    p.add_argument("--tol", help="optimizer tolerance (bp axis)")
    p.add_argument("--validate", action="store_true",
                   help="cross-check engines at every point; disagreement fails the run")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", parents=[common],
                       help="run the built-in validation matrix")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--gaussian-perturbation", dest="gaussian_perturbation", type=float,
                   help=argparse.SUPPRESS)  # test-harness hook
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except pydantic.ValidationError as exc:
        print(f"error: invalid parameters: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
