"""
Command-line entry point.

    epcavity run <config> [--out DIR] [--format csv|json]
    epcavity validate <config>

Exit status: 0 on success, 1 for an invalid configuration, 2 for a numeric
failure. ``EPCAVITY_THREADS`` caps the worker threads.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .core import RatioSpec, derive_params
from .dynamics import driven_generator, integrate_driven, max_rate
from .errors import ClassificationError, DomainError, NotConverged, StabilityError
from .response import DriveConfig, cpa_frequencies, intracavity_field, spectrum_sweep
from .spectral import locate_eps, sweep_eigenvalues

COLUMNS = {
    "eig-sweep": ("g2", "re1", "im1", "re2", "im2", "re3", "im3", "phase"),
    "spectrum": ("omega_minus_omega_c", "sigma_re", "sigma_im", "s_re", "s_im",
                 "total_output", "transmission", "absorption"),
    "ep-locate": ("g2_star", "order", "a_resid", "b_resid"),
    "cpa": ("omega_cpa",),
    "dynamics-check": ("case_id", "freq_domain_value", "time_domain_value", "rel_err"),
}
INFEASIBLE = "Infeasible"


def n_threads() -> int:
    raw = os.environ.get("EPCAVITY_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def fmt_number(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def render_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt_number(v) for v in row))
    return "\n".join(lines) + "\n"


def render_json(columns, rows) -> str:
    def cell(v):
        if isinstance(v, str):
            return json.dumps(v)
        s = fmt_number(v)
        return "null" if s in ("nan", "inf", "-inf") else s

    body = ",\n".join("  [" + ", ".join(cell(v) for v in row) + "]" for row in rows)
    return '{"columns": ' + json.dumps(list(columns)) + ',\n "rows": [\n' + body + "\n]}\n"


def _template(cfg: RunConfig, g2: float = 0.0) -> RatioSpec:
    return RatioSpec(cfg.p, cfg.q, cfg.kappa_2, g2, cfg.omega_c, cfg.delta_1_sign)


def _params(cfg: RunConfig, g2: float):
    return derive_params(_template(cfg, g2), cfg.mirrors, rtol=1e-6)


def rows_eig_sweep(cfg: RunConfig):
    table = sweep_eigenvalues(_template(cfg), cfg.g2_range, cfg.resolved_g2_points(), cfg.mirrors)
    rows = []
    for g, ws, ok, tag in zip(table.g2, table.eigenvalues, table.feasible, table.phases):
        vals = [v for w in ws for v in (w.real, w.imag)]
        rows.append([g, *vals, str(tag) if ok else INFEASIBLE])
    return rows


def rows_ep_locate(cfg: RunConfig):
    records = locate_eps(_template(cfg), cfg.g2_range, n_grid=cfg.resolved_g2_points())
    return [[r.g2_star, r.order, r.a, r.b] for r in records]


def rows_spectrum(cfg: RunConfig, g2: float):
    params = _params(cfg, g2)
    t = spectrum_sweep(params, cfg.omega_range, cfg.n_points)
    return [
        [t.detuning[i], t.sigma[i].real, t.sigma[i].imag, t.s[i].real, t.s[i].imag,
         t.total_output[i], t.transmission[i], t.absorption[i]]
        for i in range(len(t))
    ]


def rows_cpa(cfg: RunConfig):
    return [[w] for w in cpa_frequencies(_params(cfg, cfg.g_2[0]))]


def _dynamics_case(params, drive, omega):
    M, _ = driven_generator(params, drive, omega)
    slowest = -float(np.max(np.linalg.eigvals(M).real))
    dt = 0.09 / max_rate(params)
    res = integrate_driven(params, drive, omega, 40.0 / slowest, dt)
    fd = complex(intracavity_field(omega, params, drive))
    td = res.state.a
    return abs(fd), abs(td), abs(td - fd) / abs(fd)


def rows_dynamics_check(cfg: RunConfig):
    params = _params(cfg, cfg.g_2[0])
    drive = DriveConfig.cpa_ratio(params)
    lo, hi = cfg.omega_range if cfg.omega_range is not None else (-10 * cfg.kappa_2, 10 * cfg.kappa_2)
    probes = params.omega_c + np.linspace(lo, hi, cfg.n_points)
    with ThreadPoolExecutor(max_workers=n_threads()) as pool:
        results = list(pool.map(lambda w: _dynamics_case(params, drive, w), probes))
    return [[i, *r] for i, r in enumerate(results)]


def _spectrum_g2_values(cfg: RunConfig):
    if cfg.g_2 is not None:
        return list(cfg.g_2)
    return list(np.linspace(cfg.g2_range[0], cfg.g2_range[1], cfg.resolved_g2_points()))


def execute(cfg: RunConfig):
    """Compute every data table of a run: list of (suffix, columns, rows)."""
    cols = COLUMNS[cfg.mode]
    if cfg.mode == "eig-sweep":
        return [("", cols, rows_eig_sweep(cfg))]
    if cfg.mode == "ep-locate":
        return [("", cols, rows_ep_locate(cfg))]
    if cfg.mode == "cpa":
        return [("", cols, rows_cpa(cfg))]
    if cfg.mode == "dynamics-check":
        return [("", cols, rows_dynamics_check(cfg))]
    gs = _spectrum_g2_values(cfg)
    with ThreadPoolExecutor(max_workers=n_threads()) as pool:
        tables = list(pool.map(lambda g: rows_spectrum(cfg, g), gs))
    if len(gs) == 1:
        return [("", cols, tables[0])]
    return [(f"_g2-{i:03d}", cols, rows) for i, rows in enumerate(tables)]


def run(cfg: RunConfig, out_dir=None) -> list[Path]:
    """Execute ``cfg`` and write the data files plus a ``.meta.json`` sidecar."""
    out_dir = Path(out_dir) if out_dir is not None else Path.cwd()
    out_dir.mkdir(parents=True, exist_ok=True)
    render = render_csv if cfg.format == "csv" else render_json
    written = []
    for suffix, cols, rows in execute(cfg):
        target = out_dir / f"{cfg.path}{suffix}.{cfg.format}"
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render(cols, rows))
        written.append(target)
    meta = {
        "library": "epcavity",
        "version": __version__,
        "config": cfg.to_dict(),
        "data_files": [p.name for p in written],
    }
    sidecar = out_dir / f"{cfg.path}.meta.json"
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return written + [sidecar]


def _fail(kind: str, message: str, code: int, **extra) -> int:
    payload = {"status": "error", "kind": kind, "message": message, **extra}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epcavity", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a configuration")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory (default: cwd)")
    p_run.add_argument("--format", choices=("csv", "json"), default=None)
    p_val = sub.add_parser("validate", help="check a configuration without running it")
    p_val.add_argument("config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if getattr(args, "format", None):
            cfg = replace(cfg, format=args.format)
    except ConfigError as exc:
        extra = {} if exc.residual is None else {"residual": exc.residual}
        return _fail("validation", str(exc), 1, **extra)

    if args.command == "validate":
        print(json.dumps({"status": "ok", "config": cfg.to_dict()}, sort_keys=True))
        return 0
    try:
        paths = run(cfg, args.out)
    except DomainError as exc:
        return _fail("validation", str(exc), 1)
    except (NotConverged, StabilityError, ClassificationError, FloatingPointError, ArithmeticError) as exc:
        return _fail("numeric", f"{type(exc).__name__}: {exc}", 2)
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
