"""Batch experiment runner: JSON config in, CSV artifacts out.

Commands
--------
params          per-level tentacle parameter table (log-space widths included)
verify-sobolev  strict closed-form bound table and, in demo mode, the
                Cauchy difference table
verify-jacobian finite-difference Jacobian positivity survey
verify-boundary boundary identity deviation
witness         preimage-continuum collapse table
degree          degree probes (fixtures or the configured stage map)
export-slice    image of a planar grid for figure reproduction

Exit codes: 0 ok, 2 config error, 3 assertion failure, 4 numerical
indeterminacy.  Reruns with the same config and seed are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import analysis, degree as degree_mod
from .composite import VARIANTS, build_stage, continuum_witness
from .errors import IndeterminateDegreeError
from .tentacles import (
    SQUEEZE,
    STRETCH,
    delta_tilde,
    solve_parameters,
    tentacle_seminorm_bound,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ASSERT = 3
EXIT_INDETERMINATE = 4


class ConfigError(Exception):
    pass


_DEFAULTS = {
    "n": 3,
    "beta": 4.0,
    "variant": "T1",
    "schedule_mode": "demo",
    "max_stage": 3,
    "seed": 0,
    "out_dir": "out",
    "quadrature": {},
    "degree": {},
}


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno}: {exc.msg}") from exc
    cfg = dict(_DEFAULTS)
    cfg.update(raw)
    _validate(cfg)
    return cfg


def _fail(field, msg):
    raise ConfigError(f"config field '{field}': {msg}")


def _validate(cfg):
    if not isinstance(cfg["n"], int) or cfg["n"] < 2:
        _fail("n", "must be an integer >= 2")
    if cfg["variant"] not in VARIANTS:
        _fail("variant", f"must be one of {VARIANTS}")
    if cfg["schedule_mode"] not in ("demo", "strict"):
        _fail("schedule_mode", "must be 'demo' or 'strict'")
    if cfg["variant"] in ("T1", "T2", "W") and cfg["n"] < 3:
        _fail("n", "tentacle variants need n >= 3")
    if cfg["variant"] != "FL" and cfg["beta"] < cfg["n"] + 1:
        _fail("beta", "need beta >= n+1")
    if not 1 <= int(cfg["max_stage"]) <= 24:
        _fail("max_stage", "must be in 1..24")
    if not isinstance(cfg["seed"], int):
        _fail("seed", "must be an integer")


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(path: str, header: str, rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _strict_mode(cfg) -> str:
    return "strict-T2" if cfg["variant"] in ("T2", "W") else "strict-T1"


def _family(cfg) -> str:
    return STRETCH if cfg["variant"] in ("T2", "W") else SQUEEZE


def _quad_config(cfg) -> analysis.QuadratureConfig:
    q = dict(cfg.get("quadrature") or {})
    q.setdefault("seed", cfg["seed"])
    try:
        return analysis.QuadratureConfig(**q)
    except TypeError as exc:
        raise ConfigError(f"config field 'quadrature': {exc}") from exc


def cmd_params(cfg, out_dir):
    mode = "demo" if cfg["schedule_mode"] == "demo" else _strict_mode(cfg)
    k_max = cfg["max_stage"]
    sched = solve_parameters(cfg["n"], cfg["beta"], mode, _family(cfg), k_max)
    rows = []
    for lv in sched.levels:
        rows.append(
            (lv.k, lv.r_hat, lv.a, lv.c, lv.a_sq, lv.c_sq, lv.u_d, lv.u_b,
             lv.d, lv.b, lv.e_range,
             lv.bend if lv.bend is not None else float("nan"),
             lv.delta_budget if lv.delta_budget is not None else float("nan"))
        )
    write_csv(
        os.path.join(out_dir, "params.csv"),
        "k,r_hat,a,c,a_sq,c_sq,log_inv_d,log_inv_b,d,b,e_range,bend,delta",
        rows,
    )
    return EXIT_OK


def cmd_verify_sobolev(cfg, out_dir):
    n, beta, k_max = cfg["n"], cfg["beta"], cfg["max_stage"]
    code = EXIT_OK
    mode = _strict_mode(cfg)
    sched = solve_parameters(n, beta, mode, _family(cfg), max(k_max, 8))
    rows = []
    ok_all = True
    for k in range(1, max(k_max, 8) + 1):
        bound = tentacle_seminorm_bound(sched, k)
        dk = sched.level(k).delta_budget
        envelope = 2.0 ** (k * beta * (n - 1)) * delta_tilde(mode, n, beta, k)
        ok = bound <= dk
        ok_all = ok_all and ok
        rows.append((k, bound, dk, envelope, int(ok)))
    write_csv(os.path.join(out_dir, "sobolev_strict.csv"),
              "k,bound,delta,cauchy_envelope,pass", rows)
    if not ok_all:
        code = EXIT_ASSERT
    if cfg["schedule_mode"] == "demo" and cfg["variant"] in ("T1", "T2"):
        table = analysis.cauchy_table(cfg["variant"], n - 1, k_max,
                                      _quad_config(cfg), n, beta)
        write_csv(os.path.join(out_dir, "cauchy_table.csv"),
                  "k,integral,envelope,pass",
                  ((r.k, r.integral, r.envelope, int(r.passed)) for r in table.rows))
        if not all(r.passed for r in table.rows):
            code = EXIT_ASSERT
    return code


def cmd_verify_jacobian(cfg, out_dir):
    stage = build_stage(cfg["variant"], cfg["max_stage"], cfg["n"], cfg["beta"])
    rep = analysis.jacobian_survey(stage, 2000, _quad_config(cfg), n=cfg["n"])
    write_csv(os.path.join(out_dir, "jacobian.csv"),
              "fraction_positive,min_det,exceptions,hard_failures",
              [(rep.fraction_positive, rep.min_det, rep.count, len(rep.hard_failures))])
    return EXIT_OK if rep.fraction_positive >= 0.999 and not rep.hard_failures else EXIT_ASSERT


def cmd_verify_boundary(cfg, out_dir):
    stage = build_stage(cfg["variant"], cfg["max_stage"], cfg["n"], cfg["beta"])
    passed, dev = analysis.boundary_identity_check(stage, cfg["n"], 200, cfg["seed"])
    write_csv(os.path.join(out_dir, "boundary.csv"), "max_deviation,pass",
              [(dev, int(passed))])
    return EXIT_OK if passed else EXIT_ASSERT


def cmd_witness(cfg, out_dir):
    variant = cfg["variant"] if cfg["variant"] in ("T1", "T2") else "T1"
    rows = []
    ok = True
    prev = None
    for k in range(1, cfg["max_stage"] + 1):
        wit = continuum_witness([(1,) * cfg["n"]] * k, k, variant, cfg["n"], cfg["beta"])
        rows.append((k, wit.endpoint_separation, wit.image_diameter))
        if wit.endpoint_separation < 0.5:
            ok = False
        if prev is not None and wit.image_diameter >= prev:
            ok = False
        prev = wit.image_diameter
    write_csv(os.path.join(out_dir, "witness.csv"),
              "k,endpoint_separation,image_diameter", rows)
    return EXIT_OK if ok else EXIT_ASSERT


def cmd_degree(cfg, out_dir):
    dcfg = dict(cfg.get("degree") or {})
    n = cfg["n"]
    center = tuple(dcfg.get("center", (0.55, 0.09, 0.25)[:n]))
    radius = float(dcfg.get("radius", 0.1))
    refinement = int(dcfg.get("refinement", 3))
    probe = degree_mod.SphereProbe(center, radius, refinement)
    rows = []
    try:
        if dcfg.get("fixture") == "identity":
            y = np.zeros(len(center))
            rep = degree_mod.degree(lambda x: np.asarray(x, float), probe, y)
            rows.append(("identity", 0, *center, radius, _np_list(y), rep.degree,
                         rep.raw, rep.refinements))
        else:
            y_cfg = dcfg.get("y")
            stages = range(1, cfg["max_stage"] + 1)
            for k in stages:
                stage = build_stage(cfg["variant"], k, n, cfg["beta"])
                y = np.asarray(y_cfg, float) if y_cfg else stage.forward(np.asarray(center))
                rep = degree_mod.degree(stage, probe, y)
                rows.append((cfg["variant"], k, *center, radius, _np_list(y),
                             rep.degree, rep.raw, rep.refinements))
    except IndeterminateDegreeError:
        return EXIT_INDETERMINATE
    coords = ",".join(f"c{i+1}" for i in range(len(center)))
    write_csv(os.path.join(out_dir, "degree.csv"),
              f"map,k,{coords},r,y,degree,raw,refinements", rows)
    degs = {r[-3] for r in rows}
    return EXIT_OK if len(degs) <= 1 else EXIT_ASSERT


def _np_list(y):
    return "[" + " ".join(format(v, ".17g") for v in np.asarray(y)) + "]"


def cmd_export_slice(cfg, out_dir):
    n = cfg["n"]
    res = int((cfg.get("quadrature") or {}).get("resolution", 6)) * 8
    stage = build_stage(cfg["variant"], cfg["max_stage"], n, cfg["beta"])
    zs = float((cfg.get("degree") or {}).get("slice_height", 0.0))
    axis = np.linspace(-0.999, 0.999, res)
    rows = []
    for u in axis:
        for v in axis:
            p = np.zeros(n)
            p[0], p[-1] = u, v
            if n > 2:
                p[1] = zs
            q = stage.forward(p)
            rows.append((u, v, *[float(x) for x in q]))
    write_csv(os.path.join(out_dir, "slice.csv"),
              "u,v," + ",".join(f"f{i+1}" for i in range(n)), rows)
    return EXIT_OK


_COMMANDS = {
    "params": cmd_params,
    "verify-sobolev": cmd_verify_sobolev,
    "verify-jacobian": cmd_verify_jacobian,
    "verify-boundary": cmd_verify_boundary,
    "witness": cmd_witness,
    "degree": cmd_degree,
    "export-slice": cmd_export_slice,
}


def run(command: str, config_path: str, out_dir: str | None = None,
        stage: int | None = None, seed: int | None = None) -> int:
    try:
        cfg = load_config(config_path)
        if stage is not None:
            cfg["max_stage"] = stage
        if seed is not None:
            cfg["seed"] = seed
        _validate(cfg)
        out = out_dir or cfg["out_dir"]
        return _COMMANDS[command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="homlim",
        description="construct and verify homeomorphism stages with wild Sobolev limits",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=None)
    parser.add_argument("--stage", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args(argv)
    return run(args.command, args.config, args.out, args.stage, args.seed)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
