"""Command-line entry point ``gtlab``.

Exit status: 0 pass, 1 study failed, 2 configuration error, 3 accuracy failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, config_hash, load_config
from .errors import AccuracyNotReached, ConfigError, FixedPointError, NotOnLocus
from .hardy import spectrum
from .kernels import (
    gk_integral,
    gk_spectral,
    gk_trace,
    predicted_scaling_leading,
    predicted_trace_leading,
    trace_terms,
)
from .outputs import dumps, emit_outputs, rows_to_csv
from .recurrence import fixed_components, level_component_integral
from .studies import (
    level_point,
    random_displacements,
    run_rapid_decrease,
    run_scaling_study,
    run_trace_study,
)
from .window import ChiHatCache, set_default_cache

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_ACCURACY = 0, 1, 2, 3


def _point(spec, fallback):
    if spec is None:
        return fallback
    z = np.array([complex(re, im) for re, im in spec])
    return z / np.linalg.norm(z)


def _overrides(args) -> dict:
    out = {}
    if args.d is not None:
        out["model.d"] = args.d
    if args.weights is not None:
        out["model.weights"] = [float(t) for t in args.weights.split(",")]
    if args.energy is not None:
        out["model.energy"] = args.energy
    if args.k is not None:
        out["k_grid"] = [args.k]
    if args.output_dir is not None:
        out["output_dir"] = args.output_dir
    if args.seed is not None:
        out["seed"] = args.seed
    if args.workers is not None:
        out["workers"] = args.workers
    return out


def _emit_text(text: str, args, name: str):
    if args.output_dir is None:
        sys.stdout.write(text)
        return
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    print(out / name)


def cmd_spectrum(rc: RunConfig, args) -> int:
    cfg = rc.model_config_obj()
    text = "".join(spectrum(cfg, k).to_csv() for k in rc.levels()[:1])
    _emit_text(text, args, f"spectrum-k{rc.levels()[0]}-{config_hash(rc.echo())}.csv")
    return EXIT_PASS


def cmd_kernel(rc: RunConfig, args) -> int:
    cfg, w = rc.model_config_obj(), rc.window_obj()
    base = level_point(cfg)
    x = _point(rc.kernel.x, base)
    y = _point(rc.kernel.y, x)
    rows = []
    for k in rc.levels():
        spec_val = gk_spectral(cfg, k, x, y, w) if rc.kernel.route != "integral" else None
        int_val = gk_integral(cfg, k, x, y, w) if rc.kernel.route != "spectral" else None
        g = spec_val if spec_val is not None else int_val
        try:
            p = predicted_scaling_leading(cfg, x, y, 0.0, 0.0, np.zeros(2 * cfg.d),
                                          np.zeros(2 * cfg.d), k, w)
            rel = abs(g / p - 1.0)
        except (NotOnLocus, FixedPointError):
            p, rel = complex(math.nan, math.nan), math.nan
        row = {"k": k, "re": g.real, "im": g.imag, "abs": abs(g),
               "predicted_re": p.real, "predicted_im": p.imag, "rel_err": rel}
        if rc.kernel.route == "both":
            row["route_diff"] = abs(spec_val - int_val)
        rows.append(row)
    _emit_text(rows_to_csv(rows), args, f"kernel-{config_hash(rc.echo())}.csv")
    return EXIT_PASS


def cmd_trace(rc: RunConfig, args) -> int:
    cfg, w = rc.model_config_obj(), rc.window_obj()
    rows = []
    for k in rc.levels():
        t = gk_trace(cfg, k, w)
        p = predicted_trace_leading(cfg, k, w)
        rows.append({"k": k, "re": t.real, "im": t.imag, "abs": abs(t),
                     "predicted_re": p.real, "predicted_im": p.imag,
                     "rel_err": abs(t - p) / abs(p) if p != 0 else math.nan})
    _emit_text(rows_to_csv(rows), args, f"trace-{config_hash(rc.echo())}.csv")
    return EXIT_PASS


def cmd_periods(rc: RunConfig, args) -> int:
    cfg, w = rc.model_config_obj(), rc.window_obj()
    k = rc.levels()[0]
    rows = trace_terms(cfg, k, w)
    sigmas = sorted({r["sigma"] for r in rows})
    if rc.periods.sigma is not None:
        sigmas = [rc.periods.sigma]
        rows = [{"sigma": rc.periods.sigma, "indices": list(c.indices), "d_bl": c.d_bl,
                 "c_bl": c.c_bl, "det_D_re": c.det_D.real, "det_D_im": c.det_D.imag,
                 "theta_bl": c.theta_bl, "level_integral": level_component_integral(cfg, c)}
                for c in fixed_components(cfg, rc.periods.sigma)]
    out = []
    for s in sigmas:
        comps = [{key: r[key] for key in ("indices", "d_bl", "c_bl", "det_D_re", "det_D_im",
                                          "theta_bl", "level_integral")}
                 for r in rows if r["sigma"] == s]
        out.append({"sigma": s, "components": comps})
    _emit_text(dumps(out), args, f"periods-{config_hash(rc.echo())}.json")
    return EXIT_PASS


def _finish(report, rc: RunConfig) -> int:
    echo = rc.echo()
    paths = emit_outputs(report, rc.output_dir, echo, config_hash(echo))
    for p in paths:
        print(p)
    status = "PASS" if report.passed else "FAIL"
    print(f"{report.study_id}: slope {report.fitted_slope:.4f} "
          f"(stderr {report.slope_stderr:.4f}) {status}")
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_verify_decay(rc: RunConfig, args) -> int:
    sc = rc.scenario.model_dump(exclude_none=True)
    report = run_rapid_decrease(rc.model_config_obj(), rc.window_obj(), sc,
                                rc.levels(), workers=rc.workers)
    return _finish(report, rc)


def cmd_verify_scaling(rc: RunConfig, args) -> int:
    cfg, w = rc.model_config_obj(), rc.window_obj()
    s = rc.scaling
    x = _point(s.x, level_point(cfg))
    y = _point(s.y, x)
    disps = [(np.asarray(a, float), np.asarray(b, float)) for a, b in s.pairs]
    if s.include_origin:
        disps.insert(0, (np.zeros(2 * cfg.d), np.zeros(2 * cfg.d)))
    disps += random_displacements(cfg.d, s.random_pairs, s.radius, rc.seed)
    report = run_scaling_study(cfg, w, x, y, disps, rc.levels(), s.theta1, s.theta2,
                               workers=rc.workers)
    return _finish(report, rc)


def cmd_verify_trace(rc: RunConfig, args) -> int:
    report = run_trace_study(rc.model_config_obj(), rc.window_obj(), rc.levels(),
                             workers=rc.workers)
    return _finish(report, rc)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "kernel": cmd_kernel,
    "trace": cmd_trace,
    "periods": cmd_periods,
    "verify-decay": cmd_verify_decay,
    "verify-scaling": cmd_verify_scaling,
    "verify-trace": cmd_verify_trace,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gtlab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--k", type=int, help="single level k (replaces k_grid)")
    p.add_argument("--d", type=int, help="complex dimension")
    p.add_argument("--weights", help="comma-separated torus weights")
    p.add_argument("--energy", type=float, help="energy level E")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="threads for per-k parallelism")
    p.add_argument("--cache-dir", help="persist Fourier transform values here")
    p.add_argument("--output-dir", help="directory for output files")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = load_config(args.config, _overrides(args))
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cache = ChiHatCache(args.cache_dir) if args.cache_dir else None
    previous = set_default_cache(cache) if cache is not None else None
    try:
        return COMMANDS[args.command](rc, args)
    except AccuracyNotReached as exc:
        print(f"accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    finally:
        if cache is not None:
            cache.save()
            set_default_cache(previous)


if __name__ == "__main__":
    sys.exit(main())
