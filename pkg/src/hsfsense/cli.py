"""Command-line driver: ``hsfsense {synthesize,decompose,sense,scatter,sweep,selftest}``.

Exit codes: 0 success, 2 usage/config error, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import em
from .decomposition import decompose
from .experiments import (
    ConfigError,
    ExperimentConfig,
    position_stem,
    run_position,
    run_sweep,
    sweep_to_csv,
    write_wavefront,
)
from .geometry import read_config_csv, write_config_csv

log = logging.getLogger("hsfsense")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _load_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON ({exc})") from exc
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(item, "expected KEY=VALUE")
        try:
            data[key] = json.loads(value)
        except json.JSONDecodeError:
            data[key] = value
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from exc


def _read_vector(path) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8").replace(",", " ")
    try:
        return np.array([float(tok) for tok in text.split()])
    except ValueError as exc:
        raise ConfigError("vector", f"not a list of numbers ({exc})") from exc


def cmd_synthesize(args) -> int:
    cfg = _load_config(args)
    c_f = em.synthesize_steering_config(cfg.scene(), cfg.target)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_config_csv(out, c_f)
    log.info("wrote steering configuration to %s", out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    v = _read_vector(args.vector)
    if v.size == 0:
        raise ConfigError("vector", "empty vector")
    r = decompose(v, args.I_e, args.epsilon)
    print(r.to_json())
    return EXIT_OK


def cmd_sense(args) -> int:
    cfg = _load_config(args)
    res = run_position(cfg, cfg.source_phi, cfg.source_theta)
    res.manifest.extra["config"] = cfg.to_dict()
    stem = position_stem(cfg.source_phi, cfg.source_theta)
    write_wavefront(cfg.output_dir, stem, res.wavefront, res.manifest)
    log.info("efficiency %.4f (sigma %.4g), %d measurements", res.row.efficiency, res.row.sigma,
             res.manifest.total_measurements)
    return EXIT_OK


def cmd_scatter(args) -> int:
    cfg = _load_config(args)
    scene = cfg.scene()
    if args.configuration:
        config = read_config_csv(args.configuration)
    else:
        config = em.synthesize_steering_config(scene, cfg.target)
    diagram = em.scattering_diagram(config, scene, args.resolution)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    diagram.write_csv(out)
    peak, _ = diagram.peak()
    log.info("peak at phi=%g theta=%g", peak.phi, peak.theta)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    results = run_sweep(cfg, workers=args.workers)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    for res in results:
        res.manifest.extra["config"] = cfg.to_dict()
        write_wavefront(outdir, position_stem(res.row.phi, res.row.theta), res.wavefront, res.manifest)
        log.info("phi=%g theta=%g efficiency=%.4f sigma=%.4g", res.row.phi, res.row.theta,
                 res.row.efficiency, res.row.sigma)
    (outdir / "sweep.csv").write_text(sweep_to_csv([r.row for r in results]), encoding="utf-8", newline="\n")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    failures = run_selftest(print_fn=print)
    return EXIT_OK if not failures else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hsfsense", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", help="JSON experiment configuration")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one configuration field (value parsed as JSON)")
        return p

    p = with_config(sub.add_parser("synthesize", help="write a steering configuration CSV"))
    p.add_argument("--out", default="steering.csv")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("decompose", help="binary decomposition of a vector file, printed as JSON")
    p.add_argument("vector", help="file with whitespace- or comma-separated numbers")
    p.add_argument("--I-e", dest="I_e", type=int, default=2)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.set_defaults(func=cmd_decompose)

    p = with_config(sub.add_parser("sense", help="run joint sensing for the configured source"))
    p.set_defaults(func=cmd_sense)

    p = with_config(sub.add_parser("scatter", help="write a scattering-diagram CSV"))
    p.add_argument("--configuration", help="configuration CSV (default: synthesized steering)")
    p.add_argument("--resolution", type=float, default=1.0)
    p.add_argument("--out", default="scatter.csv")
    p.set_defaults(func=cmd_scatter)

    p = with_config(sub.add_parser("sweep", help="efficiency table over source positions"))
    p.add_argument("--workers", type=int, default=1, help="processes to spread positions over")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("selftest", help="ideal-backend oracle checks")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
