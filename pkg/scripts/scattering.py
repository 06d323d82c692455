#!/usr/bin/env python3
"""Scattering diagrams of the steering configuration alone and with a sensing pattern interleaved."""
import argparse
from pathlib import Path

from hsfsense import em
from hsfsense.decomposition import decompose
from hsfsense.experiments import ExperimentConfig
from hsfsense.geometry import interleave, reshape


def report(name, diagram, scene, cfg):
    peak, _ = diagram.peak()
    halfwidth = diagram.main_lobe_halfwidth(scene.wavelength, cfg.grid.side_length)
    level, where = diagram.parasitic_level_db(halfwidth)
    print(f"{name:>9}: peak (phi={peak.phi:g}, theta={peak.theta:g}), "
          f"strongest other lobe {level:.1f} dB at (phi={where.phi:g}, theta={where.theta:g})")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--resolution", type=float, default=1.0)
    ap.add_argument("--row", type=int, default=0, help="sampling row whose first binary row is interleaved")
    ap.add_argument("--out", default="out/scattering")
    args = ap.parse_args()

    cfg = ExperimentConfig().validate()
    scene = cfg.scene()
    c_f = em.synthesize_steering_config(scene, cfg.target)
    r = decompose(cfg.sampling_matrix().entries[args.row], cfg.I_e, cfg.epsilon)
    sensing = interleave(c_f, reshape(r.B[0], cfg.n // 2))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, config in (("steering", c_f), ("sensing", sensing)):
        diagram = em.scattering_diagram(config, scene, args.resolution)
        diagram.write_csv(out / f"{name}.csv")
        report(name, diagram, scene, cfg)


if __name__ == "__main__":
    main()
