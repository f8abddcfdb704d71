"""Entropy curves and growth classes for the four reference systems.

Usage: python scripts/growth_suite.py [--m 512] [--seed 0] [--outdir curves/]
"""
import argparse
import os

from scaling_entropy.cli import curve_to_csv
from scaling_entropy.experiments import ExperimentConfig, classify_curve, run_experiment
from scaling_entropy.substitution import PERIOD_DOUBLING, THUE_MORSE
from scaling_entropy.systems import (
    BernoulliFinite,
    DiscreteCoordinate,
    IrrationalRotation,
    SubstitutionSystem,
    SystemSpec,
)

SYSTEMS = {
    "bernoulli": (SystemSpec(BernoulliFinite((0.5, 0.5)), 1.0), range(4, 11)),
    "rotation": (SystemSpec(IrrationalRotation(), 0.0), range(6, 13)),
    "thue_morse": (SystemSpec(SubstitutionSystem(THUE_MORSE), 0.0), range(4, 13)),
    "period_doubling": (SystemSpec(SubstitutionSystem(PERIOD_DOUBLING), 0.0), range(4, 13)),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=512)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir")
    args = ap.parse_args()
    for name, (spec, exps) in SYSTEMS.items():
        cfg = ExperimentConfig(spec, DiscreteCoordinate(1), args.m, tuple(2 ** k for k in exps),
                               (0.4, 0.3, 0.25, 0.2, 0.1), args.seed, "bounds-only")
        curve = run_experiment(cfg)
        per_eps, verdict = classify_curve(curve)
        print(f"{name}: verdict {verdict}")
        for eps, res in sorted(per_eps.items()):
            _, h = curve.series(eps)
            print(f"  eps={eps:g} {res.summary():28s} log-slope={res.log_slope:+.3f} "
                  f"H_upper={[round(float(v), 2) for v in h]}")
        if args.outdir:
            os.makedirs(args.outdir, exist_ok=True)
            with open(os.path.join(args.outdir, f"{name}.csv"), "w") as fh:
                fh.write(curve_to_csv(curve))


if __name__ == "__main__":
    main()
