"""How the log2(m) ceiling of an m-point sample hides linear growth.

For a fair coin the upper-bound bits saturate near log2((1 - eps) * m) once
typical averaged distances exceed eps / 2, which happens within a few dozen
steps.  Larger samples only push the ceiling up by log2 of the factor.
"""
import argparse
import math

from scaling_entropy.experiments import ExperimentConfig, run_experiment
from scaling_entropy.systems import BernoulliFinite, DiscreteCoordinate, SystemSpec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--eps", type=float, default=0.25)
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 512, 2048])
    args = ap.parse_args()
    grid = tuple(range(1, 17)) + (32, 64, 128, 256, 512, 1024)
    spec = SystemSpec(BernoulliFinite((0.5, 0.5)), 1.0)
    for m in args.sizes:
        curve = run_experiment(ExperimentConfig(spec, DiscreteCoordinate(1), m, grid, (args.eps,), 0, "bounds-only"))
        n, h = curve.series(args.eps)
        ceiling = math.log2(math.ceil((1 - args.eps) * m))
        print(f"m={m} ceiling~{ceiling:.2f} bits")
        print("  " + " ".join(f"{int(a)}:{v:.2f}" for a, v in zip(n, h)))


if __name__ == "__main__":
    main()
