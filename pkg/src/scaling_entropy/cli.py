"""Command-line front end.

Exit codes: 0 ok, 2 invalid substitution, 3 invalid config or grid,
4 instance exceeds exact_limit with bounds disabled, 5 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Optional, Sequence

from .experiments import (
    ClassificationSettings,
    CurveRow,
    EntropyCurve,
    ExperimentConfig,
    ZeroCurveError,
    classify_curve,
    classify_growth,
    fingerprint,
    invariance_test,
    run_experiment,
    sequential_entropy_estimate,
)
from .semimetric import InstanceTooLarge
from .substitution import SubstitutionError, analyze, from_json_dict
from .systems import (
    GOLDEN,
    AbsCoordinate,
    BernoulliContinuous,
    BernoulliFinite,
    DiscreteCoordinate,
    IrrationalRotation,
    SubstitutionSystem,
    SystemSpec,
    sample_orbits,
)

CSV_COLUMNS = ["n", "epsilon", "k_lower", "k_upper", "h_lower_bits", "h_upper_bits", "estimator", "seed"]
ALPHA_TAGS = {"golden": GOLDEN, "sqrt2": 2 ** 0.5 - 1}

EXIT_OK, EXIT_SUBST, EXIT_CONFIG, EXIT_TOO_LARGE, EXIT_IO = 0, 2, 3, 4, 5


class ConfigError(ValueError):
    pass


@dataclass
class CliConfig:
    subcommand: str
    input_path: str
    output_path: Optional[str] = None
    seed: Optional[int] = None
    epsilon: Optional[float] = None


def _read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None


def load_substitution(path: str):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SubstitutionError("malformed", f"{path}: not valid JSON ({exc})") from None
    return from_json_dict(obj)


def system_from_json(obj, base_dir: str = ".") -> SystemSpec:
    try:
        kind = obj["kind"]
        meta = obj.get("known_kolmogorov_entropy")
        if kind == "bernoulli":
            return SystemSpec(BernoulliFinite(tuple(obj["p"])), meta)
        if kind == "bernoulli_continuous":
            return SystemSpec(BernoulliContinuous(), "infinite" if meta is None else meta)
        if kind == "rotation":
            alpha = obj.get("alpha", "golden")
            tag = alpha if isinstance(alpha, str) else "float64"
            if isinstance(alpha, str):
                if alpha not in ALPHA_TAGS:
                    raise ConfigError(f"unknown alpha tag {alpha!r}; known: {sorted(ALPHA_TAGS)}")
                alpha = ALPHA_TAGS[alpha]
            return SystemSpec(IrrationalRotation(float(alpha), obj.get("beta"), tag), 0.0 if meta is None else meta)
        if kind == "substitution":
            if "file" in obj:
                sub = load_substitution(os.path.join(base_dir, obj["file"]))
            else:
                sub = from_json_dict(obj["substitution"])
            return SystemSpec(SubstitutionSystem(sub), 0.0 if meta is None else meta)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad system description: {exc}") from None
    raise ConfigError(f"unknown system kind {kind!r}")


def base_from_json(obj, system: SystemSpec):
    kind = obj.get("kind") if isinstance(obj, dict) else None
    if kind == "discrete":
        return DiscreteCoordinate(int(obj.get("depth", 1)))
    if kind == "abs":
        if not system.real_valued:
            raise ConfigError("abs base needs a real-valued system")
        return AbsCoordinate()
    raise ConfigError(f"unknown base kind {kind!r}")


def experiment_from_json(obj, base_dir: str = ".", seed: Optional[int] = None, base_key: str = "base") -> ExperimentConfig:
    try:
        system = system_from_json(obj["system"], base_dir)
        base = base_from_json(obj[base_key], system)
        return ExperimentConfig(
            system=system,
            base=base,
            m=int(obj["m"]),
            n_grid=tuple(obj["n_grid"]),
            epsilon_grid=tuple(obj.get("epsilon_grid", (0.4, 0.3, 0.2, 0.1))),
            seed=int(obj.get("seed", 0)) if seed is None else seed,
            estimator=obj.get("estimator", "exact-if-small"),
            exact_limit=int(obj.get("exact_limit", 14)),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SubstitutionError):
            raise
        raise ConfigError(str(exc)) from None


def curve_to_csv(curve: EntropyCurve) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in curve.rows:
        writer.writerow([r.n, f"{r.epsilon:.17g}", r.k_lower, r.k_upper,
                         f"{r.h_lower_bits:.17g}", f"{r.h_upper_bits:.17g}", curve.estimator, curve.seed])
    return buf.getvalue()


def curve_from_csv(text: str) -> EntropyCurve:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_COLUMNS:
        raise ConfigError(f"CSV header must be {','.join(CSV_COLUMNS)}")
    rows, estimator, seed = [], "", 0
    try:
        for rec in reader:
            rows.append(CurveRow(int(rec["n"]), float(rec["epsilon"]), int(rec["k_lower"]), int(rec["k_upper"])))
            estimator, seed = rec["estimator"], int(rec["seed"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad CSV row: {exc}") from None
    return EntropyCurve(rows, hashlib.sha256(text.encode()).hexdigest()[:16], estimator, seed)


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cmd_subst(cfg: CliConfig, out) -> int:
    sub = load_substitution(cfg.input_path)
    report = analyze(sub)
    digest = hashlib.sha256(json.dumps([list(r) for r in sub.rules]).encode()).hexdigest()[:16]
    print(f"seed: {cfg.seed or 0}", file=out)
    print(f"fingerprint: {digest}", file=out)
    for line in report.lines(sub.letters):
        print(line, file=out)
    return EXIT_OK


def _cmd_curve(cfg: CliConfig, out) -> int:
    config = experiment_from_json(_read_json(cfg.input_path), os.path.dirname(cfg.input_path), cfg.seed)
    text = curve_to_csv(run_experiment(config))
    echo = f"seed: {config.seed}\nfingerprint: {fingerprint(config)}\n"
    if cfg.output_path:
        write_atomic(cfg.output_path, text)
        out.write(echo)
    else:
        sys.stderr.write(echo)
        out.write(text)
    return EXIT_OK


def _cmd_classify(cfg: CliConfig, out) -> int:
    with open(cfg.input_path, encoding="utf-8") as fh:
        curve = curve_from_csv(fh.read())
    print(f"seed: {curve.seed}", file=out)
    print(f"fingerprint: {curve.fingerprint}", file=out)
    try:
        if cfg.epsilon is not None:
            res = classify_growth(curve, cfg.epsilon)
            print(f"eps={cfg.epsilon:g} class={res.summary()} log_slope={res.log_slope:.6g} "
                  f"rss_bounded={res.residuals['bounded']:.6g} rss_log={res.residuals['logarithmic']:.6g} "
                  f"rss_linear={res.residuals['linear']:.6g}", file=out)
            return EXIT_OK
        per_eps, verdict = classify_curve(curve, ClassificationSettings())
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for eps in sorted(per_eps):
        res = per_eps[eps]
        print(f"eps={eps:g} class={res.summary()} log_slope={res.log_slope:.6g} "
              f"rss_bounded={res.residuals['bounded']:.6g} rss_log={res.residuals['logarithmic']:.6g} "
              f"rss_linear={res.residuals['linear']:.6g}", file=out)
    print(f"verdict: {verdict} (agreement at the two smallest eps)", file=out)
    return EXIT_OK


def _cmd_invariance(cfg: CliConfig, out) -> int:
    obj = _read_json(cfg.input_path)
    base_dir = os.path.dirname(cfg.input_path)
    first = experiment_from_json(obj, base_dir, cfg.seed)
    try:
        base2 = base_from_json(obj["base2"], first.system)
        eps1 = float(obj["epsilon"])
        eps2 = float(obj.get("epsilon2", eps1))
        bound = float(obj.get("ratio_bound", 4.0))
        estimator = obj.get("estimator", "bounds-only")
    except KeyError as exc:
        raise ConfigError(f"missing config field {exc}") from None
    second = ExperimentConfig(first.system, base2, first.m, first.n_grid, (eps2,), first.seed, estimator)
    print(f"seed: {first.seed}", file=out)
    print(f"fingerprint: {fingerprint(first)}:{fingerprint(second)}", file=out)
    try:
        report = invariance_test(first.system, first.base, base2, first.m, first.n_grid,
                                 eps1, eps2, first.seed, bound, estimator)
    except ZeroCurveError as exc:
        print(f"result: undefined ({exc})", file=out)
        return EXIT_CONFIG
    for line in report.lines():
        print(line, file=out)
    return EXIT_OK


def _cmd_seqentropy(cfg: CliConfig, out) -> int:
    obj = _read_json(cfg.input_path)
    try:
        system = system_from_json(obj["system"], os.path.dirname(cfg.input_path))
        depth = int(obj.get("depth", 1))
        offsets = [int(a) for a in obj["offsets"]]
        terms = int(obj.get("terms", len(offsets)))
        m = int(obj["m"])
        seed = int(obj.get("seed", 0)) if cfg.seed is None else cfg.seed
        n_max = int(obj.get("n_max", offsets[terms - 1] + depth if 0 < terms <= len(offsets) else 1))
        sample = sample_orbits(system, m, n_max, seed)
        bits = sequential_entropy_estimate(sample, depth, offsets, terms)
    except KeyError as exc:
        raise ConfigError(f"missing config field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SubstitutionError):
            raise
        raise ConfigError(str(exc)) from None
    digest = hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]
    print(f"seed: {seed}", file=out)
    print(f"fingerprint: {digest}", file=out)
    print(f"bits_per_term: {bits:.17g}", file=out)
    return EXIT_OK


COMMANDS = {
    "subst": _cmd_subst,
    "curve": _cmd_curve,
    "classify": _cmd_classify,
    "invariance": _cmd_invariance,
    "seqentropy": _cmd_seqentropy,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scaling-entropy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    p = sub.add_parser("subst", help="analyse a substitution JSON file")
    p.add_argument("input_path", metavar="file")
    p = sub.add_parser("curve", help="compute an entropy curve and write CSV")
    p.add_argument("input_path", metavar="config")
    p.add_argument("-o", "--output", dest="output_path")
    p.add_argument("--seed", type=int)
    p = sub.add_parser("classify", help="classify growth of a curve CSV")
    p.add_argument("input_path", metavar="curve.csv")
    p.add_argument("--epsilon", type=float)
    for name in ("invariance", "seqentropy"):
        p = sub.add_parser(name)
        p.add_argument("input_path", metavar="config")
        p.add_argument("--seed", type=int)
    return parser


def run_cli(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    cfg = CliConfig(ns.subcommand, ns.input_path, getattr(ns, "output_path", None),
                    getattr(ns, "seed", None), getattr(ns, "epsilon", None))
    if cfg.seed is not None and not 0 <= cfg.seed < 2 ** 64:
        print("error: seed must be a 64-bit unsigned integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[cfg.subcommand](cfg, out)
    except SubstitutionError as exc:
        print(f"error: invalid substitution: {exc}", file=sys.stderr)
        return EXIT_SUBST
    except InstanceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOO_LARGE
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
