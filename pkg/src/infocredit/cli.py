"""Command-line interface: ``infocredit <command> [flags]``.

Commands write machine-readable outputs plus a JSON run manifest next to
them. Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 numerical failure.

Every flag may also come from ``--config FILE``, a flat ``key = value`` file
whose keys are flag names without the leading dashes. Flags given on the
command line win over the file. ``INFOCREDIT_SEED`` supplies the default
seed when neither sets one.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .binning import BinningConfig, assign_bins, dumps_schemes, fit_all, loads_schemes
from .errors import ConfigError, DataError, InfoCreditError, NumericalError
from .fairness import K_99, dual_iv, ratio_curve
from .models import compare_encodings
from .pareto import DEFAULT_EPSILONS, FairnessBudgetSweep, prepare_scorecard_data, sweep_frontier
from .synthdata import GeneratorConfig, generate, load_csv, split, write_csv
from .woe import (build_woe_table, classify_drift, classify_strength, drift_p_value,
                  information_value, psi_from_counts)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
SEED_ENV = "INFOCREDIT_SEED"

IV_RECORD_SCHEMA = {
    "type": "object",
    "required": ["feature_id", "n_bins", "iv", "se", "z", "p_value", "p_value_chi2",
                 "ci_low", "ci_high", "alpha", "strength", "smoothed", "fairness"],
    "properties": {
        "feature_id": {"type": "string"},
        "n_bins": {"type": "integer", "minimum": 1},
        "iv": {"type": "number", "minimum": 0},
        "se": {"type": "number", "minimum": 0},
        "z": {"type": ["number", "string"]},
        "p_value": {"type": "number", "minimum": 0, "maximum": 1},
        "p_value_chi2": {"type": "number", "minimum": 0, "maximum": 1},
        "ci_low": {"type": "number"},
        "ci_high": {"type": "number"},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "strength": {"enum": ["weak", "medium", "strong", "suspicious"]},
        "smoothed": {"type": "boolean"},
        "fairness": {
            "type": "object",
            "required": ["iv", "se", "epsilon", "violation_probability", "passes",
                         "trade_ratio", "conservative_ratio", "k"],
        },
    },
}


# ------------------------------------------------------------------ helpers

def _num(x: float) -> str:
    return format(float(x), ".17g")


def _json_safe(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, np.generic):
        return _json_safe(x.item())
    return x


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(path, command, args, inputs, outputs, seed, started) -> None:
    """Run manifest: everything needed to reproduce and verify the outputs."""
    config = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    manifest = {
        "command": command,
        "config": _json_safe({k: (str(v) if isinstance(v, Path) else v) for k, v in config.items()}),
        "inputs": {str(p): sha256_file(p) for p in inputs},
        "outputs": {str(p): sha256_file(p) for p in outputs},
        "seed": seed,
        "version": __version__,
        "started_at": started,
        "finished_at": _now(),
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _manifest_beside(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _shift(text: str) -> tuple:
    name, sep, value = str(text).partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    return name.strip(), float(value)


def _open_out(out):
    if out is None:
        return sys.stdout
    return open(out, "w", encoding="utf-8", newline="")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}")


# ----------------------------------------------------------------- commands

def cmd_simulate(args) -> int:
    started = _now()
    try:
        cfg = GeneratorConfig(n_rows=args.n, seed=args.seed, group_share=args.group_share,
                              base_default_rate=args.base_rate,
                              group_feature_correlation=args.correlation,
                              feature_shifts=dict(args.shift or ()))
    except ConfigError as exc:
        raise ConfigError(f"{_flag_for(str(exc))}: {exc}") from None
    ds = generate(cfg)
    write_csv(ds, args.out)
    write_manifest(_manifest_beside(args.out), "simulate", args, [], [args.out], args.seed, started)
    return EXIT_OK


_FLAG_OF_FIELD = {
    "n_rows": "--n", "group_share": "--group-share", "base_default_rate": "--base-rate",
    "group_feature_correlation": "--correlation", "unknown feature": "--shift",
}


def _flag_for(message: str) -> str:
    for field_name, flag in _FLAG_OF_FIELD.items():
        if message.startswith(field_name):
            return flag
    return "config"


def _binning_config(args) -> BinningConfig:
    return BinningConfig(max_splits=args.max_splits, min_bin_fraction=args.min_bin_frac)


def iv_records(dataset, config: BinningConfig, alpha: float, epsilon: float, k: float):
    """Per-feature IV and fairness records, sorted by IV descending."""
    schemes = fit_all(dataset.X, dataset.default, dataset.protected, dataset.feature_names, config)
    records = []
    for s in schemes:
        est = information_value(build_woe_table(s, "outcome"), alpha)
        rep = dual_iv(s, epsilon, k, alpha)
        rec = {"feature_id": s.feature_id, "n_bins": s.n_bins}
        rec.update(est.to_dict())
        rec["p_value_chi2"] = drift_p_value(est, s.n_bins)
        rec["strength"] = classify_strength(est.iv)
        rec["smoothed"] = bool(build_woe_table(s, "outcome").smoothed)
        rec["fairness"] = {
            "iv": rep.iv_fair.iv, "se": rep.iv_fair.se, "epsilon": epsilon,
            "violation_probability": rep.violation_probability, "passes": rep.passes,
            "trade_ratio": rep.trade_ratio, "conservative_ratio": rep.conservative_ratio,
            "k": k,
        }
        records.append((rec, rep))
    # stable sort: ties keep the input column order
    records.sort(key=lambda r: -r[0]["iv"])
    return schemes, records


def cmd_iv(args) -> int:
    started = _now()
    ds = load_csv(args.data, args.target_col, args.protected_col)
    schemes, records = iv_records(ds, _binning_config(args), args.alpha, args.epsilon, args.k)
    with _open_out(args.out) as fh:
        for rec, _ in records:
            fh.write(json.dumps(_json_safe(rec), sort_keys=True) + "\n")
    outputs = []
    if args.schemes_out:
        Path(args.schemes_out).write_text(dumps_schemes(schemes), encoding="utf-8")
        outputs.append(args.schemes_out)
    if args.out is not None:
        outputs.insert(0, args.out)
        write_manifest(_manifest_beside(args.out), "iv", args, [args.data], outputs, None, started)
    return EXIT_OK


def psi_records(baseline, current, schemes, alpha: float):
    if tuple(baseline.feature_names) != tuple(current.feature_names):
        raise DataError(f"feature columns differ: {list(baseline.feature_names)} vs "
                        f"{list(current.feature_names)}")
    by_name = {s.feature_id: s for s in schemes}
    records = []
    for j, name in enumerate(baseline.feature_names):
        if name not in by_name:
            raise DataError(f"no bins for feature {name!r}")
        s = by_name[name]
        k = s.n_bins
        base = np.bincount(assign_bins(s, baseline.X[:, j]), minlength=k)[:k]
        cur = np.bincount(assign_bins(s, current.X[:, j]), minlength=k)[:k]
        est = psi_from_counts(base, cur, alpha)
        p_chi2 = drift_p_value(est, k)
        rec = {"feature_id": name, "n_bins": k}
        rec.update(est.to_dict())
        rec["psi"] = rec.pop("iv")
        rec["p_value_chi2"] = p_chi2
        rec["label"] = classify_drift(est.iv)
        rec["drift_detected"] = bool(p_chi2 < alpha)
        records.append(rec)
    return records


def cmd_psi(args) -> int:
    started = _now()
    base = load_csv(args.baseline, args.target_col, args.protected_col)
    cur = load_csv(args.current, args.target_col, args.protected_col)
    inputs = [args.baseline, args.current]
    if args.bins_from:
        try:
            schemes = loads_schemes(Path(args.bins_from).read_text(encoding="utf-8"))
        except (ValueError, KeyError, TypeError) as exc:
            raise DataError(f"{args.bins_from}: not a bin-scheme file ({exc})") from None
        inputs.append(args.bins_from)
    else:
        schemes = fit_all(base.X, base.default, base.protected, base.feature_names,
                          _binning_config(args))
    records = psi_records(base, cur, schemes, args.alpha)
    with _open_out(args.out) as fh:
        for rec in records:
            fh.write(json.dumps(_json_safe(rec), sort_keys=True) + "\n")
    if args.out is not None:
        write_manifest(_manifest_beside(args.out), "psi", args, inputs, [args.out], None, started)
    return EXIT_OK


def cmd_fairness(args) -> int:
    started = _now()
    ds = load_csv(args.data, args.target_col, args.protected_col)
    _, records = iv_records(ds, _binning_config(args), args.alpha, args.epsilon, args.k)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = out_dir / "fairness.jsonl"
    curve = out_dir / "ratio_curve.csv"
    with open(reports, "w", encoding="utf-8") as fh:
        for _, rep in records:
            fh.write(json.dumps(_json_safe(rep.to_dict()), sort_keys=True) + "\n")
    with open(curve, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature_id", "k", "conservative_ratio"])
        for _, rep in records:
            for k, r in ratio_curve(rep):
                w.writerow([rep.feature_id, format(k, ".10g"), "inf" if math.isinf(r) else _num(r)])
    write_manifest(out_dir / "manifest.json", "fairness", args, [args.data], [reports, curve],
                   None, started)
    return EXIT_OK


def cmd_encode_compare(args) -> int:
    started = _now()
    ds = load_csv(args.data, args.target_col, args.protected_col)
    train, test = split(ds, args.train_fraction, args.seed)
    schemes = fit_all(train.X, train.default, train.protected, train.feature_names,
                      _binning_config(args))
    rows = compare_encodings(schemes, train, test, args.rounds_list, args.learning_rate)
    with _open_out(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["encoding", "rounds", "train_auc", "test_auc", "gap",
                    "train_logloss", "test_logloss"])
        for r in rows:
            w.writerow([r.encoding, r.rounds, _num(r.train_auc), _num(r.test_auc), _num(r.gap),
                        _num(r.train_logloss), _num(r.test_logloss)])
    if args.out is not None:
        write_manifest(_manifest_beside(args.out), "encode-compare", args, [args.data],
                       [args.out], args.seed, started)
    return EXIT_OK


def cmd_pareto(args) -> int:
    started = _now()
    ds = load_csv(args.data, args.target_col, args.protected_col)
    sweep = FairnessBudgetSweep(epsilons=args.epsilons, score_bins=args.score_bins,
                                approval_rate=args.approval_rate)
    schemes = fit_all(ds.X, ds.default, ds.protected, ds.feature_names, _binning_config(args))
    tables = [build_woe_table(s, "outcome") for s in schemes]
    data = prepare_scorecard_data(schemes, tables, ds)
    points = sweep_frontier(data, sweep, workers=args.workers)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frontier = out_dir / "frontier.csv"
    outputs = [frontier]
    with open(frontier, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epsilon", "iv_model", "iv_demographic", "auc", "air", "feasible",
                    "iterations", "flags"])
        for i, pt in enumerate(points):
            w.writerow([_num(pt.epsilon), _num(pt.iv_model), _num(pt.iv_demographic),
                        _num(pt.auc), _num(pt.air), str(pt.feasible).lower(), pt.iterations,
                        ";".join(pt.flags)])
            model_path = out_dir / f"model_{i:02d}.json"
            payload = {"epsilon": pt.epsilon, "feasible": pt.feasible, "flags": list(pt.flags),
                       "model": pt.model.to_dict()}
            model_path.write_text(json.dumps(_json_safe(payload), indent=2, sort_keys=True)
                                  + "\n", encoding="utf-8")
            outputs.append(model_path)
    write_manifest(out_dir / "manifest.json", "pareto", args, [args.data], outputs, None, started)
    if not any(pt.feasible for pt in points):
        print("error: no budget produced a feasible scorecard", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


# ------------------------------------------------------------------- parser

def _data_flags(p):
    p.add_argument("--target-col", default="default")
    p.add_argument("--protected-col", default="protected")


def _binning_flags(p):
    p.add_argument("--max-splits", type=int, default=4)
    p.add_argument("--min-bin-frac", type=float, default=0.05)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infocredit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=Path, help="flat key = value file mirroring the flags")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic credit dataset")
    p.add_argument("--n", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--group-share", type=float, default=0.30)
    p.add_argument("--base-rate", type=float, default=0.15)
    p.add_argument("--correlation", type=float, default=0.5)
    p.add_argument("--shift", type=_shift, action="append",
                   help="name=value mean shift for one feature (repeatable)")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("iv", help="per-feature IV with inference and fairness IV")
    p.add_argument("--data", type=Path, required=True)
    _data_flags(p)
    _binning_flags(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--epsilon", type=float, default=0.05, help="fairness IV budget")
    p.add_argument("--k", type=float, default=K_99, help="multiplier for the conservative ratio")
    p.add_argument("--schemes-out", type=Path)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_iv)

    p = sub.add_parser("psi", help="per-feature drift between two files")
    p.add_argument("--baseline", type=Path, required=True)
    p.add_argument("--current", type=Path, required=True)
    p.add_argument("--bins-from", type=Path)
    _data_flags(p)
    _binning_flags(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("fairness", help="dual IV reports and ratio-vs-k curves")
    p.add_argument("--data", type=Path, required=True)
    _data_flags(p)
    _binning_flags(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--k", type=float, default=K_99)
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_fairness)

    p = sub.add_parser("encode-compare", help="one-hot LR vs WoE LR vs stump boosting")
    p.add_argument("--data", type=Path, required=True)
    _data_flags(p)
    _binning_flags(p)
    p.add_argument("--rounds-list", type=_int_list, default=(10, 50, 100))
    p.add_argument("--learning-rate", type=float, default=0.3)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_encode_compare)

    p = sub.add_parser("pareto", help="sweep fairness budgets for the WoE scorecard")
    p.add_argument("--data", type=Path, required=True)
    _data_flags(p)
    _binning_flags(p)
    p.add_argument("--epsilons", type=_float_list, default=DEFAULT_EPSILONS)
    p.add_argument("--score-bins", type=int, default=10)
    p.add_argument("--approval-rate", type=float, default=0.5)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_pareto)
    return parser


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for no, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{no}: expected key = value")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _apply_config(parser, argv, config: dict):
    """Re-parse with config values as argv defaults so flags still win."""
    args = parser.parse_args(argv)
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sub = sub_action.choices[args.command]
    known = {a.dest: a for a in sub._actions}
    extra = []
    for key, value in config.items():
        if key not in known or key in ("help", "func"):
            raise ConfigError(f"config key {key!r} is not a flag of {args.command!r}")
        flag = known[key].option_strings[-1]
        if isinstance(known[key], argparse._AppendAction):
            for item in value.split(","):
                extra += [flag, item.strip()]
        else:
            extra += [flag, value]
    cmd_idx = argv.index(args.command)
    return parser.parse_args(argv[:cmd_idx + 1] + extra + argv[cmd_idx + 1:])


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config is not None:
            try:
                args = _apply_config(parser, argv, read_config_file(args.config))
            except SystemExit as exc:
                return int(exc.code or 0)
        if hasattr(args, "seed") and args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InfoCreditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
