"""Command-line front end: reproducible experiment runs emitting CSV/JSON.

Subcommands: gen-data | train | sweep | variability | bayes | hyperband
| analyze. Every output-producing run writes a JSON manifest sidecar
(<out>.manifest.json) before the results, naming the command, resolved
configuration, seed, tool version, and output paths; it is rewritten
with the finish timestamp on success. CSV bodies are byte-deterministic
given identical inputs and seeds (wall-clock columns and manifest
timestamps excluded).

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric
failure. Usage errors are raised before any output file is opened.

Config files are flat ``key = value`` text ('#' comments allowed); keys:

    depth, scheme.axes, scheme.ppi, lr, optimizer, loss.kind,
    loss.delta, batch_size, epochs, seed, init.kind, init.std,
    normalization.lo, normalization.hi, split_ratio, targets, schedule

Angle-valued fields accept 'pi' literals (e.g. ``normalization.lo = -pi``).
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from math import pi

import numpy as np

from qrulab import __version__, analysis, dataio, hpo, training
from qrulab import circuit as qc
from qrulab.errors import ConfigError, DataError, NumericFailure

CONFIG_DEFAULTS = {
    "depth": "4",
    "scheme.axes": "xyx",
    "scheme.ppi": "3",
    "lr": "0.0005",
    "optimizer": "adam",
    "loss.kind": "l2",
    "loss.delta": "1",
    "batch_size": "1",
    "epochs": "30",
    "seed": "0",
    "init.kind": "constant",
    "init.std": "0.1",
    "normalization.lo": "-pi",
    "normalization.hi": "pi",
    "split_ratio": "0.8",
    "targets": "-1,0,1",
    "schedule": "constant",
}

_PI_RE = re.compile(r"^(-?\d*\.?\d*)\s*\*?\s*pi$")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 by default; route through the usage path instead
    def error(self, message):
        raise _UsageError(message)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _parse_real(text: str, what: str) -> float:
    s = text.strip().lower()
    try:
        return float(s)
    except ValueError:
        pass
    m = _PI_RE.match(s)
    if m:
        coeff = m.group(1)
        if coeff in ("", "+"):
            coeff = "1"
        elif coeff == "-":
            coeff = "-1"
        return float(coeff) * pi
    raise ConfigError(f"cannot parse {what} value {text!r}")


def _parse_range(text: str, what: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"{what} must look like 'lo:hi', got {text!r}")
    return _parse_real(parts[0], what), _parse_real(parts[1], what)


def parse_config_file(path) -> dict[str, str]:
    """Flat key = value text; unknown keys are usage errors."""
    out = dict(CONFIG_DEFAULTS)
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for line_no, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value', got {raw.rstrip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in CONFIG_DEFAULTS:
            raise ConfigError(f"{path}:{line_no}: unknown config key {key!r}")
        out[key] = value
    return out


@dataclass(frozen=True)
class RunSettings:
    """Everything needed to run one training workflow from raw data."""

    train: training.TrainConfig
    norm_lo: float
    norm_hi: float
    split_ratio: float


_LOSS_BY_NAME = {"l1": training.L1, "l2": training.L2}


def settings_from_dict(cfg: dict[str, str]) -> RunSettings:
    try:
        loss_kind = cfg["loss.kind"].lower()
        if loss_kind == "huber":
            loss = training.huber(float(cfg["loss.delta"]))
        elif loss_kind in _LOSS_BY_NAME:
            loss = _LOSS_BY_NAME[loss_kind]
        else:
            raise ConfigError(f"unknown loss.kind {cfg['loss.kind']!r}")
        scheme = qc.EncodingScheme.from_axes(cfg["scheme.axes"], int(cfg["scheme.ppi"]))
        spec = qc.CircuitSpec(int(cfg["depth"]), len(dataio.CSV_HEADER) - 1, scheme)
        schedule = {"constant": training.ConstantLR, "step": training.StepDecay}.get(
            cfg["schedule"].lower()
        )
        if schedule is None:
            raise ConfigError(f"unknown schedule {cfg['schedule']!r}")
        train = training.TrainConfig(
            spec=spec,
            epochs=int(cfg["epochs"]),
            batch_size=int(cfg["batch_size"]),
            lr=float(cfg["lr"]),
            optimizer=training.OptimizerKind(cfg["optimizer"].lower()),
            loss=loss,
            seed=int(cfg["seed"]),
            init=training.InitSpec(cfg["init.kind"].lower(), 0.5, float(cfg["init.std"])),
            schedule=schedule,
            targets=tuple(float(t) for t in cfg["targets"].split(",")),
        )
        return RunSettings(
            train=train,
            norm_lo=_parse_real(cfg["normalization.lo"], "normalization.lo"),
            norm_hi=_parse_real(cfg["normalization.hi"], "normalization.hi"),
            split_ratio=float(cfg["split_ratio"]),
        )
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc


def _load_settings(args) -> tuple[RunSettings, dict[str, str]]:
    cfg = parse_config_file(args.config) if args.config else dict(CONFIG_DEFAULTS)
    if getattr(args, "seed", None) is not None:
        cfg["seed"] = str(args.seed)
    settings = settings_from_dict(cfg)
    return settings, cfg


# --------------------------------------------------------------------------
# manifests and output helpers
# --------------------------------------------------------------------------


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_manifest(primary_out, command, resolved, seed, outputs, started, finished=None):
    manifest = {
        "command": command,
        "resolved_config": resolved,
        "seed": seed,
        "version": __version__,
        "started": started,
        "finished": finished,
        "outputs": [str(p) for p in outputs],
    }
    path = f"{primary_out}.manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


class _ManifestScope:
    """Write the manifest before results, stamp the finish time after."""

    def __init__(self, primary_out, command, resolved, seed, outputs):
        self.args = (primary_out, command, resolved, seed, outputs)
        self.started = _now()

    def __enter__(self):
        _write_manifest(*self.args, started=self.started)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            _write_manifest(*self.args, started=self.started, finished=_now())
        return False


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _train_once(settings: RunSettings, raw: dataio.Dataset, split_seed: int):
    train_raw, test_raw = dataio.split_shuffle(raw, settings.split_ratio, split_seed)
    train = dataio.normalize(train_raw, settings.norm_lo, settings.norm_hi)
    test = dataio.apply_normalization(test_raw, train.normalization)
    return training.fit(settings.train, train, test)


def _report_rowvalues(report: training.TrainReport):
    return (
        report.train_loss[-1],
        report.test_loss[-1],
        report.train_acc[-1],
        report.test_acc[-1],
        report.trainability,
        report.wall_time,
    )


_SUMMARY_COLUMNS = (
    "final_train_loss",
    "final_test_loss",
    "final_train_acc",
    "final_test_acc",
    "trainability",
    "wall_time",
)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def _cmd_gen_data(args) -> int:
    cfg = dataio.SynthConfig(n_per_class=args.n, spread=args.spread, overlap=args.overlap)
    resolved = {
        "n_per_class": args.n,
        "spread": args.spread,
        "overlap": args.overlap,
        "seed": args.seed,
    }
    ds = dataio.generate_synthetic(cfg, args.seed)
    with _ManifestScope(args.out, "gen-data", resolved, args.seed, [args.out]):
        dataio.save_records(ds, args.out)
    return 0


def _cmd_train(args) -> int:
    settings, cfg = _load_settings(args)
    raw = dataio.load_records(args.data)
    outputs = [args.out] + ([args.curves] if args.curves else [])
    with _ManifestScope(args.out, "train", cfg, settings.train.seed, outputs):
        report = _train_once(settings, raw, settings.train.seed)
        payload = {
            "config": cfg,
            "data": str(args.data),
            "final": {
                "train_loss": report.train_loss[-1],
                "test_loss": report.test_loss[-1],
                "train_acc": report.train_acc[-1],
                "test_acc": report.test_acc[-1],
                "trainability": report.trainability,
                "wall_time": report.wall_time,
            },
            "final_params": [float(v) for v in report.final_params],
        }
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        if args.curves:
            rows = [
                (e, tl, vl, ta, va)
                for e, (tl, vl, ta, va) in enumerate(
                    zip(report.train_loss, report.test_loss, report.train_acc, report.test_acc)
                )
            ]
            _write_csv(
                args.curves,
                ("epoch", "train_loss", "test_loss", "train_acc", "test_acc"),
                rows,
            )
    return 0


_SWEEP_DIMS = ("depth", "lr", "batch_size", "optimizer", "loss", "normalization", "scheme", "ppi")


def _apply_dim(settings: RunSettings, dim: str, value: str) -> RunSettings:
    train = settings.train
    spec = train.spec
    try:
        if dim == "depth":
            train = replace(train, spec=replace(spec, depth=int(value)))
        elif dim == "lr":
            train = replace(train, lr=float(value))
        elif dim == "batch_size":
            train = replace(train, batch_size=int(value))
        elif dim == "optimizer":
            train = replace(train, optimizer=training.OptimizerKind(value.lower()))
        elif dim == "loss":
            kind = value.lower()
            loss = training.huber(train.loss.delta) if kind == "huber" else _LOSS_BY_NAME[kind]
            train = replace(train, loss=loss)
        elif dim == "normalization":
            lo, hi = _parse_range(value, "normalization")
            return replace(settings, norm_lo=lo, norm_hi=hi)
        elif dim == "scheme":
            scheme = qc.EncodingScheme.from_axes(value, spec.scheme.params_per_input)
            train = replace(train, spec=replace(spec, scheme=scheme))
        elif dim == "ppi":
            scheme = qc.EncodingScheme.from_axes(spec.scheme.axes, int(value))
            train = replace(train, spec=replace(spec, scheme=scheme))
        else:
            raise ConfigError(f"unknown sweep dimension {dim!r}")
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad value {value!r} for dimension {dim}: {exc}") from exc
    return replace(settings, train=train)


def _cmd_sweep(args) -> int:
    settings, cfg = _load_settings(args)
    values = [v for v in args.values.split(",") if v]
    if not values:
        raise ConfigError("--values must list at least one value")
    if args.repeats < 1:
        raise ConfigError("--repeats must be >= 1")
    raw = dataio.load_records(args.data)
    tasks = []
    for value in values:
        per_value = _apply_dim(settings, args.dim, value)
        for rep in range(args.repeats):
            run_seed = settings.train.seed + rep
            run_settings = replace(per_value, train=replace(per_value.train, seed=run_seed))
            tasks.append((value, rep, run_seed, run_settings))

    def _run(task):
        value, rep, run_seed, run_settings = task
        report = _train_once(run_settings, raw, run_seed)
        return (args.dim, value, rep, run_seed) + _report_rowvalues(report)

    resolved = dict(cfg, sweep_dim=args.dim, sweep_values=args.values, repeats=args.repeats)
    with _ManifestScope(args.out, "sweep", resolved, settings.train.seed, [args.out]):
        rows = hpo._pool_map(_run, tasks, args.threads)
        _write_csv(args.out, ("dim", "value", "repeat", "seed") + _SUMMARY_COLUMNS, rows)
    return 0


def _cmd_variability(args) -> int:
    settings, cfg = _load_settings(args)
    if args.n_runs < 2:
        raise ConfigError("--n-runs must be >= 2")
    raw = dataio.load_records(args.data)
    base_seed = settings.train.seed
    gauss = replace(settings.train.init, kind="gaussian")

    def _run(run_idx):
        run_seed = base_seed + run_idx
        run_settings = replace(
            settings, train=replace(settings.train, seed=run_seed, init=gauss)
        )
        report = _train_once(run_settings, raw, run_seed)  # reshuffled split per run
        return (run_idx, run_seed) + _report_rowvalues(report)

    resolved = dict(cfg, n_runs=args.n_runs)
    with _ManifestScope(args.out, "variability", resolved, base_seed, [args.out]):
        rows = hpo._pool_map(_run, list(range(args.n_runs)), args.threads)
        table = np.array([row[2:] for row in rows], dtype=float)
        summary_mean = ("mean", "") + tuple(table.mean(axis=0))
        summary_std = ("std", "") + tuple(table.std(axis=0))
        _write_csv(
            args.out,
            ("run", "seed") + _SUMMARY_COLUMNS,
            list(rows) + [summary_mean, summary_std],
        )
    return 0


def _hpo_space(args) -> hpo.HpoSpace:
    if getattr(args, "search_normalization", False):
        return hpo.HpoSpace(normalization_choices=hpo.NORMALIZATION_CHOICES)
    return hpo.HpoSpace()


def _hpo_objective(settings: RunSettings, raw, data_seed, epochs_default):
    """Deterministic (config, budget) -> final mean test loss."""
    train_raw, test_raw = dataio.split_shuffle(raw, settings.split_ratio, data_seed)

    def objective(hcfg: hpo.HpoConfig, epochs: int) -> float:
        lo, hi = hcfg.normalization or (settings.norm_lo, settings.norm_hi)
        train = dataio.normalize(train_raw, lo, hi)
        test = dataio.apply_normalization(test_raw, train.normalization)
        cfg = replace(
            settings.train,
            spec=replace(settings.train.spec, depth=hcfg.depth),
            lr=hcfg.lr,
            loss=hcfg.loss,
            optimizer=hcfg.optimizer,
            epochs=epochs,
        )
        return training.fit(cfg, train, test).test_loss[-1]

    return objective


def _hpo_rows(result: hpo.SearchResult):
    rows = []
    for t in result.trials:
        norm = "" if t.config.normalization is None else (
            f"{_fmt(t.config.normalization[0])}:{_fmt(t.config.normalization[1])}"
        )
        rows.append(
            (
                t.index,
                t.config.depth,
                t.config.lr,
                t.config.loss.kind,
                t.config.optimizer.name,
                norm,
                t.budget,
                t.objective,
                t.best_so_far,
            )
        )
    return rows


_HPO_HEADER = (
    "index",
    "depth",
    "lr",
    "loss",
    "optimizer",
    "normalization",
    "budget",
    "objective",
    "best_so_far",
)


def _cmd_bayes(args) -> int:
    settings, cfg = _load_settings(args)
    raw = dataio.load_records(args.data)
    objective = _hpo_objective(settings, raw, settings.train.seed, args.epochs)
    space = _hpo_space(args)
    resolved = dict(
        cfg, n_calls=args.n_calls, kappa=args.kappa, n_initial=args.n_initial, epochs=args.epochs
    )
    with _ManifestScope(args.out, "bayes", resolved, settings.train.seed, [args.out]):
        result = hpo.bayes_search(
            space,
            lambda c: objective(c, args.epochs),
            n_calls=args.n_calls,
            kappa=args.kappa,
            seed=settings.train.seed,
            n_initial=args.n_initial,
            budget=args.epochs,
            threads=args.threads,
        )
        _write_csv(args.out, _HPO_HEADER, _hpo_rows(result))
        if result.capped:
            print("note: n_calls exceeded the grid size and was capped", file=sys.stderr)
    return 0


def _cmd_hyperband(args) -> int:
    settings, cfg = _load_settings(args)
    raw = dataio.load_records(args.data)
    objective = _hpo_objective(settings, raw, settings.train.seed, args.max_budget)
    space = _hpo_space(args)
    resolved = dict(cfg, max_budget=args.max_budget, eta=args.eta)
    with _ManifestScope(args.out, "hyperband", resolved, settings.train.seed, [args.out]):
        result = hpo.hyperband_search(
            space,
            objective,
            max_budget=args.max_budget,
            eta=args.eta,
            seed=settings.train.seed,
            threads=args.threads,
        )
        _write_csv(args.out, _HPO_HEADER, _hpo_rows(result))
    return 0


def _analysis_params(args, spec: qc.CircuitSpec, settings: RunSettings) -> np.ndarray:
    n = qc.param_count(spec)
    if args.params:
        try:
            with open(args.params, encoding="utf-8") as fh:
                payload = json.load(fh)
            values = payload["final_params"]
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"cannot read final_params from {args.params}: {exc}") from exc
        if len(values) != n:
            raise ConfigError(
                f"final_params length {len(values)} != param_count {n} "
                "(analyze uses a single-feature circuit)"
            )
        return np.asarray(values, dtype=float)
    rng = np.random.default_rng(settings.train.seed)
    return training.init_params(settings.train.init, n, rng)


def _cmd_analyze(args) -> int:
    settings, cfg = _load_settings(args)
    # diagnostics run on the single-feature version of the configured circuit
    spec = replace(settings.train.spec, n_features=1)
    lo, hi = _parse_range(args.interval, "--interval")
    resolved = dict(cfg, task=args.task, interval=args.interval)
    with _ManifestScope(args.out, "analyze", resolved, settings.train.seed, [args.out]):
        if args.task == "curve":
            params = _analysis_params(args, spec, settings)
            curve = analysis.hypothesis_curve(spec, params, (lo, hi), args.points)
            _write_csv(args.out, ("x", "h"), list(zip(curve.xs, curve.hs)))
        elif args.task == "spectrum":
            params = _analysis_params(args, spec, settings)
            curve = analysis.hypothesis_curve(spec, params, (lo, hi), args.points)
            fit = analysis.spectrum_fit(curve, args.max_freq)
            rows = list(zip(fit.frequencies, fit.cos_coeffs, fit.sin_coeffs))
            _write_csv(args.out, ("freq", "cos", "sin"), rows)
            print(f"residual_rms = {_fmt(fit.residual_rms)}")
        elif args.task == "expressibility":
            kl = analysis.expressibility_kl(spec, args.pairs, args.bins, settings.train.seed)
            _write_csv(
                args.out,
                ("n_pairs", "n_bins", "seed", "kl"),
                [(args.pairs, args.bins, settings.train.seed, kl)],
            )
        else:  # evenness
            params = _analysis_params(args, spec, settings)
            gap = analysis.evenness_gap(spec, params, (lo, hi), args.points)
            _write_csv(
                args.out,
                ("interval_lo", "interval_hi", "n_points", "gap"),
                [(lo, hi, args.points, gap)],
            )
    return 0


# --------------------------------------------------------------------------
# parser wiring
# --------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="qrulab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qrulab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, threads=False):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--data", required=True, help="input feature CSV")
        p.add_argument("--out", required=True, help="primary output path")
        p.add_argument("--seed", type=int, help="override the config seed")
        if threads:
            p.add_argument("--threads", type=int, default=1, help="worker pool width")

    p = sub.add_parser("gen-data", help="write a synthetic feature CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=500, help="records per class")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--spread", type=float, default=dataio.DEFAULT_SPREAD)
    p.add_argument("--overlap", type=float, default=dataio.DEFAULT_OVERLAP)
    p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("train", help="single training run -> JSON report + curves CSV")
    common(p)
    p.add_argument("--curves", help="optional per-epoch curves CSV")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("sweep", help="one-dimensional hyperparameter sweep")
    common(p, threads=True)
    p.add_argument("--dim", required=True, choices=_SWEEP_DIMS)
    p.add_argument("--values", required=True,
                   help="comma-separated values for --dim; use --values=-pi:pi,... "
                        "when the first value starts with a dash")
    p.add_argument("--repeats", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("variability", help="repeated runs with fresh shuffles and Gaussian init")
    common(p, threads=True)
    p.add_argument("--n-runs", type=int, default=50)
    p.set_defaults(func=_cmd_variability)

    p = sub.add_parser("bayes", help="Gaussian-process confidence-bound search")
    common(p, threads=True)
    p.add_argument("--n-calls", type=int, default=50)
    p.add_argument("--kappa", type=float, default=4.0)
    p.add_argument("--n-initial", type=int, default=10)
    p.add_argument("--epochs", type=int, default=30, help="objective training budget")
    p.add_argument("--search-normalization", action="store_true")
    p.set_defaults(func=_cmd_bayes)

    p = sub.add_parser("hyperband", help="Hyperband successive halving")
    common(p, threads=True)
    p.add_argument("--max-budget", type=int, default=30, help="largest epoch budget R")
    p.add_argument("--eta", type=int, default=3)
    p.add_argument("--search-normalization", action="store_true")
    p.set_defaults(func=_cmd_hyperband)

    p = sub.add_parser("analyze", help="circuit diagnostics on a single-feature circuit")
    p.add_argument("--task", required=True, choices=("curve", "spectrum", "expressibility", "evenness"))
    p.add_argument("--config")
    p.add_argument("--params", help="JSON train report supplying final_params")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--interval", default="-pi:pi")
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--max-freq", type=int, default=4)
    p.add_argument("--pairs", type=int, default=5000)
    p.add_argument("--bins", type=int, default=75)
    p.set_defaults(func=_cmd_analyze)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version print and exit
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (_UsageError, ConfigError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (NumericFailure, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
