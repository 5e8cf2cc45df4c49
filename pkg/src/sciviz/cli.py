"""``sciviz`` command line: train, synthesize, fuse, gradcheck, report.

Exit codes
----------
0  success
2  usage error (unknown subcommand or flag, bad argument)
3  configuration error (unknown key, unparsable value)
4  I/O error (missing or corrupt file, fingerprint mismatch)
5  numerical failure (gradient check above tolerance, diverged training,
   non-finite values)
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .classifier import ConvNetClassifier
from .config import SCHEMA, Config, load_config
from .exceptions import (
    ConfigError,
    CorruptFileError,
    FingerprintMismatchError,
    NumericalError,
)
from .image import load_mnist, read_image, write_image
from .metrics import emit_report, metrics_from_dict, metrics_to_dict, run_metrics
from .network import gradient_check
from .synthesis import SaliencyClassImpressions

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL = 0, 2, 3, 4, 5
OUT_ENV = "SCIVIZ_OUT"
MODES = {"ci": "ci_baseline", "pre": "pre_only", "sci": "full_sci"}
GRADCHECK_TOLERANCE = 1e-4

logger = logging.getLogger("sciviz")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def default_out_root() -> Path:
    return Path(os.environ.get(OUT_ENV, "sciviz-out"))


def _add_config_flags(p, sections):
    p.add_argument("--config", type=Path, help="INI config file")
    p.add_argument("--preset", choices=("desk", "reference"), default="desk",
                   help="base settings before the config file (default: desk)")
    for section in sections:
        for key in SCHEMA[section]:
            p.add_argument(f"--{section}.{key}", dest=f"cfg:{section}.{key}", metavar="VALUE",
                           default=None, help=argparse.SUPPRESS)
    p.add_argument("--data-dir", type=Path, default=None,
                   help="directory with the four MNIST IDX files (default: bundled subset)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sciviz", description="Class impressions from a small CNN.",
                     epilog="Config keys can be overridden as --section.key VALUE.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train the toy classifier")
    _add_config_flags(p, ["classifier"])
    p.add_argument("--seed", type=int, help="shorthand for --classifier.random_state")
    p.add_argument("--out", type=Path, help="weights file (default: $SCIVIZ_OUT/model.sciw)")

    synth_sections = ["image", "tv", "saliency", "region", "transforms", "synthesizer",
                      "metrics", "cli"]
    p = sub.add_parser("synthesize", help="class impressions for one or more classes")
    _add_config_flags(p, synth_sections)
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--mode", choices=tuple(MODES), default="sci")
    p.add_argument("--class", dest="classes", type=int, action="append",
                   help="target class; repeat for several (default: all)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, help="parallel runs (shorthand for --cli.workers)")
    p.add_argument("--out", type=Path, help="output root (default: $SCIVIZ_OUT)")

    p = sub.add_parser("fuse", help="two-class fused image")
    _add_config_flags(p, synth_sections)
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--classes", type=int, nargs=2, required=True, metavar=("A", "B"))
    p.add_argument("--seed-a", type=int, nargs=2, metavar=("ROW", "COL"),
                   help="start pixel of class A (default: middle row, left quarter)")
    p.add_argument("--seed-b", type=int, nargs=2, metavar=("ROW", "COL"),
                   help="start pixel of class B (default: middle row, right quarter)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("gradcheck", help="compare input gradients with finite differences")
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--data-dir", type=Path, default=None)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--tolerance", type=float, default=GRADCHECK_TOLERANCE)
    p.add_argument("--image-index", type=int, default=0, help="test image to check at")
    p.add_argument("--dither", type=float, default=1.0,
                   help="add U[0, DITHER) per pixel so flat regions hold no exact max-pool ties")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("report", help="table and montage for a directory of runs")
    p.add_argument("runs", type=Path, help="directory whose subdirectories are run dirs")
    p.add_argument("--out", type=Path, help="where to write (default: the runs directory)")
    return parser


def _collect_config(args) -> Config:
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg:") and v is not None}
    return load_config(args.config, args.preset, overrides)


# ---------------------------------------------------------------------------
# train


def cmd_train(args) -> int:
    cfg = _collect_config(args)
    if args.seed is not None:
        cfg.set("classifier", "random_state", args.seed)
    X_train, y_train, X_test, y_test = load_mnist(args.data_dir)
    clf = ConvNetClassifier(**cfg.params("classifier"))
    clf.fit(X_train, y_train, X_test, y_test)
    out = args.out or default_out_root() / "model.sciw"
    out.parent.mkdir(parents=True, exist_ok=True)
    clf.save(out)
    summary = {
        "fingerprint": clf.fingerprint,
        "epoch_loss": [float(v) for v in clf.history_["epoch_loss"]],
        "test_accuracy": float(clf.history_["test_accuracy"]),
        "n_train": int(len(X_train)),
        "n_test": int(len(X_test)),
    }
    out.with_suffix(".json").write_text(json.dumps(summary, indent=2) + "\n")
    out.with_suffix(".ini").write_text(cfg.to_ini())
    print(f"test accuracy {summary['test_accuracy']:.4f}  weights {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# synthesize / fuse

_WORKER = {}


def _make_estimator(weights_path, cfg_ini, preset, data_dir, seed, mode="full_sci"):
    cfg = Config.preset(preset).update_from_text(cfg_ini)
    clf = ConvNetClassifier.load(weights_path)
    X_train = load_mnist(data_dir)[0]
    est = SaliencyClassImpressions(clf, mode=mode, random_state=seed, **cfg.params("synth"))
    return clf, est.fit(X_train), cfg


def _write_run(run_dir: Path, clf, result, cfg: Config, run_id: str):
    run_dir.mkdir(parents=True, exist_ok=True)
    result.save(run_dir, "run")
    (run_dir / "config.ini").write_text(cfg.to_ini())
    (run_dir / "fingerprint.txt").write_text(f"{clf.fingerprint}\n")
    params = cfg.params("metrics")
    m = run_metrics(clf, result, run_id, percentile=params["percentile"],
                    connectivity=params["connectivity"])
    (run_dir / "metrics.json").write_text(json.dumps(metrics_to_dict(m), indent=2) + "\n")
    if "pre_image" in result.extras:
        write_image(result.extras["pre_image"], run_dir / "pre.png")
    return m


def _init_worker(*setup):
    _WORKER["setup"] = _make_estimator(*setup)


def _synth_one(job):
    c, run_dir, run_id = job
    clf, est, cfg = _WORKER["setup"]
    result = est.synthesize(c)
    m = _write_run(Path(run_dir), clf, result, cfg, run_id)
    return run_id, result.final_logit, result.initial_logit, m.softmax_confidence


def cmd_synthesize(args) -> int:
    cfg = _collect_config(args)
    if args.workers is not None:
        cfg.set("cli", "workers", args.workers)
    workers = cfg.params("cli")["workers"]
    if workers < 1:
        raise ConfigError("cli.workers must be >= 1")
    mode = MODES[args.mode]
    setup = (args.weights, cfg.to_ini(), args.preset, args.data_dir, args.seed, mode)
    clf, est, _ = _make_estimator(*setup)
    classes = args.classes if args.classes is not None else list(range(clf.num_classes))
    for c in classes:
        if not 0 <= c < clf.num_classes:
            raise UsageError(f"class {c} outside [0, {clf.num_classes})")
    root = args.out or default_out_root()
    root.mkdir(parents=True, exist_ok=True)
    (root / "config.ini").write_text(cfg.to_ini())
    jobs = [(c, str(root / f"{args.mode}-c{c}-s{args.seed}"), f"{args.mode}-c{c}-s{args.seed}")
            for c in classes]
    if workers == 1 or len(jobs) == 1:
        _WORKER["setup"] = (clf, est, cfg)
        rows = [_synth_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=setup) as pool:
            rows = list(pool.map(_synth_one, jobs))
    for run_id, final, initial, conf in rows:
        print(f"{run_id}: logit {initial:.3f} -> {final:.3f}  confidence {conf:.4f}")
    return EXIT_OK


def default_fuse_seeds(shape):
    h, w = shape[:2]
    return (h // 2, w // 4), (h // 2, (3 * w) // 4)


def cmd_fuse(args) -> int:
    cfg = _collect_config(args)
    clf, est, _ = _make_estimator(args.weights, cfg.to_ini(), args.preset, args.data_dir,
                                  args.seed)
    a, b = args.classes
    da, db = default_fuse_seeds(clf.input_shape)
    seed_a = tuple(args.seed_a) if args.seed_a else da
    seed_b = tuple(args.seed_b) if args.seed_b else db
    try:
        result = est.fuse(a, b, seed_a, seed_b)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    run_id = f"fuse-c{a}-c{b}-s{args.seed}"
    root = args.out or default_out_root()
    m = _write_run(root / run_id, clf, result, cfg, run_id)
    probs = np.exp(result.extras["logits"] - np.max(result.extras["logits"]))
    probs /= probs.sum()
    top = np.argsort(probs)[::-1][:2]
    print(f"{run_id}: top-2 {top[0]} ({probs[top[0]]:.4f}), {top[1]} ({probs[top[1]]:.4f})"
          f"  components {m.salient_components}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# gradcheck / report


def cmd_gradcheck(args) -> int:
    clf = ConvNetClassifier.load(args.weights)
    _, _, X_test, y_test = load_mnist(args.data_dir)
    if not 0 <= args.image_index < len(X_test):
        raise UsageError(f"--image-index must lie in [0, {len(X_test)})")
    img = X_test[args.image_index].astype(np.float64).reshape(clf.input_shape)
    img = img + np.random.default_rng(args.seed).uniform(0.0, args.dither, size=img.shape)
    c = int(y_test[args.image_index])
    err, info = gradient_check(clf.weights_, img, c, epsilon=args.epsilon,
                               n_samples=args.samples, seed=args.seed, return_details=True)
    print(f"max relative error {err:.3e} over {info['checked']} elements "
          f"({len(info['excluded'])} excluded at kinks), tolerance {args.tolerance:.0e}")
    if info["checked"] == 0 or not err < args.tolerance:
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_report(args) -> int:
    if not args.runs.is_dir():
        raise FileNotFoundError(f"no such run directory: {args.runs}")
    metrics, images = [], {}
    for run_dir in sorted(p for p in args.runs.iterdir() if (p / "metrics.json").is_file()):
        m = metrics_from_dict(json.loads((run_dir / "metrics.json").read_text()))
        metrics.append(m)
        images[m.run_id] = read_image(run_dir / "run.png")
    if not metrics:
        raise FileNotFoundError(f"no run directories with metrics.json under {args.runs}")
    paths = emit_report(metrics, args.out or args.runs, images)
    print(f"{len(metrics)} runs -> {paths['table']} and {paths['montage']}")
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "synthesize": cmd_synthesize,
    "fuse": cmd_fuse,
    "gradcheck": cmd_gradcheck,
    "report": cmd_report,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"sciviz {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"sciviz: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, CorruptFileError, FingerprintMismatchError) as exc:
        print(f"sciviz: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, FloatingPointError) as exc:
        print(f"sciviz: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
