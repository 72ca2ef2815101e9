"""Command-line interface.

Subcommands: ``extract``, ``decision-graph``, ``classify``, ``fuse`` and
``stats``. Exit status is 0 on success, 2 on bad arguments and 3 on
malformed or inconsistent input files. Set ``KEYFRAME_DPC_LOG`` to a logging
level name (``DEBUG``, ``INFO``, ...) for diagnostics on stderr.

Option values may also come from a flat ``key=value`` file passed with
``--config``; keys are the long option names without dashes (``k``, ``t``,
``n-c`` or ``n_c``, ...). Explicit flags override the file, which overrides
built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dpc import KERNELS, METRICS, DpcConfig, write_decision_graph_csv
from .errors import KeyframeError
from .features import extract_features, import_features, load_frames_dir, make_extractor
from .fusion import SummaryStats, compute_fusion_weights, weighted_combine
from .lstm import PredictionMatrix, classify_video, load_params
from .tsdpc import KeyFrameSet, extract_key_frames, segment_video

log = logging.getLogger("keyframe_dpc")

EXIT_USAGE = 2
EXIT_INPUT = 3

CONFIG_KEYS = {"features", "frames_dir", "extractor", "k", "t", "kernel", "metric",
               "n_c", "jobs", "params", "zero_state", "keyframes"}


class UsageError(Exception):
    pass


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _fraction(text):
    value = float(text)
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"t must lie in (0, 1], got {text}")
    return value


def _bool(text):
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text}")


def read_config(path) -> dict:
    """Parse a flat ``key=value`` file; blank lines and ``#`` comments are skipped."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unrecognized config line {line!r}")
        values[key] = value.strip()
    return values


def _add_input_options(p):
    src = p.add_argument_group("input")
    src.add_argument("--features", help="feature file (headerless CSV or FMTX binary)")
    src.add_argument("--frames-dir", help="directory of PPM/PNG frames, read in filename order")
    src.add_argument("--extractor", default="color-histogram:8",
                     help="color-histogram[:B], downsampled-luminance[:WxH] or identity-luminance "
                          "(default: %(default)s)")


def _add_dpc_options(p):
    g = p.add_argument_group("clustering")
    g.add_argument("--k", type=_positive_int, default=3, help="temporal segments (default: 3)")
    g.add_argument("--t", type=_fraction, default=0.2,
                   help="cutoff quantile of pairwise distances (default: 0.2)")
    g.add_argument("--kernel", choices=KERNELS, default="gaussian")
    g.add_argument("--metric", choices=METRICS, default="euclidean")
    g.add_argument("--n-c", type=_positive_int, default=None,
                   help="fixed key frames per segment instead of the automatic count")
    g.add_argument("--jobs", type=_positive_int, default=1,
                   help="threads used to cluster segments (default: 1)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file of option defaults")

    parser = argparse.ArgumentParser(
        prog="keyframe-dpc",
        description="Key frame extraction by temporal segment density peaks clustering.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", parents=[common], help="select key frames")
    _add_input_options(p)
    _add_dpc_options(p)
    p.add_argument("--out", default="-", help="key frame JSON (default: stdout)")
    p.add_argument("--graph-out", help="also write the decision graph CSV here")
    p.add_argument("--stats-out", help="also write summary stats JSON here")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("decision-graph", parents=[common],
                       help="write decision graph CSV and figure")
    _add_input_options(p)
    _add_dpc_options(p)
    p.add_argument("--out", required=True, help="decision graph CSV")
    p.add_argument("--plot", help="figure path (default: CSV path with .png suffix)")
    p.add_argument("--no-plot", action="store_true", help="skip the figure")
    p.set_defaults(func=cmd_decision_graph)

    p = sub.add_parser("classify", parents=[common], help="score key frames with an LSTM")
    _add_input_options(p)
    _add_dpc_options(p)
    p.add_argument("--params", required=False, help="LSTM params file")
    p.add_argument("--keyframes", help="key frame JSON; extracted on the fly when omitted")
    p.add_argument("--zero-state", type=_bool, nargs="?", const=True, default=False,
                   help="score every key frame from zero LSTM state")
    p.add_argument("--out", default="-", help="prediction JSON (default: stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("fuse", parents=[common], help="combine per-stream predictions")
    p.add_argument("--predictions", nargs="+", required=True,
                   help="prediction JSON files, one per input stream")
    p.add_argument("--rates", required=True,
                   help="comma-separated accuracy percentages, one per prediction file")
    p.add_argument("--out", default="-", help="fusion JSON (default: stdout)")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("stats", parents=[common], help="compression statistics")
    _add_input_options(p)
    _add_dpc_options(p)
    p.add_argument("--keyframes", help="key frame JSON; extracted on the fly when omitted")
    p.add_argument("--out", default="-", help="stats JSON (default: stdout)")
    p.set_defaults(func=cmd_stats)
    return parser


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")
        log.info("wrote %s", path)


def _load_features(args):
    if bool(args.features) == bool(args.frames_dir):
        raise UsageError("give exactly one of --features or --frames-dir")
    if args.features:
        return import_features(args.features)
    try:
        extractor = make_extractor(args.extractor)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return extract_features(load_frames_dir(args.frames_dir), extractor)


def _dpc_config(args) -> DpcConfig:
    try:
        return DpcConfig(t=args.t, kernel=args.kernel, metric=args.metric,
                         n_c_override=args.n_c)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _run_extraction(args):
    features = _load_features(args)
    config = _dpc_config(args)
    spec = segment_video(features.n, args.k)
    start = time.perf_counter()
    kfs, graphs = extract_key_frames(features, spec, config, workers=args.jobs)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    log.info("%d frames -> %d key frames in %.1f ms", features.n, len(kfs), elapsed_ms)
    offsets = [a for a, _ in spec.boundaries]
    return features, kfs, list(zip(offsets, graphs)), elapsed_ms


def _load_keyframes(path) -> KeyFrameSet:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise KeyframeError(f"cannot read {path}: {exc}") from None
    return KeyFrameSet.from_json(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_extract(args) -> int:
    _, kfs, graphs, elapsed_ms = _run_extraction(args)
    _write(args.out, kfs.to_json())
    if args.graph_out:
        write_decision_graph_csv(graphs, args.graph_out)
        log.info("wrote %s", args.graph_out)
    if args.stats_out:
        stats = SummaryStats.from_counts(len(kfs), kfs.total_frames, elapsed_ms)
        _write(args.stats_out, stats.to_json())
    return 0


def cmd_decision_graph(args) -> int:
    _, kfs, graphs, _ = _run_extraction(args)
    write_decision_graph_csv(graphs, args.out)
    if not args.no_plot:
        from .plotting import save_decision_graph

        plot_path = args.plot or str(Path(args.out).with_suffix(".png"))
        save_decision_graph(plot_path, graphs, kfs)
        log.info("wrote %s", plot_path)
    return 0


def cmd_classify(args) -> int:
    if not args.params:
        raise UsageError("--params is required")
    params = load_params(args.params)
    if args.keyframes:
        features = _load_features(args)
        kfs = _load_keyframes(args.keyframes)
        if kfs.total_frames != features.n:
            raise KeyframeError(
                f"key frames refer to {kfs.total_frames} frames, features have {features.n}")
    else:
        features, kfs, _, _ = _run_extraction(args)
    if features.dim != params.input_dim:
        raise KeyframeError(
            f"feature dimension {features.dim} does not match params input_dim {params.input_dim}")
    pred = classify_video(kfs, features, params, zero_state=args.zero_state)
    _write(args.out, pred.to_json())
    return 0


def cmd_fuse(args) -> int:
    try:
        rates = [float(x) for x in args.rates.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--rates must be comma-separated numbers, got {args.rates!r}") from None
    if len(rates) != len(args.predictions):
        raise UsageError(f"{len(rates)} rates for {len(args.predictions)} prediction files")
    preds = []
    for path in args.predictions:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise KeyframeError(f"cannot read predictions {path}: {exc}") from None
        preds.append(PredictionMatrix.from_dict(data))
    weights = compute_fusion_weights(rates)
    combined = weighted_combine(preds, weights)
    out = {
        "weights": weights.to_dict(),
        "combined": [float(v) for v in combined],
        "label": int(np.argmax(combined)),
    }
    _write(args.out, json.dumps(out, indent=2) + "\n")
    return 0


def cmd_stats(args) -> int:
    if args.keyframes:
        kfs = _load_keyframes(args.keyframes)
        elapsed_ms = 0.0
    else:
        _, kfs, _, elapsed_ms = _run_extraction(args)
    stats = SummaryStats.from_counts(len(kfs), kfs.total_frames, elapsed_ms)
    _write(args.out, stats.to_json())
    return 0


def _configure_logging():
    level = os.environ.get("KEYFRAME_DPC_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def main(argv=None) -> int:
    _configure_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()

    # the config file only supplies defaults, so peek at it before the real parse
    peek = argparse.ArgumentParser(add_help=False)
    peek.add_argument("command", nargs="?")
    peek.add_argument("--config")
    known, _ = peek.parse_known_args(argv)
    if known.config and known.command:
        try:
            defaults = read_config(known.config)
        except UsageError as exc:
            parser.error(str(exc))
        subparser = parser._subparsers._group_actions[0].choices.get(known.command)
        if subparser is not None:
            valid = {a.dest for a in subparser._actions}
            unknown = set(defaults) - valid
            if unknown:
                parser.error(f"config keys not valid for {known.command}: {sorted(unknown)}")
            subparser.set_defaults(**defaults)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"keyframe-dpc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyframeError as exc:
        print(f"keyframe-dpc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
