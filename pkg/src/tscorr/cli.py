"""Command-line interface.

Subcommands: encode, train, eval, sweep, synth, inspect. Defaults mirror
the best reported full-scale operating point (lambda=64, L=16, gamma=6,
stride=1, C=1000, 100 repetitions) so a bare invocation reproduces the
intended pipeline shape. Exit codes: 0 success, 1 usage error, 2 data
error, 3 convergence error.
"""

import argparse
import glob
import json
import logging
import os
import sys

import numpy as np

from . import dataio, evaluation, svm
from .encoder import EncoderConfig, SelectionScheme, encode_tcf
from .errors import ConvergenceError, FormatError, ValidationError

DEFAULT_SEED = 0

log = logging.getLogger("tscorr")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the documented contract is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_encoder_flags(p):
    p.add_argument(
        "--lambda", dest="count", type=int, default=64, metavar="N",
        help="group count for --scheme group, or number of series kept for "
        "the subset schemes (default: 64)",
    )
    p.add_argument(
        "--windows", type=int, default=16, metavar="L",
        help="non-overlapping time windows per series (default: 16)",
    )
    p.add_argument(
        "--lags", type=int, default=6, metavar="G",
        help="autocorrelation lags per series (default: 6)",
    )
    p.add_argument(
        "--stride", type=int, default=1, metavar="S",
        help="lag stride: lags are S, 2S, ... GS (default: 1)",
    )
    p.add_argument(
        "--scheme", choices=[s.value for s in SelectionScheme], default="group",
        help="series reduction scheme (default: group)",
    )


def _add_train_flags(p):
    p.add_argument(
        "--c", dest="c_reg", type=float, default=1000.0,
        help="SVM regularization C (default: 1000)",
    )
    p.add_argument(
        "--tol", type=float, default=1e-4,
        help="solver duality-gap tolerance (default: 1e-4)",
    )
    p.add_argument(
        "--max-iter", type=int, default=1_000_000,
        help="solver iteration budget per binary problem (default: 1000000)",
    )
    p.add_argument(
        "--normalize", choices=[m.value for m in svm.Normalization],
        default="none", help="descriptor normalization (default: none)",
    )


def _encoder_config(args):
    scheme = SelectionScheme(args.scheme)
    if scheme is SelectionScheme.GROUP:
        return EncoderConfig(
            groups=args.count, windows=args.windows, lags=args.lags,
            stride=args.stride, scheme=scheme, seed=args.seed,
        )
    return EncoderConfig(
        groups=1, windows=args.windows, lags=args.lags, stride=args.stride,
        scheme=scheme, subset_size=args.count, seed=args.seed,
    )


def _train_config(args):
    return svm.TrainConfig(
        c_reg=args.c_reg, tolerance=args.tol, max_iterations=args.max_iter,
        normalize=svm.Normalization(args.normalize), seed=args.seed,
    )


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")


def build_parser():
    parser = _Parser(
        prog="tscorr",
        description="Correlation-based descriptors for per-frame feature "
        "series, with a linear one-vs-rest SVM and a randomized-split "
        "evaluation protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="encode .tsf matrices into descriptors")
    p.add_argument("--input", required=True, help=".tsf file or directory of them")
    p.add_argument("--out", required=True, help="descriptor cache to write (.tcfc)")
    _add_encoder_flags(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help=f"seed for the random scheme (default: {DEFAULT_SEED})")

    p = sub.add_parser("train", help="train a one-vs-rest linear SVM")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="model file to write (JSON)")
    p.add_argument("--descriptors", help="reuse an encoded descriptor cache "
                   "instead of encoding the manifest's matrices")
    _add_encoder_flags(p)
    _add_train_flags(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help=f"seed for randomized pieces (default: {DEFAULT_SEED})")

    p = sub.add_parser("eval", help="run the repeated random-split protocol")
    p.add_argument("--manifest", required=True)
    p.add_argument("--reps", type=int, default=100,
                   help="number of random splits (default: 100)")
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--descriptors", help="reuse an encoded descriptor cache")
    _add_encoder_flags(p)
    _add_train_flags(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help=f"master seed driving all splits (default: {DEFAULT_SEED})")

    p = sub.add_parser("sweep", help="grid-evaluate configurations")
    p.add_argument("--manifest", required=True)
    p.add_argument("--lambda-list", type=_int_list, required=True, metavar="A,B,...",
                   help="group counts (or subset sizes for subset schemes)")
    p.add_argument("--l-list", type=_int_list, default=[16], metavar="A,B,...",
                   help="window counts (default: 16)")
    p.add_argument("--gamma-list", type=_int_list, default=[6], metavar="A,B,...",
                   help="lag counts (default: 6)")
    p.add_argument("--scheme-list", default="group",
                   help="comma-separated schemes (default: group)")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--reps", type=int, default=100,
                   help="repetitions per cell (default: 100)")
    p.add_argument("--out", required=True, help="TSV results table to write")
    _add_train_flags(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help=f"master seed shared by every cell (default: {DEFAULT_SEED})")

    p = sub.add_parser("synth", help="generate a synthetic labeled corpus")
    p.add_argument("--spec", help="synthetic corpus spec (JSON)")
    p.add_argument("--out", help="output directory for .tsf files + manifest.tsv")
    p.add_argument("--write-default-spec", metavar="PATH",
                   help="write the built-in demo spec to PATH and exit")

    p = sub.add_parser("inspect", help="validate and summarize a .tsf file")
    p.add_argument("--input", required=True)

    return parser


def _cmd_encode(args):
    if os.path.isdir(args.input):
        paths = sorted(glob.glob(os.path.join(args.input, "*.tsf")))
        if not paths:
            raise FormatError(f"no .tsf files in {args.input}")
        ids = [os.path.basename(p) for p in paths]
    else:
        paths = [args.input]
        ids = [os.path.basename(args.input)]
    cfg = _encoder_config(args)
    entries = []
    layout = None
    for vid, path in zip(ids, paths):
        log.debug("encoding %s", path)
        tcf = encode_tcf(dataio.read_tsf(path), cfg)
        layout = tcf.layout
        entries.append((vid, tcf.combined))
    dataio.write_descriptor_cache(args.out, entries, layout)
    print(f"encoded {len(entries)} file(s) -> {args.out} "
          f"(dim {entries[0][1].shape[0]})")
    return 0


def _dataset_descriptors(dataset, args):
    """(ids, labels, X, layout) for a manifest, via cache or fresh encode."""
    ids = [it.video_id for it in dataset.items]
    labels = [it.label for it in dataset.items]
    if args.descriptors:
        cache, layout = dataio.read_descriptor_cache(args.descriptors)
        missing = [v for v in ids if v not in cache]
        if missing:
            raise ValidationError(
                f"descriptor cache lacks {len(missing)} manifest ids, "
                f"e.g. {missing[:3]}"
            )
        X = np.stack([cache[v] for v in ids])
        from .encoder import TcfLayout

        return ids, labels, X, None if layout is None else TcfLayout.from_dict(layout)
    cfg = _encoder_config(args)
    X, _, layout = evaluation.collect_descriptors(dataset, cfg)
    return ids, labels, X, layout


def _cmd_train(args):
    dataset = dataio.read_manifest(args.manifest)
    ids, labels, X, layout = _dataset_descriptors(dataset, args)
    model = svm.train_ovr(X, labels, _train_config(args), layout=layout)
    svm.save_model(model, args.out)
    print(f"trained on {len(ids)} videos, {len(model.classes)} classes -> {args.out}")
    return 0


def _cmd_eval(args):
    dataset = dataio.read_manifest(args.manifest)
    if args.descriptors:
        cache, _ = dataio.read_descriptor_cache(args.descriptors)
        items = []
        for it in dataset.items:
            if it.video_id not in cache:
                raise ValidationError(
                    f"descriptor cache lacks manifest id {it.video_id!r}"
                )
            items.append(
                evaluation.DatasetItem(
                    video_id=it.video_id, label=it.label,
                    descriptor=cache[it.video_id],
                )
            )
        dataset = evaluation.LabeledDataset(items)
        cfg = None
    else:
        cfg = _encoder_config(args)
    report = evaluation.run_protocol(
        dataset, cfg, _train_config(args), repetitions=args.reps,
        master_seed=args.seed,
    )
    print(report.render_text())
    if args.report:
        _write_json(args.report, report.to_dict())
        print(f"report written to {args.report}")
    return 0


def _cmd_sweep(args):
    dataset = dataio.read_manifest(args.manifest)
    schemes = [s.strip() for s in args.scheme_list.split(",") if s.strip()]
    for s in schemes:
        if s not in [v.value for v in SelectionScheme]:
            raise ValidationError(f"unknown scheme {s!r}")
    rows = evaluation.sweep(
        dataset,
        counts=getattr(args, "lambda_list"),
        windows_list=args.l_list,
        lags_list=args.gamma_list,
        schemes=schemes,
        stride=args.stride,
        train_cfg=_train_config(args),
        repetitions=args.reps,
        master_seed=args.seed,
    )
    table = evaluation.sweep_table(rows)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(table)
    sys.stdout.write(table)
    return 0


def _cmd_synth(args):
    if args.write_default_spec:
        _write_json(args.write_default_spec, dataio.demo_spec().to_dict())
        print(f"default spec written to {args.write_default_spec}")
        return 0
    if not args.spec or not args.out:
        return _usage_error("synth requires --spec and --out (or --write-default-spec)")
    with open(args.spec, encoding="utf-8") as fh:
        spec = dataio.SynthSpec.from_dict(json.load(fh))
    manifest = dataio.write_synth_corpus(spec, args.out)
    print(f"corpus written: {manifest}")
    return 0


def _usage_error(message):
    sys.stderr.write(f"tscorr: error: {message}\n")
    return 1


def _cmd_inspect(args):
    matrix = dataio.read_tsf(args.input)
    print(f"{args.input}: n={matrix.n} k={matrix.k} finite=yes")
    return 0


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


_COMMANDS = {
    "encode": _cmd_encode,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "synth": _cmd_synth,
    "inspect": _cmd_inspect,
}


def main(argv=None):
    # TSCORR_LOG=debug|info|warning|error controls stderr verbosity
    level = os.environ.get("TSCORR_LOG", "warning").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="tscorr %(levelname)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConvergenceError as e:
        sys.stderr.write(f"tscorr: convergence failure: {e}\n")
        return 3
    except (FormatError, ValidationError) as e:
        sys.stderr.write(f"tscorr: {e}\n")
        return 2
    except OSError as e:
        sys.stderr.write(f"tscorr: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
