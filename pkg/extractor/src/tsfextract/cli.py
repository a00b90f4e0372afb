"""tsfextract command line: `extract` videos into a .tsf corpus, `verify` a
corpus. Exit codes: 0 success, 1 usage error, 2 data error."""

import argparse
import logging
import os
import sys

from .extract import ExtractSpec, extract
from .models import ModelError
from .tsf import TsfError, read_manifest
from .verify import verify_corpus


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser():
    parser = _Parser(prog="tsfextract",
                     description="Per-frame CNN features from videos, written "
                     "as .tsf matrices plus a manifest.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="decode videos and write the corpus")
    p.add_argument("--videos", required=True,
                   help="base directory the label file's paths are relative to")
    p.add_argument("--labels", required=True,
                   help="TSV of 'label<TAB>video-path' lines")
    p.add_argument("--model", default="alexnet",
                   help="backbone: tiny | alexnet | vgg11 | vgg16 (default: alexnet)")
    p.add_argument("--weights", default=None,
                   help="local checkpoint (.pt state dict); 'none' for a "
                   "seeded random init (format testing only)")
    p.add_argument("--layer", default="first_fc",
                   help="feature tap point (default: first_fc)")
    p.add_argument("--every", type=int, default=1, metavar="N",
                   help="sample every Nth frame (default: 1)")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for random init when no weights are given")
    p.add_argument("--out", required=True, help="output corpus directory")

    p = sub.add_parser("verify", help="re-check an emitted corpus")
    p.add_argument("directory")
    return parser


def _cmd_extract(args):
    weights = None if args.weights in (None, "none") else args.weights
    if weights and not os.path.exists(weights):
        sys.stderr.write(f"tsfextract: weights file missing: {weights}\n")
        return 2
    videos = [
        (label, os.path.join(args.videos, rel))
        for label, rel in read_manifest(args.labels)
    ]
    spec = ExtractSpec(
        videos=videos, out_dir=args.out, model=args.model, layer=args.layer,
        weights_path=weights, frame_step=args.every, seed=args.seed,
    )
    result = extract(spec)
    print(f"wrote {len(result.written)} file(s), width n={result.width}, "
          f"skipped {len(result.skipped)} -> {result.manifest}")
    return 0


def _cmd_verify(args):
    checked, problems = verify_corpus(args.directory)
    for p in problems:
        print(f"problem: {p}")
    print(f"checked {checked} file(s), {len(problems)} problem(s)")
    return 0 if not problems else 2


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "extract":
            return _cmd_extract(args)
        return _cmd_verify(args)
    except (TsfError, ModelError, ValueError) as e:
        sys.stderr.write(f"tsfextract: {e}\n")
        return 2
    except OSError as e:
        sys.stderr.write(f"tsfextract: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
