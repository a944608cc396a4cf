"""Command-line entry point: ``mdlseg <command> [flags]``.

Exit codes: 0 success, 2 I/O or parse failure, 3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from . import __version__
from .assignment import assign_names, problem_from_dict
from .baselines import contiguous_kmeans, uniform_breaks, uniform_oracle_breaks
from .bench import COLUMNS, METHODS, read_manifest, run_bench
from .features import (FormatError, load_features, read_annotations, save_features,
                       synth_sequence, write_annotations)
from .mdl import MdlParams, brute_force_segment, segment_sequence
from .metrics import aggregate_multi
from .segmentation import Segmentation

RESULT_VERSION = "1"
EXIT_IO = 2
EXIT_INVALID = 3


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _cap(text):
    if text.lower() in ("none", "inf", "0"):
        return None
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("max scene length must be positive")
    return value


def _bits(text):
    if text == "auto":
        return None
    return int(text)


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _emit(doc, output):
    text = json.dumps(doc, indent=2) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(args):
    return load_features(args.input, args.format)


def _params(args):
    return MdlParams(args.precision_bits, args.max_scene_len, args.var_floor)


def _result_doc(method, seg, total, params=None, seq=None):
    doc = {"spec_version": RESULT_VERSION, "method": method}
    doc.update(seg.to_dict(total))
    if params is not None:
        doc["params"] = {
            "precision_bits": params.bits_for(seq),
            "max_scene_len": params.max_scene_len,
            "var_floor": params.var_floor,
        }
    return doc


def _report(seq, seg, total, elapsed):
    bits = "" if total is None else f" total_bits={total:.6f}"
    print(f"n={seq.n} breaks={len(seg.breaks)}{bits} wall_time={elapsed:.3f}s", file=sys.stderr)


def cmd_segment(args):
    seq = _load(args)
    params = _params(args)
    t0 = time.perf_counter()
    seg, total = segment_sequence(seq, params, n_jobs=args.threads)
    _report(seq, seg, total, time.perf_counter() - t0)
    _emit(_result_doc("mdlseg", seg, total, params, seq), args.output)


def cmd_oracle(args):
    seq = _load(args)
    params = _params(args)
    t0 = time.perf_counter()
    seg, total = brute_force_segment(seq, params)
    _report(seq, seg, total, time.perf_counter() - t0)
    _emit(_result_doc("oracle", seg, total, params, seq), args.output)


def cmd_baseline(args):
    seq = _load(args)
    t0 = time.perf_counter()
    if args.method == "unif":
        if args.mean_len is None:
            raise CliError("--mean-len is required for --method unif", EXIT_INVALID)
        seg = uniform_breaks(seq.n, args.mean_len)
    elif args.method == "unif-oracle":
        if args.k is None:
            raise CliError("--k is required for --method unif-oracle", EXIT_INVALID)
        seg = uniform_oracle_breaks(seq.n, args.k)
    elif args.method == "kmeans":
        if args.k is None:
            raise CliError("--k is required for --method kmeans", EXIT_INVALID)
        seg = contiguous_kmeans(seq, args.k, args.max_iters, args.seed)
    else:
        raise CliError(f"method {args.method!r} is not a baseline; use the segment command",
                       EXIT_INVALID)
    _report(seq, seg, None, time.perf_counter() - t0)
    _emit(_result_doc(args.method, seg, None), args.output)


def _read_hypothesis(path):
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        try:
            return Segmentation(int(doc["n"]), tuple(doc["breaks"]))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"{path}: result document lacks {exc}") from None
    return read_annotations(path)[0].to_segmentation()


def cmd_eval(args):
    hyp = _read_hypothesis(args.hyp)
    refs = read_annotations(args.refs)
    report = aggregate_multi(hyp, refs, args.window_k)
    doc = {"spec_version": RESULT_VERSION, "n": hyp.n}
    doc.update(report.to_dict())
    _emit(doc, args.output)


def cmd_bench(args):
    items = read_manifest(args.manifest)
    rows = run_bench(items, methods=args.methods, params=_params(args), mean_len=args.mean_len,
                     k=args.k, seed=args.seed, threads=args.threads, window_k=args.window_k)
    if args.output and args.output.endswith(".json"):
        _emit({"spec_version": RESULT_VERSION, "columns": COLUMNS, "rows": rows}, args.output)
        return
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.output:
        Path(args.output).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())


def cmd_synth(args):
    paths = args.out.split(",")
    if len(paths) != 2:
        raise CliError("--out expects FEATURES,ANNOTATIONS", EXIT_INVALID)
    seq, ann = synth_sequence(args.lengths, args.d, args.sep, args.noise, args.seed)
    feat_path, ann_path = paths
    fmt = args.format or ("csv" if feat_path.endswith(".csv") else "binary")
    save_features(seq, feat_path, fmt)
    write_annotations([ann], ann_path)
    print(f"n={seq.n} d={seq.d} breaks={list(ann.breaks)}", file=sys.stderr)


def cmd_assign(args):
    doc = json.loads(Path(args.input).read_text(encoding="utf-8"))
    problem = problem_from_dict(doc)
    mapping = assign_names(problem)
    threshold = problem.threshold
    out = {
        "spec_version": RESULT_VERSION,
        "threshold": None if threshold != threshold else threshold,
        "mapping": [{"speaker": s, "name": name} for s, name in mapping.items()],
    }
    _emit(out, args.output)


def build_parser():
    parser = argparse.ArgumentParser(prog="mdlseg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def mdl_flags(p):
        p.add_argument("--max-scene-len", type=_cap, default=None,
                       help="cap on segment length in frames (default: uncapped)")
        p.add_argument("--var-floor", type=float, default=1e-4)
        p.add_argument("--precision-bits", type=_bits, default=None,
                       choices=[None, 16, 32, 64], metavar="{16,32,64,auto}")
        p.add_argument("--threads", type=int, default=1)

    def io_flags(p):
        p.add_argument("--input", required=True)
        p.add_argument("--format", choices=["csv", "binary"])
        p.add_argument("--output")

    p = sub.add_parser("segment", help="MDL segmentation by dynamic programming")
    io_flags(p)
    mdl_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("oracle", help="exhaustive MDL segmentation (n <= 20)")
    io_flags(p)
    mdl_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("baseline", help="uniform, oracle-uniform or k-means segmentation")
    io_flags(p)
    p.add_argument("--method", required=True, choices=list(METHODS))
    p.add_argument("--mean-len", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval", help="score a segmentation against reference annotations")
    p.add_argument("--hyp", "--input", dest="hyp", required=True)
    p.add_argument("--refs", required=True)
    p.add_argument("--window-k", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="score all methods on a manifest of items")
    p.add_argument("--manifest", "--input", dest="manifest", required=True)
    p.add_argument("--output")
    p.add_argument("--methods", type=lambda s: s.split(","), default=list(METHODS))
    p.add_argument("--mean-len", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window-k", type=int)
    mdl_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="write a synthetic piecewise-Gaussian sequence")
    p.add_argument("--lengths", type=_int_list, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--sep", type=float, default=10.0)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="FEATURES,ANNOTATIONS")
    p.add_argument("--format", choices=["csv", "binary"])
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("assign", help="map speaker IDs to character names")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_assign)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (FormatError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return 0


if __name__ == "__main__":
    sys.exit(main())
