"""Command line entry point: ``segment``, ``tsa``, ``verify`` and ``phantom``.

Exit codes: 0 success, 1 error (including bad flags), 2 finished without converging.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import imageio, phantom, sva
from .verification import run_cross_checks

log = logging.getLogger("potts_sva")

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _positive_float(s):
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _shape(s):
    try:
        w, h = (int(v) for v in s.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {s}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError(f"shape must be positive, got {s}")
    return w, h


def _add_solver_flags(p):
    p.add_argument("--classes", "-K", type=int, required=True, help="number of classes K (>= 2)")
    p.add_argument("--prox-tol", type=_positive_float, default=1e-6)
    p.add_argument("--prox-max-sweeps", type=_positive_int, default=500)
    p.add_argument("--scale", type=_positive_float, default=255.0,
                   help="working intensity scale applied to the normalised image (default 255)")
    p.add_argument("--threads", type=_positive_int, default=1,
                   help="worker cap; the numpy kernels are single-threaded, so results never depend on it")
    p.add_argument("input", type=Path)
    p.add_argument("output", type=Path, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="potts-sva", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log the iteration trace")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    seg = sub.add_parser("segment", help="unsupervised segmentation")
    seg.add_argument("--max-outer", "-T", type=_positive_int, default=50)
    seg.add_argument("--max-inner", "-L", type=_positive_int, default=25)
    seg.add_argument("--tol", "-e", type=_positive_float, default=1e-3)
    _add_solver_flags(seg)

    tsa = sub.add_parser("tsa", help="fixed-lambda TV denoising followed by K-means")
    tsa.add_argument("--lambda", dest="lam", type=float, required=True,
                     help="TV weight in working units (0 = plain K-means)")
    _add_solver_flags(tsa)

    ver = sub.add_parser("verify", help="run the oracle cross-checks")
    ver.add_argument("--seed", type=int, default=0)

    ph = sub.add_parser("phantom", help="write a synthetic image and its ground-truth labels")
    ph.add_argument("--shape", type=_shape, required=True, help="WIDTHxHEIGHT")
    ph.add_argument("--classes", "-K", type=int, required=True)
    ph.add_argument("--noise", type=float, default=0.05, help="Gaussian noise std before normalisation")
    ph.add_argument("--seed", type=int, default=0)
    ph.add_argument("output", type=Path, help="output directory")
    return parser


def _config(args) -> sva.SvaConfig:
    kw = dict(K=args.classes, prox_tol=args.prox_tol, prox_max_sweeps=args.prox_max_sweeps,
              intensity_scale=args.scale)
    if args.command == "segment":
        kw.update(max_outer=args.max_outer, max_inner=args.max_inner, tol=args.tol)
    return sva.SvaConfig(**kw)


def _log_trace(result: sva.SegmentationResult):
    for r in result.trace:
        log.info("%s t=%d l=%d lambda=%.6g TV=%.6g objective=%.10g changed=%d sweeps=%d",
                 r.kind, r.outer, r.inner, r.lam, r.tv, r.objective, r.labels_changed, r.prox_sweeps)


def _run_segmentation(args) -> int:
    cfg = _config(args)
    y = imageio.load_image(args.input)
    if args.command == "segment":
        result = sva.segment(y, cfg)
    else:
        result = sva.segment_tsa(y, cfg.K, args.lam, cfg)
    _log_trace(result)
    paths = imageio.save_result(result, args.output, mode=args.command, config=cfg.as_dict())
    for p in paths.values():
        print(p)
    if not result.converged:
        print("warning: stopped at the iteration limit without converging", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _run_verify(args) -> int:
    reports = run_cross_checks(args.seed)
    for r in reports:
        print(r.row())
    return EXIT_OK if all(r.passed for r in reports) else EXIT_ERROR


def _run_phantom(args) -> int:
    w, h = args.shape
    y, truth = phantom.make_phantom(w, h, args.classes, args.noise, args.seed)
    args.output.mkdir(parents=True, exist_ok=True)
    print(imageio.save_gray16(y, args.output / "image.png"))
    print(imageio.save_labels(truth, args.classes, args.output / "truth.png"))
    return EXIT_OK


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return EXIT_ERROR
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    handler = {"segment": _run_segmentation, "tsa": _run_segmentation,
               "verify": _run_verify, "phantom": _run_phantom}[args.command]
    try:
        return handler(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
