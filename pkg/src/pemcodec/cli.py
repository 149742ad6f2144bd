"""Command-line surface: embed, extract, capacity, analyze, rdcurve.

Exit codes: 0 success, 2 capacity exceeded, 3 malformed stego/params,
64 usage error, 1 file or unexpected errors. stdout carries machine-readable
results (key=value lines or CSV), stderr carries diagnostics.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import codec, imaging, metrics, overflow
from .bitstream import BitStream
from .errors import (
    CapacityExceeded,
    MalformedPayload,
    PemError,
    RegisterLengthMismatch,
)
from .predictor import ConvPredictor, InitStrategy, LmiPredictor, load_weights

EXIT_OK = 0
EXIT_CAPACITY = 2
EXIT_MALFORMED = 3
EXIT_USAGE = 64

CSV_HEADER = "image,predictor,theta,bpp,psnr_db,ssim,entropy_bits,variance,p95,gini"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; we reserve that
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_predictors(spec: str, init_name: str):
    """Turn "lmi" or "nn:w1[,w2]" plus an init name into predictor objects."""
    try:
        init = InitStrategy(init_name)
    except ValueError:
        raise UsageError(f"unknown init strategy {init_name!r}") from None
    if spec == "lmi":
        return LmiPredictor(), None
    if spec.startswith("nn:"):
        paths = spec[3:].split(",")
        if not 1 <= len(paths) <= 2 or not all(paths):
            raise UsageError(f"predictor spec {spec!r} must be nn:<w1>[,<w2>]")
        for p in paths:
            if not os.path.isfile(p):
                raise UsageError(f"weight file not found: {p}")
        graphs = [load_weights(p) for p in paths]
        first = ConvPredictor(graphs[0], init, name=f"nn:{paths[0]}")
        second = (
            ConvPredictor(graphs[1], init, name=f"nn:{paths[1]}") if len(graphs) == 2 else None
        )
        return first, second
    raise UsageError(f"unknown predictor spec {spec!r} (use lmi or nn:<file>[,<file>])")


def _params_from(args) -> codec.StegoParams:
    if not 1 <= args.theta <= overflow.THETA_MAX:
        raise UsageError(f"--theta must be in [1, {overflow.THETA_MAX}], got {args.theta}")
    first, second = _parse_predictors(args.predictor, args.init)
    return codec.StegoParams(args.theta, first, second)


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return f"{value:.6f}"


def cmd_embed(args) -> int:
    cover = imaging.read_pgm(args.cover)
    with open(args.message, "rb") as f:
        message = BitStream.from_bytes(f.read())
    params = _params_from(args)
    stego = codec.encode(cover, message, params)
    imaging.write_pgm(stego, args.stego)
    print(f"bits={len(message)}")
    print(f"bpp={_fmt(len(message) / cover.size)}")
    print(f"psnr_db={_fmt(metrics.psnr(cover, stego))}")
    print(f"ssim={_fmt(metrics.ssim(cover, stego))}")
    return EXIT_OK


def cmd_extract(args) -> int:
    stego = imaging.read_pgm(args.stego)
    params = _params_from(args)
    cover, message = codec.decode(stego, params)
    if len(message) % 8:
        raise MalformedPayload(f"extracted {len(message)} bits, not a whole byte count")
    imaging.write_pgm(cover, args.cover)
    with open(args.message, "wb") as f:
        f.write(message.to_bytes())
    print(f"bits={len(message)}")
    return EXIT_OK


def cmd_capacity(args) -> int:
    cover = imaging.read_pgm(args.cover)
    params = _params_from(args)
    bits = codec.estimate_capacity(cover, params)
    print(f"capacity_bits={bits}")
    print(f"bpp={_fmt(bits / cover.size)}")
    return EXIT_OK


def _collect_images(paths) -> list[str]:
    files = []
    for p in paths:
        if os.path.isdir(p):
            files.extend(
                os.path.join(p, name)
                for name in sorted(os.listdir(p))
                if name.lower().endswith(".pgm")
            )
        else:
            files.append(p)
    if not files:
        raise UsageError("no input images")
    return files


def _analyze_one(path: str, params: codec.StegoParams) -> str:
    img = imaging.read_pgm(path)
    x_checked, _ = overflow.preprocess(img, params.theta)
    _, white = imaging.split(x_checked)
    predicted = params.predictor.predict(x_checked, white)
    dist = metrics.ErrorDistribution.from_errors(
        x_checked.astype(int)[white] - predicted.astype(int)[white]
    )
    stats = metrics.error_stats(dist)
    bits = codec.estimate_capacity(img, params)
    cols = [
        os.path.basename(path),
        params.predictor.name,
        str(params.theta),
        _fmt(bits / img.size),
        _fmt(metrics.psnr(x_checked, predicted)),
        _fmt(metrics.ssim(x_checked, predicted)),
        _fmt(stats["entropy_bits"]),
        _fmt(stats["variance"]),
        _fmt(stats["p95"]),
        _fmt(stats["gini"]),
    ]
    return ",".join(cols)


def _open_out(args):
    return open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout


def cmd_analyze(args) -> int:
    params = _params_from(args)
    files = _collect_images(args.images)
    workers = int(os.environ.get("PEM_THREADS", "0")) or min(8, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda p: _analyze_one(p, params), files))
    rows.sort()
    out = _open_out(args)
    try:
        print(f"# pem-codec v1, seed={args.seed}", file=out)
        print(CSV_HEADER, file=out)
        for row in rows:
            print(row, file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_rdcurve(args) -> int:
    thetas = sorted({int(t) for t in args.thetas.split(",")})
    for t in thetas:
        if not 1 <= t <= overflow.THETA_MAX:
            raise UsageError(f"--thetas values must be in [1, {overflow.THETA_MAX}]")
    first, second = _parse_predictors(args.predictor, args.init)
    img = imaging.read_pgm(args.cover)
    stats_by_theta = {
        t: metrics.error_stats(metrics.first_layer_errors(img, first, t)) for t in thetas
    }
    points = metrics.rd_curve(img, thetas, first, second, steps=args.steps, seed=args.seed)
    name = os.path.basename(args.cover)
    out = _open_out(args)
    try:
        print(f"# pem-codec v1, seed={args.seed}", file=out)
        print(CSV_HEADER, file=out)
        for pt in points:
            stats = stats_by_theta[pt.theta]
            cols = [
                name,
                first.name,
                str(pt.theta),
                _fmt(pt.bpp),
                _fmt(pt.psnr_db),
                _fmt(pt.ssim),
                _fmt(stats["entropy_bits"]),
                _fmt(stats["variance"]),
                _fmt(stats["p95"]),
                _fmt(stats["gini"]),
            ]
            print(",".join(cols), file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--theta", type=int, default=1, help="stego-channel half-width")
    p.add_argument("--predictor", default="lmi", help='"lmi" or "nn:<w1>[,<w2>]"')
    p.add_argument("--init", default="localmean", choices=["zero", "localmean"])
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pem", description="Reversible prediction-error-modulation codec")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="embed a message file into a cover PGM")
    p.add_argument("--cover", required=True)
    p.add_argument("--message", required=True)
    p.add_argument("--stego", required=True, help="output stego PGM path")
    _add_common(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="extract the message and restore the cover")
    p.add_argument("--stego", required=True)
    p.add_argument("--cover", required=True, help="output restored cover PGM path")
    p.add_argument("--message", required=True, help="output message file path")
    _add_common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("capacity", help="print the conservative capacity estimate")
    p.add_argument("--cover", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("analyze", help="per-image prediction-error statistics CSV")
    p.add_argument("images", nargs="+", help="PGM files or directories of PGMs")
    p.add_argument("--out", help="CSV output path (default stdout)")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("rdcurve", help="rate-distortion sweep CSV")
    p.add_argument("--cover", required=True)
    p.add_argument("--thetas", default="1,2,3")
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--out", help="CSV output path (default stdout)")
    _add_common(p)
    p.set_defaults(func=cmd_rdcurve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pem: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityExceeded as exc:
        print(f"pem: capacity exceeded by {exc.shortfall} bits", file=sys.stderr)
        return EXIT_CAPACITY
    except (MalformedPayload, RegisterLengthMismatch) as exc:
        print(f"pem: malformed stego or wrong parameters: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except (OSError, EOFError, PemError) as exc:
        print(f"pem: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
