"""pem-train command line: corpus preparation, training, evaluation."""

from __future__ import annotations

import argparse
import sys

from .data import load_images, prepare_corpus, split_dataset
from .training import (
    TrainConfig,
    evaluate_first_layer,
    evaluate_lmi,
    evaluate_second_layer,
    run_training,
)


def cmd_prepare(args) -> int:
    n = prepare_corpus(args.src, args.out, size=args.size, count=args.count, seed=args.seed)
    print(f"wrote {n} images to {args.out}")
    return 0


def cmd_train(args) -> int:
    cfg = TrainConfig(
        arch=args.arch,
        init=args.init,
        strategy=args.strategy,
        theta=args.theta,
        data_dir=args.data,
        out_prefix=args.out,
        epochs=args.epochs,
        lr=args.lr,
        batch_size=args.batch,
        crop=args.crop,
        seed=args.seed,
        train_split=args.train_split,
    )
    paths = run_training(cfg)
    print(f"net1={paths['net1']}")
    print(f"net2={paths['net2']}")
    return 0


def cmd_eval(args) -> int:
    import torch

    from .models import build

    images = load_images(args.data)
    _, held = split_dataset(images, args.train_split, args.seed)
    planes = [img for _, img in held]
    print(f"held-out images: {len(planes)}")
    print(f"lmi_psnr={evaluate_lmi(planes):.4f}")
    if args.checkpoint:
        model = build(args.arch)
        model.load_state_dict(torch.load(args.checkpoint, weights_only=True))
        print(f"net1_psnr={evaluate_first_layer(model, planes, args.init):.4f}")
        if args.second:
            second = build(args.arch)
            second.load_state_dict(torch.load(args.second, weights_only=True))
            score = evaluate_second_layer(second, planes, model, args.theta, args.init)
            print(f"net2_psnr={score:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pem-train", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="build a 256x256 greyscale PGM corpus")
    p.add_argument("--src", required=True, help='image directory or "skimage"')
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--count", type=int, default=500, help="images to synthesize (skimage src)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train predictors and export NNPW files")
    p.add_argument("--arch", default="mscnn-lite", choices=["mscnn-lite", "rdn-lite"])
    p.add_argument("--init", default="zero", choices=["zero", "localmean"])
    p.add_argument("--strategy", default="universal",
                   choices=["universal", "independent", "causal"])
    p.add_argument("--theta", type=int, default=2)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="output prefix for .net1/.net2 files")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--crop", type=int, default=96)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-split", type=float, default=0.8)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="held-out predicted-image PSNR vs the LMI baseline")
    p.add_argument("--data", required=True)
    p.add_argument("--arch", default="mscnn-lite", choices=["mscnn-lite", "rdn-lite"])
    p.add_argument("--init", default="zero", choices=["zero", "localmean"])
    p.add_argument("--checkpoint", help="torch state_dict of net1 (optional)")
    p.add_argument("--second", help="torch state_dict of net2 (optional)")
    p.add_argument("--theta", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-split", type=float, default=0.8)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
