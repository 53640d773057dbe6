"""Command line for the fine-tuning bridge.

    adapter run --task-dir out/control_lexical_content --model ./checkpoint \
        --lr 2e-5 --seed 0 --out runs/control_lexical_content
    adapter export --task-dir out/morphology_x_length --out exported/
"""

import argparse
import json
import sys

from .config import ALLOWED_LEARNING_RATES, AdapterConfig, AdapterError
from .runner import export_for_external, finetune_and_predict

EXIT_OK = 0
EXIT_ERROR = 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="adapter",
        description="fine-tune a pretrained masked LM on a task bundle and "
                    "emit exchange-format predictions")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="fine-tune and predict")
    run.add_argument("--task-dir", required=True)
    run.add_argument("--model", required=True,
                     help="checkpoint directory or resolvable model id")
    run.add_argument("--lr", type=float, default=2e-5,
                     help=f"one of {[f'{r:g}' for r in ALLOWED_LEARNING_RATES]}")
    run.add_argument("--epochs", type=int, default=5)
    run.add_argument("--batch-size", type=int, default=16)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--max-length", type=int, default=64)
    run.add_argument("--out", required=True, dest="out_dir")
    run.add_argument("--no-deterministic", action="store_false",
                     dest="deterministic",
                     help="skip requesting deterministic kernels")

    export = sub.add_parser("export",
                            help="flatten a bundle to (uid, text, label) CSVs")
    export.add_argument("--task-dir", required=True)
    export.add_argument("--out", required=True, dest="out_dir")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = AdapterConfig(
                task_dir=args.task_dir, model=args.model,
                out_dir=args.out_dir, learning_rate=args.lr,
                epochs=args.epochs, batch_size=args.batch_size,
                seed=args.seed, max_length=args.max_length,
                deterministic=args.deterministic)
            sidecar = finetune_and_predict(config)
            print(json.dumps(sidecar, indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "export":
            written = export_for_external(args.task_dir, args.out_dir)
            for condition, path in sorted(written.items()):
                print(f"{condition} -> {path}")
            return EXIT_OK
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    raise AssertionError(f"unhandled command: {args.command}")


if __name__ == "__main__":
    sys.exit(main())
