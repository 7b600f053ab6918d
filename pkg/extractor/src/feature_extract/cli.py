"""feature-extract: image folder (one subdirectory per class) -> feature CSV."""

import argparse
import sys

from .extract import ExtractJob, extract, extract_random_weights


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="feature-extract",
        description="Extract 512-dim residual-network features from an image folder.",
    )
    parser.add_argument("--images", required=True, help="root directory, one subdir per class")
    parser.add_argument("--out", required=True, help="output feature CSV path")
    parser.add_argument(
        "--random-weights",
        action="store_true",
        help="use seed-initialized weights instead of the pretrained checkpoint",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for --random-weights")
    parser.add_argument("--batch-size", type=int, default=32)
    args = parser.parse_args(argv)

    job = ExtractJob(image_root=args.images, output_csv=args.out, batch_size=args.batch_size)
    try:
        if args.random_weights:
            summary = extract_random_weights(job, args.seed)
        else:
            summary = extract(job)
    except (FileNotFoundError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {args.out}: {summary.images_processed} images "
        f"({summary.images_skipped} skipped), {summary.feature_dim} features, "
        f"{len(summary.classes)} classes"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
