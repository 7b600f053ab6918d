"""Image-folder feature extraction with an 18-layer residual network.

The input directory holds one subdirectory per class; every decodable
image inside becomes one row of the output feature CSV. Features are the
512-wide pooled activations feeding the network's final classification
layer, captured with a forward hook. Preprocessing: decode, replicate
grayscale to three channels, resize the shorter side to 224 (bilinear),
center-crop 224x224, then standardize each image by its own scalar mean
and standard deviation. Rows are written in sorted (class, filename)
order, so a rerun of the same job is byte-identical.
"""

import logging
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError
from torchvision.models import resnet18
from torchvision.transforms import functional as tvf

__all__ = ["ExtractJob", "ExtractSummary", "extract", "extract_random_weights"]

log = logging.getLogger(__name__)

FEATURE_DIM = 512
CROP_SIZE = 224

PREPROCESS_NOTE = (
    "shorter-side resize to 224 (bilinear), center crop 224x224, "
    "per-image mean/std standardization"
)


@dataclass(frozen=True)
class ExtractJob:
    """One extraction run: where the images live and where the CSV goes."""

    image_root: str
    output_csv: str
    batch_size: int = 32

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass(frozen=True)
class ExtractSummary:
    images_processed: int
    images_skipped: int
    feature_dim: int
    classes: tuple


def _class_directories(root):
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"image root {root} is not a directory")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise ValueError(f"image root {root} has no class subdirectories")
    return class_dirs


def _load_image(path):
    with Image.open(path) as img:
        img = img.convert("RGB")  # replicates grayscale to 3 channels
        tensor = tvf.pil_to_tensor(tvf.center_crop(tvf.resize(img, CROP_SIZE), CROP_SIZE))
    x = tensor.to(torch.float32) / 255.0
    std = float(x.std())
    return (x - x.mean()) / max(std, 1e-6)


def _pooled_features(model, batch):
    captured = {}

    def hook(_module, _inputs, output):
        captured["pooled"] = output

    handle = model.avgpool.register_forward_hook(hook)
    try:
        with torch.no_grad():
            model(torch.stack(batch))
    finally:
        handle.remove()
    return captured["pooled"].flatten(1).numpy()


def _run(job, model, weight_note):
    model.eval()
    class_dirs = _class_directories(job.image_root)
    processed = 0
    skipped = 0
    out_path = Path(job.output_csv)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# extractor: resnet18 pooled penultimate activations ({FEATURE_DIM} dims)\n")
        fh.write(f"# weights: {weight_note}\n")
        fh.write(f"# preprocess: {PREPROCESS_NOTE}\n")
        fh.write("label," + ",".join(f"f{i}" for i in range(FEATURE_DIM)) + "\n")
        for class_dir in class_dirs:
            label = class_dir.name
            batch, names = [], []
            wrote_any = False

            def flush():
                nonlocal wrote_any, processed
                if not batch:
                    return
                feats = _pooled_features(model, batch)
                for row in feats:
                    cells = ",".join(f"{float(v):.17g}" for v in row)
                    fh.write(f"{label},{cells}\n")
                processed += len(batch)
                wrote_any = True
                batch.clear()
                names.clear()

            for path in sorted(p for p in class_dir.iterdir() if p.is_file()):
                try:
                    batch.append(_load_image(path))
                    names.append(path.name)
                except (UnidentifiedImageError, OSError) as exc:
                    warnings.warn(f"skipping undecodable image {path}: {exc}")
                    skipped += 1
                    continue
                if len(batch) == job.batch_size:
                    flush()
            flush()
            if not wrote_any:
                raise ValueError(f"class directory {class_dir} has no decodable images")
    log.info("extracted %d images (%d skipped) to %s", processed, skipped, out_path)
    return ExtractSummary(
        images_processed=processed,
        images_skipped=skipped,
        feature_dim=FEATURE_DIM,
        classes=tuple(d.name for d in class_dirs),
    )


def extract(job):
    """Extract features with ImageNet-pretrained weights.

    Needs the pretrained checkpoint locally cached or downloadable.
    """
    from torchvision.models import ResNet18_Weights

    try:
        model = resnet18(weights=ResNet18_Weights.IMAGENET1K_V1)
    except Exception as exc:
        raise RuntimeError(
            "pretrained weights unavailable (no local cache and no network); "
            "use extract_random_weights for an offline run"
        ) from exc
    return _run(job, model, "imagenet-pretrained")


def extract_random_weights(job, seed):
    """Extract features with seed-initialized (untrained) weights."""
    torch.manual_seed(int(seed))
    model = resnet18(weights=None)
    return _run(job, model, f"random(seed={int(seed)})")
