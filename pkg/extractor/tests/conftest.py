import numpy as np
import pytest
from PIL import Image


def grating(rng, size=64, angle_deg=0.0, freq=6.0):
    """Oriented sinusoidal grating with random phase and pixel noise."""
    yy, xx = np.mgrid[0:size, 0:size] / size
    theta = np.deg2rad(angle_deg)
    wave = np.sin(
        2 * np.pi * freq * (xx * np.cos(theta) + yy * np.sin(theta))
        + rng.uniform(0, 2 * np.pi)
    )
    img = 0.5 + 0.35 * wave + rng.normal(0, 0.08, size=(size, size))
    return (np.clip(img, 0, 1) * 255).astype(np.uint8)


def write_image_corpus(root, class_angles, images_per_class, seed=0, size=64):
    """One subdirectory per class, filled with oriented-grating PNGs."""
    rng = np.random.default_rng(seed)
    for name, angle in class_angles.items():
        class_dir = root / name
        class_dir.mkdir(parents=True)
        for i in range(images_per_class):
            arr = grating(rng, size=size, angle_deg=angle)
            Image.fromarray(arr, mode="L").save(class_dir / f"img_{i:04d}.png")
    return root


@pytest.fixture()
def tiny_corpus(tmp_path):
    root = tmp_path / "images"
    write_image_corpus(
        root, {"healthy": 0.0, "lesion": 90.0}, images_per_class=3, seed=1
    )
    return root
