import numpy as np
import pytest
from PIL import Image

from feature_extract import ExtractJob, extract, extract_random_weights
from feature_extract.cli import main as cli_main

# The output must be consumable by the subspace package's CSV loader;
# that loader is the interface contract between the two packages.
from fewshot_subspaces.dataset import load_feature_csv

from conftest import grating


def test_contract_rows_columns_and_labels(tiny_corpus, tmp_path):
    out = tmp_path / "features.csv"
    summary = extract_random_weights(
        ExtractJob(image_root=tiny_corpus, output_csv=out), seed=7
    )
    assert summary.images_processed == 6
    assert summary.images_skipped == 0
    assert summary.feature_dim == 512
    assert summary.classes == ("healthy", "lesion")

    dataset = load_feature_csv(out)
    assert dataset.n_samples == 6
    assert dataset.n_features == 512
    assert dataset.label_names == ("healthy", "lesion")
    assert dataset.features.min() >= 0.0  # post-rectification activations


def test_seed_recorded_in_header_comment(tiny_corpus, tmp_path):
    out = tmp_path / "features.csv"
    extract_random_weights(ExtractJob(image_root=tiny_corpus, output_csv=out), seed=41)
    head = out.read_text().splitlines()[:3]
    assert any("random(seed=41)" in line for line in head)
    assert all(line.startswith("#") for line in head)


def test_rerun_is_byte_identical(tiny_corpus, tmp_path):
    job_a = ExtractJob(image_root=tiny_corpus, output_csv=tmp_path / "a.csv")
    job_b = ExtractJob(image_root=tiny_corpus, output_csv=tmp_path / "b.csv")
    extract_random_weights(job_a, seed=3)
    extract_random_weights(job_b, seed=3)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_different_seeds_differ(tiny_corpus, tmp_path):
    extract_random_weights(
        ExtractJob(image_root=tiny_corpus, output_csv=tmp_path / "a.csv"), seed=3
    )
    extract_random_weights(
        ExtractJob(image_root=tiny_corpus, output_csv=tmp_path / "b.csv"), seed=4
    )
    a = load_feature_csv(tmp_path / "a.csv").features
    b = load_feature_csv(tmp_path / "b.csv").features
    assert not np.array_equal(a, b)


def test_grayscale_matches_pre_replicated_rgb(tmp_path):
    rng = np.random.default_rng(5)
    arr = grating(rng, angle_deg=30.0)
    for name, mode_arr in (("gray", arr), ("rgb", np.stack([arr] * 3, axis=-1))):
        class_dir = tmp_path / name / "cls"
        class_dir.mkdir(parents=True)
        Image.fromarray(mode_arr).save(class_dir / "img.png")
    out_gray = tmp_path / "gray.csv"
    out_rgb = tmp_path / "rgb.csv"
    extract_random_weights(
        ExtractJob(image_root=tmp_path / "gray", output_csv=out_gray), seed=9
    )
    extract_random_weights(
        ExtractJob(image_root=tmp_path / "rgb", output_csv=out_rgb), seed=9
    )
    gray = load_feature_csv(out_gray).features
    rgb = load_feature_csv(out_rgb).features
    assert np.array_equal(gray, rgb)


def test_undecodable_image_skipped_with_warning(tiny_corpus, tmp_path):
    (tiny_corpus / "healthy" / "broken.png").write_bytes(b"this is not an image")
    out = tmp_path / "features.csv"
    with pytest.warns(UserWarning, match="broken.png"):
        summary = extract_random_weights(
            ExtractJob(image_root=tiny_corpus, output_csv=out), seed=2
        )
    assert summary.images_processed == 6
    assert summary.images_skipped == 1
    assert load_feature_csv(out).n_samples == 6


def test_empty_class_is_hard_error(tiny_corpus, tmp_path):
    (tiny_corpus / "empty_class").mkdir()
    with pytest.raises(ValueError, match="empty_class"):
        extract_random_weights(
            ExtractJob(image_root=tiny_corpus, output_csv=tmp_path / "x.csv"), seed=2
        )


def test_missing_root_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        extract_random_weights(
            ExtractJob(image_root=tmp_path / "absent", output_csv=tmp_path / "x.csv"),
            seed=0,
        )


def test_pretrained_path_if_weights_available(tiny_corpus, tmp_path):
    out = tmp_path / "features.csv"
    try:
        summary = extract(ExtractJob(image_root=tiny_corpus, output_csv=out))
    except RuntimeError as exc:
        pytest.skip(f"pretrained weights not available here: {exc}")
    assert summary.feature_dim == 512
    assert load_feature_csv(out).features.min() >= 0.0


def test_cli_round_trip(tiny_corpus, tmp_path, capsys):
    out = tmp_path / "features.csv"
    code = cli_main(
        [
            "--images",
            str(tiny_corpus),
            "--out",
            str(out),
            "--random-weights",
            "--seed",
            "11",
        ]
    )
    assert code == 0
    assert "6 images" in capsys.readouterr().out
    assert load_feature_csv(out).n_features == 512


def test_cli_missing_root_exits_2(tmp_path, capsys):
    code = cli_main(
        ["--images", str(tmp_path / "none"), "--out", str(tmp_path / "x.csv"),
         "--random-weights"]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err
