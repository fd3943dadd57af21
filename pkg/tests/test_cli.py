import csv
import hashlib
import json
from pathlib import Path

import pytest

from tls_spectro.cli import main
from tls_spectro.dataset import DatasetManifest

GEN_ARGS = [
    "generate",
    "--n", "3",
    "--seed", "21",
    "--grid-omega", "6.9:7.2:12",
    "--grid-t", "0:200:10",
]


def _dataset_checksums(root: Path) -> dict:
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted((root / "samples").glob("*.tlsm"))
    }


def test_generate_creates_dataset(tmp_path):
    out = tmp_path / "ds"
    assert main(GEN_ARGS + ["--out", str(out)]) == 0
    manifest = DatasetManifest.load(out / "manifest.json")
    assert manifest.count == 3
    assert len(list((out / "samples").glob("*.tlsm"))) == 3
    assert (out / "run_config.json").exists()
    # effective configuration includes defaulted values
    config = json.loads((out / "run_config.json").read_text())
    assert config["noise"] == "clean"
    assert config["amplitude"] == 0.02


def test_generate_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(GEN_ARGS + ["--out", str(a)]) == 0
    assert main(GEN_ARGS + ["--out", str(b), "--parallelism", "2"]) == 0
    assert _dataset_checksums(a) == _dataset_checksums(b)


def test_generate_refuses_overwrite(tmp_path):
    out = tmp_path / "ds"
    assert main(GEN_ARGS + ["--out", str(out)]) == 0
    assert main(GEN_ARGS + ["--out", str(out)]) == 1


def test_generate_grid_shape(tmp_path):
    out = tmp_path / "ds"
    assert main(GEN_ARGS + ["--out", str(out)]) == 0
    manifest = DatasetManifest.load(out / "manifest.json")
    from tls_spectro.dataset import load_sample

    _, spec_map = load_sample(out, manifest, 0)
    assert spec_map.P.shape == (10, 12)


def test_estimate_writes_row_per_sample(tmp_path, capsys):
    out = tmp_path / "ds"
    main(GEN_ARGS + ["--out", str(out)])
    csv_path = tmp_path / "estimates.csv"
    assert main(["estimate", "--data", str(out), "--out", str(csv_path)]) == 0
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    for row in rows:
        assert row["valid"] in ("True", "False")
        if row["valid"] == "False":
            assert row["reject_reason"]


def test_estimate_missing_manifest(tmp_path):
    assert main(["estimate", "--data", str(tmp_path / "nope"),
                 "--out", str(tmp_path / "e.csv")]) == 1


def test_estimate_all_out_of_range(tmp_path):
    out = tmp_path / "ds"
    main(GEN_ARGS + ["--out", str(out)])
    # force every label's TLS frequency outside the validity window
    manifest_path = out / "manifest.json"
    payload = json.loads(manifest_path.read_text())
    for record in payload["records"]:
        record["q"][0] = 7.5
    manifest_path.write_text(json.dumps(payload))
    csv_path = tmp_path / "estimates.csv"
    assert main(["estimate", "--data", str(out), "--out", str(csv_path)]) == 0
    with open(csv_path) as fh:
        rows = list(csv.DictReader(fh))
    assert all(row["valid"] == "False" for row in rows)
    assert all(row["reject_reason"] == "OutOfRange" for row in rows)


def test_evaluate_perfect_predictions(tmp_path, capsys):
    out = tmp_path / "ds"
    main(GEN_ARGS + ["--out", str(out)])
    manifest = DatasetManifest.load(out / "manifest.json")
    pred_path = tmp_path / "pred.csv"
    with open(pred_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "source", "nu_tls", "g", "T1_tls", "Tphi_tls"])
        for i, record in enumerate(manifest.records):
            writer.writerow([i, "cnn", *record["q"]])
    assert main(["evaluate", "--data", str(out), "--pred", str(pred_path)]) == 0
    report = capsys.readouterr().out
    assert "cnn/raw" in report and "cnn/normalized" in report
    # perfect predictions give an all-zero raw table
    for line in report.splitlines():
        if line.startswith("nu_tls"):
            assert " 0 " in line or line.rstrip().endswith(" 0")


def test_evaluate_accepts_estimates_csv(tmp_path, capsys):
    out = tmp_path / "ds"
    main(GEN_ARGS + ["--out", str(out)])
    csv_path = tmp_path / "estimates.csv"
    main(["estimate", "--data", str(out), "--out", str(csv_path)])
    assert main(["evaluate", "--data", str(out), "--pred", str(csv_path)]) == 0
    report = capsys.readouterr().out
    assert "absent" in report  # T rows are not analytically estimated


def test_render_all_and_missing(tmp_path):
    out = tmp_path / "ds"
    main(GEN_ARGS + ["--out", str(out)])
    single = tmp_path / "one"
    assert main(["render", "--data", str(out), "--out", str(single),
                 "--index", "1"]) == 0
    assert [p.name for p in single.glob("*.png")] == ["sample_00001.png"]

    png_dir = tmp_path / "png"
    assert main(["render", "--data", str(out), "--out", str(png_dir), "--all"]) == 0
    assert len(list(png_dir.glob("*.png"))) == 3

    # deleting a sample makes render fail with exit 1
    victim = next((out / "samples").glob("*.tlsm"))
    victim.unlink()
    assert main(["render", "--data", str(out), "--out", str(png_dir), "--all"]) == 1


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--n", "notanumber", "--out", "x"])
    assert exc.value.code == 2


def test_bad_grid_spec():
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--n", "1", "--out", "x", "--grid-omega", "6.6-7.4-100"])
    assert exc.value.code == 2
