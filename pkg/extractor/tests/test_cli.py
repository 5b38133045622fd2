import json

from eocl.featio import load_manifest
from eocl_extractor import cli


def test_build_mswc_micro_command(tmp_path):
    import csv
    rows = [["SET", "LINK", "WORD", "VALID", "SPEAKER", "GENDER"]]
    for word in ("uno", "dos", "tres"):
        for i in range(6):
            rows.append(["TRAIN", f"a/{word}/{i}.opus", word, "TRUE", "s", ""])
        rows.append(["TEST", f"a/{word}/t.opus", word, "TRUE", "s", ""])
    csv_path = tmp_path / "es_splits.csv"
    with open(csv_path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)

    out = tmp_path / "micro.json"
    code = cli.main(["build-mswc-micro", "--splits-csv", str(csv_path),
                     "--n-words", "2", "--seed", "1", "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert len(doc["words"]) == 2


def test_extract_command_random_init(gsc_tree, tmp_path, monkeypatch):
    # shrink the architecture so the CLI path stays fast
    import importlib

    from conftest import TINY_ARCH
    from eocl_extractor import backbones

    extract_mod = importlib.import_module("eocl_extractor.extract")
    original = backbones.load_backbone

    def tiny_loader(tag, random_init=False, layer=-1, seed=0, config_overrides=None):
        return original(tag, random_init=random_init, layer=layer, seed=seed,
                        config_overrides=config_overrides or TINY_ARCH)

    monkeypatch.setattr(extract_mod, "load_backbone", tiny_loader)
    out = tmp_path / "out"
    code = cli.main(["extract", "--dataset-kind", "gsc",
                     "--dataset-root", str(gsc_tree),
                     "--backbone", "w2v2-base", "--split", "test",
                     "--out", str(out), "--random-init", "--seed", "2"])
    assert code == 0
    manifest = load_manifest(out / "manifest.json")
    manifest.validate()
    assert len(manifest.load_split("test")) == 3


def test_extract_command_bad_root(tmp_path):
    code = cli.main(["extract", "--dataset-kind", "gsc",
                     "--dataset-root", str(tmp_path / "none"),
                     "--backbone", "w2v2-base", "--out", str(tmp_path / "o"),
                     "--random-init"])
    assert code == 2


def test_usage_error(tmp_path):
    assert cli.main(["extract", "--dataset-kind", "gsc"]) == 1
