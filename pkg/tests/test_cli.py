from pathlib import Path

import numpy as np
import pytest

from conftest import make_corpus, tree_hash
from segfuse.cli import main
from segfuse.labelcore import LabelMap, read_image_png, read_label_png, write_label_png
from segfuse.report import rows_from_csv

GOLDEN = Path(__file__).parent / "golden"


def write_maps(directory, maps):
    directory.mkdir(parents=True, exist_ok=True)
    for name, m in maps.items():
        write_label_png(m, directory / name)
    return directory


def random_maps(n, seed, shape=(6, 5), classes=4):
    rng = np.random.default_rng(seed)
    return {f"img{i:02d}.png": LabelMap(rng.integers(0, classes, shape, dtype=np.uint8)) for i in range(n)}


class TestEvaluate:
    def test_self_evaluation(self, tmp_path, class_file, capsys):
        gt = write_maps(tmp_path / "gt", random_maps(3, 0))
        assert main(["evaluate", "--gt", str(gt), "--pred", str(gt), "--classes", str(class_file)]) == 0
        assert capsys.readouterr().out.splitlines()[0] == "mIoU 1.0000"

    def test_worked_example(self, tmp_path, class_file, capsys):
        gt = write_maps(tmp_path / "gt", {"x.png": LabelMap.from_list([0, 0, 1, 1], 4, 1)})
        pred = write_maps(tmp_path / "pred", {"x.png": LabelMap.from_list([0, 1, 1, 1], 4, 1)})
        csv_path = tmp_path / "row.csv"
        code = main(["evaluate", "--gt", str(gt), "--pred", str(pred), "--classes", str(class_file),
                     "--csv", str(csv_path), "--model-id", "toy"])
        out = capsys.readouterr().out.splitlines()
        assert code == 0
        assert out[0] == "mIoU 0.5833"
        assert out[2:] == ["  0  road  0.5000", "  1  sky   0.6667", "  2  tree  n/a", "  3  car   n/a"]
        (row,) = rows_from_csv(csv_path.read_text())
        assert (row.model_id, row.miou, row.pixel_count) == ("toy", 0.5833, 4)
        assert row.per_class_iou == (0.5, 0.6667, None, None)

    def test_missing_counterpart(self, tmp_path, class_file, capsys):
        gt = write_maps(tmp_path / "gt", {"a.png": LabelMap.full(2, 2, 0)})
        pred = write_maps(tmp_path / "pred", {"b.png": LabelMap.full(2, 2, 0)})
        assert main(["evaluate", "--gt", str(gt), "--pred", str(pred), "--classes", str(class_file)]) == 3
        assert "MissingCounterpart" in capsys.readouterr().err

    def test_class_out_of_range(self, tmp_path, class_file, capsys):
        gt = write_maps(tmp_path / "gt", {"a.png": LabelMap.full(2, 2, 0)})
        pred = write_maps(tmp_path / "pred", {"a.png": LabelMap.full(2, 2, 7)})
        assert main(["evaluate", "--gt", str(gt), "--pred", str(pred), "--classes", str(class_file)]) == 3
        assert "a.png" in capsys.readouterr().err

    def test_missing_class_file(self, tmp_path):
        gt = write_maps(tmp_path / "gt", {"a.png": LabelMap.full(2, 2, 0)})
        assert main(["evaluate", "--gt", str(gt), "--pred", str(gt), "--classes", str(tmp_path / "nope")]) == 4

    def test_missing_directory(self, tmp_path, class_file):
        assert main(["evaluate", "--gt", str(tmp_path / "a"), "--pred", str(tmp_path / "b"),
                     "--classes", str(class_file)]) == 4

    def test_usage_error(self):
        with pytest.raises(SystemExit) as err:
            main(["evaluate", "--gt", "x"])
        assert err.value.code == 2

    def test_bad_thread_env(self, monkeypatch, tmp_path, class_file):
        monkeypatch.setenv("SEGFUSE_THREADS", "zero")
        with pytest.raises(SystemExit) as err:
            main(["evaluate", "--gt", "x", "--pred", "y", "--classes", str(class_file)])
        assert err.value.code == 2


class TestFuse:
    def test_single_member_identity(self, tmp_path):
        a = write_maps(tmp_path / "a", random_maps(3, 1))
        assert main(["fuse", "--member", str(a), "--out", str(tmp_path / "out")]) == 0
        for name in ("img00.png", "img01.png", "img02.png"):
            assert (tmp_path / "out" / name).read_bytes() == (a / name).read_bytes()

    def test_majority(self, tmp_path):
        dirs = [write_maps(tmp_path / f"m{v}{i}", {"x.png": LabelMap.full(4, 3, v)}) for i, v in enumerate([0, 1, 1])]
        args = ["fuse"] + [a for d in dirs for a in ("--member", str(d))] + ["--out", str(tmp_path / "out")]
        assert main(args) == 0
        assert (read_label_png(tmp_path / "out" / "x.png").data == 1).all()

    def test_rerun_identical(self, tmp_path):
        dirs = [write_maps(tmp_path / f"m{i}", random_maps(5, i)) for i in range(3)]
        members = [a for d in dirs for a in ("--member", str(d))]
        main(["fuse", *members, "--out", str(tmp_path / "o1")])
        main(["fuse", *members, "--out", str(tmp_path / "o2"), "--threads", "4"])
        assert tree_hash(tmp_path / "o1") == tree_hash(tmp_path / "o2")

    def test_shape_mismatch_names_file(self, tmp_path, capsys):
        a = write_maps(tmp_path / "a", {"x.png": LabelMap.full(4, 3, 0)})
        b = write_maps(tmp_path / "b", {"x.png": LabelMap.full(3, 3, 0)})
        assert main(["fuse", "--member", str(a), "--member", str(b), "--out", str(tmp_path / "o")]) == 3
        err = capsys.readouterr().err
        assert "MemberShapeMismatch" in err and "x.png" in err


class TestReport:
    def test_golden(self, tmp_path, capsys):
        code = main(["report", "--member", "iter 3000=0.4040", "--member", "iter 3500=0.4198",
                     "--member", "iter 4000=0.4184", "--fused", "0.4371",
                     "--out", str(tmp_path / "t.txt"), "--csv", str(tmp_path / "t.csv")])
        assert code == 0
        golden = (GOLDEN / "table1.txt").read_text()
        assert capsys.readouterr().out == golden
        assert (tmp_path / "t.txt").read_text() == golden
        assert (tmp_path / "t.csv").read_text() == (GOLDEN / "table1.csv").read_text()

    def test_from_evaluate_csvs(self, tmp_path, class_file, capsys):
        gt = write_maps(tmp_path / "gt", random_maps(2, 0))
        pred = write_maps(tmp_path / "pred", random_maps(2, 1))
        main(["evaluate", "--gt", str(gt), "--pred", str(pred), "--classes", str(class_file),
              "--csv", str(tmp_path / "a.csv"), "--model-id", "iter 1"])
        main(["evaluate", "--gt", str(gt), "--pred", str(gt), "--classes", str(class_file),
              "--csv", str(tmp_path / "f.csv")])
        capsys.readouterr()
        assert main(["report", "--member-csv", str(tmp_path / "a.csv"), "--fused-csv", str(tmp_path / "f.csv")]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[3].startswith("iter 1") and lines[4].endswith("1.0000")

    def test_bad_member(self):
        with pytest.raises(SystemExit) as err:
            main(["report", "--member", "noequals", "--fused", "0.5"])
        assert err.value.code == 2


class TestDatasetCommands:
    def test_augment_stats_verify(self, tmp_path, capsys):
        make_corpus(tmp_path / "in", ["train", "train", "val"])
        spec = tmp_path / "spec.cfg"
        spec.write_text("contrast_factors=0.5\nbrightness_deltas=10,20\nmaster_seed=1\n")
        assert main(["augment", "--manifest", str(tmp_path / "in" / "manifest.tsv"), "--spec", str(spec),
                     "--out", str(tmp_path / "out")]) == 0
        assert main(["verify", "--manifest", str(tmp_path / "out" / "manifest.tsv")]) == 0
        capsys.readouterr()
        assert main(["stats", "--manifest", str(tmp_path / "out" / "manifest.tsv"),
                     "--json", str(tmp_path / "s.json")]) == 0
        out = capsys.readouterr().out
        assert "records 9" in out and "split train 8" in out and "split val 1" in out

    def test_verify_failure_exit(self, tmp_path):
        m = make_corpus(tmp_path, ["train"])
        Path(m.records[0].clear_path).unlink()
        assert main(["verify", "--manifest", str(tmp_path / "manifest.tsv")]) == 3

    def test_bad_manifest(self, tmp_path):
        (tmp_path / "m.tsv").write_text("")
        assert main(["verify", "--manifest", str(tmp_path / "m.tsv")]) == 3


class TestPredictColorize:
    def test_roundtrip(self, tmp_path, class_file):
        truth = write_maps(tmp_path / "truth", random_maps(3, 5))
        assert main(["colorize", "--labels", str(truth), "--classes", str(class_file), "--out", str(tmp_path / "rgb")]) == 0
        assert read_image_png(tmp_path / "rgb" / "img00.png").channels == 3
        assert main(["predict", "--images", str(tmp_path / "rgb"), "--classes", str(class_file),
                     "--nearest-color", "--out", str(tmp_path / "pred")]) == 0
        assert tree_hash(tmp_path / "pred") == tree_hash(truth)

    def test_constant(self, tmp_path, class_file):
        truth = write_maps(tmp_path / "truth", random_maps(2, 5))
        main(["colorize", "--labels", str(truth), "--classes", str(class_file), "--out", str(tmp_path / "rgb")])
        assert main(["predict", "--images", str(tmp_path / "rgb"), "--classes", str(class_file),
                     "--constant", "2", "--out", str(tmp_path / "pred")]) == 0
        assert (read_label_png(tmp_path / "pred" / "img01.png").data == 2).all()
        assert main(["predict", "--images", str(tmp_path / "rgb"), "--classes", str(class_file),
                     "--constant", "9", "--out", str(tmp_path / "pred2")]) == 3
