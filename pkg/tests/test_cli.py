import csv

import numpy as np
import pytest

from vesselstrata import cli
from vesselstrata.losses import LossWeights
from vesselstrata.raster import load_image, save_gray, save_mask
from vesselstrata.stratification import ThresholdLadder, stratify
from helpers import random_gray, random_mask


def make_custom_dataset(root, masks, with_fov=False):
    (root / "images").mkdir(parents=True)
    (root / "masks").mkdir()
    if with_fov:
        (root / "fov").mkdir()
    for image_id, mask in masks.items():
        save_gray(mask * np.uint8(200), root / "images" / f"{image_id}.png")
        save_mask(mask, root / "masks" / f"{image_id}.png")
        if with_fov:
            save_mask(np.ones_like(mask), root / "fov" / f"{image_id}.png")
    return root


def make_drive_tree(root, ids=("21", "22", "23"), with_fov=True):
    rng = np.random.default_rng(77)
    (root / "images").mkdir(parents=True)
    (root / "1st_manual").mkdir()
    if with_fov:
        (root / "mask").mkdir()
    masks = {}
    for image_id in ids:
        m = random_mask(rng, 12, 14, p=0.5)
        masks[image_id] = m
        save_gray(m * np.uint8(150), root / "images" / f"{image_id}_training.png")
        save_mask(m, root / "1st_manual" / f"{image_id}_manual1.png")
        if with_fov:
            save_mask(np.ones_like(m), root / "mask" / f"{image_id}_training_mask.png")
    return masks


class TestScanDataset:
    def test_drive_layout(self, tmp_path):
        make_drive_tree(tmp_path)
        manifest = cli.scan_dataset(tmp_path, "drive")
        assert [e.id for e in manifest.entries] == ["21", "22", "23"]
        assert all(e.fov_path is not None for e in manifest.entries)

    def test_drive_orphan_image_reported(self, tmp_path):
        make_drive_tree(tmp_path, ids=("21", "22"))
        (tmp_path / "1st_manual" / "22_manual1.png").unlink()
        with pytest.raises(ValueError, match="image 22 has no mask"):
            cli.scan_dataset(tmp_path, "drive")

    def test_drive_orphan_mask_reported(self, tmp_path):
        make_drive_tree(tmp_path, ids=("21",))
        extra = random_mask(np.random.default_rng(1), 4, 4)
        save_mask(extra, tmp_path / "1st_manual" / "39_manual1.png")
        with pytest.raises(ValueError, match="mask 39 has no image"):
            cli.scan_dataset(tmp_path, "drive")

    def test_stare_requires_annotator(self, tmp_path):
        (tmp_path / "stare-images").mkdir(parents=True)
        with pytest.raises(ValueError, match="annotator"):
            cli.scan_dataset(tmp_path, "stare")

    def test_stare_layout(self, tmp_path):
        rng = np.random.default_rng(2)
        (tmp_path / "stare-images").mkdir(parents=True)
        (tmp_path / "labels-ah").mkdir()
        for n in (1, 2):
            m = random_mask(rng, 6, 6)
            save_gray(m * np.uint8(99), tmp_path / "stare-images" / f"im{n:04d}.png")
            save_mask(m, tmp_path / "labels-ah" / f"im{n:04d}.ah.png")
        manifest = cli.scan_dataset(tmp_path, "stare", annotator="labels-ah")
        assert [e.id for e in manifest.entries] == ["im0001", "im0002"]

    def test_chase_layout(self, tmp_path):
        rng = np.random.default_rng(3)
        tmp_path.mkdir(exist_ok=True)
        for stem in ("01L", "01R"):
            m = random_mask(rng, 6, 6)
            save_gray(m * np.uint8(99), tmp_path / f"Image_{stem}.png")
            save_mask(m, tmp_path / f"Image_{stem}_1stHO.png")
            save_mask(m, tmp_path / f"Image_{stem}_2ndHO.png")
        manifest = cli.scan_dataset(tmp_path, "chasedb1")
        assert [e.id for e in manifest.entries] == ["01L", "01R"]
        second = cli.scan_dataset(tmp_path, "chasedb1", annotator="2ndHO")
        assert [e.id for e in second.entries] == ["01L", "01R"]

    def test_custom_lexicographic_order(self, tmp_path):
        rng = np.random.default_rng(4)
        masks = {name: random_mask(rng, 5, 5) for name in ("b", "a", "c")}
        make_custom_dataset(tmp_path / "data", masks)
        manifest = cli.scan_dataset(tmp_path / "data", "custom")
        assert [e.id for e in manifest.entries] == ["a", "b", "c"]

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(ValueError, match="unknown dataset kind"):
            cli.scan_dataset(tmp_path, "imagenet")

    def test_missing_root(self, tmp_path):
        with pytest.raises(ValueError, match="does not exist"):
            cli.scan_dataset(tmp_path / "nothing", "custom")

    def test_filter_ids(self, tmp_path):
        rng = np.random.default_rng(5)
        masks = {name: random_mask(rng, 5, 5) for name in ("a", "b", "c")}
        manifest = cli.scan_dataset(make_custom_dataset(tmp_path / "d", masks), "custom")
        sub = cli.filter_ids(manifest, ["c", "a"])
        assert [e.id for e in sub.entries] == ["a", "c"]
        with pytest.raises(ValueError, match="not in manifest"):
            cli.filter_ids(manifest, ["zz"])


class TestCmdStratify:
    def _run(self, tmp_path, masks, ladder=(2,), jobs=1):
        root = make_custom_dataset(tmp_path / "data", masks)
        manifest = cli.scan_dataset(root, "custom")
        config = cli.RunConfig(ladder=ThresholdLadder(ladder),
                               output_dir=tmp_path / "out", jobs=jobs)
        cli.cmd_stratify(manifest, config)
        return tmp_path / "out"

    def test_outputs_match_library_stratify(self, tmp_path):
        rng = np.random.default_rng(6)
        masks = {"a": random_mask(rng, 16, 16, p=0.6)}
        out = self._run(tmp_path, masks)
        stack = stratify(masks["a"], (2,))
        assert np.array_equal(load_image(out / "a_thin.png", binary=True), stack.strata[0])
        assert np.array_equal(load_image(out / "a_stem.png", binary=True), stack.strata[1])
        assert np.array_equal(load_image(out / "a_raw.png", binary=True), masks["a"])

    def test_empty_mask_produces_empty_strata(self, tmp_path):
        masks = {"z": np.zeros((8, 8), dtype=np.uint8)}
        out = self._run(tmp_path, masks)
        assert load_image(out / "z_thin.png", binary=True).sum() == 0
        assert load_image(out / "z_stem.png", binary=True).sum() == 0
        assert load_image(out / "z_raw.png", binary=True).sum() == 0

    def test_summary_counts(self, tmp_path):
        rng = np.random.default_rng(7)
        masks = {"a": random_mask(rng, 16, 16, p=0.6)}
        out = self._run(tmp_path, masks)
        rows = (out / "stratify_summary.csv").read_text().splitlines()
        assert rows[0] == "image,thin,stem,raw"
        stack = stratify(masks["a"], (2,))
        want = f"a,{stack.strata[0].sum()},{stack.strata[1].sum()},{masks['a'].sum()}"
        assert rows[1] == want

    def test_longer_ladder_uses_stratum_names(self, tmp_path):
        rng = np.random.default_rng(8)
        masks = {"a": random_mask(rng, 20, 20, p=0.7)}
        out = self._run(tmp_path, masks, ladder=(1, 3))
        for name in ("a_stratum0.png", "a_stratum1.png", "a_stratum2.png", "a_raw.png"):
            assert (out / name).is_file()

    def test_run_cfg_written(self, tmp_path):
        rng = np.random.default_rng(9)
        out = self._run(tmp_path, {"a": random_mask(rng, 8, 8)})
        text = (out / "run.cfg").read_text()
        assert "command=stratify" in text
        assert "ladder=2" in text
        assert "threshold=127" in text

    def test_parallel_jobs_identical(self, tmp_path):
        rng = np.random.default_rng(10)
        masks = {f"m{i}": random_mask(rng, 12, 12, p=0.5) for i in range(4)}
        out1 = self._run(tmp_path / "one", masks, jobs=1)
        out2 = self._run(tmp_path / "two", masks, jobs=3)
        for p1 in sorted(out1.iterdir()):
            if p1.name == "run.cfg":
                continue
            assert (out2 / p1.name).read_bytes() == p1.read_bytes()


class TestCmdFuse:
    def test_single_saturated_map(self, tmp_path):
        p = tmp_path / "m.png"
        save_gray(np.full((4, 4), 255, dtype=np.uint8), p)
        out = cli.cmd_fuse([p], cli.RunConfig(output_dir=tmp_path / "out"))
        assert load_image(out / "fused.png", binary=True).sum() == 16

    def test_four_maps_match_or_fold(self, tmp_path):
        rng = np.random.default_rng(11)
        paths = []
        maps = []
        for i in range(4):
            g = random_gray(rng, 9, 9)
            maps.append(g)
            paths.append(tmp_path / f"p{i}.png")
            save_gray(g, paths[-1])
        out = cli.cmd_fuse(paths, cli.RunConfig(output_dir=tmp_path / "out"))
        want = np.zeros((9, 9), dtype=np.uint8)
        for g in maps:
            want |= (g > 127).astype(np.uint8)
        assert np.array_equal(load_image(out / "fused.png", binary=True), want)
        assert np.array_equal(load_image(out / "fused_soft.png"), np.maximum.reduce(maps))

    def test_threshold_zero(self, tmp_path):
        p = tmp_path / "m.png"
        save_gray(np.array([[0, 1], [200, 0]], dtype=np.uint8), p)
        out = cli.cmd_fuse([p], cli.RunConfig(fuse_threshold=0, output_dir=tmp_path / "out"))
        assert load_image(out / "fused.png", binary=True).ravel().tolist() == [0, 1, 1, 0]

    def test_dimension_mismatch(self, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        save_gray(np.zeros((2, 2), dtype=np.uint8), a)
        save_gray(np.zeros((3, 2), dtype=np.uint8), b)
        with pytest.raises(ValueError, match="mismatch"):
            cli.cmd_fuse([a, b], cli.RunConfig(output_dir=tmp_path / "out"))


class TestCmdEvaluate:
    def _dataset_with_predictions(self, tmp_path, n=3, perfect=True, soft_value=None):
        rng = np.random.default_rng(12)
        masks = {}
        while len(masks) < n:
            m = random_mask(rng, 10, 10, p=0.5)
            if 0 < m.sum() < m.size:
                masks[f"im{len(masks)}"] = m
        root = make_custom_dataset(tmp_path / "data", masks, with_fov=True)
        manifest = cli.scan_dataset(root, "custom")
        pred_dir = tmp_path / "preds"
        pred_dir.mkdir()
        for image_id, m in masks.items():
            pred = m if perfect else random_mask(rng, 10, 10, p=0.5)
            save_mask(pred, pred_dir / f"{image_id}_bin.png")
            if soft_value is None:
                save_gray(pred * np.uint8(255), pred_dir / f"{image_id}_soft.png")
            else:
                save_gray(np.full(m.shape, soft_value, dtype=np.uint8),
                          pred_dir / f"{image_id}_soft.png")
        return manifest, pred_dir, masks

    def _read_rows(self, path):
        lines = path.read_text().splitlines()
        return {row[0]: row for row in csv.reader(lines[2:])}

    def test_ground_truth_scores_ones(self, tmp_path):
        manifest, preds, _ = self._dataset_with_predictions(tmp_path, perfect=True)
        out = cli.cmd_evaluate(manifest, preds, cli.RunConfig(output_dir=tmp_path / "out"))
        rows = self._read_rows(out / "evaluation.csv")
        agg = rows["AGGREGATE"]
        assert agg[5] == agg[6] == agg[7] == agg[8] == "1.000000"

    def test_constant_soft_map_gives_half_auc(self, tmp_path):
        manifest, preds, _ = self._dataset_with_predictions(tmp_path, soft_value=128)
        out = cli.cmd_evaluate(manifest, preds, cli.RunConfig(output_dir=tmp_path / "out"))
        rows = self._read_rows(out / "evaluation.csv")
        for image_id, row in rows.items():
            if image_id != "AGGREGATE":
                assert row[8] == "0.500000"

    def test_counts_match_hand_confusion(self, tmp_path):
        manifest, preds, masks = self._dataset_with_predictions(tmp_path, perfect=False)
        out = cli.cmd_evaluate(manifest, preds, cli.RunConfig(output_dir=tmp_path / "out"))
        rows = self._read_rows(out / "evaluation.csv")
        for entry in manifest.entries:
            pred = load_image(preds / f"{entry.id}_bin.png", binary=True)
            truth = masks[entry.id]
            tp = int(np.sum((pred == 1) & (truth == 1)))
            assert int(rows[entry.id][1]) == tp

    def test_missing_prediction_names_id(self, tmp_path):
        manifest, preds, _ = self._dataset_with_predictions(tmp_path)
        (preds / "im1_bin.png").unlink()
        with pytest.raises(ValueError, match="missing prediction for id im1"):
            cli.cmd_evaluate(manifest, preds, cli.RunConfig(output_dir=tmp_path / "out"))

    def test_fov_mode_uses_manifest_fov(self, tmp_path):
        manifest, preds, _ = self._dataset_with_predictions(tmp_path, perfect=True)
        out = cli.cmd_evaluate(
            manifest, preds,
            cli.RunConfig(output_dir=tmp_path / "out", fov_mode=True))
        rows = self._read_rows(out / "evaluation.csv")
        assert rows["AGGREGATE"][9] == "on"


class TestCmdSynthAndBench:
    def test_synth_sidecar(self, tmp_path):
        code = cli.main([
            "synth", "--orientation", "vertical", "--width", "3", "--length", "32",
            "--out", str(tmp_path / "out"),
        ])
        assert code == 0
        text = (tmp_path / "out" / "tube_report.txt").read_text()
        assert "diameter=2" in text
        # erasure dichotomy for width 3: erased exactly when k=d+1 > 3
        assert "sweep d=1 k=2 erased=0 survived_intact=1" in text
        assert "sweep d=2 k=3 erased=0 survived_intact=1" in text
        assert "sweep d=3 k=4 erased=1 survived_intact=0" in text
        mask = load_image(tmp_path / "out" / "tube.png", binary=True)
        assert mask.sum() == 96

    def test_synth_width_one(self, tmp_path):
        cli.main([
            "synth", "--orientation", "horizontal", "--width", "1", "--length", "8",
            "--out", str(tmp_path / "out"),
        ])
        assert "diameter=0" in (tmp_path / "out" / "tube_report.txt").read_text()

    def test_synth_too_big_for_canvas_fails(self, tmp_path, capsys):
        code = cli.main([
            "synth", "--orientation", "vertical", "--width", "3", "--length", "32",
            "--canvas", "8,8", "--out", str(tmp_path / "out"),
        ])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_bench_rows(self, tmp_path):
        rows = cli.run_bench(sizes=[(32, 40)], kernels=[1, 3], reps=2)
        assert len(rows) == 2
        for row in rows:
            assert row["naive_seconds"] > 0
            assert row["separable_seconds"] > 0

    def test_bench_cli_writes_csv(self, tmp_path, capsys):
        code = cli.main(["bench", "--sizes", "24x18", "--kernels", "2",
                         "--reps", "1", "--out", str(tmp_path / "out")])
        assert code == 0
        rows = list(csv.reader((tmp_path / "out" / "bench.csv").read_text().splitlines()))
        assert rows[0] == list(cli.BENCH_COLUMNS)
        assert rows[1][0] == "18" and rows[1][1] == "24"  # HxW from 24x18


class TestEvalLossCommand:
    def test_perfect_prediction_zero_losses(self, tmp_path, capsys):
        rng = np.random.default_rng(13)
        y = random_mask(rng, 12, 12, p=0.6)
        from vesselstrata.stratification import stack3
        stack = stack3(y, 2)
        mask_path = tmp_path / "y.png"
        save_mask(y, mask_path)
        pred_paths = []
        for name, channel in zip(("thin", "stem", "raw"), stack.strata):
            p = tmp_path / f"{name}.png"
            save_gray(channel * np.uint8(255), p)
            pred_paths.append(str(p))
        code = cli.main([
            "eval-loss", "--pred", *pred_paths, "--mask", str(mask_path),
            "--scores-real", "0.5,0.5", "--scores-fake", "0.5",
        ])
        assert code == 0
        out = capsys.readouterr().out
        values = dict(line.split("=") for line in out.strip().splitlines())
        assert float(values["loss_gen"]) == 0.0
        assert float(values["l1"]) == 0.0
        assert float(values["cgan"]) == pytest.approx(2 * np.log(0.5), abs=1e-6)
        assert float(values["composite"]) == pytest.approx(2 * np.log(0.5), abs=1e-6)


class TestConfigResolution:
    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("ladder=1,3\nlambda=5\nthreshold=10\n# comment\n")
        parser = cli.build_parser()
        args = parser.parse_args(["fuse", "x.png", "--config", str(cfg),
                                  "--threshold", "200"])
        config = cli.build_config(args)
        assert config.ladder.thresholds == (1, 3)
        assert config.weights.lam == 5.0
        assert config.fuse_threshold == 200  # flag wins over file

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("speed=fast\n")
        parser = cli.build_parser()
        args = parser.parse_args(["fuse", "x.png", "--config", str(cfg)])
        with pytest.raises(ValueError, match="unknown config key"):
            cli.build_config(args)

    def test_defaults(self):
        parser = cli.build_parser()
        args = parser.parse_args(["fuse", "x.png"])
        config = cli.build_config(args)
        assert config.ladder.thresholds == (2,)
        assert config.weights.w == (1.0, 1.0, 1.0)
        assert config.weights.lam == 100.0
        assert config.fuse_threshold == 127
        assert config.fov_mode is False
        assert config.jobs == 1

    def test_weights_flag(self):
        parser = cli.build_parser()
        args = parser.parse_args(["fuse", "x.png", "--weights", "2,0.5,1", "--lambda", "7"])
        config = cli.build_config(args)
        assert config.weights == LossWeights(w=(2.0, 0.5, 1.0), lam=7.0)


class TestMainErrors:
    def test_missing_map_file_exits_nonzero(self, tmp_path, capsys):
        code = cli.main(["fuse", str(tmp_path / "missing.png"),
                         "--out", str(tmp_path / "out")])
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert err.count("\n") == 1

    def test_success_exit_zero(self, tmp_path):
        p = tmp_path / "m.png"
        save_gray(np.zeros((2, 2), dtype=np.uint8), p)
        assert cli.main(["fuse", str(p), "--out", str(tmp_path / "out")]) == 0


class TestIdsFlag:
    def test_ids_file_restricts_run(self, tmp_path):
        rng = np.random.default_rng(15)
        masks = {name: random_mask(rng, 8, 8, p=0.5) for name in ("a", "b", "c")}
        root = make_custom_dataset(tmp_path / "data", masks)
        ids_file = tmp_path / "split.txt"
        ids_file.write_text("a\nc\n")
        out = tmp_path / "out"
        code = cli.main(["stratify", "--dataset", "custom", "--root", str(root),
                         "--ids", str(ids_file), "--out", str(out)])
        assert code == 0
        assert (out / "a_raw.png").is_file()
        assert (out / "c_raw.png").is_file()
        assert not (out / "b_raw.png").exists()
