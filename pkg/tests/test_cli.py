"""Tests for the spherebev command line."""
from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import pytest
import structlog
from click.testing import CliRunner

from src.cli.main import cli
from src.converter import codecs
from src.dto.bev_dto import BevGrid, BoundingBox3D, GridSpec
from src.dto.camera_dto import CameraCalibration
from src.services.scene_generator import SCENE_FILES


@pytest.fixture(autouse=True)
def restore_root_logger():
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers = handlers
    root.setLevel(level)
    structlog.reset_defaults()


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def calib_file(tmp_path: Path) -> Path:
    path = tmp_path / "calib.json"
    codecs.write_calibration(path, CameraCalibration())
    return path


@pytest.fixture
def scene_dir(runner: CliRunner, tmp_path: Path) -> Path:
    out = tmp_path / "scene"
    result = runner.invoke(cli, ["--seed", "5", "gen-scene", "--out", str(out), "--n-boxes", "3"])
    assert result.exit_code == 0, result.output
    return out


def pipeline_args(scene: Path, out: Path) -> list[str]:
    return [
        "pipeline",
        "--calib", str(scene / SCENE_FILES["calibration"]),
        "--featmap", str(scene / SCENE_FILES["featmap"]),
        "--decoder", str(scene / SCENE_FILES["decoder"]),
        "--out", str(out),
    ]


class TestGroup:
    """Tests for the command group and global options."""

    def test_help_lists_every_command(self, runner: CliRunner) -> None:
        """--help succeeds and names all subcommands."""
        result = runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        for command in ("project", "rasterize", "pull", "pipeline", "loss", "evaluate", "sync", "gen-scene"):
            assert command in result.output

    def test_version_command(self, runner: CliRunner) -> None:
        """version prints the package name."""
        result = runner.invoke(cli, ["version"])
        assert result.exit_code == 0
        assert "sphere-bev" in result.output

    def test_missing_env_file_is_an_io_error(self, runner: CliRunner, tmp_path: Path) -> None:
        """An explicit --env-file must exist."""
        result = runner.invoke(cli, ["--env-file", str(tmp_path / "missing.env"), "version"])
        assert result.exit_code == 2
        assert "Environment file not found" in result.output

    def test_unknown_log_level_is_rejected(self, runner: CliRunner) -> None:
        """A bad SPHEREBEV_LOG_LEVEL stops before any command runs."""
        result = runner.invoke(cli, ["version"], env={"SPHEREBEV_LOG_LEVEL": "LOUD"})
        assert result.exit_code == 2
        assert "Unknown log level" in result.output


class TestProject:
    """Tests for the project command."""

    def test_prints_pixels_for_each_point(self, runner: CliRunner, calib_file: Path, tmp_path: Path) -> None:
        """On-axis points land at the lens centres."""
        points = tmp_path / "points.bin"
        codecs.write_points(points, np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]))
        result = runner.invoke(cli, ["project", "--calib", str(calib_file), "--points", str(points)])
        assert result.exit_code == 0, result.output
        assert result.stdout == "u,v\n960.000000,320.000000\n320.000000,320.000000\n"

    def test_verbose_logs_the_outcome_on_stderr(self, runner: CliRunner, calib_file: Path, tmp_path: Path) -> None:
        """With --verbose the outcome is logged to stderr and stdout holds only the CSV."""
        points = tmp_path / "points.bin"
        codecs.write_points(points, np.array([[1.0, 0.0, 0.0]]))
        result = runner.invoke(cli, ["--verbose", "project", "--calib", str(calib_file), "--points", str(points)])
        assert result.exit_code == 0, result.output
        assert result.stdout == "u,v\n960.000000,320.000000\n"
        assert "Projected points" in result.stderr

    def test_non_finite_points_are_an_io_error(self, runner: CliRunner, calib_file: Path, tmp_path: Path) -> None:
        """A NaN coordinate is rejected before projection."""
        points = tmp_path / "points.bin"
        points.write_bytes(np.array([0.0, np.nan, 1.0], dtype="<f4").tobytes())
        result = runner.invoke(cli, ["project", "--calib", str(calib_file), "--points", str(points)])
        assert result.exit_code == 2
        assert result.stdout == ""
        assert "non-finite" in result.output

    def test_missing_calibration_names_the_path(self, runner: CliRunner, tmp_path: Path) -> None:
        """A missing input file exits with 2 and says which file."""
        points = tmp_path / "points.bin"
        codecs.write_points(points, np.zeros((1, 3)))
        missing = tmp_path / "nope.json"
        result = runner.invoke(cli, ["project", "--calib", str(missing), "--points", str(points)])
        assert result.exit_code == 2
        assert "nope.json" in result.output

    def test_malformed_calibration_reports_the_offset(self, runner: CliRunner, tmp_path: Path) -> None:
        """Broken JSON is an I/O error with a byte offset."""
        calib = tmp_path / "calib.json"
        calib.write_text('{"coeffs": [0, 1,')
        points = tmp_path / "points.bin"
        codecs.write_points(points, np.zeros((1, 3)))
        result = runner.invoke(cli, ["project", "--calib", str(calib), "--points", str(points)])
        assert result.exit_code == 2
        assert "at byte 17" in " ".join(result.output.split())


class TestRasterize:
    """Tests for the rasterize command."""

    def test_writes_label_grid_and_targets(
        self, runner: CliRunner, vehicle_box: BoundingBox3D, tmp_path: Path
    ) -> None:
        """A 4 m x 2 m car covers 32 cells; the optional targets are written too."""
        annotations = tmp_path / "boxes.json"
        codecs.write_annotations(annotations, [vehicle_box])
        out = tmp_path / "gt.pgm"
        centerness = tmp_path / "center.f32"
        offset = tmp_path / "offset.f32"
        result = runner.invoke(
            cli,
            [
                "rasterize", "--annotations", str(annotations), "--out", str(out),
                "--centerness", str(centerness), "--offset", str(offset),
            ],
        )
        assert result.exit_code == 0, result.output
        assert int(codecs.read_pgm(out).values.sum()) == 32
        assert codecs.read_grid(centerness).values.max() == pytest.approx(1.0)
        assert codecs.read_raster(offset)[1].shape == (2, 200, 200)

    def test_class_filter(self, runner: CliRunner, vehicle_box: BoundingBox3D, tmp_path: Path) -> None:
        """Filtering to pedestrians leaves a vehicle-only scene empty."""
        annotations = tmp_path / "boxes.json"
        codecs.write_annotations(annotations, [vehicle_box])
        out = tmp_path / "gt.pgm"
        result = runner.invoke(
            cli, ["rasterize", "--annotations", str(annotations), "--out", str(out), "--class", "pedestrian"]
        )
        assert result.exit_code == 0, result.output
        assert int(codecs.read_pgm(out).values.sum()) == 0


class TestPull:
    """Tests for the pull command."""

    def test_single_anchor(self, runner: CliRunner, scene_dir: Path) -> None:
        """One --anchor gives one CSV row with every channel."""
        result = runner.invoke(
            cli,
            [
                "pull",
                "--calib", str(scene_dir / SCENE_FILES["calibration"]),
                "--featmap", str(scene_dir / SCENE_FILES["featmap"]),
                "--anchor", "99,99",
            ],
        )
        assert result.exit_code == 0, result.output
        header, row = result.stdout.strip().splitlines()
        assert header == "row,col,f0,f1,f2,f3"
        assert row.startswith("99,99,")
        assert row.split(",")[3] == "1.000000"

    def test_rejects_malformed_anchors(self, runner: CliRunner, scene_dir: Path) -> None:
        """Anchors are ROW,COL."""
        result = runner.invoke(
            cli,
            [
                "pull",
                "--calib", str(scene_dir / SCENE_FILES["calibration"]),
                "--featmap", str(scene_dir / SCENE_FILES["featmap"]),
                "--anchor", "99",
            ],
        )
        assert result.exit_code == 2
        assert "ROW,COL" in result.output


class TestGenScene:
    """Tests for the gen-scene command."""

    def test_lists_written_files(self, runner: CliRunner, tmp_path: Path) -> None:
        """Each artifact is reported as role,path."""
        out = tmp_path / "scene"
        result = runner.invoke(cli, ["gen-scene", "--out", str(out)])
        assert result.exit_code == 0, result.output
        roles = [line.split(",", 1)[0] for line in result.stdout.splitlines()]
        assert roles == list(SCENE_FILES)

    def test_same_seed_gives_identical_bytes(self, runner: CliRunner, tmp_path: Path) -> None:
        """Generation is reproducible from --seed."""
        for name in ("a", "b"):
            result = runner.invoke(cli, ["--seed", "9", "gen-scene", "--out", str(tmp_path / name)])
            assert result.exit_code == 0, result.output
        for filename in SCENE_FILES.values():
            assert (tmp_path / "a" / filename).read_bytes() == (tmp_path / "b" / filename).read_bytes()


class TestPipeline:
    """Tests for the pipeline command."""

    def test_reports_iou_against_ground_truth(self, runner: CliRunner, scene_dir: Path, tmp_path: Path) -> None:
        """With --gt the percent IoU JSON goes to stdout and the logits to --out."""
        out = tmp_path / "logits.f32"
        binary = tmp_path / "binary.pgm"
        args = pipeline_args(scene_dir, out) + [
            "--gt", str(scene_dir / SCENE_FILES["gt"]),
            "--binary-out", str(binary),
            "--params-millions", "8.4",
        ]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        metrics = json.loads(result.stdout)
        assert set(metrics) == {"iou_100", "iou_50", "iou_20", "eff_score"}
        assert metrics["eff_score"] == pytest.approx(round(metrics["iou_100"] / 8.4, 3))
        assert codecs.read_grid(out).spec == GridSpec()
        assert binary.exists()

    def test_is_deterministic(self, runner: CliRunner, scene_dir: Path, tmp_path: Path) -> None:
        """Repeated runs give byte-identical stdout and logits."""
        outputs = []
        for name in ("a.f32", "b.f32"):
            args = pipeline_args(scene_dir, tmp_path / name) + ["--gt", str(scene_dir / SCENE_FILES["gt"])]
            result = runner.invoke(cli, args)
            assert result.exit_code == 0, result.output
            outputs.append(result.stdout)
        assert outputs[0] == outputs[1]
        assert (tmp_path / "a.f32").read_bytes() == (tmp_path / "b.f32").read_bytes()

    def test_without_ground_truth_prints_nothing(self, runner: CliRunner, scene_dir: Path, tmp_path: Path) -> None:
        """Without a ground truth stdout stays empty."""
        result = runner.invoke(cli, pipeline_args(scene_dir, tmp_path / "logits.f32") + ["--strategy", "dense"])
        assert result.exit_code == 0, result.output
        assert result.stdout == ""

    def test_gt_and_annotations_are_exclusive(self, runner: CliRunner, scene_dir: Path, tmp_path: Path) -> None:
        """Only one ground-truth source may be given."""
        args = pipeline_args(scene_dir, tmp_path / "logits.f32") + [
            "--gt", str(scene_dir / SCENE_FILES["gt"]),
            "--annotations", str(scene_dir / SCENE_FILES["annotations"]),
        ]
        result = runner.invoke(cli, args)
        assert result.exit_code == 2

    def test_invalid_sampling_is_a_computation_error(
        self, runner: CliRunner, scene_dir: Path, tmp_path: Path
    ) -> None:
        """k above n_coarse exits with 1."""
        args = pipeline_args(scene_dir, tmp_path / "logits.f32") + ["--n-coarse", "10", "--k", "20"]
        result = runner.invoke(cli, args)
        assert result.exit_code == 1
        assert "must not exceed" in result.output


class TestScoring:
    """Tests for the loss and evaluate commands."""

    @pytest.fixture
    def labels(self, small_grid: GridSpec, tmp_path: Path) -> Path:
        values = np.zeros(small_grid.shape, dtype=np.uint8)
        values[10:14, 10:14] = 1
        path = tmp_path / "gt.pgm"
        codecs.write_pgm(path, BevGrid(small_grid, values))
        return path

    def test_loss_of_uninformative_logits(
        self, runner: CliRunner, small_grid: GridSpec, labels: Path, tmp_path: Path
    ) -> None:
        """Zero logits mean p = 0.5, so cross-entropy is ln 2 everywhere."""
        pred = tmp_path / "pred.f32"
        codecs.write_grid(pred, BevGrid.filled(small_grid, 0.0))
        result = runner.invoke(
            cli, ["loss", "--pred", str(pred), "--target", str(labels), "--gamma", "0", "--gamma-sweep"]
        )
        assert result.exit_code == 0, result.output
        report = json.loads(result.stdout)
        assert report["seg"] == pytest.approx(np.log(2.0))
        assert report["center"] is None
        assert report["total"] == pytest.approx(report["seg"])
        assert report["gamma_sweep"]["0"] == pytest.approx(np.log(2.0))

    def test_auxiliary_heads_need_annotations(
        self, runner: CliRunner, small_grid: GridSpec, labels: Path, tmp_path: Path
    ) -> None:
        """--center-pred without --annotations is a usage error."""
        pred = tmp_path / "pred.f32"
        codecs.write_grid(pred, BevGrid.filled(small_grid, 0.0))
        result = runner.invoke(
            cli, ["loss", "--pred", str(pred), "--target", str(labels), "--center-pred", str(pred)]
        )
        assert result.exit_code == 2

    def test_evaluate_perfect_prediction(
        self, runner: CliRunner, small_grid: GridSpec, labels: Path, tmp_path: Path
    ) -> None:
        """Logits that match the labels score 100 at every range."""
        values = np.where(codecs.read_pgm(labels, small_grid).values > 0, 5.0, -5.0)
        pred = tmp_path / "pred.f32"
        codecs.write_grid(pred, BevGrid(small_grid, values))
        result = runner.invoke(cli, ["evaluate", "--pred", str(pred), "--gt", str(labels), "--ranges", "20,10"])
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout) == {"iou_20": 100.0, "iou_10": 100.0}

    def test_evaluate_reports_eff_score_to_three_decimals(
        self, runner: CliRunner, small_grid: GridSpec, labels: Path, tmp_path: Path
    ) -> None:
        """100 % IoU over 8.4 M parameters scores 11.905."""
        values = np.where(codecs.read_pgm(labels, small_grid).values > 0, 5.0, -5.0)
        pred = tmp_path / "pred.f32"
        codecs.write_grid(pred, BevGrid(small_grid, values))
        result = runner.invoke(
            cli, ["evaluate", "--pred", str(pred), "--gt", str(labels), "--ranges", "20", "--params-millions", "8.4"]
        )
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["eff_score"] == 11.905

    def test_evaluate_rejects_mismatched_grids(self, runner: CliRunner, labels: Path, tmp_path: Path) -> None:
        """A prediction on another grid cannot be scored."""
        pred = tmp_path / "pred.f32"
        codecs.write_grid(pred, BevGrid.filled(GridSpec(), 0.0))
        result = runner.invoke(cli, ["evaluate", "--pred", str(pred), "--gt", str(labels)])
        assert result.exit_code == 2


class TestSync:
    """Tests for the sync command."""

    def test_simulated_trace(self, runner: CliRunner, tmp_path: Path) -> None:
        """The nominal trace pairs every other LiDAR sweep."""
        trace = tmp_path / "trace.csv"
        result = runner.invoke(cli, ["sync", "--simulate", "--duration", "10", "--write-trace", str(trace)])
        assert result.exit_code == 0, result.output
        lines = result.stdout.strip().splitlines()
        assert lines[0] == "frame_time,lidar,camera,gnss"
        stats = json.loads(lines[-1])
        assert stats["match_rate"] == pytest.approx(0.5)
        assert len(lines) == 1 + 50 + 1
        assert trace.exists()

    def test_reads_a_trace_file(self, runner: CliRunner, tmp_path: Path) -> None:
        """Only streams present in the trace take part."""
        trace = tmp_path / "trace.csv"
        trace.write_text("lidar,0.0\ncamera,0.01\nlidar,0.1\ncamera,0.2\n")
        result = runner.invoke(cli, ["sync", "--trace", str(trace)])
        assert result.exit_code == 0, result.output
        lines = result.stdout.strip().splitlines()
        assert lines[0] == "frame_time,lidar,camera"
        assert lines[1] == "0.000000,0.000000,0.010000"
        assert json.loads(lines[-1])["frames_emitted"] == 1

    def test_out_of_order_trace_is_a_computation_error(self, runner: CliRunner, tmp_path: Path) -> None:
        """Timestamps going backwards exit with 1."""
        trace = tmp_path / "trace.csv"
        trace.write_text("lidar,1.0\nlidar,0.5\n")
        result = runner.invoke(cli, ["sync", "--trace", str(trace)])
        assert result.exit_code == 1

    def test_needs_exactly_one_source(self, runner: CliRunner, tmp_path: Path) -> None:
        """Neither or both of --trace and --simulate is a usage error."""
        assert runner.invoke(cli, ["sync"]).exit_code == 2
        trace = tmp_path / "trace.csv"
        trace.write_text("lidar,0.0\n")
        assert runner.invoke(cli, ["sync", "--trace", str(trace), "--simulate"]).exit_code == 2


class TestRepeatedRuns:
    """Every command gives byte-identical output when run twice on the same inputs."""

    @staticmethod
    def stdout_twice(runner: CliRunner, args: list[str]) -> list[str]:
        outputs = []
        for _ in range(2):
            result = runner.invoke(cli, args)
            assert result.exit_code == 0, result.output
            outputs.append(result.stdout)
        return outputs

    def test_project(self, runner: CliRunner, calib_file: Path, rng: np.random.Generator, tmp_path: Path) -> None:
        """Same points, same CSV."""
        points = tmp_path / "points.bin"
        codecs.write_points(points, rng.uniform(-20.0, 20.0, size=(200, 3)))
        first, second = self.stdout_twice(runner, ["project", "--calib", str(calib_file), "--points", str(points)])
        assert first == second
        assert len(first.splitlines()) == 201

    def test_rasterize(self, runner: CliRunner, vehicle_box: BoundingBox3D, tmp_path: Path) -> None:
        """Label grid and targets are written byte for byte the same."""
        annotations = tmp_path / "boxes.json"
        codecs.write_annotations(annotations, [vehicle_box])
        for run in ("a", "b"):
            result = runner.invoke(
                cli,
                [
                    "rasterize", "--annotations", str(annotations), "--out", str(tmp_path / f"{run}.pgm"),
                    "--centerness", str(tmp_path / f"{run}_center.f32"),
                    "--offset", str(tmp_path / f"{run}_offset.f32"),
                ],
            )
            assert result.exit_code == 0, result.output
        for suffix in (".pgm", "_center.f32", "_offset.f32"):
            assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()

    def test_pull(self, runner: CliRunner, scene_dir: Path) -> None:
        """Coarse anchors are pulled in the same order with the same values."""
        args = [
            "pull",
            "--calib", str(scene_dir / SCENE_FILES["calibration"]),
            "--featmap", str(scene_dir / SCENE_FILES["featmap"]),
            "--n-coarse", "400",
        ]
        first, second = self.stdout_twice(runner, args)
        assert first == second
        assert len(first.splitlines()) == 401

    def test_loss(self, runner: CliRunner, small_grid: GridSpec, rng: np.random.Generator, tmp_path: Path) -> None:
        """The loss JSON, gamma sweep included, does not change between runs."""
        labels = tmp_path / "gt.pgm"
        codecs.write_pgm(labels, BevGrid(small_grid, (rng.random(small_grid.shape) > 0.8).astype(np.uint8)))
        pred = tmp_path / "pred.f32"
        codecs.write_grid(pred, BevGrid(small_grid, rng.normal(size=small_grid.shape)))
        first, second = self.stdout_twice(
            runner, ["loss", "--pred", str(pred), "--target", str(labels), "--gamma-sweep"]
        )
        assert first == second

    def test_evaluate(self, runner: CliRunner, small_grid: GridSpec, rng: np.random.Generator, tmp_path: Path) -> None:
        """IoU JSON and efficiency score repeat exactly."""
        labels = tmp_path / "gt.pgm"
        codecs.write_pgm(labels, BevGrid(small_grid, (rng.random(small_grid.shape) > 0.7).astype(np.uint8)))
        pred = tmp_path / "pred.f32"
        codecs.write_grid(pred, BevGrid(small_grid, rng.normal(size=small_grid.shape)))
        first, second = self.stdout_twice(
            runner,
            ["evaluate", "--pred", str(pred), "--gt", str(labels), "--ranges", "20,10", "--params-millions", "8.4"],
        )
        assert first == second

    def test_sync(self, runner: CliRunner, tmp_path: Path) -> None:
        """A seeded jittered simulation gives the same frames and trace file."""
        outputs = []
        for run in ("a", "b"):
            result = runner.invoke(
                cli,
                [
                    "--seed", "7", "sync", "--simulate", "--duration", "5", "--jitter", "0.002",
                    "--write-trace", str(tmp_path / f"{run}.csv"),
                ],
            )
            assert result.exit_code == 0, result.output
            outputs.append(result.stdout)
        assert outputs[0] == outputs[1]
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
