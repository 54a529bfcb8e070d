"""Rendering from CLI exports: layouts, determinism and schema errors."""

import json
import os

import pytest

from gaussring_figures import FigureSpec, SchemaError, render
from gaussring_figures.cli import EXIT_OK, EXIT_SCHEMA, main


def _render_bytes(spec):
    paths = render(spec)
    return {os.path.basename(p): open(p, "rb").read() for p in paths}


class TestKinds:
    def test_lineshape_panel(self, scenario_dir, tmp_path):
        paths = render(FigureSpec("lineshape-panel", scenario_dir,
                                  str(tmp_path)))
        assert paths == [str(tmp_path / "lineshape_panel.png")]
        assert os.path.getsize(paths[0]) > 1000

    def test_jsa_jta_grid_from_scenario(self, scenario_dir, tmp_path):
        paths = render(FigureSpec("jsa-jta-grid", scenario_dir,
                                  str(tmp_path)))
        assert os.path.exists(paths[0])

    def test_jsa_jta_grid_from_sweep_exports(self, sweep_dir, tmp_path):
        paths = render(FigureSpec("jsa-jta-grid", sweep_dir, str(tmp_path)))
        assert os.path.exists(paths[0])

    def test_histogram_set(self, ensemble_dir, tmp_path):
        spec = FigureSpec("histogram-set", ensemble_dir, str(tmp_path),
                          options={"bins": 10,
                                   "baseline": {"purity_ff": 0.921,
                                                "pump_linewidth": 297.0}})
        paths = render(spec)
        assert os.path.exists(paths[0])

    def test_overlay_panel(self, sweep_dir, tmp_path):
        paths = render(FigureSpec("overlay-panel", sweep_dir, str(tmp_path)))
        assert os.path.exists(paths[0])

    def test_multiple_formats(self, scenario_dir, tmp_path):
        spec = FigureSpec("lineshape-panel", scenario_dir, str(tmp_path),
                          formats=("png", "svg"))
        paths = render(spec)
        assert [p.rsplit(".", 1)[1] for p in paths] == ["png", "svg"]


class TestDeterminism:
    def test_byte_identical_re_render(self, scenario_dir, sweep_dir,
                                      ensemble_dir, tmp_path):
        cases = [
            FigureSpec("jsa-jta-grid", sweep_dir, "", name="grid",
                       formats=("png", "svg")),
            FigureSpec("histogram-set", ensemble_dir, "", name="hists"),
            FigureSpec("lineshape-panel", scenario_dir, "", name="lines"),
        ]
        for i, spec in enumerate(cases):
            a = FigureSpec(spec.kind, spec.input_dir,
                           str(tmp_path / f"a{i}"), name=spec.name,
                           formats=spec.formats)
            b = FigureSpec(spec.kind, spec.input_dir,
                           str(tmp_path / f"b{i}"), name=spec.name,
                           formats=spec.formats)
            assert _render_bytes(a) == _render_bytes(b)


class TestErrors:
    def test_unknown_kind(self, scenario_dir, tmp_path):
        with pytest.raises(SchemaError, match="unknown figure kind"):
            FigureSpec("pie-chart", scenario_dir, str(tmp_path))

    def test_missing_directory(self, tmp_path):
        with pytest.raises(SchemaError, match="manifest"):
            render(FigureSpec("jsa-jta-grid", str(tmp_path / "nope"),
                              str(tmp_path)))

    def test_empty_export_directory(self, tmp_path):
        src = tmp_path / "empty"
        src.mkdir()
        (src / "manifest.json").write_text(json.dumps({"version": "0.1.0"}))
        with pytest.raises(SchemaError, match="no paired jsa"):
            render(FigureSpec("jsa-jta-grid", str(src), str(tmp_path / "o")))

    def test_version_mismatch(self, tmp_path):
        src = tmp_path / "old"
        src.mkdir()
        (src / "manifest.json").write_text(json.dumps({"version": "9.9.9"}))
        with pytest.raises(SchemaError, match="unsupported export version"):
            render(FigureSpec("lineshape-panel", str(src),
                              str(tmp_path / "o")))


class TestCli:
    def test_render_ok(self, scenario_dir, tmp_path, capsys):
        code = main(["--kind", "lineshape-panel", "--input", scenario_dir,
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        out = capsys.readouterr().out.strip()
        assert out.endswith("lineshape_panel.png")
        assert os.path.exists(out)

    def test_schema_error_exit(self, tmp_path, capsys):
        code = main(["--kind", "jsa-jta-grid",
                     "--input", str(tmp_path / "missing"),
                     "--out", str(tmp_path)])
        assert code == EXIT_SCHEMA
        assert "figure error" in capsys.readouterr().err

    def test_bad_options_json(self, scenario_dir, tmp_path):
        code = main(["--kind", "lineshape-panel", "--input", scenario_dir,
                     "--out", str(tmp_path), "--options", "{bad"])
        assert code == EXIT_SCHEMA
