import numpy as np
import pytest

from eulshape.reporting import (
    parse_report,
    parse_samples_file,
    render_grid_file,
    render_report,
    render_samples_file,
    save_density_grid_figure,
    save_trajectory_figure,
)


class TestReports:
    PAYLOAD = {
        "command": "estimate",
        "k": 2,
        "rho2_hat": [0.8123456789012345, 0.41],
        "converged": True,
        "starts": [{"start": [0.2, 0.1], "log_likelihood": -12.5}],
    }

    def test_json_round_trip(self):
        text = render_report(self.PAYLOAD, "json")
        assert parse_report(text) == self.PAYLOAD

    def test_key_order_preserved(self):
        text = render_report(self.PAYLOAD, "json")
        assert text.index('"command"') < text.index('"k"') < text.index('"rho2_hat"')

    def test_table_format(self):
        text = render_report(self.PAYLOAD, "table")
        assert "command: estimate" in text
        assert "rho2_hat: 0.8123456789, 0.41" in text
        assert "[0]" in text  # nested start entries are indexed

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render_report(self.PAYLOAD, "yaml")


class TestDelimitedFiles:
    def test_samples_round_trip(self):
        rows = [(0.5, 0.25), (0.1234567890123456789, 0.01)]
        text = render_samples_file(rows, {"seed": 3})
        back = parse_samples_file(text)
        assert back == [tuple(np.float64(v) for v in row) for row in rows]

    def test_empty_samples(self):
        text = render_samples_file([], {"count": 0})
        assert parse_samples_file(text) == []

    def test_grid_format(self):
        text = render_grid_file([(0.25, 0.1, 3.5)], {"resolution": 2})
        lines = text.splitlines()
        assert lines[0].startswith("#")
        assert lines[-1].split("\t") == ["0.25", "0.10000000000000001", "3.5"]


class TestFigures:
    def test_density_figure_written(self, tmp_path):
        rows = []
        res = 10
        for i in range(res):
            for j in range(i + 1):
                rows.append(((i + 0.5) / res, (j + 0.5) / res, float(i + j)))
        path = tmp_path / "grid.png"
        save_density_grid_figure(str(path), rows, res, "test")
        assert path.stat().st_size > 500

    def test_trajectory_figure_written(self, tmp_path):
        path = tmp_path / "traj.png"
        save_trajectory_figure(
            str(path), ["13 marks", "11 marks"], [(0.9, 0.5), (0.4, 0.2)], 1, "test"
        )
        assert path.stat().st_size > 500
