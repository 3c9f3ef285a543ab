import csv
import subprocess
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import plot  # noqa: E402


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


@pytest.fixture
def series_csv(tmp_path):
    p = tmp_path / "series.csv"
    _write_csv(p, ["label", "N", "fidelity"], [["max", 1, 1.0]])
    return p


@pytest.fixture
def bounds_csv(tmp_path):
    p = tmp_path / "bounds.csv"
    rows = []
    for m in (2, 3, 4):
        for N in range(8):
            rows.append(["state", 4, m, N, 8 + 2 * m * N, 30])
    _write_csv(p, ["task", "n", "m", "N", "circuit_params", "target_params"], rows)
    return p


@pytest.fixture
def hist_csv(tmp_path):
    p = tmp_path / "hist.csv"
    edges = [10.0**e for e in range(-12, 1)]
    rows = [[edges[i], edges[i + 1], 0] for i in range(12)]
    rows[0][2] = 54  # the clamp bin at 1e-12
    rows[6][2] = 675
    _write_csv(p, ["bin_low", "bin_high", "count"], rows)
    return p


def test_series_single_point(series_csv, tmp_path):
    fig = plot.render("series", series_csv, tmp_path / "s.png")
    (line,) = fig.axes[0].get_lines()
    assert list(line.get_xdata()) == [1]
    assert list(line.get_ydata()) == [1.0]
    assert (tmp_path / "s.png").stat().st_size > 0


def test_bounds_three_series_and_target_line(bounds_csv, tmp_path):
    fig = plot.render("bounds", bounds_csv, tmp_path / "b.png")
    ax = fig.axes[0]
    assert len(ax.get_lines()) == 4  # three arities plus the horizontal line
    horiz = [l for l in ax.get_lines() if len(set(l.get_ydata())) == 1]
    assert any(set(l.get_ydata()) == {30} for l in horiz)


def test_histogram_clamp_bin_rendered_at_1e12(hist_csv, tmp_path):
    fig = plot.render("histogram", hist_csv, tmp_path / "h.png")
    ax = fig.axes[0]
    assert ax.get_xscale() == "log"
    bars = ax.patches
    clamp = [b for b in bars if abs(b.get_x() - 1e-12) < 1e-15]
    assert len(clamp) == 1
    assert clamp[0].get_height() == 54
    assert ax.get_xlim()[0] < 1e-12  # the clamp bin is inside the visible range


def test_histogram_rejects_bad_edges(tmp_path):
    p = tmp_path / "bad.csv"
    _write_csv(p, ["bin_low", "bin_high", "count"], [[0.1, 0.1, 3]])
    with pytest.raises(ValueError, match="increasing"):
        plot.render("histogram", p)


def test_schema_mismatch_fails_fast(series_csv):
    with pytest.raises(ValueError, match="schema"):
        plot.render("histogram", series_csv)


def test_empty_input_fails(tmp_path):
    p = tmp_path / "empty.csv"
    _write_csv(p, ["label", "N", "fidelity"], [])
    with pytest.raises(ValueError, match="no data"):
        plot.render("series", p)


def test_deterministic_output(series_csv, tmp_path):
    plot.render("series", series_csv, tmp_path / "one.png")
    plot.render("series", series_csv, tmp_path / "two.png")
    assert (tmp_path / "one.png").read_bytes() == (tmp_path / "two.png").read_bytes()


def test_cli_wrapper(hist_csv, tmp_path):
    out = tmp_path / "cli.png"
    script = Path(__file__).resolve().parents[1] / "plot.py"
    proc = subprocess.run(
        [
            sys.executable,
            str(script),
            "--kind",
            "histogram",
            "--in",
            str(hist_csv),
            "--out",
            str(out),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()


def _qcsynth_available():
    try:
        import qcsynth  # noqa: F401

        return True
    except ImportError:
        return False


@pytest.mark.skipif(not _qcsynth_available(), reason="needs the search package")
def test_end_to_end_from_real_pipeline_csvs(tmp_path):
    # drive the numerics package through its CLI only: tiny real store,
    # then render every figure kind from its CSV exports
    from qcsynth.cli import main as qc

    store = tmp_path / "store"
    assert (
        qc(
            [
                "search",
                "--target",
                "toffoli3",
                "--n",
                "3",
                "--N",
                "1",
                "--iterations",
                "1000",
                "--out",
                str(store),
            ]
        )
        == 0
    )
    assert qc(["closure", "--store", str(store), "--tol", "0.5"]) == 0
    hist = tmp_path / "h.csv"
    assert qc(["analyze", "--store", str(store), "--hist", str(hist), "--tol", "0.5"]) == 0
    fig = plot.render("histogram", hist, tmp_path / "h.png")
    assert (tmp_path / "h.png").exists()

    series = tmp_path / "series.csv"
    assert (
        qc(
            [
                "series",
                "--target",
                "toffoli3",
                "--n",
                "3",
                "--m",
                "2",
                "--N",
                "1,2",
                "--iterations",
                "400",
                "--out",
                str(series),
            ]
        )
        == 0
    )
    plot.render("series", series, tmp_path / "s.png")

    bounds = tmp_path / "bounds.csv"
    assert (
        qc(["bounds", "--task", "unitary", "--n", "3", "--m", "2,3", "--out", str(bounds)])
        == 0
    )
    plot.render("bounds", bounds, tmp_path / "b.png")
    for name in ("h.png", "s.png", "b.png"):
        assert (tmp_path / name).stat().st_size > 1000
