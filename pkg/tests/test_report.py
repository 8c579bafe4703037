"""CSV formatting determinism and headless figure rendering."""

import numpy as np

from ldlab import EnergyBreakdown, GridSet, Kernel
from ldlab.report import (field_figure, line_figure, raster_figure,
                          trace_figure, write_csv)

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def test_write_csv_formatting(tmp_path):
    p = write_csv(tmp_path / "t.csv", ["name", "k", "x", "flag"],
                  [("ball", 3, 1.0 / 3.0, True),
                   ("bar", np.int64(7), np.float64(2.0), False)])
    lines = p.read_text().splitlines()
    assert lines[0] == "name,k,x,flag"
    assert lines[1] == "ball,3,0.333333333333,1"  # %.12g floats, 1/0 bools
    assert lines[2] == "bar,7,2,0"


def test_write_csv_byte_identical(tmp_path):
    rows = [(i, np.sqrt(i)) for i in range(20)]
    a = write_csv(tmp_path / "a.csv", ["i", "s"], rows)
    b = write_csv(tmp_path / "b.csv", ["i", "s"], rows)
    assert a.read_bytes() == b.read_bytes()


def _is_png(path):
    return path.stat().st_size > 500 and \
        path.read_bytes()[:8] == PNG_MAGIC


def test_line_figure(tmp_path):
    x = np.linspace(1, 10, 9)
    p = line_figure(tmp_path / "l.png", x, {"a": x**2, "b": x}, "m", "E",
                    logx=True, logy=True, title="scaling")
    assert _is_png(p)


def test_raster_figure_2d_and_3d(tmp_path):
    cells2 = np.zeros((8, 8), dtype=bool)
    cells2[2:6, 3:5] = True
    assert _is_png(raster_figure(tmp_path / "r2.png", GridSet(cells2, 0.5)))
    cells3 = np.zeros((8, 8, 8), dtype=bool)
    cells3[2:6, 2:6, 2:6] = True
    assert _is_png(raster_figure(tmp_path / "r3.png", GridSet(cells3, 0.5),
                                 title="cube"))


def test_trace_figure(tmp_path):
    k = Kernel(3, 1.0)
    trace = [EnergyBreakdown(P=5.0 - i, V=2.0, E=7.0 - i, m=1.0, kernel=k)
             for i in range(4)]
    assert _is_png(trace_figure(tmp_path / "t.png", trace))


def test_field_figure_2d_and_3d(tmp_path):
    assert _is_png(field_figure(tmp_path / "f2.png", np.random.rand(9, 9)))
    assert _is_png(field_figure(tmp_path / "f3.png",
                                np.random.rand(9, 9, 9), title="potential"))
