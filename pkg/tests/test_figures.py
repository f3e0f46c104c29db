from fractions import Fraction as F

import pytest

from dyadic_mw.construction import build
from dyadic_mw.figures import export_figure_data


def test_first_stage_profile():
    table = export_figure_data(build(1, 1), 0)
    assert {x for x, _ in table.steps} == {F(0), F(1, 3), F(1)}
    assert {y for _, y in table.steps} == {0, 1}


def test_second_stage_plateaus():
    table = export_figure_data(build(1, 1), 1)
    assert {y for _, y in table.steps} == {0, 1, 6}
    assert (F(37, 96), 6) in table.steps and (F(13, 24), 6) in table.steps


def test_markers_and_formats():
    table = export_figure_data(build(1, 0), 0)
    jumps = [m.lo for m in table.markers if m.kind == "jump"]
    assert jumps == [F(1, 3)]
    terminal = [m for m in table.markers if m.kind == "terminal"][0]
    assert (terminal.lo, terminal.hi) == (F(5, 16), F(3, 8))
    assert table.to_csv().splitlines()[0] == "kind,label,x,x_end,y"
    assert table.to_json()["steps"][1] == ["1/3", "1/1"]
    with pytest.raises(ValueError):
        export_figure_data(build(1, 0), 1)
