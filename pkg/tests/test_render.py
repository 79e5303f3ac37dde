import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kochforge.choices import ChoiceSequence, SnowflakeSpec
from kochforge.curves import curve_polyline, double_sided_segments, snowflake_polyline
from kochforge.ifs import KochParams, build_family
from kochforge.render import (RenderOptions, Viewport, path_vertex_counts, segments_to_shapes,
                              to_svg)

FAM = build_family("0.3")


def test_svg_is_well_formed_and_counts_vertices():
    sf = snowflake_polyline(FAM, SnowflakeSpec.random(FAM.params, 3, 0), 3).polyline
    svg = to_svg([sf], RenderOptions(fill=True), closed=True)
    root = ET.fromstring(svg)
    assert root.get("width") == "800"
    assert path_vertex_counts(svg) == [3 * 4 ** 3]
    path = next(root.iter("{http://www.w3.org/2000/svg}path"))
    assert path.get("d").endswith("Z") and path.get("fill") != "none"


def test_open_curve_is_not_filled():
    c = curve_polyline(FAM, ChoiceSequence.uniform(2, 0), 2).polyline
    svg = to_svg([c], RenderOptions(fill=True))
    path = next(ET.fromstring(svg).iter("{http://www.w3.org/2000/svg}path"))
    assert path.get("fill") == "none" and not path.get("d").endswith("Z")
    assert path_vertex_counts(svg) == [17]


def test_segments_render_one_path_each():
    seg = double_sided_segments(FAM, 2)
    svg = to_svg(segments_to_shapes(seg))
    assert path_vertex_counts(svg) == [2] * 36


def test_rendering_is_deterministic():
    c = curve_polyline(FAM, ChoiceSequence.random(4, 1), 4).polyline
    opts = RenderOptions(width_px=300, height_px=200, stroke_width=0.5)
    assert to_svg([c], opts) == to_svg([c], opts)


def test_geometry_lands_inside_margins():
    c = curve_polyline(FAM, ChoiceSequence.random(3, 1), 3).polyline
    opts = RenderOptions(width_px=400, height_px=300, margin_fraction=0.1)
    v = c.vertices
    view = Viewport.fit(v.min(axis=0), v.max(axis=0), opts)
    px = view.to_pixel(v)
    assert px[:, 0].min() >= 40 - 1e-9 and px[:, 0].max() <= 360 + 1e-9
    assert px[:, 1].min() >= 30 - 1e-9 and px[:, 1].max() <= 270 + 1e-9
    # the upper vertex maps to the top of the image
    top = np.argmax(v[:, 1])
    assert px[top, 1] == px[:, 1].min()


@settings(max_examples=50, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_viewport_round_trip(x, y):
    view = Viewport.fit(np.array([-1.0, -2.0]), np.array([3.0, 1.0]), RenderOptions())
    back = view.to_world(view.to_pixel(np.array([x, y])))
    assert back == pytest.approx([x, y], abs=1e-9)


@pytest.mark.parametrize("kwargs", [dict(width_px=0), dict(stroke_width=-1),
                                    dict(fill_rule="xor"), dict(margin_fraction=0.5)])
def test_options_validation(kwargs):
    with pytest.raises(ValueError):
        RenderOptions(**kwargs)


def test_bad_inputs():
    with pytest.raises(ValueError):
        to_svg([])
    with pytest.raises(ValueError):
        to_svg([np.zeros((1, 2))])
    line = np.array([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(ValueError):
        to_svg([line, line], closed=[True])
