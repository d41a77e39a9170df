import numpy as np
import pytest

from effvel.errors import GridMismatchError
from effvel.grid import Grid, sphere_area


def test_line_spacing_and_nodes():
    g = Grid.line(8, 0.0, 2.0)
    assert g.h == 0.25
    assert g.n_nodes == 8
    f = Grid.line(8, 0.0, 2.0, boundary="farfield")
    assert f.n_nodes == 9
    assert f.x[-1] == 2.0


def test_radial_nodes_and_weights_cover_ball():
    g = Grid.radial(100, 2.0, 3)
    assert g.n_nodes == 101
    assert g.x[0] == 0.0
    # shell weights sum to the ball of radius R + h/2
    R = g.R_max + g.h / 2
    assert g.weights.sum() == pytest.approx(4.0 / 3.0 * np.pi * R**3, rel=1e-13)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="radial", n_cells=10, x_min=0.0, x_max=1.0, N=1, boundary="farfield"),
        dict(kind="line1d", n_cells=10, x_min=0.0, x_max=1.0, N=2),
        dict(kind="line1d", n_cells=10, x_min=1.0, x_max=1.0),
        dict(kind="radial", n_cells=10, x_min=0.0, x_max=1.0, N=2, boundary="periodic"),
        dict(kind="line1d", n_cells=1, x_min=0.0, x_max=1.0),
        dict(kind="cube", n_cells=10),
    ],
)
def test_invalid_grids_rejected(kwargs):
    with pytest.raises(ValueError):
        Grid(**kwargs)


def test_check_and_require():
    g = Grid.line(8, 0.0, 1.0)
    with pytest.raises(GridMismatchError):
        g.check(np.zeros(7))
    with pytest.raises(GridMismatchError):
        g.require("radial")


def test_refine_keeps_nested_nodes():
    g = Grid.line(16, -1.0, 1.0, boundary="farfield")
    f = g.refine(2)
    np.testing.assert_allclose(f.x[::2], g.x, atol=1e-15)


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * np.pi)
    assert sphere_area(3) == pytest.approx(4 * np.pi)
