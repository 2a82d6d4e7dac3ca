import numpy as np
import pytest

from tvreg.core import GridError, Masked, build_grid, corner_cells, disc, interval, lshape, rectangle


def test_interval_geometry():
    g = interval(4, 2.0)
    assert g.dim == 1
    assert g.h == (0.5,)
    assert g.convex
    assert g.measure == pytest.approx(2.0)
    assert np.allclose(g.centers()[0], [0.25, 0.75, 1.25, 1.75])
    assert g.grid_id == "interval-4"
    assert len(g.boundary_cells) == 2


def test_rectangle_ids_and_spacing():
    g = rectangle(4, 5, 1.0, 2.0)
    assert g.shape == (4, 5)
    assert g.h == pytest.approx((0.25, 0.4))
    assert g.grid_id == "rect-4x5"
    assert g.same_as(rectangle(4, 5, 1.0, 2.0))
    assert not g.same_as(rectangle(5, 4))


@pytest.mark.parametrize("n", [0, 1, 2])
def test_too_few_cells(n):
    with pytest.raises(GridError):
        interval(n)


def test_lshape_is_nonconvex_and_needs_even_n():
    g = lshape(16)
    assert not g.convex
    assert g.n_interior == 16 * 16 - 8 * 8
    assert g.grid_id.startswith("lshape-16x16-")
    with pytest.raises(GridError):
        lshape(7)


def test_disconnected_mask_rejected():
    mask = np.zeros((5, 5), dtype=bool)
    mask[0, :] = True
    mask[4, :] = True
    with pytest.raises(GridError, match="disconnected"):
        build_grid(Masked(mask, 0.2))


def test_empty_mask_rejected():
    with pytest.raises(GridError):
        build_grid(Masked(np.zeros((4, 4), dtype=bool), 0.25))


def test_full_mask_counts_as_convex():
    g = build_grid(Masked(np.ones((4, 4), dtype=bool), 0.25))
    assert g.convex
    assert g.kind == "masked"


def test_core_mask_erodes_by_width():
    g = interval(10)
    assert g.core_mask(0).sum() == 10
    assert g.core_mask(2).sum() == 6
    assert not g.core_mask(2)[1]
    assert g.core_mask(2)[2]


def test_face_mask_excludes_box_edge():
    g = interval(5)
    assert g.face_mask(0).tolist() == [True, True, True, True, False]


def test_corner_cells_of_lshape():
    assert set(corner_cells(lshape(16))) == {(7, 7), (7, 8), (8, 7)}
    assert corner_cells(rectangle(8, 8)) == ()
    assert corner_cells(interval(8)) == ()


def test_disc_is_connected_and_nonconvex_grid():
    g = disc(24)
    assert not g.convex
    assert 0 < g.n_interior < 24 * 24
    assert g.measure == pytest.approx(np.pi / 4, rel=0.1)
