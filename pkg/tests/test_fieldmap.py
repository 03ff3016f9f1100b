import numpy as np
import pytest

from quadbeam import DetuningSpec, sample_field
from quadbeam.beams import rabi_scale
from quadbeam.fieldmap import (FieldGrid, GridSpec, default_grid, export_csv, read_csv, read_ppm,
                               render_heatmap, sample_grid)


def small_grid(half=3.0, n=41, z=0.0):
    return GridSpec(-half, half, -half, half, n, n, z, units="waist")


def test_gridspec_invariants():
    with pytest.raises(ValueError):
        GridSpec(1, 0, 0, 1)
    with pytest.raises(ValueError):
        GridSpec(0, 1, 0, 1, nx=1)
    with pytest.raises(ValueError):
        GridSpec(0, 1, 0, 1, ny=8193)
    g = GridSpec(0, 1, 0, 2, nx=3, ny=5)
    assert g.positions().shape == (5, 3, 3)


def test_lg_l2_centre_is_zero(preset, atom):
    fg = sample_grid(preset.beam("lg", l=2), atom, small_grid())
    assert fg.values[20, 20] == 0.0
    assert fg.grid.x[20] == 0.0 and fg.grid.y[20] == 0.0


def test_hg00_zero_column(preset, atom):
    fg = sample_grid(preset.beam("hg", n=0, m=0), atom, small_grid())
    assert fg.grid.x[20] == 0.0
    np.testing.assert_array_equal(fg.values[:, 20], 0.0)
    assert fg.values.max() > 0


def test_normalisation_matches_point_query(preset, atom):
    b = preset.beam("lg", l=3, p=1)
    fg = sample_grid(b, atom, small_grid(n=64))
    x, y, vmax = fg.argmax()
    direct = abs(sample_field(b, atom, [x, y, 0.0]).rabi / rabi_scale(b, atom)) ** 2
    assert vmax == pytest.approx(direct, rel=1e-14)
    assert fg.scale == rabi_scale(b, atom) ** 2


def test_lg_l1_map_structure(preset, atom):
    # Q_xx only: |Omega/Omega0|^2 = 2 e^{-2 rho^2} [(1 - 2 x^2)^2 + 4 x^2 y^2] in units of w0,
    # brightest on the axis with two side lobes at x = +-sqrt(1.5), y = 0.
    b = preset.beam("lg", l=1)
    fg = sample_grid(b, atom, default_grid(b, 257))
    x, y, vmax = fg.argmax()
    assert (x, y) == (0.0, 0.0) and vmax == pytest.approx(2.0, rel=1e-14)
    xs = fg.grid.x / preset.waist
    row = fg.values[128]
    side = np.argmax(np.where(xs > 1.0, row, -1))
    xi = np.sqrt(1.5)
    assert abs(xs[side] - xi) < xs[1] - xs[0]
    lobe = abs(sample_field(b, atom, [xi * preset.waist, 0, 0]).rabi / rabi_scale(b, atom)) ** 2
    assert lobe == pytest.approx(8 * np.exp(-3), rel=1e-13)


def test_phase_observable_masks_core(preset, atom):
    fg = sample_grid(preset.beam("lg", l=1), atom, small_grid(), "phase")
    assert fg.singular_mask[20, 20] and np.isnan(fg.values[20, 20])
    assert fg.singular_mask.sum() == 1


def test_observables_need_detuning(preset, atom):
    b = preset.beam("lg", l=1)
    with pytest.raises(ValueError):
        sample_grid(b, atom, small_grid(), "potential")
    with pytest.raises(ValueError):
        sample_grid(b, atom, small_grid(), "intensity")
    det = DetuningSpec(-preset.delta0)
    pot = sample_grid(b, atom, small_grid(), "potential", det)
    assert np.nanmax(pot.values) <= 0.0
    fx = sample_grid(b, atom, small_grid(), "force_x", det)
    assert fx.singular_mask[20, 20]


def test_bessel_plane_outside_domain_masked(preset, atom):
    b = preset.beam("bessel", m=1)
    fg = sample_grid(b, atom, GridSpec(-1e-6, 1e-6, -1e-6, 1e-6, 4, 4, -1e-6))
    assert fg.singular_mask.all()


def test_permutation_determinism(preset, atom):
    b = preset.beam("hg", n=2, m=1)
    fg = sample_grid(b, atom, small_grid(n=33))
    pos = fg.grid.positions().reshape(-1, 3)
    perm = np.random.default_rng(5).permutation(len(pos))
    from quadbeam import evaluate_field
    vals = evaluate_field(b, atom, pos[perm]).rabi_sq / fg.scale
    back = np.empty_like(vals)
    back[perm] = vals
    assert np.array_equal(back.reshape(fg.values.shape), fg.values)


@pytest.mark.parametrize("n,m", [(0, 0), (1, 0), (2, 1), (3, 2)])
def test_hg_parity_on_symmetric_grid(preset, atom, n, m):
    # Q_xx only: the map is even in y for every (n, m) and even in x.
    fg = sample_grid(preset.beam("hg", n=n, m=m), atom, small_grid(n=41))
    v = fg.values
    np.testing.assert_allclose(v, v[::-1, :], rtol=1e-12, atol=1e-14 * v.max())
    np.testing.assert_allclose(v, v[:, ::-1], rtol=1e-12, atol=1e-14 * v.max())


# -- CSV ------------------------------------------------------------------------------------

def const_grid(value=0.0, n=2):
    g = GridSpec(0.0, 1.0, 0.0, 1.0, n, n)
    return FieldGrid(g, "rabi_sq_rel", np.full((n, n), value), 1.0, np.zeros((n, n), bool))


def test_csv_zeros(tmp_path):
    p = tmp_path / "z.csv"
    export_csv(const_grid(), p)
    lines = p.read_text(encoding="utf-8").splitlines()
    assert lines == ["x,y,value,singular", "0,0,0,false", "1,0,0,false", "0,1,0,false", "1,1,0,false"]


def test_csv_masked_row(tmp_path):
    fg = const_grid(1.5)
    fg.singular_mask[1, 0] = True
    fg.values[1, 0] = np.nan
    p = tmp_path / "m.csv"
    export_csv(fg, p)
    lines = p.read_text().splitlines()
    assert lines[3] == "0,1,nan,true"
    assert sum(line.endswith("true") for line in lines) == 1


def test_csv_roundtrip(tmp_path, preset, atom):
    fg = sample_grid(preset.beam("lg", l=2, p=1), atom, small_grid(n=17))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    export_csv(fg, a)
    x, y, vals, mask = read_csv(a)
    np.testing.assert_array_equal(mask, fg.singular_mask)
    ok = ~mask
    np.testing.assert_allclose(vals[ok], fg.values[ok], rtol=5e-12, atol=0)
    # the 12-digit text is a fixed point of read + write
    again = FieldGrid(fg.grid, fg.observable, vals, fg.scale, mask)
    export_csv(again, b)
    assert a.read_bytes() == b.read_bytes()
    # 17 digits reproduces every double exactly
    export_csv(fg, b, digits=17)
    _, _, exact, _ = read_csv(b)
    assert np.array_equal(exact[ok], fg.values[ok])


def test_csv_byte_identical_across_runs(tmp_path, preset, atom):
    b = preset.beam("bessel", m=2)
    paths = [tmp_path / f"{i}.csv" for i in range(2)]
    for p in paths:
        export_csv(sample_grid(b, atom, default_grid(b, 24)), p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_csv_io_error_reports_path(tmp_path):
    with pytest.raises(OSError, match="nope"):
        export_csv(const_grid(), tmp_path / "nope" / "x.csv")


# -- PPM ------------------------------------------------------------------------------------

def test_ppm_header_and_orientation(tmp_path, preset, atom):
    b = preset.beam("hg", n=0, m=1)
    fg = sample_grid(b, atom, GridSpec(-3, 3, 0.2, 3, 256, 256, units="waist"))
    p = tmp_path / "m.ppm"
    render_heatmap(fg, p)
    assert p.read_bytes().startswith(b"P6 256 256 255\n")
    img = read_ppm(p)
    assert img.shape == (256, 256, 3)
    # top image row is y_max
    lut_gray = tmp_path / "g.ppm"
    render_heatmap(fg, lut_gray, "gray")
    g = read_ppm(lut_gray)[..., 0].astype(int)
    vals = fg.values[::-1]
    hi, lo = np.unravel_index(np.argmax(vals), vals.shape), np.unravel_index(np.argmin(vals), vals.shape)
    assert g[hi] == 255 and g[lo] == 0


def test_ppm_constant_grid_mid_scale(tmp_path):
    p = tmp_path / "c.ppm"
    with pytest.warns(RuntimeWarning):
        render_heatmap(const_grid(3.0, 4), p, "gray")
    img = read_ppm(p)
    assert np.all(img == img[0, 0]) and img[0, 0, 0] == 128


def test_ppm_masked_black(tmp_path, preset, atom):
    fg = sample_grid(preset.beam("lg", l=1), atom, small_grid(n=41), "phase")
    p = tmp_path / "ph.ppm"
    render_heatmap(fg, p, "viridis")
    img = read_ppm(p)
    assert np.all(img[20, 20] == 0)
    assert img.reshape(-1, 3).any(axis=1).sum() == 41 * 41 - 1


def test_ppm_lg_l1_bright_centre(tmp_path, preset, atom):
    b = preset.beam("lg", l=1)
    fg = sample_grid(b, atom, default_grid(b, 257))
    p = tmp_path / "lg.ppm"
    render_heatmap(fg, p, "gray")
    g = read_ppm(p)[..., 0]
    assert g[128, 128] == 255
    xs = fg.grid.x / preset.waist
    i = np.argmin(abs(xs - np.sqrt(1.5)))
    assert 0 < g[128, i] < 255 and g[128, i] == round(255 * fg.values[128, i] / fg.values.max())


def test_unknown_colormap(tmp_path):
    with pytest.raises(ValueError):
        render_heatmap(const_grid(n=2), tmp_path / "x.ppm", "jet")
