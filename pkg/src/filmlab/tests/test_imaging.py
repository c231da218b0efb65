import numpy as np
import pytest

from filmlab.grid import field_from_function, gradient_magnitude_sq, make_grid
from filmlab.imaging import codec, filters, metrics, synthetic
from filmlab.imaging.codec import ImageGray, decode_pgm, encode_pgm, make_image
from filmlab.imaging.filters import (SharpenRecipe, backward_diffusion_factor, build_exponent_from_image,
                                     enhance_contrast, field_to_image, image_to_field, linear_backward_diffusion,
                                     linear_backward_diffusion_field, sharpen, shock_filter, shock_filter_field)
from filmlab.nonlinear import backward_fraction
from filmlab.util import DegenerateImage, FilterDiverged, ImageFormatError, SharpeningDiverged

PGM = b'P5\n# made by hand\n3 2\n255\n' + bytes([0, 255, 128, 1, 2, 3])


@pytest.fixture
def edge():
    return synthetic.step_edge_image(noise=0.01, rng=np.random.default_rng(3), taper=24)


@pytest.fixture
def hard_edge():
    return synthetic.step_edge_image(width=64, height=64)


def test_decode_pgm_with_comment():
    img = decode_pgm(PGM)
    assert (img.height, img.width) == (2, 3)
    assert img.intensities[0].tolist() == pytest.approx([0.0, 1.0, 128 / 255])
    assert codec.to_bytes(img).tolist() == [[0, 255, 128], [1, 2, 3]]


def test_encode_pgm_is_canonical():
    assert encode_pgm(decode_pgm(PGM)) == PGM.replace(b'# made by hand\n', b'')


def test_decode_rescales_small_maxval():
    img = decode_pgm(b'P5 2 1 15 ' + bytes([15, 5]))
    assert img.intensities.tolist() == pytest.approx([[1.0, 1 / 3]])


@pytest.mark.parametrize('blob', [
    b'P6\n3 2\n255\n' + bytes(18),
    b'P5\n3 2\n255\n' + bytes(5),
    b'P5\n3 2\n65535\n' + bytes(12),
    b'P5\n3 x\n255\n' + bytes(6),
    b'P5\n3',
])
def test_decode_pgm_errors(blob):
    with pytest.raises(ImageFormatError):
        decode_pgm(blob)


def test_make_image_checks():
    with pytest.raises(ImageFormatError):
        make_image(np.zeros(4))
    with pytest.raises(ImageFormatError):
        make_image([[0.5, np.nan]])
    with pytest.raises(ImageFormatError):
        make_image([[0.5, 1.5]])
    assert make_image([[-0.5, 1.5]], clamp=True).intensities.tolist() == [[0.0, 1.0]]


def test_png_roundtrip(tmpdir, scratch_files):
    img = decode_pgm(PGM)
    with scratch_files:
        codec.write_image(tmpdir.join('a.png'), img)
    back = codec.read_image(tmpdir.join('a.png'))
    assert np.array_equal(codec.to_bytes(back), codec.to_bytes(img))


def test_read_image_sniffs_pgm(tmpdir):
    tmpdir.join('picture.raw').write_binary(PGM)
    assert np.array_equal(codec.read_image(tmpdir.join('picture.raw')).intensities, decode_pgm(PGM).intensities)


def test_unreadable_png(tmpdir):
    tmpdir.join('broken.png').write_binary(b'not a png')
    with pytest.raises(ImageFormatError):
        codec.read_image(tmpdir.join('broken.png'))


def test_image_to_field():
    u, grid = image_to_field(make_image(np.full((4, 4), 0.5)))
    assert grid == make_grid(5, 5, 4, 4)
    assert grid.dx == grid.dy == 1.0
    assert np.all(u.values == 0.5)


def test_image_orientation():
    values = np.zeros((5, 7))
    values[1, 4] = 1.0
    u, grid = image_to_field(make_image(values), 255)
    assert grid.shape == (7, 5)
    # row 1, column 4 is node (5, 2)
    assert u.at(5, 2) == 255.0
    assert np.array_equal(field_to_image(u, 255).intensities, values)


def test_too_small_image():
    with pytest.raises(DegenerateImage):
        image_to_field(make_image(np.zeros((3, 8))))


def test_bright_image_has_gradient_only_at_the_frame():
    u, grid = image_to_field(make_image(np.ones((8, 8))))
    g2 = gradient_magnitude_sq(u)
    assert np.all(g2[[1, -2], 1:-1] > 0)
    assert not np.any(g2[2:-2, 2:-2])


@pytest.mark.parametrize('slope,expected', [(625.0, 3.5), (16.0, 3.2), (0.0, 3.0)])
def test_exponent_from_image(slope, expected):
    g = make_grid(21, 21, 20, 20)
    u = field_from_function(g, lambda x, y: slope * x + 7.0)
    assert build_exponent_from_image(u).values[10, 10] == pytest.approx(expected)


def test_exponent_stays_in_range(edge):
    u, _ = image_to_field(edge.image, 255)
    p = build_exponent_from_image(u)
    assert 3.0 <= p.p_minus <= p.p_plus <= 3.5


def test_sharpen_zero_time_is_identity(edge):
    out = sharpen(edge.image, SharpenRecipe(t_stop=0.0))
    assert encode_pgm(out) == encode_pgm(edge.image)


def test_sharpen_steepens_the_edge(edge):
    out = sharpen(edge.image)
    assert metrics.edge_gain(edge.image, out, edge.edge_region) > 1.0


def test_sharpen_keeps_flat_noise_down(edge):
    out = sharpen(edge.image)
    for region in edge.flat_regions:
        assert metrics.flat_variance_ratio(edge.image, out, region) <= 1.5


def test_sharpen_writes_diagnostics(edge, tmpdir, mocker):
    spy = mocker.spy(filters, 'write_outcome')
    sharpen(edge.image, SharpenRecipe(t_stop=2e-3), diagnostics_dir=tmpdir.join('diag'))
    assert spy.call_count == 1
    assert tmpdir.join('diag', 'diagnostics.csv').check()


def test_sharpen_divergence_is_reported(edge):
    with pytest.raises(SharpeningDiverged, match='reduce t_stop or k'):
        sharpen(edge.image, SharpenRecipe(t_stop=2e-3, blowup_threshold=1.0))


def test_enhance_without_source_is_sharpen(edge):
    recipe = SharpenRecipe(t_stop=0.01)
    assert np.array_equal(enhance_contrast(edge.image, recipe, lam=0.0).intensities,
                          sharpen(edge.image, recipe).intensities)


def test_enhance_raises_contrast(edge):
    out = enhance_contrast(edge.image, SharpenRecipe(t_stop=0.03), lam=10.0)
    assert metrics.contrast_mad(out) > metrics.contrast_mad(edge.image)


def test_enhance_rejects_negative_source(edge):
    with pytest.raises(ValueError):
        enhance_contrast(edge.image, lam=-1.0)


def test_backward_factor():
    assert backward_diffusion_factor(10.0, 1e-4, 1e-3) == pytest.approx(1.01 / 1.00001)
    lam = np.linspace(0.1, 8.0, 50)
    assert np.all(backward_diffusion_factor(lam, 1e9, 5e-4) < 1)


def test_backward_diffusion_amplifies_noise():
    noisy = synthetic.step_edge_image(width=48, height=48, low=0.5, high=0.5, noise=0.01,
                                      rng=np.random.default_rng(11), taper=8)
    out = linear_backward_diffusion(noisy.image)
    for region in noisy.flat_regions:
        assert metrics.flat_variance_ratio(noisy.image, out, region) > 1.0


def test_backward_diffusion_divergence(hard_edge):
    u, _ = image_to_field(hard_edge.image)
    with pytest.raises(FilterDiverged, match='linear backward diffusion diverged'):
        linear_backward_diffusion_field(u, threshold=0.5)
    with pytest.raises(ValueError):
        linear_backward_diffusion_field(u, epsilon=0.0)


def test_shock_filter_leaves_flat_interior():
    flat = make_image(np.full((48, 48), 0.5))
    out = shock_filter(flat)
    assert np.array_equal(out.intensities[20:28, 20:28], flat.intensities[20:28, 20:28])


def test_shock_filter_steepens_and_stays_in_range(hard_edge):
    u0, _ = image_to_field(hard_edge.image, 255)
    u = shock_filter_field(u0)
    assert u.values.min() >= -1e-6
    assert u.values.max() <= u0.values.max() + 1e-6
    out = field_to_image(u, 255)
    assert metrics.edge_gain(hard_edge.image, out, hard_edge.edge_region) > 1.0


def test_central_shock_scheme_runs(hard_edge):
    u0, _ = image_to_field(hard_edge.image, 255)
    assert not shock_filter_field(u0, scheme='central').diverged
    with pytest.raises(ValueError):
        shock_filter_field(u0, scheme='sideways')


def test_image_defaults_evolve_scaled_intensities(hard_edge):
    assert SharpenRecipe().intensity_scale == 255.0
    recipe = SharpenRecipe()
    share = {}
    for scale in (1.0, 255.0):
        u0, _ = image_to_field(hard_edge.image, scale)
        share[scale] = backward_fraction(u0, build_exponent_from_image(u0, recipe), recipe.k(0.0))
    # unit intensities never reach the backward threshold
    assert share[1.0] == 0.0
    assert share[255.0] > 0.0
    default = shock_filter(hard_edge.image)
    upwind = shock_filter(hard_edge.image, scheme='upwind', scale=255.0)
    assert np.array_equal(codec.to_bytes(default), codec.to_bytes(upwind))


def shifted_blobs(shift):
    first = synthetic.blob_image(width=72, center=(32.0, 32.0), sigma=5.0, peak=0.6)
    second = synthetic.blob_image(width=72, center=(32.0, 32.0 + shift), sigma=5.0, peak=0.6)
    return first, second


def test_shock_filter_commutes_with_translation():
    first, second = shifted_blobs(4)
    a, b = shock_filter(first), shock_filter(second)
    assert b.intensities[:, 4:] == pytest.approx(a.intensities[:, :-4], abs=1e-9)


def test_sharpen_commutes_with_translation():
    first, second = shifted_blobs(4)
    recipe = SharpenRecipe(t_stop=0.01)
    a, b = sharpen(first, recipe), sharpen(second, recipe)
    assert b.intensities[:, 4:] == pytest.approx(a.intensities[:, :-4], abs=2e-3)


def test_metrics():
    ramp = np.tile(np.arange(6, dtype=float), (4, 1))
    assert np.allclose(metrics.gradient_magnitude(ramp), 1.0)
    region = (slice(None), slice(None))
    assert metrics.edge_gain(ramp, 2 * ramp, region) == pytest.approx(2.0)
    assert metrics.flat_variance_ratio(ramp, 3 * ramp, region) == pytest.approx(9.0)
    assert metrics.output_range(ramp) == (0.0, 5.0)
    assert metrics.contrast_mad(np.full((3, 3), 0.4)) == 0.0
    assert metrics.contrast_mad(make_image([[0.0, 1.0]])) == pytest.approx(0.5)


def test_step_edge_layout():
    picture = synthetic.step_edge_image(width=40, height=30, ramp=3)
    values = picture.image.intensities
    assert isinstance(picture.image, ImageGray)
    assert values.shape == (30, 40)
    assert values[10, 0] == pytest.approx(0.25)
    assert values[10, -1] == pytest.approx(0.75)
    assert picture.edge_column == 20
    assert 0.25 < values[10, 20] < 0.75
    for region in (picture.edge_region,) + picture.flat_regions:
        assert values[region].size > 0


def test_frame_taper():
    taper = synthetic.frame_taper(10, 12, 4)
    assert taper[0, 5] == pytest.approx(0.25)
    assert taper[5, 6] == 1.0
    assert np.all(synthetic.frame_taper(3, 3, 0) == 1.0)
