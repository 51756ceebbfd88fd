import numpy as np
import pytest

from opchain.dataset import generate_synthetic_dataset, load_dataset, synthesize
from opchain.errors import DatasetError, InvalidParameterError
from opchain.pgm import from_gray, read_pgm, to_gray, write_pgm


def test_round_trip(tmp_path):
    img = np.random.default_rng(0).random((7, 11))
    write_pgm(tmp_path / "a.pgm", from_gray(img))
    back = to_gray(read_pgm(tmp_path / "a.pgm"))
    assert back.shape == (7, 11)
    assert np.abs(back - img).max() <= 0.5 / 255 + 1e-12


def test_bool_written_as_0_255(tmp_path):
    m = np.eye(4, dtype=bool)
    write_pgm(tmp_path / "m.pgm", m)
    assert set(np.unique(read_pgm(tmp_path / "m.pgm"))) == {0, 255}


def test_header_comments(tmp_path):
    f = tmp_path / "c.pgm"
    f.write_bytes(b"P5 # made by hand\n# another\n3 2\n255\n" + bytes(range(6)))
    np.testing.assert_array_equal(read_pgm(f), [[0, 1, 2], [3, 4, 5]])


@pytest.mark.parametrize("data, match", [
    (b"P5\n2 2\n65535\n" + bytes(8), "maxval 65535"),
    (b"P2\n2 2\n255\n0 0 0 0", "magic"),
    (b"P5\n2 2\n255\n" + bytes(3), "expected 4"),
    (b"P5\n2", "malformed"),
])
def test_bad_files(tmp_path, data, match):
    f = tmp_path / "bad.pgm"
    f.write_bytes(data)
    with pytest.raises(DatasetError, match=match) as e:
        read_pgm(f)
    assert "bad.pgm" in str(e.value)


def test_generate_and_load(tmp_path):
    ids = generate_synthetic_dataset(tmp_path, count=10, size=48, seed=1)
    assert len(list(tmp_path.iterdir())) == 20
    data = load_dataset(tmp_path)
    assert [e.id for e in data] == ids == sorted(ids)
    for e in data:
        assert e.image.shape == (48, 48) and 0 <= e.image.min() and e.image.max() <= 1
        assert e.gt.contour_count == 2


def test_regeneration_is_byte_identical(tmp_path):
    generate_synthetic_dataset(tmp_path / "a", count=3, seed=9)
    generate_synthetic_dataset(tmp_path / "b", count=3, seed=9)
    for f in sorted((tmp_path / "a").iterdir()):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_result_images_are_ignored(tmp_path):
    generate_synthetic_dataset(tmp_path, count=2, size=32)
    write_pgm(tmp_path / "img000.result.pgm", np.zeros((32, 32), bool))
    assert len(load_dataset(tmp_path)) == 2


def test_dimension_mismatch(tmp_path):
    write_pgm(tmp_path / "x.pgm", np.zeros((4, 5), np.uint8))
    write_pgm(tmp_path / "x.gt.pgm", np.zeros((4, 6), bool))
    with pytest.raises(DatasetError, match="x.gt.pgm"):
        load_dataset(tmp_path)


def test_orphans(tmp_path):
    write_pgm(tmp_path / "y.gt.pgm", np.zeros((4, 4), bool))
    with pytest.raises(DatasetError, match="without image"):
        load_dataset(tmp_path)
    (tmp_path / "y.gt.pgm").unlink()
    write_pgm(tmp_path / "z.pgm", np.zeros((4, 4), np.uint8))
    with pytest.raises(DatasetError, match="missing ground truth"):
        load_dataset(tmp_path)


def test_empty_or_missing_dir(tmp_path):
    with pytest.raises(DatasetError):
        load_dataset(tmp_path)
    with pytest.raises(DatasetError):
        load_dataset(tmp_path / "nope")


def test_synthesized_gt_is_shape_boundary():
    img, gt = synthesize(np.random.default_rng(4), 40, 1, noise_sigma=0.0)
    inside = img > 0
    assert gt.any() and not (gt & ~inside).any()
    # every boundary pixel touches the background with a 4-neighbour
    padded = np.pad(inside, 1)
    for r, c in np.argwhere(gt):
        nb = [padded[r, c + 1], padded[r + 2, c + 1], padded[r + 1, c], padded[r + 1, c + 2]]
        assert not all(nb)


@pytest.mark.parametrize("kw", [dict(count=0), dict(size=16), dict(shapes=4), dict(noise_sigma=-1)])
def test_generator_arguments(tmp_path, kw):
    with pytest.raises(InvalidParameterError):
        generate_synthetic_dataset(tmp_path, **kw)
