import numpy as np
import pytest

from annulus_dirichlet import closedform as cf
from annulus_dirichlet.mapio import MapFormatError, from_bytes, from_csv, load_map, save_map, to_bytes, to_csv
from annulus_dirichlet.polargrid import PolarGrid, dirichlet_energy, perturb, sample_map


@pytest.fixture
def sample(below):
    grid = PolarGrid.for_spec(below, 17, 32)
    return perturb(sample_map(lambda z: cf.eval_g_diamond(below, z), grid, below.R, below.j), seed=3)


def test_csv_layout(sample):
    text = to_csv(sample)
    lines = text.splitlines()
    assert lines[0] == "t,tau,u,v"
    assert len(lines) == 1 + 17 * 32
    t0, tau1 = (float(x) for x in lines[2].split(",")[:2])
    assert t0 == sample.grid.t_min and tau1 == pytest.approx(sample.grid.htau)


def test_csv_round_trip(sample):
    back = from_csv(to_csv(sample), sample.target_R, sample.j)
    np.testing.assert_array_equal(back.w, sample.w)
    assert dirichlet_energy(back) == dirichlet_energy(sample)


def test_binary_layout(sample):
    raw = to_bytes(sample)
    assert len(raw) == 8 * (6 + 2 * 17 * 32)
    head = np.frombuffer(raw[:48], dtype="<f8")
    assert list(head) == [17, 32, sample.grid.t_min, sample.grid.t_max, sample.target_R, sample.j]
    assert np.frombuffer(raw[48:64], dtype="<f8").tolist() == [sample.w[0, 0].real, sample.w[0, 0].imag]


def test_binary_round_trip(sample):
    back = from_bytes(to_bytes(sample))
    np.testing.assert_array_equal(back.w, sample.w)
    assert back.grid == sample.grid
    assert abs(dirichlet_energy(back) - dirichlet_energy(sample)) <= 1e-12 * dirichlet_energy(sample)


@pytest.mark.parametrize("name", ["m.csv", "m.bin"])
def test_files(tmp_path, sample, name):
    path = save_map(sample, tmp_path / name)
    back = load_map(path, sample.target_R, sample.j)
    np.testing.assert_array_equal(back.w, sample.w)


def test_truncated_binary(sample):
    with pytest.raises(MapFormatError):
        from_bytes(to_bytes(sample)[:-8])


def test_bad_csv_header(sample):
    with pytest.raises(MapFormatError):
        from_csv(to_csv(sample).replace("t,tau", "r,theta", 1), 2.0, 2)


def test_csv_needs_target(tmp_path, sample):
    path = save_map(sample, tmp_path / "m.csv")
    with pytest.raises(MapFormatError):
        load_map(path)


def test_binary_target_mismatch(tmp_path, sample):
    path = save_map(sample, tmp_path / "m.bin")
    with pytest.raises(MapFormatError):
        load_map(path, target_R=3.0)
