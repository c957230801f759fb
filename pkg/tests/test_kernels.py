import os
import subprocess
import sys

import numpy as np
import pytest

from annulus_dirichlet import kernels
from annulus_dirichlet._accel import HAVE_NUMBA

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


def random_field(nr=9, nt=16, seed=0):
    rng = np.random.default_rng(seed)
    t = np.linspace(1, 2, nr)[:, None]
    tau = 2 * np.pi * np.arange(nt)[None, :] / nt
    w = t * np.exp(2j * tau)
    return w + 0.05 * (rng.normal(size=w.shape) + 1j * rng.normal(size=w.shape))


def test_energy_matches_direct_sum():
    w = random_field()
    ax, at = 0.7, 1.3
    nr, nt = w.shape
    ref = 0.0
    for i in range(nr):
        ci = 0.5 if i in (0, nr - 1) else 1.0
        for k in range(nt):
            if i + 1 < nr:
                ref += ax * abs(w[i + 1, k] - w[i, k]) ** 2
            ref += at * ci * abs(w[i, (k + 1) % nt] - w[i, k]) ** 2
    assert kernels.edge_energy_np(w, ax, at) == pytest.approx(ref, rel=1e-13)


def test_gradient_matches_finite_differences():
    w = random_field(5, 8)
    ax, at = 0.7, 1.3
    g = kernels.edge_gradient_np(w, ax, at)
    h = 1e-6
    for idx in [(0, 0), (2, 3), (4, 7)]:
        for unit in (1, 1j):
            wp, wm = w.copy(), w.copy()
            wp[idx] += h * unit
            wm[idx] -= h * unit
            fd = (kernels.edge_energy_np(wp, ax, at) - kernels.edge_energy_np(wm, ax, at)) / (2 * h)
            comp = g[idx].real if unit == 1 else g[idx].imag
            assert comp == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_sor_lowers_energy_and_respects_shell():
    w = random_field(17, 32)
    w[0] /= np.abs(w[0])
    w[-1] *= 2 / np.abs(w[-1])
    e0 = kernels.edge_energy_np(w, 0.5, 2.0)
    kernels.sor_sweeps_np(w, 0.5, 2.0, 1.0, 1.0, 2.0, 10)
    assert kernels.edge_energy_np(w, 0.5, 2.0) < e0
    s = np.abs(w)
    np.testing.assert_allclose(s[0], 1.0)
    np.testing.assert_allclose(s[-1], 2.0)
    assert s.min() >= 1 - 1e-12 and s.max() <= 2 + 1e-12


def test_preimage_count_of_power_map():
    t = np.exp(np.linspace(0, np.log(2), 17))[:, None]
    tau = 2 * np.pi * np.arange(64)[None, :] / 64
    w = (t * np.exp(1j * tau)) ** 2
    ys = np.array([2.0 * np.exp(0.3j), 2.5 * np.exp(2.1j)])
    counts, flagged = kernels.preimage_count_np(w, ys, 1e-12)
    assert list(counts) == [2, 2] and not flagged.any()


@needs_numba
@pytest.mark.parametrize("seed", range(3))
def test_backends_agree(seed):
    w = random_field(17, 32, seed)
    ax, at = 0.4, 2.5
    assert kernels.edge_energy_nb(w, ax, at) == pytest.approx(kernels.edge_energy_np(w, ax, at), rel=1e-13)
    np.testing.assert_allclose(kernels.edge_gradient_nb(w, ax, at), kernels.edge_gradient_np(w, ax, at), rtol=1e-12, atol=1e-12)

    a, b = w.copy(), w.copy()
    a[0] /= np.abs(a[0])
    b[0] /= np.abs(b[0])
    ra = kernels.sor_sweeps_np(a, ax, at, 1.3, 1.0, 2.0, 5)
    rb = kernels.sor_sweeps_nb(b, ax, at, 1.3, 1.0, 2.0, 5)
    assert ra == rb
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

    rng = np.random.default_rng(seed)
    ys = rng.uniform(1.1, 1.9, 8) * np.exp(1j * rng.uniform(0, 2 * np.pi, 8))
    ca, fa = kernels.preimage_count_np(w, ys, 1e-12)
    cb, fb = kernels.preimage_count_nb(w, ys, 1e-12)
    np.testing.assert_array_equal(ca, cb)
    np.testing.assert_array_equal(fa, fb)


def test_env_flag_selects_numpy():
    env = dict(os.environ, ANNULUS_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from annulus_dirichlet import kernels; print(kernels.BACKEND, kernels.edge_energy is kernels.edge_energy_np)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.split() == ["numpy", "True"]


def test_numpy_backend_end_to_end():
    code = (
        "from annulus_dirichlet import ProblemSpec, PolarGrid, minimize, kernels\n"
        "spec = ProblemSpec(2.0, 2.125, 2)\n"
        "m, rep = minimize(spec, PolarGrid.for_spec(spec, 17, 32), mode='perturbed')\n"
        "print(kernels.BACKEND, rep.converged, abs(rep.gap_rel) < 0.05, set(rep.degrees))\n"
    )
    env = dict(os.environ, ANNULUS_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True", "True", "{2}"]
