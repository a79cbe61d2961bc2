"""Backend equivalence: compiled kernels against the numpy fallback."""
import numpy as np
import pytest

from myoloop import _kernels_py, transport
from myoloop._backend import backend_name, kernels


def instance(seed, r=3, C=8, n=64):
    rng = np.random.default_rng(seed)
    banks = np.sort(np.abs(rng.standard_normal((r, C, n))), axis=2)
    perms = transport.make_permutations(r, C, n, rng.integers(1 << 30))
    banks_p = transport.permute_banks(banks, perms)
    live = np.sort(np.abs(rng.standard_normal((C, n))), axis=1)
    return live, banks, banks_p, perms, rng


def test_backend_identifies_itself():
    assert backend_name() in ("cython", "numpy")
    assert _kernels_py.BACKEND == "numpy"


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_distance_batch_matches_transport(seed):
    live, banks, banks_p, perms, rng = instance(seed)
    W = rng.uniform(0, 1, (7, 3))
    got = _kernels_py.distance_batch(live, banks_p, W)
    want = [transport.distance(live, banks, W[i], perms) for i in range(7)]
    np.testing.assert_allclose(got, want, atol=1e-14)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_compiled_distance_batch_matches_numpy(seed):
    live, _, banks_p, _, rng = instance(seed)
    W = rng.uniform(0, 1, (9, 3))
    d_py = _kernels_py.distance_batch(live, banks_p, W)
    d_ext = kernels.distance_batch(live, banks_p, W)
    np.testing.assert_allclose(d_ext, d_py, atol=1e-12)


def test_numpy_descend_matches_manual_loop():
    live, banks, banks_p, perms, _ = instance(5)
    lr, steps, h = 0.5, 20, 1e-2
    w = np.full(3, 0.5)
    for _ in range(steps):
        g = transport.fd_gradient(live, banks, w, perms, h=h)
        w = np.clip(w - lr * g, 0.0, 1.0)
    got, final = _kernels_py.descend(live, banks_p, np.full(3, 0.5), lr, steps, h)
    np.testing.assert_allclose(got, w, atol=1e-12)
    assert final == pytest.approx(transport.distance(live, banks, w, perms), abs=1e-12)


@pytest.mark.parametrize("seed", [6, 7, 8])
def test_compiled_descend_matches_numpy(seed):
    live, _, banks_p, _, rng = instance(seed)
    w0 = rng.uniform(0, 1, 3)
    w_py, f_py = _kernels_py.descend(live, banks_p, w0)
    w_ext, f_ext = kernels.descend(live, banks_p, w0)
    np.testing.assert_allclose(w_ext, w_py, atol=1e-9)
    assert f_ext == pytest.approx(f_py, abs=1e-9)


def test_descend_stays_in_box():
    live, _, banks_p, _, _ = instance(9)
    for backend in (_kernels_py, kernels):
        w, final = backend.descend(live, banks_p, np.array([0.0, 1.0, 0.5]),
                                   lr=2.0, steps=15)
        assert (w >= 0.0).all() and (w <= 1.0).all()
        assert final >= 0.0


def test_descend_exact_match_fixed_point():
    # live equal to one bank keeps the one-hot weight pinned at that bank.
    live, _, banks_p, _, _ = instance(10)
    live = np.sort(banks_p[1], axis=1)
    e1 = np.array([0.0, 1.0, 0.0])
    for backend in (_kernels_py, kernels):
        w, final = backend.descend(live, banks_p, e1.copy())
        np.testing.assert_array_equal(w, e1)
        assert final == 0.0
