"""The compiled kernels and the NumPy fallback must agree bit-for-bit."""

import numpy as np
import pytest

from echoroom import _kernels_py

compiled = pytest.importorskip("echoroom._kernels")


def random_signal(rng, n=6000):
    s = rng.normal(0, 0.01, size=n)
    idx = rng.integers(1, n - 1, size=40)
    s[idx] += rng.uniform(0.2, 2.0, size=40)
    return np.abs(s)


class TestPickPeaksEquivalence:
    def test_random_signals(self, rng):
        for _ in range(40):
            mag = random_signal(rng)
            thr = float(mag.max() * 0.02)
            a = compiled.pick_peaks(mag, thr, 8, 40)
            b = _kernels_py.pick_peaks(mag, thr, 8, 40)
            assert np.array_equal(a, b)

    def test_plateaus_and_ties(self):
        mag = np.array([0, 1, 1, 0, 2, 2, 2, 0, 3, 0, 3, 0], dtype=float)
        a = compiled.pick_peaks(mag, 0.5, 1, 10)
        b = _kernels_py.pick_peaks(mag, 0.5, 1, 10)
        assert np.array_equal(a, b)

    def test_short_signal(self):
        mag = np.array([1.0, 2.0])
        assert np.array_equal(
            compiled.pick_peaks(mag, 0.1, 8, 40), _kernels_py.pick_peaks(mag, 0.1, 8, 40)
        )


class TestCommonISEquivalence:
    def rig(self, ext=0.4):
        return np.array([[ext, 0.0], [0.0, ext], [-ext, 0.0], [0.0, -ext]])

    def test_random_instances(self, rng):
        for _ in range(60):
            mic = self.rig(rng.uniform(0.1, 0.5))
            dists = [np.sort(rng.uniform(0.3, 12.0, size=rng.integers(1, 12))) for _ in range(4)]
            args = (mic, dists, 0.05, 1e-9, 0.0, 0.0, 1e-6)
            pa, ra, ia = compiled.common_is_search(*args)
            pb, rb, ib = _kernels_py.common_is_search(*args)
            assert np.array_equal(pa, pb)
            assert np.array_equal(ra, rb)
            assert np.array_equal(ia, ib)

    def test_consistent_image_found_identically(self, rng):
        c = 343.0
        for _ in range(40):
            mic = self.rig(0.4)
            truth = rng.uniform(-8, 8, size=2)
            d_true = np.hypot(mic[:, 0] - truth[0], mic[:, 1] - truth[1])
            dists = []
            for k in range(4):
                noise = rng.uniform(1.0, 10.0, size=6)
                dists.append(np.sort(np.append(noise, d_true[k])))
            args = (mic, dists, 0.05, 1e-9, 0.0, 0.0, 1e-6)
            pa, ra, ia = compiled.common_is_search(*args)
            pb, rb, ib = _kernels_py.common_is_search(*args)
            assert np.array_equal(pa, pb) and np.array_equal(ra, rb) and np.array_equal(ia, ib)

    def test_singular_rig_empty_in_both(self):
        mic = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
        dists = [np.array([1.0]), np.array([1.1]), np.array([1.2]), np.array([1.3])]
        pa, ra, ia = compiled.common_is_search(mic, dists, 0.05, 1e-9, 0, 0, 1e-6)
        pb, rb, ib = _kernels_py.common_is_search(mic, dists, 0.05, 1e-9, 0, 0, 1e-6)
        assert pa.shape == pb.shape == (0, 2)

    def test_empty_echo_list(self):
        mic = self.rig()
        dists = [np.array([]), np.array([1.0]), np.array([1.0]), np.array([1.0])]
        pa, _, _ = compiled.common_is_search(mic, dists, 0.05, 1e-9, 0, 0, 1e-6)
        pb, _, _ = _kernels_py.common_is_search(mic, dists, 0.05, 1e-9, 0, 0, 1e-6)
        assert pa.shape == pb.shape == (0, 2)
