"""Kernel paths against a naive reference implementation and each other."""

import os
import subprocess
import sys

import numpy as np
import pytest

from streamblur import _kernels


def reference_sweep(S, R, A, lam):
    """Textbook message update with explicit loops; the structural oracle."""
    n = S.shape[0]
    R_new = np.empty_like(R)
    for i in range(n):
        for k in range(n):
            best = -np.inf
            for kk in range(n):
                if kk != k:
                    best = max(best, A[i, kk] + S[i, kk])
            R_new[i, k] = S[i, k] - best
    R[:] = lam * R + (1.0 - lam) * R_new
    A_new = np.empty_like(A)
    for i in range(n):
        for k in range(n):
            if i == k:
                A_new[k, k] = sum(max(0.0, R[ii, k]) for ii in range(n) if ii != k)
            else:
                pos = sum(max(0.0, R[ii, k]) for ii in range(n)
                          if ii != i and ii != k)
                A_new[i, k] = min(0.0, R[k, k] + pos)
    A[:] = lam * A + (1.0 - lam) * A_new


class TestSweepAgainstReference:
    @pytest.mark.parametrize("n", [2, 3, 5, 9])
    def test_multiple_sweeps_match(self, rng, n):
        S = -rng.uniform(0.1, 3.0, size=(n, n))
        S = (S + S.T) / 2
        np.fill_diagonal(S, -1.0)
        R1, A1 = np.zeros((n, n)), np.zeros((n, n))
        R2, A2 = np.zeros((n, n)), np.zeros((n, n))
        for _ in range(12):
            _kernels.ap_sweep(S, R1, A1, 0.5)
            reference_sweep(S, R2, A2, 0.5)
            np.testing.assert_allclose(R1, R2, rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(A1, A2, rtol=1e-10, atol=1e-12)

    def test_no_damping_is_pure_update(self, rng):
        n = 4
        S = -rng.uniform(0.1, 2.0, size=(n, n))
        R, A = np.zeros((n, n)), np.zeros((n, n))
        _kernels.ap_sweep(S, R, A, 0.0)
        # with zero availabilities the first responsibilities are closed-form
        for i in range(n):
            for k in range(n):
                others = [S[i, kk] for kk in range(n) if kk != k]
                assert R[i, k] == pytest.approx(S[i, k] - max(others), rel=1e-12)

    def test_tie_breaks_choose_lowest_index(self):
        # identical similarities everywhere: argmax must favor column 0
        S = np.full((3, 3), -1.0)
        R1, A1 = np.zeros((3, 3)), np.zeros((3, 3))
        R2, A2 = np.zeros((3, 3)), np.zeros((3, 3))
        for _ in range(5):
            _kernels.ap_sweep(S, R1, A1, 0.5)
            reference_sweep(S, R2, A2, 0.5)
        np.testing.assert_allclose(R1, R2, rtol=1e-12)
        np.testing.assert_allclose(A1, A2, rtol=1e-12)


class TestPathAgreement:
    @pytest.mark.parametrize("n", [2, 7, 24])
    def test_numpy_and_numba_paths_agree(self, rng, n):
        if not _kernels.HAVE_NUMBA:
            pytest.skip("numba unavailable")
        S = -rng.uniform(0.05, 4.0, size=(n, n))
        np.fill_diagonal(S, -2.0)
        Ra, Aa = np.zeros((n, n)), np.zeros((n, n))
        Rb, Ab = np.zeros((n, n)), np.zeros((n, n))
        for _ in range(20):
            _kernels.ap_sweep_numba(S, Ra, Aa, 0.5)
            _kernels.ap_sweep_numpy(S, Rb, Ab, 0.5)
        np.testing.assert_allclose(Ra, Rb, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(Aa, Ab, rtol=1e-9, atol=1e-12)
        assert np.array_equal(np.argmax(Aa + Ra, axis=1),
                              np.argmax(Ab + Rb, axis=1))

    def test_blur_paths_agree(self, rng):
        if not _kernels.HAVE_NUMBA:
            pytest.skip("numba unavailable")
        region = rng.uniform(0, 255, size=(21, 17, 3))
        kernel = rng.uniform(0.1, 1.0, size=9)
        kernel /= kernel.sum()
        a = _kernels.separable_blur_numba(region, kernel)
        b = _kernels.separable_blur_numpy(region, kernel)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-10)

    def test_env_flag_selects_numpy_path(self):
        env = dict(os.environ, STREAMBLUR_NUMBA="0")
        out = subprocess.run(
            [sys.executable, "-c",
             "from streamblur._kernels import active_path; print(active_path())"],
            env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "numpy"


class TestBlurKernel:
    def test_constant_region_unchanged(self):
        region = np.full((9, 11, 3), 140.0)
        kernel = np.array([0.25, 0.5, 0.25])
        out = _kernels.separable_blur(region, kernel)
        np.testing.assert_allclose(out, region, rtol=1e-12)

    def test_mass_preserved_in_interior(self, rng):
        # away from edges the blur is a weighted average: mean preserved
        region = np.zeros((31, 31, 1))
        region[15, 15, 0] = 1000.0
        kernel = rng.uniform(0.2, 1.0, size=7)
        kernel /= kernel.sum()
        out = _kernels.separable_blur(region, kernel)
        assert out.sum() == pytest.approx(1000.0, rel=1e-9)

    def test_point_spread_is_outer_product(self):
        # blurring a centered impulse yields the separable 2-D kernel
        region = np.zeros((11, 11, 1))
        region[5, 5, 0] = 1.0
        kernel = np.array([0.1, 0.2, 0.4, 0.2, 0.1])
        out = _kernels.separable_blur(region, kernel)
        expect = np.outer(kernel, kernel)
        np.testing.assert_allclose(out[3:8, 3:8, 0], expect, atol=1e-12)
        assert out[0, 0, 0] == 0.0
