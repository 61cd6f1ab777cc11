"""Cross-checks of the two kernel implementations and the selection flag."""

import os
import subprocess
import sys

import numpy as np
import pytest

from prefec import _kernels_numpy as k_np
from prefec._backend import CHUNK_ROWS, ENV_VAR, active_backend, iter_chunks

k_nb = pytest.importorskip("prefec._kernels_numba")


@pytest.fixture(scope="module")
def problem():
    rng = np.random.default_rng(99)
    M, D, n, mbits = 64, 2, 700, 6
    points = rng.normal(size=(M, D)) * 3
    rx = rng.normal(size=(n, D)) * 3
    bits = rng.integers(0, 2, size=(M, mbits)).astype(np.uint8)
    probs = rng.uniform(0.5, 1.5, size=M)
    probs /= probs.sum()
    tx0 = rng.integers(0, M, size=n)
    return points, rx, bits, probs, tx0


class TestKernelEquivalence:
    def test_logq_gaussian(self, problem):
        points, rx, _, _, _ = problem
        a = k_np.logq_gaussian(rx, points, 0.37)
        b = k_nb.logq_gaussian(rx, points, 0.37)
        assert np.max(np.abs(a - b)) < 1e-12

    def test_logq_pn(self, problem):
        points, rx, _, _, _ = problem
        rng = np.random.default_rng(7)
        K = 16
        rot = rng.normal(size=(points.shape[0], K, 2)) * 3
        logw = rng.normal(size=K)
        a = k_np.logq_pn(rx, rot, logw, 0.37)
        b = k_nb.logq_pn(rx, rot, logw, 0.37)
        assert np.max(np.abs(a - b)) < 1e-12

    def test_hard_decisions(self, problem):
        points, rx, _, _, _ = problem
        a = k_np.hard_decisions(rx, points)
        b = k_nb.hard_decisions(rx, points)
        assert np.array_equal(a, b)

    def test_hard_decision_ties(self):
        points = np.array([[1.0, 0.0], [-1.0, 0.0]])
        rx = np.zeros((3, 2))
        assert k_np.hard_decisions(rx, points).tolist() == [0, 0, 0]
        assert k_nb.hard_decisions(rx, points).tolist() == [0, 0, 0]

    def test_lvalue_reduce(self, problem):
        points, rx, bits, probs, _ = problem
        w = k_np.logq_gaussian(rx, points, 0.5)
        logp = np.log(probs)
        a = k_np.lvalue_reduce(w, logp, bits, 50.0)
        b = k_nb.lvalue_reduce(w, logp, bits, 50.0)
        assert np.max(np.abs(a - b)) < 1e-12

    def test_air_reduce(self, problem):
        points, rx, bits, _, tx0 = problem
        w = k_np.logq_gaussian(rx, points, 0.5)
        s1, b1 = k_np.air_reduce(w, tx0, bits)
        s2, b2 = k_nb.air_reduce(w, tx0, bits)
        assert np.max(np.abs(s1 - s2)) < 1e-12
        assert np.max(np.abs(b1 - b2)) < 1e-12

    def test_extreme_variance_no_overflow(self, problem):
        points, rx, _, _, _ = problem
        for sigma2 in (1e-30, 1e30):
            a = k_np.logq_gaussian(rx, points, sigma2)
            b = k_nb.logq_gaussian(rx, points, sigma2)
            assert np.all(np.isfinite(a) == np.isfinite(b))


class TestEndToEndParity:
    """Same public computation under both backends, via subprocesses."""

    SCRIPT = (
        "import prefec, numpy as np\n"
        "c = prefec.build_square_qam(16)\n"
        "t = prefec.simulate(c, prefec.ChannelSpec('awgn', 0.4, 0.0, 5), 4000)\n"
        "m = prefec.gaussian_q(0.4)\n"
        "v = prefec.air_pair(t, m)\n"
        "lv = prefec.compute_lvalues(t, m)\n"
        "h = prefec.build_lvalue_histogram(lv, prefec.HistogramSpec())\n"
        "print(repr(v[0]), repr(v[1]), repr(prefec.asi(h)), prefec.active_backend())\n"
    )

    def run_with(self, backend):
        env = dict(os.environ, **{ENV_VAR: backend})
        out = subprocess.run(
            [sys.executable, "-c", self.SCRIPT],
            capture_output=True,
            text=True,
            env=env,
            check=True,
        )
        return out.stdout.strip().split()

    def test_backends_agree_and_flag_selects(self):
        a = self.run_with("numpy")
        b = self.run_with("numba")
        assert a[3] == "numpy" and b[3] == "numba"
        for x, y in zip(a[:3], b[:3]):
            assert abs(float(x) - float(y)) < 1e-9

    def test_bad_flag_rejected(self):
        env = dict(os.environ, **{ENV_VAR: "fortran"})
        out = subprocess.run(
            [sys.executable, "-c", "import prefec"],
            capture_output=True,
            text=True,
            env=env,
        )
        assert out.returncode != 0
        assert "PREFEC_BACKEND" in out.stderr


class TestChunking:
    def test_iter_chunks_covers_range(self):
        spans = list(iter_chunks(10, 3))
        assert spans == [(0, 3), (3, 6), (6, 9), (9, 10)]

    def test_iter_chunks_empty(self):
        assert list(iter_chunks(0, 4)) == []

    def test_chunk_constant_sane(self):
        assert CHUNK_ROWS >= 1024

    def test_active_backend_reports_known_name(self):
        assert active_backend() in ("numpy", "numba")

    def test_results_identical_across_chunk_boundary(self, qam16):
        # n above and below the chunk size must give identical metrics
        # (per-sample terms are summed once, not per chunk)
        from prefec import ChannelSpec, air_pair, gaussian_q, simulate

        t = simulate(qam16, ChannelSpec("awgn", 0.4, 0.0, seed=6), CHUNK_ROWS + 37)
        full = air_pair(t, gaussian_q(0.4))
        assert np.isfinite(full[0]) and np.isfinite(full[1])
