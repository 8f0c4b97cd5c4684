"""The compiled and fallback kernels must agree on identical inputs."""

import numpy as np
import pytest

from cpareto import _pykern, kernels


@pytest.fixture(scope="module")
def compiled():
    try:
        from cpareto import _ckern
    except ImportError:
        pytest.skip("compiled extension not built")
    return _ckern


class TestBackendParity:
    @pytest.mark.parametrize("seed", range(8))
    def test_nondominated_mask(self, compiled, seed):
        rng = np.random.default_rng(seed)
        F = rng.random((120, rng.integers(2, 5)))
        F[rng.integers(0, 120)] = F[0]  # inject a duplicate row
        assert (compiled.nondominated_mask(F) == _pykern.nondominated_mask(F)).all()

    @pytest.mark.parametrize("seed", range(5))
    def test_nondominated_ranks(self, compiled, seed):
        rng = np.random.default_rng(100 + seed)
        F = rng.random((150, 3))
        assert (compiled.nondominated_ranks(F) == _pykern.nondominated_ranks(F)).all()

    @pytest.mark.parametrize("seed", range(30))
    def test_simplex_agreement(self, compiled, seed, monkeypatch):
        from cpareto.lpsolve import LinearProgram, solve_lp

        rng = np.random.default_rng(300 + seed)
        n = int(rng.integers(2, 8))
        m = int(rng.integers(1, 8))
        lp = LinearProgram(
            c=rng.normal(size=n),
            B=rng.normal(size=(m, n)),
            b=rng.normal(size=m) * 2 + 1,
            lo=-rng.random(n),
            hi=rng.random(n) + 0.5,
        )
        monkeypatch.setattr(kernels, "simplex_loop", compiled.simplex_loop)
        first = solve_lp(lp)
        monkeypatch.setattr(kernels, "simplex_loop", _pykern.simplex_loop)
        second = solve_lp(lp)
        assert first.status == second.status
        if first.value is not None:
            assert first.value == pytest.approx(second.value, rel=1e-9, abs=1e-9)
            assert first.q == pytest.approx(second.q, rel=1e-9, abs=1e-9)

    def test_active_backend_reported(self):
        assert kernels.BACKEND in ("compiled", "fallback")
