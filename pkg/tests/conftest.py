import pytest

from condwalk.potential import build_table, default_table


@pytest.fixture(scope="session")
def table512():
    """The production table; built once per session (about 2.5 s)."""
    return default_table()


@pytest.fixture(scope="session")
def table64():
    """A small exact table for tests that stay near the origin."""
    return build_table(64)


@pytest.fixture(scope="session")
def kernels64(table64):
    """Compiled kernels over the small table, shared across test modules."""
    from condwalk.engine import build_kernels

    return build_kernels(table64)


@pytest.fixture(scope="session")
def kernels64_singles(table64):
    """Single-step-only twin of kernels64, for dual-route comparisons."""
    from condwalk.engine import build_kernels

    return build_kernels(table64, use_blocks=False)


@pytest.fixture(scope="session")
def mc_table64(table64, kernels64):
    """table64 pre-registered with the Monte Carlo kernel cache, so
    estimator tests reuse the session kernels instead of recompiling."""
    from condwalk import montecarlo as mc

    if not any(t is table64 for t, _ in mc._kernel_cache):
        mc._kernel_cache.append((table64, kernels64))
    return table64
