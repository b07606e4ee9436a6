import pytest

from srcond.minorant import MinorantModel

_cache: dict = {}


@pytest.fixture(scope="session")
def model_factory():
    """Shared minorant models; construction is expensive, reuse everywhere."""

    def get(dim: int, tau: float) -> MinorantModel:
        key = (dim, round(float(tau), 12))
        if key not in _cache:
            _cache[key] = MinorantModel.build(dim, tau)
        return _cache[key]

    return get
