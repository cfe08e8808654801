import numpy as np
import pytest

from hashpeak.series import ExogenousSeries, bundled


def constant(value, t_end=8000.0, name="const", unit=""):
    return ExogenousSeries(name, unit, [0.0, t_end], [value, value])


@pytest.fixture(scope="session")
def price():
    return bundled("market-price")


@pytest.fixture(scope="session")
def fees():
    return bundled("transaction-fees")


@pytest.fixture(scope="session")
def hashrate():
    return bundled("hash-rate")


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """Fail any test that would reach the real chart provider."""
    import httpx

    def refuse(self, request):
        raise httpx.ConnectError(f"network disabled in tests: {request.url}")

    monkeypatch.setattr(httpx.HTTPTransport, "handle_request", refuse)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
