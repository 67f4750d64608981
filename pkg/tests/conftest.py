import pytest

from sccbethe import ModelParams, build_spectral_basis, solve_rapidities


@pytest.fixture(scope="session")
def basis_100():
    return build_spectral_basis(solve_rapidities(ModelParams(100, 1.0, 4.0 / 3.0)))


@pytest.fixture(scope="session")
def basis_100_prime():
    return build_spectral_basis(solve_rapidities(ModelParams(100, 1.0, 1000.0)))


@pytest.fixture(scope="session")
def basis_20():
    return build_spectral_basis(solve_rapidities(ModelParams(20, 1.0, 4.0 / 3.0)))


@pytest.fixture(scope="session")
def basis_20_prime():
    return build_spectral_basis(solve_rapidities(ModelParams(20, 1.0, 1000.0)))


_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(label, passed, detail)``."""
    def record(label, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  criterion {label}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return bool(passed)
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
