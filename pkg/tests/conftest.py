import numpy as np
import pytest

from twistorlab.hypercomplex import build_flat_torus, build_hopf_chart
from twistorlab.qmodels import Polynomial, build_affine, build_p1
from twistorlab.twistor import TwistorProduct


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def torus_p1():
    return TwistorProduct(build_flat_torus(1), build_p1())


@pytest.fixture(scope="session")
def torus2_p1():
    return TwistorProduct(build_flat_torus(2), build_p1())


@pytest.fixture(scope="session")
def torus_zbar():
    zbar = Polynomial.monomial(1, [0], [1])
    return TwistorProduct(build_flat_torus(1), build_affine(1, zbar))


@pytest.fixture(scope="session")
def torus_z2():
    return TwistorProduct(build_flat_torus(1), build_affine(1, Polynomial.monomial(1, [2])))


@pytest.fixture(scope="session")
def hopf():
    return build_hopf_chart(1)


def random_covector(rng, dim):
    from twistorlab.exterior import covector

    return covector(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def random_form(rng, dim, degree):
    from math import comb

    from twistorlab.exterior import AlternatingForm

    n = comb(dim, degree)
    return AlternatingForm(dim, degree, rng.standard_normal(n) + 1j * rng.standard_normal(n))


def random_hermitian_pd(rng, n, shift=0.5):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return A @ A.conj().T + shift * np.eye(n)


ACCEPTANCE_LINES: list[str] = []


def acceptance_line(number: int, passed: bool, detail: str) -> str:
    line = f"ACCEPTANCE {number:2d} {'PASS' if passed else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
