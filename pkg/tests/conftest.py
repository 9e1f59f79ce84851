import pytest

from fibzeta import make_context

FIELD_DS = (2, 5, 13, 29)


@pytest.fixture(scope="session")
def ctx5():
    return make_context(5, 128)


@pytest.fixture(scope="session")
def ctx2():
    return make_context(2, 128)


@pytest.fixture(scope="session")
def ctx13():
    return make_context(13, 128)


@pytest.fixture(scope="session")
def contexts(ctx2, ctx5, ctx13):
    return (ctx2, ctx5, ctx13, make_context(29, 128))
