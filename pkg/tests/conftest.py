import pytest

from polypack.group import Presentation

CAT = "2,1;1,1"
HEIS = "1,1;0,1"
IDENT = "1,0;0,1"


@pytest.fixture(scope="session")
def cat():
    return Presentation.from_literal(CAT)


@pytest.fixture(scope="session")
def heis():
    return Presentation.from_literal(HEIS)


@pytest.fixture(scope="session")
def ident():
    return Presentation.from_literal(IDENT)
