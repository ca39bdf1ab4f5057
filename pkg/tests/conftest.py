import pytest

from modsym.field_arith import load_field, shipped_fields

FIELD_NAMES = ["Q", "Qi", "Qsqrt2", "Qsqrt5", "Qsqrtm5"]


@pytest.fixture(scope="session")
def fields():
    return {name: load_field(name) for name in FIELD_NAMES}


@pytest.fixture(scope="session")
def QQ(fields):
    return fields["Q"]


@pytest.fixture(scope="session")
def Qi(fields):
    return fields["Qi"]


@pytest.fixture(scope="session")
def Qsqrt2(fields):
    return fields["Qsqrt2"]


@pytest.fixture(scope="session")
def Qsqrtm5(fields):
    return fields["Qsqrtm5"]


def test_all_fields_shipped():
    assert set(FIELD_NAMES) <= set(shipped_fields())
