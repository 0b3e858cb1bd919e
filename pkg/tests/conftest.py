import pytest

from pqpan import fit_radio_currents, load_reference_table


@pytest.fixture(scope="session")
def reference_rows():
    return load_reference_table()


@pytest.fixture(scope="session")
def fit_result(reference_rows):
    return fit_radio_currents(reference_rows)
