import pytest

from optomech.src.data_loader import load_preset
from optomech.src.model import DerivedParams, SystemParams, derive


@pytest.fixture(autouse=True)
def _no_tracing(monkeypatch):
    monkeypatch.delenv("OPIK_ENABLED", raising=False)


@pytest.fixture
def cohen():
    params = load_preset("cohen")
    return params, derive(params)


@pytest.fixture
def lecocq():
    params = load_preset("lecocq")
    return params, derive(params)


@pytest.fixture
def groblacher():
    params = load_preset("groblacher")
    return params, derive(params)


@pytest.fixture
def transfer_demo():
    params = load_preset("transfer-demo")
    return params, derive(params)


@pytest.fixture
def lecocq_photons():
    return load_preset("lecocq-photons")


@pytest.fixture
def lossless():
    """Equal decay rates: Gamma = 0, no thermal injection."""
    return DerivedParams.from_rates(0.05, 0.01, 0.01)


@pytest.fixture
def single_phonon():
    return SystemParams(bare_coupling=1e-4, enhanced_coupling=0.05, cavity_decay=0.01, mech_decay=0.01,
                        init_photons=0.0, init_phonons=1.0)
