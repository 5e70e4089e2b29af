from pathlib import Path

import pytest

from locpir.dataset import load_dataset
from locpir.gate_engine import ClearEngine, TlweOracleEngine
from locpir.models import FixedPointFormat, TlweParams
from locpir.protocol import LocPirServer
from locpir.torus_core import NoiseSampler, keygen

DATA = Path(__file__).resolve().parent.parent / "data" / "kdca_2021-10-26.csv"

KDCA_SERVICES = {
    "Seoul": 427,
    "Busan": 33,
    "Daegu": 61,
    "Incheon": 74,
    "Gwangju": 5,
    "Daejeon": 13,
    "Ulsan": 9,
    "Sejong": 6,
    "Jeju": 6,
}

# Between Jeju and the mainland boxes
OUTSIDE_POINT = (34.0, 128.0)


def midpoint(record):
    return (record.lat1 + record.lat2) / 2, (record.lon1 + record.lon2) / 2


@pytest.fixture(scope="session")
def params80():
    return TlweParams.for_level(80)


@pytest.fixture(scope="session")
def params128():
    return TlweParams.for_level(128)


@pytest.fixture(scope="session")
def sk80(params80):
    return keygen(params80, seed=1234)


@pytest.fixture(scope="session")
def sk128(params128):
    return keygen(params128, seed=5678)


@pytest.fixture
def sampler80(params80):
    return NoiseSampler.for_params(params80, seed=99)


@pytest.fixture
def clear_engine():
    return ClearEngine()


@pytest.fixture
def oracle_engine(sk80):
    return TlweOracleEngine(sk80, NoiseSampler.for_params(sk80.params, seed=7))


@pytest.fixture(scope="session")
def kdca():
    return load_dataset(DATA, FixedPointFormat())


@pytest.fixture
def make_server(kdca):
    """Build a server over the KDCA regions for a key's parameter set and an engine tag."""

    def _make(sk, engine_tag="clear", workers=2):
        records, dataset = kdca
        if engine_tag == "clear":
            engine = ClearEngine()
        else:
            engine = TlweOracleEngine(sk, NoiseSampler.for_params(sk.params, seed=11))
        return LocPirServer(records, dataset, sk.params, engine, workers=workers)

    return _make
