import pytest

from mcnn.templates import LayerTemplate, NetworkTemplate

# the four two-layer fixtures; layer 1 is shared
LAYER1 = dict(a=2.9, a_r=1.7, z=0.1)

FIXTURE_PARAMS = {
    "fse_sft": dict(a=-0.3, a_r=-1.2, b=0.7, b_r=2.3, z=0.9),
    "fse_strict_sofic": dict(a=-0.1, a_r=-1.1, b=2.1, b_r=-1.4, z=0.9),
    "ito_full_shift": dict(a=1.3, a_r=-1.2, b=0.7, b_r=2.3, z=0.8),
    "ito_sofic": dict(a=0.7, a_r=-1.1, b=2.1, b_r=-1.4, z=1.7),
}


def network(name):
    p = FIXTURE_PARAMS[name]
    return NetworkTemplate((
        LayerTemplate.smcnn(**LAYER1),
        LayerTemplate.smcnn(p["a"], p["a_r"], p["z"], b=p["b"], b_r=p["b_r"]),
    ))


@pytest.fixture
def fse_sft_net():
    return network("fse_sft")


@pytest.fixture
def fse_strict_sofic_net():
    return network("fse_strict_sofic")


@pytest.fixture
def ito_full_shift_net():
    return network("ito_full_shift")


@pytest.fixture
def ito_sofic_net():
    return network("ito_sofic")


@pytest.fixture(params=sorted(FIXTURE_PARAMS))
def any_net(request):
    return network(request.param)
