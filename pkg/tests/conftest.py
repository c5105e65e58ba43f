from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
REFERENCE = FIXTURES / "reference"


@pytest.fixture(scope="session")
def reference_sources() -> dict[str, str]:
    """The five worked-example scenarios, keyed by fixture name."""
    return {p.stem: p.read_text() for p in sorted(REFERENCE.glob("*.scenic"))}


@pytest.fixture(scope="session")
def right_turn_v1(reference_sources) -> str:
    return reference_sources["right_turn_adv_straight_v1"]


@pytest.fixture(scope="session")
def right_turn_v2(reference_sources) -> str:
    return reference_sources["right_turn_adv_straight_v2"]


@pytest.fixture(scope="session")
def ped_cross_v1(reference_sources) -> str:
    return reference_sources["left_turn_ped_cross_v1"]


@pytest.fixture(scope="session")
def ped_cross_v3(reference_sources) -> str:
    return reference_sources["left_turn_ped_cross_v3"]


MAPS = Path(__file__).parents[1] / "src" / "scenloop" / "data" / "maps"


@pytest.fixture(scope="session")
def cross4():
    from scenloop.roads import load_network
    return load_network(MAPS / "town_cross4.map")


@pytest.fixture(scope="session")
def tee3_net():
    from scenloop.roads import load_network
    return load_network(MAPS / "town_tee3.map")


@pytest.fixture(scope="session")
def straight_net():
    from scenloop.roads import load_network
    return load_network(MAPS / "town_straight.map")
