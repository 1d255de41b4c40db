import pytest

from nftsquat.records import SeedCollection
from nftsquat.wordlists import load_word_lists


def addr(n: int) -> str:
    """Deterministic test address n."""
    return "0x" + format(n, "040x")


def txh(n: int) -> str:
    """Deterministic test transaction hash n."""
    return "0x" + format(n, "064x")


@pytest.fixture(scope="session")
def lists():
    return load_word_lists()


@pytest.fixture(scope="session")
def seeds():
    return [
        SeedCollection(rank=1, name="Azuki", contract_address=addr(0xA1), deploy_block=1000, market_cap_wei=10**22),
        SeedCollection(rank=2, name="Doodles", contract_address=addr(0xA2), deploy_block=1100, market_cap_wei=9 * 10**21),
        SeedCollection(rank=3, name="Moonbirds", contract_address=addr(0xA3), deploy_block=1200, market_cap_wei=8 * 10**21),
        SeedCollection(rank=4, name="Milady Maker", contract_address=addr(0xA4), deploy_block=1300, market_cap_wei=7 * 10**21),
        SeedCollection(rank=5, name="Lives of Asuna", contract_address=addr(0xA5), deploy_block=1400, market_cap_wei=6 * 10**21),
    ]
