import pytest

from src.services.graph_service import complete_blowup


@pytest.fixture
def blowup_c3():
    """Complete blow-up of C_3 with parts of size 6."""
    return complete_blowup(3, 6)


@pytest.fixture
def blowup_c4():
    """Complete blow-up of C_4 with parts of size 5."""
    return complete_blowup(4, 5)
