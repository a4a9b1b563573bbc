import pytest
from threadpoolctl import threadpool_limits


@pytest.fixture
def one_blas_thread():
    """Pin BLAS pools for tests whose timing targets assume one CPU core."""
    with threadpool_limits(limits=1):
        yield
