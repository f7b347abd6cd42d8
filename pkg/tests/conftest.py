import pytest

from egosocial import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # Compile jit kernels once so no individual test pays the compile cost.
    _kernels.warmup()
