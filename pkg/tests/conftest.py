import numpy as np
import pytest

# 5-asset correlation fixture used across the graph-construction tests
# (4-decimal entries, unit diagonal, symmetric).
TOY_C = np.array(
    [
        [1.0000, -0.1378, 0.2025, 0.4683, -0.2583],
        [-0.1378, 1.0000, 0.4373, 0.1050, -0.1738],
        [0.2025, 0.4373, 1.0000, 0.4245, 0.4108],
        [0.4683, 0.1050, 0.4245, 1.0000, -0.0465],
        [-0.2583, -0.1738, 0.4108, -0.0465, 1.0000],
    ]
)


@pytest.fixture
def toy_c():
    return TOY_C.copy()


def random_panel_values(rng, n_days, n_assets, scale=0.01):
    return scale * rng.standard_normal((n_days, n_assets))
