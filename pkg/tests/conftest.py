import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from impulsehum import Grid, TimeScheme, build_discretization, subdomain_mask


@pytest.fixture
def setup25():
    """Reference setup: unit interval, 25 cells, horizon 0.02, impulse at 0.01."""
    grid = Grid(0.0, 1.0, 25)
    d = build_discretization(grid)
    mask = subdomain_mask(grid, 0.2, 0.8)
    scheme = TimeScheme(0.02, 200, "crank_nicolson")
    x = grid.nodes
    psi0 = np.sqrt(2.0) * np.sin(np.pi * x)
    psi0[0] = psi0[-1] = 0.0
    return grid, d, mask, scheme, psi0


@pytest.fixture
def setup4():
    """Tiny grid where dense oracles are exact and cheap."""
    grid = Grid(0.0, 1.0, 4)
    d = build_discretization(grid)
    mask = subdomain_mask(grid, 0.2, 0.8)
    scheme = TimeScheme(0.02, 200, "crank_nicolson")
    return grid, d, mask, scheme
