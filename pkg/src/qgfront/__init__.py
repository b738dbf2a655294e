"""qgfront: spectral simulation and verification toolkit for the
quasi-geostrophic shallow-water front equation."""

__version__ = "0.1.0"

from .grids import FrontState, UniformGrid
from .solver import RunConfig, run, step
