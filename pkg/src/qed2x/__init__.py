"""Two-excitation dynamics of emitters coupled to structured lossy 1D photonic
environments, via emitter-centered collective modes."""

from .model import (ConfigError, EmitterSpec, FrequencyGrid, SimulationConfig,
                    build_grid, config_from_dict, load_config, validate_config)
from .greens import EnvironmentSpec, GreensTable, SlabSpec, greens_1d
from .ecm import CouplingTensor, EcmBasis, build_overlap, couplings, diagonalize_overlap
from .hierarchy import HierarchyState, evolve, init_state, rhs, rk4_step

__version__ = "0.1.0"
