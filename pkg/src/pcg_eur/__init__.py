"""Periodic coarse-grained quadrature measurements and their entropic uncertainty relation."""
from .errors import (CoverageError, EmptyBinError, ParameterError, PcgError, ResolutionError, SamplingError,
                     SchemeError)
from .measurement import (conditional_shannon, conjugate_order, ensemble_probabilities, pcg_probabilities,
                          project_and_normalize, renyi_entropy, shannon_entropy)
from .phasespace import (Ensemble, Grid, WaveFunction, bin_localized_state, covering_grid, frft, gaussian,
                         hermite_gauss, matched_grid, overlap, random_superposition, rotate_to)
from .scheme import (BinSpec, IntervalSet, MubCheck, PcgScheme, bin_intervals, check_mub, fourier_coefficient,
                     make_scheme, mask_value, reconstruct_mask, symmetric_scheme)

__version__ = "0.1.0"
