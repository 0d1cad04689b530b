"""Universal blind decoding for discrete-time Gaussian channels with intersymbol interference."""

__version__ = "0.1.0"

from .channel import Codebook, Transmission, convolve, generate_codebook, transmit
from .decoder import DecodeOutcome, Reason, decode_ml_csi, decode_mmi
from .errors import DegenerateInputError, DomainError, ResourceError, UsageError
from .exponents import (ExponentSurface, MinimizerReport, compound_capacity, divergence,
                        exponent_surface, gallager_e0, gallager_exponent, new_exponent)
from .grid import (IsiType, ParamGrid, default_grid, estimate_isi_type, is_conditionally_typical,
                   residual_correlations)
from .spectral import (ChannelParams, autocorrelation, finite_mutual_information,
                       mutual_information, output_entropy_rate, spectral_density)
from .toeplitz import ConvOperator, conv_matrix, parallel_decompose, singular_values, szego_check
