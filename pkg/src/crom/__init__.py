"""Rateless lossy compression by describing extreme coordinates of randomly
rotated residuals."""
from .codec import (CromEncoding, CromParams, DistortionTrace, Schedule, alpha_i, crom_encode,
                    decode_prefix, distortion_trace)
from .errors import ConfigurationError, FormatError
from .transform import Scheme, TransformScheme

__all__ = ["CromEncoding", "CromParams", "DistortionTrace", "Schedule", "alpha_i", "crom_encode",
           "decode_prefix", "distortion_trace", "ConfigurationError", "FormatError", "Scheme",
           "TransformScheme"]
__version__ = "0.1.0"
