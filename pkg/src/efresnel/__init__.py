"""Entangled Fresnel transforms, the entangled Wigner function and its strip transforms."""

from .collins import (HankelConfig, RadialModes, angular_decompose, angular_reconstruct,
                      bessel_j, collins_radial, verify_hankel_consistency)
from .core import (ABCDMatrix, AngularMode, ComplexField, Gaussian, GridSpec, KernelVariant,
                   RealField, Representation, SamplingWarning, SqueezeParams, Superposition,
                   WarningCode, abcd_from_params, compose, evaluate_beam, field_norm_sq,
                   params_from_abcd, sample_beam, sampling_diagnostics, truncation_diagnostics)
from .entangled import (from_xi_rep, kernel_frequency, kernel_spatial, kernel_swapped,
                        overlap_eta_xi, propagate, to_xi_rep)
from .errors import (DegenerateStrip, DomainError, EFresnelError, ExcessiveExtrapolation,
                     FormatError, ImaginaryResidue, InvalidMatrix, InvalidParams,
                     NumericPrecondition, SingularB, SingularC, SizeCapExceeded)
from .fresnel1d import RealLine1D, kernel_1d, propagate_1d, wigner_1d
from .io import read_field, read_table, write_field, write_table
from .radon import (IdentityReport, StripMode, StripParams, VerifyConfig, radon_direct_frequency,
                    radon_direct_spatial, radon_from_table, verify_identity_frequency,
                    verify_identity_spatial)
from .wigner import (WignerTable, marginal_gamma, marginal_sigma, sample_wigner, wigner,
                     wigner_from_xi)

__all__ = [
    "HankelConfig", "RadialModes", "angular_decompose", "angular_reconstruct", "bessel_j",
    "collins_radial", "verify_hankel_consistency", "ABCDMatrix", "AngularMode", "ComplexField",
    "Gaussian", "GridSpec", "KernelVariant", "RealField", "Representation", "SamplingWarning",
    "SqueezeParams", "Superposition", "WarningCode", "abcd_from_params", "compose",
    "evaluate_beam", "field_norm_sq", "params_from_abcd", "sample_beam", "sampling_diagnostics",
    "truncation_diagnostics", "from_xi_rep", "kernel_frequency", "kernel_spatial",
    "kernel_swapped", "overlap_eta_xi", "propagate", "to_xi_rep", "DegenerateStrip", "DomainError",
    "EFresnelError", "ExcessiveExtrapolation", "FormatError", "ImaginaryResidue", "InvalidMatrix",
    "InvalidParams", "NumericPrecondition", "SingularB", "SingularC", "SizeCapExceeded",
    "RealLine1D", "kernel_1d", "propagate_1d", "wigner_1d", "read_field", "read_table",
    "write_field", "write_table", "IdentityReport", "StripMode", "StripParams", "VerifyConfig",
    "radon_direct_frequency", "radon_direct_spatial", "radon_from_table",
    "verify_identity_frequency", "verify_identity_spatial", "WignerTable", "marginal_gamma",
    "marginal_sigma", "sample_wigner", "wigner", "wigner_from_xi",
]

__version__ = "0.1.0"
