"""gausslab: multimode bosonic Gaussian gauge-covariant channels.

Exact (K, mu) matrix algebra, closed-form output spectra and entropies,
a truncated Fock-space oracle, and desk-scale verification suites for the
majorization, additivity, and Wehrl-type minimality of coherent inputs.
"""

__version__ = "0.1.0"

from .channels import (
    ChannelClass,
    Decomposition,
    DiagonalForm,
    GaugeCovariantChannel,
    StrictnessReport,
    amplifier_channel,
    attenuator_channel,
    build_channel,
    channel_from_dict,
    channel_to_dict,
    classical_noise_channel,
    classify,
    complementary_attenuator,
    concatenate,
    decompose,
    diagonalize,
    dump_channel,
    identity_channel,
    load_channel,
    random_channel,
    strictness_conditions,
)
from .states import (
    GaugeInvariantGaussianState,
    ThermalSpectrum,
    apply_channel,
    eigenvalue_list,
    gaussian_state,
    minimal_output_entropy,
    minimal_output_renyi,
    output_purity,
    purity_determinant,
    renyi_entropy,
    tensor_channel,
    thermal_spectrum,
    vacuum,
    von_neumann_entropy,
)

__all__ = [name for name in dir() if not name.startswith("_")]
