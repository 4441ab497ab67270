"""Joint power allocation and interference suppression for the cooperative
DS-CDMA downlink with amplify-and-forward relays.

Layers
------
``model``
    Chip-level signal synthesis: codes, channels, relays, QPSK.
``mmse``
    Closed-form constrained MMSE filters and power allocation.
``sg`` / ``rls``
    Adaptive joint receivers (sklearn-style estimators).
``channel_estimation``
    SG and RLS block-channel estimators.
``baselines``
    Non-cooperative and equal-power cooperative references.
``harness``
    Seeded Monte Carlo BER engine and CSV interfaces.
``cli``
    ``jpais`` command-line entry point with experiment templates.
"""

from .baselines import direct_only_allocation, equal_power_allocation
from .channel_estimation import (RlsChannelEstimator, SgChannelEstimator,
                                 recover_channel_matrix)
from .harness import (BERPoint, ConfigError, PacketResult, SimulationConfig,
                      count_errors, packet_seed, run_ber_curve, run_convergence,
                      run_packet, wilson_interval)
from .mmse import (CovariancePair, JpaisSolution, PowerCovariancePair,
                   alternating_jpais_solve, build_covariance, mmse_power_allocation,
                   mmse_receiver)
from .model import (LinkChannels, assemble_block_channel_matrix,
                    build_convolution_matrix, generate_link_channels,
                    generate_spreading_codes, qpsk_demodulate, qpsk_modulate,
                    relay_amplify_forward, simulate_phase_one,
                    stack_destination_windows)
from .rls import RlsJpaisReceiver
from .sg import SgJpaisReceiver

__all__ = [
    "BERPoint", "ConfigError", "CovariancePair", "JpaisSolution", "LinkChannels",
    "PacketResult", "PowerCovariancePair", "RlsChannelEstimator", "RlsJpaisReceiver",
    "SgChannelEstimator", "SgJpaisReceiver", "SimulationConfig",
    "alternating_jpais_solve", "assemble_block_channel_matrix",
    "build_convolution_matrix", "build_covariance", "count_errors",
    "direct_only_allocation", "equal_power_allocation", "generate_link_channels",
    "generate_spreading_codes", "mmse_power_allocation", "mmse_receiver",
    "packet_seed", "qpsk_demodulate", "qpsk_modulate", "recover_channel_matrix",
    "relay_amplify_forward", "run_ber_curve", "run_convergence", "run_packet",
    "simulate_phase_one", "stack_destination_windows", "wilson_interval",
]

__version__ = "0.1.0"
