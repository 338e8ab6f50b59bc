"""Multi-RIS MIMO over-the-air imitation of a complex FC layer."""

from .channel import ChannelSet, SystemConfig, effective_channel, \
    gen_channel_set, gen_rician, numerical_rank, random_phase_vector, \
    steering_vector
from .optimizer import AirFcParams, OptimizeReport, OptimizerOptions, \
    objective, run_alternating, update_combiner, update_phases, update_precoder
from .airsim import AirLayer, expected_noise_power, forward, imitation_error
from .mnist import Dataset, DigitalHead, evaluate_airfc, evaluate_digital, \
    featurize, load_idx, train_digital_head

__all__ = [
    "AirFcParams", "AirLayer", "ChannelSet", "Dataset", "DigitalHead",
    "OptimizeReport", "OptimizerOptions", "SystemConfig",
    "effective_channel", "evaluate_airfc", "evaluate_digital",
    "expected_noise_power", "featurize", "forward", "gen_channel_set",
    "gen_rician", "imitation_error", "load_idx", "numerical_rank",
    "objective", "random_phase_vector", "run_alternating", "steering_vector",
    "train_digital_head", "update_combiner", "update_phases",
    "update_precoder",
]

__version__ = "0.1.0"
