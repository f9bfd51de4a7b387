"""pinn2snn: train physics-informed regression networks, convert them to
spiking networks via quantized activations with layer-wise calibration, and
analyze the conversion error."""

from .analysis import (
    BoundReport,
    HessianStack,
    SweepResult,
    bound_check,
    conversion_metrics,
    fft_smooth,
    hessian_recursion,
    sweep_T,
)
from .calibration import (
    CalibrationConfig,
    CalibrationReport,
    ErrorDecomposition,
    calibrate_advanced,
    calibrate_light,
    calibrate_separable,
    decompose_error,
)
from .jets import Jet2
from .losses import physics_loss
from .modelio import load_model, load_snn, save_model, save_snn
from .network import (
    LayerParams,
    Model,
    NetworkSpec,
    init_params,
    jet2_forward,
    mlp_forward,
    spinn_forward,
    spinn_point_forward,
)
from .optim import AdamState, OptimizerConfig, adam_step
from .problems import PROBLEM_IDS, get_problem
from .sampling import CollocationCounts, CollocationSet, sample_collocation
from .snn import (
    SimulationTrace,
    SpikingLayer,
    SpikingNetwork,
    SpikingSeparable,
    ThresholdPolicy,
    clip_floor,
    convert_to_snn,
    fit_thresholds,
    if_average,
    propagate_rate,
    simulate_event,
    spiking_rate,
)
from .tensor import GradError, GradTape, Tensor
from .training import TrainLog, TrainingDivergedError, train

__version__ = "0.1.0"
