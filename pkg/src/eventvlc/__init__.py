"""Event-camera optical wireless link simulator.

The functional core lives in the submodules (``sensor``, ``channel``,
``framing``, ``detect``, ``codec``, ``demod``, ``metrics``, ``harness``);
``estimators`` wraps it in scikit-learn style objects.
"""
__version__ = "0.1.0"

from .codec import (
    AdaptiveMode,
    PulseString,
    SchemeConfig,
    airtime,
    encode_npulse2,
    encode_npulse4,
    encode_npulse4_adaptive,
    encode_ook,
    theoretical_rate,
)
from .config import ExperimentConfig, load_config
from .demod import (
    correlate_id,
    decode_payload,
    demodulate_bits_from_indices,
    pearson,
    pulse_run_indices,
    sliding_demodulator,
)
from .detect import binarize, iou, largest_contour_bbox
from .framing import EventFrame, hot_pixel, periodic_frames
from .geometry import BoundingBox, SensorGeometry
from .harness import run_experiment, sweep
from .metrics import LinkReport, evaluate_link, hamming
from .sensor import (
    IntensitySignal,
    SensorBiases,
    apply_band_filter,
    average_event_rate,
    simulate_pixel,
    simulate_sensor,
)
from .channel import (
    AmbientLight,
    SceneSpec,
    SurfaceProfile,
    TransmitterWaveform,
    compose_scene,
    reflect,
    waveform_to_signal,
)
