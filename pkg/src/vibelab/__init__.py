"""vibelab: desk-scale FMCW radar lab for speech-induced object vibrations.

Simulates radar cubes from declarative scenes and runs the full
who-speaks-what chain: target detection, speech-aware phase calibration,
frequency-response amplification, unsupervised speaker distinction, and
multi-object MVDR enhancement, with every stage testable against simulator
ground truth.
"""

from .amplify import (
    NoiseProfile,
    PowerSpectrogram,
    STFTMatrix,
    auto_power_spectrum,
    bandpass_filter,
    istft,
    noise_profile,
    spectral_subtract,
    stft,
)
from .cluster import (
    ClusterResult,
    EnvelopeVector,
    build_feature,
    calinski_harabasz,
    estimate_num_speakers,
    gmm_cluster,
    spectral_envelope,
)
from .enhance import (
    MaskedSTFT,
    SpatialCovariances,
    apply_beamformer,
    estimate_masks,
    median_combine_masks,
    mvdr_beamform,
    mvdr_weights,
    spatial_covariance,
)
from .metrics import EvaluationReport, psnr_db, snr_db, success_rate
from .pipeline import ExperimentConfig, PipelineResult, run_pipeline, run_sweep
from .radarcube import (
    RangeAngleMap,
    TargetCandidate,
    extract_target_iq,
    phase_kurtosis,
    range_angle_map,
    range_fft,
    select_targets,
)
from .synth import (
    GroundTruth,
    MembraneObject,
    RadarConfig,
    RadarCube,
    Scene,
    Speaker,
    SpeechWaveform,
    membrane_displacement,
    membrane_response,
    sound_pressure,
    synthesize_radar_cube,
)
from .vibext import (
    CircleFit,
    IQSeries,
    PhaseSignal,
    SpeechSegments,
    detect_speech_segments,
    fit_circle,
    speech_aware_calibrate,
)

__version__ = "0.1.0"
