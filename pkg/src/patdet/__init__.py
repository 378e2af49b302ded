"""patdet: detect adversarially perturbed frames in videos.

The pipeline turns each frame into a transition frame (neighbor average
minus the frame), trains a small CNN to tell clean transition frames from
noise-corrupted ones, and aggregates per-frame scores into video verdicts
and detection metrics.
"""

from .core import (
    DetectionReport,
    Frame,
    FrameLabel,
    LabeledFrameSet,
    VideoSequence,
    frame_new,
    report_from_scores,
    video_from_array,
    video_from_frames,
)
from .data import (
    BackgroundMode,
    SynthConfig,
    load_image_dir,
    load_model,
    read_video,
    save_model,
    synth_videos,
    synth_videos_with_masks,
    write_video,
)
from .detector import (
    DEFAULT_THRESHOLD,
    DetectorArchitecture,
    DetectorModel,
    InputMode,
    TrainConfig,
    TrainHistory,
    default_architecture,
    detect_video,
    forward,
    loss_and_grads,
    model_init,
    predict_frame,
    predict_scores,
    sgd_step,
    train,
    video_scores,
)
from .errors import ConfigError, DataFormatError, PatdetError
from .metrics import (
    ConfusionMatrix,
    RocCurve,
    auc,
    auc_from_scores,
    confusion,
    fdr,
    roc_curve,
    vdr,
    video_verdict,
)
from .perturb import (
    DEFAULT_SIGMA_MODE,
    FixedSigma,
    RngSeed,
    SigmaMode,
    VaryingSigma,
    gaussian_mask,
    parse_sigma_mode,
    pseudo_adversarial,
    sample_sigma,
    surrogate_dense_attack,
    surrogate_sparse_attack,
)
from .transition import TransitionSequence, transition_frame, transition_sequence, transition_stack

__version__ = "0.1.0"
