"""reverbforge: deterministic speech-distortion augmentation and masked-spectrogram pretraining data."""

from .augment import (
    AugmentationPlan,
    MixtureParams,
    StageSpec,
    add_noise,
    apply_plan,
    clip,
    codec_simulate,
    make_mixture,
    sample_plan,
    scale_loudness,
)
from .config import PipelineConfig, StageProbs, load_config
from .dsp import (
    ComplexSpectrogram,
    MagnitudeSpectrogram,
    StftConfig,
    Waveform,
    istft,
    log1p_compress,
    log1p_expand,
    magnitude,
    stft,
)
from .enhance import TfMask, apply_tf_mask, embed_concat, oracle_irm
from .mae import (
    MaeModel,
    MaskedBatch,
    PatchGrid,
    backward_and_step,
    build_masked_batch,
    forward,
    init_model,
    load_checkpoint,
    patchify,
    save_checkpoint,
    train,
    unpatchify,
)
from .manifest import CorpusManifest, ManifestEntry, load_manifest, save_manifest
from .metrics import SsnrConfig, snr_global, ssnr
from .pipeline import derive_clip_seed, generate_batch
from .rir import (
    DecayParams,
    DrrReport,
    Rir,
    apply_rir,
    attenuate_direct_and_early,
    compute_drr,
    decay_late,
)
from .specmask import (
    SpectroMask,
    choose_and_apply,
    freq_mask,
    random_tf_mask,
    time_mask,
)
from .wavio import read_wav, write_wav

__version__ = "0.1.0"
