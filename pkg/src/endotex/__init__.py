"""Texture, geometry, and color feature pipelines for finding abnormal
frames and regions in capsule-endoscopy-style imagery."""

from .imgcore import (
    Frame,
    StatSummary,
    convolve2d,
    crop_center,
    median_filter,
    read_frame,
    stats,
    tile,
    to_grayscale,
    to_hsv,
    untile,
)
from .glcm import GlcmConfig, compute_glcm, glcm_features
from .lbp import lbp1_features, lbp1_pair, lbp2_features, lbp_code, rotation_invariant
from .filters import (
    GaborParams,
    gabor_bank_method1,
    gabor_bank_method2,
    gabor_kernel,
    laws_features,
    laws_masks,
)
from .moments import hu_moments, moment_set
from .pipeline import (
    FeatureCatalog,
    Normalizer,
    PipelineConfig,
    apply_normalizer,
    block_catalog,
    block_features,
    fit_normalizer,
    frame_catalog,
    frame_features,
    segment_frame,
)
from .learn import (
    EvalReport,
    FisherRanking,
    MlpModel,
    evaluate,
    feature_sweep,
    fisher_scores,
    grouped_split,
    mlp_predict,
    mlp_train,
    select_top_k,
)
from .synth import SynthConfig, generate_corpus, make_frame

__version__ = "0.1.0"
