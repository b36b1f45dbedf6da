"""Evaluation and inference harness for x4 single-channel image super-resolution.

Non-neural pipeline pieces of an SR benchmark: bicubic degradation, the
PSNR + 20*SSIM scoring protocol, dihedral test-time augmentation, weighted
ensemble fusion with grid search, and leaderboard ranking. Neural models
plug in as external command-line engines exchanging PNG directories.
"""

from .dataset import (
    DEFAULT_PLAN,
    Manifest,
    ManifestEntry,
    build_manifest,
    generate_synthetic_dataset,
    load_manifest,
    parse_plan,
    save_manifest,
)
from .dihedral import (
    ALL_TRANSFORMS,
    IDENTITY,
    D4Transform,
    d4_apply,
    d4_apply_float,
    d4_compose,
    d4_inverse,
)
from .ensemble import (
    EnsembleWeights,
    WeightRow,
    WeightSearchResult,
    fuse,
    grid_search_alpha,
    grid_search_simplex,
    select_best,
)
from .errors import EngineError, HarnessError, UnsupportedFormatError, ValidationError
from .harness import (
    LeaderboardEntry,
    leaderboard_csv,
    rank_leaderboard,
    report_csv,
    report_json,
    score_submission,
)
from .image import (
    FloatImage,
    Image,
    load_image,
    luma_float,
    png_header,
    quantize,
    save_image,
    to_float,
    to_luma,
)
from .metrics import (
    PSNR_CAP_DB,
    AggregateScore,
    MetricOptions,
    PairScore,
    aggregate,
    evaluate_pair,
    psnr,
    score,
    ssim,
)
from .models import (
    ModelSpec,
    builtin_model,
    crop_to_scale,
    external_model,
    infer,
    infer_batch,
    pad_reflect_to_multiple,
    parse_model_spec,
    run_external_batch,
)
from .resample import (
    BICUBIC,
    BILINEAR,
    FILTERS,
    LANCZOS3,
    NEAREST,
    Filter,
    bicubic_weight,
    degrade_x4,
    resize,
    resize_float,
    upscale_x4,
)
from .tta import tta_infer

__version__ = "0.1.0"
