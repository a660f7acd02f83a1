"""Skeleton-recombination data synthesis for handwritten digits.

Synthesizes new training characters by crossing over skeleton fragments of
same-class pairs, alongside a tangent-distortion baseline and a HOG + linear
SVM harness for measuring what the synthesized data buys.
"""

from .config import ConfigError, ExperimentConfig, SynthConfig, config_from_dict, load_config
from .crossover import (
    CrossingPointSet,
    Fragment,
    Rejection,
    StructureGroup,
    SynthSample,
    SynthStats,
    find_crossing_points,
    group_structures,
    offset_grid,
    recombine,
    split_at_crossings,
    sweep_offsets,
    synthesize_dataset,
)
from .dataset import (
    IdxFormatError,
    LabeledSet,
    load_labeled_set,
    read_idx_images,
    read_idx_labels,
    select_seed,
    write_contact_sheet,
    write_idx,
)
from .experiment import REFERENCE_ERRORS, run_experiment
from .hog import HogParams, cell_histograms, hog, hog_batch
from .raster import binarize, connected_components, dilate, overlay, thin
from .svm import (
    EvalReport,
    LinearModel,
    SvmParams,
    evaluate,
    hinge_objective,
    hinge_subgradient,
    load_model,
    predict,
    predict_batch,
    save_model,
    train_one_vs_all,
)
from .tangent import (
    TANGENT_KINDS,
    TangentConfig,
    apply_tangents,
    sample_tangent_dataset,
    tangent_fields,
)

__version__ = "0.1.0"
