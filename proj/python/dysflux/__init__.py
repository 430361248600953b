# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The dysflux Authors
"""Multi-label stuttering detection heads on self-supervised speech features.

The numeric core is implemented in C++ and exposed through ``dysflux._core``;
this package re-exports it under friendlier names.
"""

from ._core import (
    LABEL_NAMES,
    ConfigError,
    DataError,
    DomainError,
    DysfluxError,
    FormatError,
    HeadParams,
    IncompatibleError,
    IoError,
    Manifest,
    MergeError,
    OracleError,
    ShapeError,
    StateError,
    ValidationError,
    __version__,
    aux_cross_entropy,
    binarize_labels,
    class_names,
    cooccurrence,
    default_config,
    evaluate,
    focal_loss,
    focal_loss_multi,
    gradient_suite,
    init_params,
    label_distribution,
    load_manifest,
    make_batches,
    merge,
    mtl_loss,
    prf1,
    read_features,
    speaker_leaks,
    train,
    weighted_layer_sum,
    write_features,
    write_synthetic_corpus,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
