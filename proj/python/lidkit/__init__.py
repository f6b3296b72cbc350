# Copyright 2026  lidkit authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#  http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Spoken language identification toolkit.

Python bindings over the C++ core: SDC-MFCC front-end, GMM-UBM training,
i-vector extraction, back-end classifiers, multiclass logistic regression
fusion and LRE-style metrics.
"""

from lidkit._core import (  # noqa: F401
    BwStats,
    FeatureMatrix,
    FusionModel,
    GaussianBackend,
    GmmModel,
    LidConfigError,
    LidDataError,
    LidNumericError,
    MclrModel,
    Normalizer,
    PairNet,
    PldaModel,
    ScoreMatrix,
    SvmSet,
    TvModel,
    TvTrainResult,
    UtteranceRecord,
    accumulate_stats,
    accuracy,
    append_deltas,
    apply_normalizer,
    apply_normalizer_rows,
    build_sdc,
    cmvn,
    compute_cavg,
    compute_cllr,
    context_mask,
    energy_vad,
    eval_scores,
    evaluate,
    extract_ivector,
    extract_mfcc,
    feature_warp,
    fit_normalizer,
    fusion_apply,
    fusion_train,
    gb_score,
    gb_score_matrix,
    gb_train,
    generate_pairs,
    generate_synthetic_corpus,
    hash_split_keep,
    load_gmm,
    load_manifest,
    load_tv,
    map_supervector,
    mclr_apply,
    mclr_train,
    pairnet_centroids,
    pairnet_score,
    pairnet_train,
    plda_score,
    plda_train,
    read_score_tsv,
    read_wav,
    refine_full_gmm,
    run_experiment,
    save_gmm,
    save_tv,
    sdc_mfcc_features,
    svm_score,
    svm_train,
    to_llr_per_cluster,
    total_log_likelihood,
    train_diag_gmm,
    train_tv,
    write_score_tsv,
    write_wav,
)

__version__ = "0.1.0"
