"""Corpus quality metrics, effective training tokens, and the revised
accuracy scaling law.

The package measures two corpus quality signals (diversity as inverse
compression ratio, syntheticity as inverse teacher perplexity), converts
raw token counts into quality-adjusted effective tokens, fits the
seven-constant accuracy scaling law to observed training runs, and
provides importance-sampling selection and deduplication for refining
corpora.
"""

from .corpus import Corpus, Document, Tokenizer, count_tokens, load_jsonl, sample_fraction, shard, write_jsonl
from .diversity import (
    DiversityReport,
    compression_ratio,
    diversity_score,
    mattr,
    metric_correlation_matrix,
    ngram_diversity,
    self_repetition,
    type_token_ratio,
)
from .errors import QTokensError
from .fitting import (
    ExperimentPoint,
    FitReport,
    bootstrap_se,
    fit_constants,
    join_fixture_tables,
    pearson,
    r_squared,
)
from .refine import (
    dedup_exact,
    dedup_near,
    hashed_ngram_features,
    importance_weights,
    select_by_weight,
)
from .scaling_law import (
    PRESETS,
    QualityInputs,
    ScalingConstants,
    clamp_unit,
    default_initial_guess,
    effective_tokens,
    invert_effective_tokens,
    predict_accuracy,
    scaling_factor_q,
)
from .syntheticity import (
    KgramScorer,
    SyntheticityResult,
    external_scorer_connect,
    score_corpus,
    train_kgram_scorer,
)

__version__ = "0.1.0"
