#include "prefalign/error.hpp"

namespace prefalign {

const char* errc_name(errc code) {
  switch (code) {
    case errc::zero_vector: return "ZeroVector";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::empty_batch: return "EmptyBatch";
    case errc::empty_sample: return "EmptySample";
    case errc::unknown_anchor: return "UnknownAnchor";
    case errc::too_few_instances: return "TooFewInstances";
    case errc::non_finite_logit: return "NonFiniteLogit";
    case errc::cache_corrupt: return "CacheCorrupt";
    case errc::cache_miss: return "CacheMiss";
    case errc::config_invalid: return "ConfigInvalid";
    case errc::k_too_large: return "KTooLarge";
    case errc::missing_caption: return "MissingCaption";
    case errc::empty_scores: return "EmptyScores";
    case errc::too_few_candidates: return "TooFewCandidates";
    case errc::size_mismatch: return "SizeMismatch";
    case errc::non_positive_tau: return "NonPositiveTau";
    case errc::positive_missing_from_pool: return "PositiveMissingFromPool";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::missing_direction: return "MissingDirection";
    case errc::lambda_out_of_range: return "LambdaOutOfRange";
    case errc::not_enough_duplicate_pairs: return "NotEnoughDuplicatePairs";
    case errc::missing_truth: return "MissingTruth";
    case errc::missing_score: return "MissingScore";
    case errc::missing_baseline: return "MissingBaseline";
    case errc::io_error: return "IoError";
    case errc::non_finite_loss: return "NonFiniteLoss";
  }
  return "UnknownError";
}

}  // namespace prefalign
