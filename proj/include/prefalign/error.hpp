#pragma once

#include <stdexcept>
#include <string>

namespace prefalign {

enum class errc {
  zero_vector,
  dimension_mismatch,
  empty_batch,
  empty_sample,
  unknown_anchor,
  too_few_instances,
  non_finite_logit,
  cache_corrupt,
  cache_miss,
  config_invalid,
  k_too_large,
  missing_caption,
  empty_scores,
  too_few_candidates,
  size_mismatch,
  non_positive_tau,
  positive_missing_from_pool,
  index_out_of_range,
  missing_direction,
  lambda_out_of_range,
  not_enough_duplicate_pairs,
  missing_truth,
  missing_score,
  missing_baseline,
  io_error,
  non_finite_loss,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

}  // namespace prefalign
