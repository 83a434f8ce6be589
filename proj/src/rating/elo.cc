// Copyright 2026 The Arena Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "arena/rating/elo.h"

#include <cmath>
#include <stdexcept>

namespace arena {
namespace {

void RequireFinite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw std::domain_error(std::string(what) + " must be finite");
  }
}

}  // namespace

void RatingParams::Validate() const {
  if (!std::isfinite(base_rating) || base_rating <= 0.0) {
    throw std::invalid_argument("base_rating must be > 0");
  }
  if (!std::isfinite(k_factor) || k_factor <= 0.0) {
    throw std::invalid_argument("k_factor must be > 0");
  }
  if (!std::isfinite(cold_start_alpha) || cold_start_alpha < 1.0) {
    throw std::invalid_argument("cold_start_alpha must be >= 1");
  }
  if (cold_start_window < 0) {
    throw std::invalid_argument("cold_start_window must be >= 0");
  }
  if (!(pair_decay_gamma > 0.0 && pair_decay_gamma <= 1.0)) {
    throw std::invalid_argument("pair_decay_gamma must lie in (0, 1]");
  }
  if (!(regression_lambda >= 0.0 && regression_lambda < 1.0)) {
    throw std::invalid_argument("regression_lambda must lie in [0, 1)");
  }
  if (inactivity_threshold.count() < 0) {
    throw std::invalid_argument("inactivity_threshold must be >= 0");
  }
}

Outcome Outcome::FromScore(double score) {
  if (score != 0.0 && score != 0.5 && score != 1.0) {
    throw std::domain_error("outcome score must be 0, 0.5 or 1");
  }
  return Outcome(score);
}

PairHistory::Key PairHistory::MakeKey(const std::string& a,
                                      const std::string& b) {
  return a < b ? Key{a, b} : Key{b, a};
}

std::int64_t PairHistory::Count(const std::string& a,
                                const std::string& b) const {
  auto it = counts_.find(MakeKey(a, b));
  return it == counts_.end() ? 0 : it->second;
}

std::int64_t PairHistory::Increment(const std::string& a,
                                    const std::string& b) {
  return ++counts_[MakeKey(a, b)];
}

void PairHistory::Set(const std::string& a, const std::string& b,
                      std::int64_t count) {
  if (count < 1) throw std::invalid_argument("pair count must be >= 1");
  counts_[MakeKey(a, b)] = count;
}

double ExpectedScore(double rating_a, double rating_b, double scale) {
  RequireFinite(rating_a, "rating_a");
  RequireFinite(rating_b, "rating_b");
  RequireFinite(scale, "scale");
  if (scale < 1.0) throw std::domain_error("scale must be >= 1");
  const double exponent = scale * (rating_b - rating_a) / 400.0;
  return 1.0 / (1.0 + std::pow(10.0, exponent));
}

double EffectiveK(double k_factor, double gamma, std::int64_t n_ab) {
  if (n_ab < 0) throw std::domain_error("n_ab must be >= 0");
  if (!(k_factor > 0.0) || !std::isfinite(k_factor)) {
    throw std::domain_error("k_factor must be > 0");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::domain_error("gamma must lie in (0, 1]");
  }
  if (gamma == 1.0) return k_factor;
  return k_factor * std::pow(gamma, static_cast<double>(n_ab));
}

bool IsColdStart(const RatingState& state, const RatingParams& params) {
  return state.match_count < params.cold_start_window;
}

UpdateResult ApplyUpdate(const RatingState& state_a,
                         const RatingState& state_b, Outcome outcome,
                         std::int64_t n_ab, const RatingParams& params) {
  UpdateResult result;
  result.cold_start_applied =
      IsColdStart(state_a, params) || IsColdStart(state_b, params);
  const double scale = result.cold_start_applied ? params.cold_start_alpha : 1.0;
  result.expected_a = ExpectedScore(state_a.rating, state_b.rating, scale);
  const double expected_b = 1.0 - result.expected_a;
  result.k_effective =
      EffectiveK(params.k_factor, params.pair_decay_gamma, n_ab);

  const double s_a = outcome.score_a();
  result.new_rating_a =
      state_a.rating + result.k_effective * (s_a - result.expected_a);
  result.new_rating_b =
      state_b.rating + result.k_effective * ((1.0 - s_a) - expected_b);
  return result;
}

double RegressTowardMean(double rating, double global_mean, double lambda) {
  RequireFinite(rating, "rating");
  RequireFinite(global_mean, "global_mean");
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw std::domain_error("lambda must lie in [0, 1)");
  }
  return rating - lambda * (rating - global_mean);
}

}  // namespace arena
