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

#ifndef ARENA_RATING_ELO_H_
#define ARENA_RATING_ELO_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

// Extended Elo mathematics. Everything in this header is a pure function of
// its arguments: no clock, no randomness, no I/O. All ratings are IEEE-754
// doubles.
//
// The plain Elo model
//
//   E_A  = 1 / (1 + 10^((R_B - R_A) / 400))
//   R_A' = R_A + K (S_A - E_A)
//   R_B' = R_B + K ((1 - S_A) - (1 - E_A))
//
// is extended with three mechanisms:
//
//   * cold-start window: while either model has played fewer than W matches,
//     the rating difference inside E is scaled by alpha >= 1;
//   * pairwise decay: the step becomes K_eff = K * gamma^n_AB, where n_AB is
//     the number of earlier encounters between the same two models;
//   * activity regression: an inactive model is pulled toward the mean,
//     R' = R - lambda (R - mean). This never runs inside a match update.

namespace arena {

struct RatingParams {
  double base_rating = 1000.0;
  double k_factor = 32.0;
  double cold_start_alpha = 1.5;
  std::int64_t cold_start_window = 30;
  double pair_decay_gamma = 0.9;
  double regression_lambda = 0.02;
  std::chrono::milliseconds inactivity_threshold =
      std::chrono::hours(24 * 14);

  // Throws std::invalid_argument naming the first violated bound.
  void Validate() const;

  bool operator==(const RatingParams&) const = default;
};

struct RatingState {
  double rating = 1000.0;
  std::int64_t match_count = 0;
  // Sequence number of the last vote that involved this model.
  std::optional<std::uint64_t> last_match_seq;

  bool operator==(const RatingState&) const = default;
};

// A judged result from model A's point of view.
class Outcome {
 public:
  static Outcome Win() { return Outcome(1.0); }
  static Outcome Loss() { return Outcome(0.0); }
  static Outcome Tie() { return Outcome(0.5); }
  // Throws std::domain_error unless score is exactly 0, 0.5 or 1.
  static Outcome FromScore(double score);

  double score_a() const { return score_a_; }
  bool is_tie() const { return score_a_ == 0.5; }

  bool operator==(const Outcome&) const = default;

 private:
  explicit Outcome(double score) : score_a_(score) {}
  double score_a_;
};

// Encounter counts per unordered model pair. Pairs that never met are absent.
class PairHistory {
 public:
  using Key = std::pair<std::string, std::string>;

  std::int64_t Count(const std::string& a, const std::string& b) const;
  // Returns the new count.
  std::int64_t Increment(const std::string& a, const std::string& b);

  const std::map<Key, std::int64_t>& counts() const { return counts_; }
  void Set(const std::string& a, const std::string& b, std::int64_t count);

  static Key MakeKey(const std::string& a, const std::string& b);

  bool operator==(const PairHistory&) const = default;

 private:
  std::map<Key, std::int64_t> counts_;
};

struct UpdateResult {
  double new_rating_a = 0.0;
  double new_rating_b = 0.0;
  double expected_a = 0.5;
  double k_effective = 0.0;
  bool cold_start_applied = false;
};

// 1 / (1 + 10^(scale * (rating_b - rating_a) / 400)).
// Throws std::domain_error on non-finite input or scale < 1.
double ExpectedScore(double rating_a, double rating_b, double scale = 1.0);

// k_factor * gamma^n_ab. Throws std::domain_error on negative n_ab or
// parameters out of range.
double EffectiveK(double k_factor, double gamma, std::int64_t n_ab);

// Cold start is checked with a strict less-than: a model that has played
// exactly W matches is no longer new.
bool IsColdStart(const RatingState& state, const RatingParams& params);

// One pairwise update. Order: cold-start flag, scaled E, K_eff, then the two
// rating equations, with both sides sharing E and K_eff so the sum of the two
// ratings is conserved. Does not touch match counts or pair history.
UpdateResult ApplyUpdate(const RatingState& state_a,
                         const RatingState& state_b, Outcome outcome,
                         std::int64_t n_ab, const RatingParams& params);

// rating - lambda * (rating - global_mean). lambda must lie in [0, 1).
double RegressTowardMean(double rating, double global_mean, double lambda);

}  // namespace arena

#endif  // ARENA_RATING_ELO_H_
