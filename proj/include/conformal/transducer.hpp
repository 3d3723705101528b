#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "conformal/criteria.hpp"
#include "conformal/core.hpp"

namespace conformal {

struct Example {
    std::vector<double> features;
    LabelId label = 0;
};

// A conformity measure: bag of n examples -> n scores, equivariant with
// respect to permutations of the bag. Every concrete scorer is property-
// tested for equivariance.
class ConformityScorer {
  public:
    virtual ~ConformityScorer() = default;
    virtual std::vector<double> scores(std::span<const Example> bag) const = 0;
};

// Scores for training examples plus the candidate, computed jointly (the
// candidate participates in the bag).
std::vector<double> conformity_scores(const ConformityScorer& scorer,
                                      std::span<const Example> training,
                                      const Example& candidate);

// Smoothed p-value of candidate label y for the test object: counts over
// all l+1 scores, so the equality count is at least 1.
double p_value(std::span<const Example> training, const std::vector<double>& test_object,
               LabelId y, const ConformityScorer& scorer, double tau);

// Label-conditional p-value: counts restricted to training examples of
// class y, plus the test example's own tau term.
double p_value_label_conditional(std::span<const Example> training,
                                 const std::vector<double>& test_object, LabelId y,
                                 const ConformityScorer& scorer, double tau);

// {y : p^y > eps}; strict inequality.
std::vector<LabelId> prediction_set(std::span<const double> pvalues, double epsilon);

struct BatchOptions {
    int n_labels = 0; // candidate label alphabet size (required)
    std::optional<double> epsilon;
    std::uint64_t seed = 0;
    bool label_conditional = false;
    // off by default: one tau per test object, shared across candidate labels
    bool independent_tau = false;
};

struct BatchResult {
    PValueTable pvalues;
    std::vector<std::vector<LabelId>> sets; // empty unless epsilon was given
};

// One tau per test object, derived from (seed, object index) so results do
// not depend on evaluation order; deterministic given the seed.
BatchResult predict_batch(std::span<const Example> training,
                          std::span<const std::vector<double>> test_objects,
                          const ConformityScorer& scorer, const BatchOptions& options);

namespace detail {
// shared by the unconditional/label-conditional p-value paths
double p_value_from_scores(std::span<const double> scores, std::span<const Example> training,
                           std::optional<LabelId> class_restriction, double tau);
} // namespace detail

} // namespace conformal
