#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "conformal/transducer.hpp"

namespace conformal {

// Per-object standardisation: mean 0, population standard deviation 1.
std::vector<double> normalize_object(std::span<const double> v);

double euclidean_distance(std::span<const double> u, std::span<const double> v);

enum class KnnVariant { Ratio, Cp, Sp };

const char* knn_variant_name(KnnVariant v);

struct KnnConfig {
    int k = 1;
    KnnVariant variant = KnnVariant::Ratio;
    std::uint64_t seed = 0;

    void validate() const;
};

// Neighbour structures for one fixed bag of examples. Building the bag is
// O(n^2 log n); each variant/K evaluation afterwards is cheap, so parameter
// sweeps construct this once per bag.
class KnnBag {
  public:
    explicit KnnBag(std::span<const Example> bag);

    int size() const { return n_; }

    // Conformity scores of every bag member against the rest.
    // Distance ties at the K-th neighbour are resolved by seeded sampling
    // without replacement from the tied shell; the sampling stream is
    // derived from the scored example's content, which keeps all three
    // scorers exactly permutation-equivariant.
    std::vector<double> scores(KnnVariant variant, int k, std::uint64_t seed) const;

  private:
    struct PerExample {
        std::vector<double> nbr_dist;  // sorted ascending
        std::vector<LabelId> nbr_label; // parallel to nbr_dist
        std::vector<int> nbr_index;     // parallel to nbr_dist
        std::vector<double> same_prefix; // prefix sums of sorted same-label distances
        std::vector<double> diff_prefix; // prefix sums of sorted different-label distances
    };

    double ratio_score(int i, int k) const;
    double cp_score(int i, int k, std::uint64_t seed) const;
    double sp_score(int i, int k, std::uint64_t seed) const;
    // label counts among the k nearest neighbours of example i
    std::vector<int> neighbor_label_counts(int i, int k, std::uint64_t seed) const;

    int n_ = 0;
    int n_labels_ = 0;
    std::vector<Example> examples_;
    std::vector<std::uint64_t> content_hash_;
    std::vector<PerExample> per_example_;
};

// ConformityScorer adapter over KnnBag.
class KnnScorer : public ConformityScorer {
  public:
    explicit KnnScorer(KnnConfig config);
    std::vector<double> scores(std::span<const Example> bag) const override;

    const KnnConfig& config() const { return config_; }

  private:
    KnnConfig config_;
};

// Free-function forms used in tests and small experiments.
std::vector<double> knn_ratio_scores(std::span<const Example> examples, int k);
std::vector<double> knn_cp_scores(std::span<const Example> examples, int k, std::uint64_t seed);
std::vector<double> knn_sp_scores(std::span<const Example> examples, int k, std::uint64_t seed);

} // namespace conformal
