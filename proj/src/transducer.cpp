#include "conformal/transducer.hpp"

#include <stdexcept>

#include "conformal/rng.hpp"

namespace conformal {

std::vector<double> conformity_scores(const ConformityScorer& scorer,
                                      std::span<const Example> training,
                                      const Example& candidate) {
    std::vector<Example> bag(training.begin(), training.end());
    bag.push_back(candidate);
    auto s = scorer.scores(bag);
    if (s.size() != bag.size())
        throw std::logic_error("scorer returned a different number of scores than examples");
    return s;
}

namespace detail {

double p_value_from_scores(std::span<const double> scores, std::span<const Example> training,
                           std::optional<LabelId> class_restriction, double tau) {
    const size_t l = training.size();
    const double test_score = scores[l];
    if (!class_restriction) {
        int below = 0, equal = 0;
        for (size_t i = 0; i <= l; ++i) {
            if (scores[i] < test_score) ++below;
            else if (scores[i] == test_score) ++equal;
        }
        return (below + tau * equal) / double(l + 1);
    }
    int below = 0, equal = 0, class_size = 0;
    for (size_t i = 0; i < l; ++i) {
        if (training[i].label != *class_restriction) continue;
        ++class_size;
        if (scores[i] < test_score) ++below;
        else if (scores[i] == test_score) ++equal;
    }
    return (below + tau * equal + tau) / double(class_size + 1);
}

} // namespace detail

double p_value(std::span<const Example> training, const std::vector<double>& test_object,
               LabelId y, const ConformityScorer& scorer, double tau) {
    const auto scores = conformity_scores(scorer, training, Example{test_object, y});
    return detail::p_value_from_scores(scores, training, std::nullopt, tau);
}

double p_value_label_conditional(std::span<const Example> training,
                                 const std::vector<double>& test_object, LabelId y,
                                 const ConformityScorer& scorer, double tau) {
    const auto scores = conformity_scores(scorer, training, Example{test_object, y});
    return detail::p_value_from_scores(scores, training, y, tau);
}

std::vector<LabelId> prediction_set(std::span<const double> pvalues, double epsilon) {
    std::vector<LabelId> out;
    for (size_t y = 0; y < pvalues.size(); ++y)
        if (pvalues[y] > epsilon) out.push_back(LabelId(y));
    return out;
}

BatchResult predict_batch(std::span<const Example> training,
                          std::span<const std::vector<double>> test_objects,
                          const ConformityScorer& scorer, const BatchOptions& options) {
    if (options.n_labels < 1) throw std::invalid_argument("n_labels must be at least 1");
    BatchResult res;
    res.pvalues.n_test = int(test_objects.size());
    res.pvalues.n_labels = options.n_labels;
    res.pvalues.seed = options.seed;
    res.pvalues.p.resize(test_objects.size() * size_t(options.n_labels));
    res.pvalues.tau.resize(test_objects.size());
    if (options.epsilon) res.sets.resize(test_objects.size());

    for (size_t i = 0; i < test_objects.size(); ++i) {
        Rng stream = derive_rng(options.seed, i);
        const double shared_tau = stream.uniform01();
        res.pvalues.tau[i] = shared_tau;
        for (LabelId y = 0; y < options.n_labels; ++y) {
            const double tau = options.independent_tau ? stream.uniform01() : shared_tau;
            const double p =
                options.label_conditional
                    ? p_value_label_conditional(training, test_objects[i], y, scorer, tau)
                    : p_value(training, test_objects[i], y, scorer, tau);
            res.pvalues.at(int(i), y) = p;
        }
        if (options.epsilon) {
            std::span<const double> row(res.pvalues.p.data() + i * options.n_labels,
                                        size_t(options.n_labels));
            res.sets[i] = prediction_set(row, *options.epsilon);
        }
    }
    return res;
}

} // namespace conformal
