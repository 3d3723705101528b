#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "conformal/rational.hpp"

namespace conformal {

using LabelId = int;
using ObjectId = int;

struct NormalizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateMarginal : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooFewLabels : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingLabels : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingEpsilon : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PreconditionViolated : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownExampleId : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientNeighbors : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConstantObject : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Probability table over a finite example space X x Y.
// Immutable by convention after construction; all operations are pure.
template <class T>
struct FiniteJoint {
    int n_objects = 0;
    int n_labels = 0;
    std::vector<T> probs; // x-major: probs[x * n_labels + y]

    FiniteJoint() = default;
    FiniteJoint(int nx, int ny) : n_objects(nx), n_labels(ny), probs(size_t(nx) * ny, T(0)) {}

    const T& at(ObjectId x, LabelId y) const { return probs[size_t(x) * n_labels + y]; }
    T& at(ObjectId x, LabelId y) { return probs[size_t(x) * n_labels + y]; }
    int size() const { return n_objects * n_labels; }

    T object_marginal(ObjectId x) const {
        T s(0);
        for (LabelId y = 0; y < n_labels; ++y) s += at(x, y);
        return s;
    }
    T label_marginal(LabelId y) const {
        T s(0);
        for (ObjectId x = 0; x < n_objects; ++x) s += at(x, y);
        return s;
    }
};

// Idealised conformity measure given as an explicit score per example.
// Only the induced weak order matters (see order_of).
template <class T>
struct ScoreTable {
    int n_objects = 0;
    int n_labels = 0;
    std::vector<T> scores; // x-major

    ScoreTable() = default;
    ScoreTable(int nx, int ny) : n_objects(nx), n_labels(ny), scores(size_t(nx) * ny, T(0)) {}

    const T& at(ObjectId x, LabelId y) const { return scores[size_t(x) * n_labels + y]; }
    T& at(ObjectId x, LabelId y) { return scores[size_t(x) * n_labels + y]; }
    int size() const { return n_objects * n_labels; }
};

// Total preorder on the example space: rank 0 = least conforming, distinct
// ranks consecutive from 0.
struct WeakOrder {
    int n_objects = 0;
    int n_labels = 0;
    std::vector<int> rank; // x-major
    int num_classes = 0;

    WeakOrder() = default;
    WeakOrder(int nx, int ny, std::vector<int> r, int classes)
        : n_objects(nx), n_labels(ny), rank(std::move(r)), num_classes(classes) {}

    int at(ObjectId x, LabelId y) const { return rank[size_t(x) * n_labels + y]; }
    int size() const { return n_objects * n_labels; }

    bool operator==(const WeakOrder& o) const { return rank == o.rank; }
};

enum class Direction { SmallerBetter, LargerBetter };

// One- or two-component criterion value compared lexicographically with a
// per-component preference direction (the tie-breaking rules of U/F/M/E).
template <class T>
struct CriterionValue {
    T primary{};
    std::optional<T> secondary;
    Direction primary_dir = Direction::SmallerBetter;
    Direction secondary_dir = Direction::SmallerBetter;
};

// -1 if a is strictly preferred, 0 if equivalent, +1 if b is preferred.
template <class T>
int compare_preference(const CriterionValue<T>& a, const CriterionValue<T>& b) {
    auto cmp = [](const T& u, const T& v, Direction d) -> int {
        if (u == v) return 0;
        const bool u_better = d == Direction::SmallerBetter ? u < v : u > v;
        return u_better ? -1 : 1;
    };
    if (int c = cmp(a.primary, b.primary, a.primary_dir); c != 0) return c;
    if (a.secondary && b.secondary) return cmp(*a.secondary, *b.secondary, a.secondary_dir);
    return 0;
}

template <class T>
struct SignificanceLevel {
    T epsilon;

    explicit SignificanceLevel(T e) : epsilon(std::move(e)) {
        if (!(epsilon > T(0) && epsilon < T(1)))
            throw std::invalid_argument("significance level must lie in (0,1)");
    }
};

namespace detail {
inline bool sum_close_to_one(const Rational& s) { return s == Rational(1); }
inline bool sum_close_to_one(double s) { return std::abs(s - 1.0) <= 1e-9; }
} // namespace detail

// Checks the standing assumptions: total mass 1 and positive object
// marginals. Positive label marginals are required only in
// label-conditional mode.
template <class T>
void validate_joint(const FiniteJoint<T>& q, bool label_conditional = false) {
    T total(0);
    for (const T& p : q.probs) {
        if (p < T(0) || p > T(1)) throw NormalizationError("probability entry outside [0,1]");
        total += p;
    }
    if (!detail::sum_close_to_one(total)) throw NormalizationError("probabilities do not sum to 1");
    for (ObjectId x = 0; x < q.n_objects; ++x)
        if (!(q.object_marginal(x) > T(0)))
            throw DegenerateMarginal("object marginal Q_X(x) is zero at x=" + std::to_string(x));
    if (label_conditional)
        for (LabelId y = 0; y < q.n_labels; ++y)
            if (!(q.label_marginal(y) > T(0)))
                throw DegenerateMarginal("label marginal Q_Y(y) is zero at y=" + std::to_string(y));
}

// Q(.|x), summing to 1 (exactly in rational mode).
template <class T>
std::vector<T> conditional(const FiniteJoint<T>& q, ObjectId x) {
    const T qx = q.object_marginal(x);
    if (!(qx > T(0))) throw DegenerateMarginal("conditional on zero-mass object");
    std::vector<T> out(q.n_labels);
    for (LabelId y = 0; y < q.n_labels; ++y) out[y] = q.at(x, y) / qx;
    return out;
}

// f(x) = max_y Q(y|x)
template <class T>
T predictability(const FiniteJoint<T>& q, ObjectId x) {
    const auto cond = conditional(q, x);
    return *std::max_element(cond.begin(), cond.end());
}

// All maps X -> Y with Q(yhat(x)|x) = f(x), enumerated x-major with label
// ids ascending (canonical order).
template <class T>
std::vector<std::vector<LabelId>> choice_functions(const FiniteJoint<T>& q) {
    std::vector<std::vector<LabelId>> argmax_sets(q.n_objects);
    for (ObjectId x = 0; x < q.n_objects; ++x) {
        const auto cond = conditional(q, x);
        const T best = *std::max_element(cond.begin(), cond.end());
        for (LabelId y = 0; y < q.n_labels; ++y)
            if (cond[y] == best) argmax_sets[x].push_back(y);
    }
    std::vector<std::vector<LabelId>> out;
    std::vector<size_t> pick(q.n_objects, 0);
    for (;;) {
        std::vector<LabelId> f(q.n_objects);
        for (ObjectId x = 0; x < q.n_objects; ++x) f[x] = argmax_sets[x][pick[x]];
        out.push_back(std::move(f));
        int x = q.n_objects - 1;
        while (x >= 0 && ++pick[x] == argmax_sets[x].size()) pick[x--] = 0;
        if (x < 0) break;
    }
    return out;
}

// Dense ranks induced by the scores; ties detected by exact equality.
template <class T>
WeakOrder order_of(const ScoreTable<T>& a) {
    std::vector<T> sorted(a.scores);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> rank(a.scores.size());
    for (size_t i = 0; i < a.scores.size(); ++i)
        rank[i] = int(std::lower_bound(sorted.begin(), sorted.end(), a.scores[i]) - sorted.begin());
    return WeakOrder(a.n_objects, a.n_labels, std::move(rank), int(sorted.size()));
}

} // namespace conformal
