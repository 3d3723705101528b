#pragma once

#include <algorithm>
#include <cassert>
#include <span>
#include <stdexcept>
#include <vector>

#include "conformal/core.hpp"

namespace conformal {

// A p-value kept symbolic in the shared smoothing variable:
// p(tau) = intercept + tau * slope, with intercept = mass strictly below the
// equality class and slope = mass of the equality class. Keeping p-values
// affine is what makes every downstream expectation exact.
template <class T>
struct AffinePValue {
    T intercept{};
    T slope{};

    T at(const T& tau) const { return intercept + tau * slope; }
};

// Continuous piecewise-linear function on [0,1]: values at sorted knots,
// affine in between. knots.front()==0 and knots.back()==1.
template <class T>
struct PiecewiseLinear {
    std::vector<T> knots;
    std::vector<T> values;

    T at(const T& t) const {
        assert(knots.size() >= 2);
        auto it = std::upper_bound(knots.begin(), knots.end(), t);
        size_t hi = std::min<size_t>(knots.size() - 1, size_t(it - knots.begin()));
        if (hi == 0) hi = 1;
        const size_t lo = hi - 1;
        const T w = knots[hi] - knots[lo];
        if (w == T(0)) return values[lo];
        return values[lo] + (values[hi] - values[lo]) * (t - knots[lo]) / w;
    }
};

// Exact integral over [0,1] (trapezoid rule is exact for piecewise-linear).
template <class T>
T tau_expectation(const PiecewiseLinear<T>& f) {
    T acc(0);
    for (size_t i = 0; i + 1 < f.knots.size(); ++i)
        acc += (f.values[i] + f.values[i + 1]) * (f.knots[i + 1] - f.knots[i]) / T(2);
    return acc;
}

// Prob over tau ~ U[0,1] of p(tau) > eps.
template <class T>
T exceed_probability(const AffinePValue<T>& p, const T& eps) {
    if (p.slope == T(0)) return p.intercept > eps ? T(1) : T(0);
    T v = (p.intercept + p.slope - eps) / p.slope;
    if (v < T(0)) return T(0);
    if (v > T(1)) return T(1);
    return v;
}

// Smallest tau beyond which p(tau) > eps; membership holds on (threshold, 1].
// Complements exceed_probability: measure of membership = 1 - threshold.
template <class T>
T membership_threshold(const AffinePValue<T>& p, const T& eps) {
    return T(1) - exceed_probability(p, eps);
}

namespace detail {

template <class T>
T kth_largest_value(std::span<const AffinePValue<T>> fs, int k, const T& tau) {
    std::vector<T> vals;
    vals.reserve(fs.size());
    for (const auto& f : fs) vals.push_back(f.at(tau));
    std::nth_element(vals.begin(), vals.begin() + (k - 1), vals.end(), std::greater<>());
    return vals[k - 1];
}

} // namespace detail

// k-th largest of a family of affine functions, as an exact piecewise-linear
// function of tau (k = 1 is the pointwise maximum). Knots are the pairwise
// intersections inside (0,1); between consecutive knots the selection is
// constant, so interpolating the knot values reproduces the function.
template <class T>
PiecewiseLinear<T> kth_largest(std::span<const AffinePValue<T>> fs, int k) {
    if (fs.empty() || k < 1 || size_t(k) > fs.size())
        throw std::invalid_argument("kth_largest: order statistic out of range");
    std::vector<T> knots = {T(0), T(1)};
    for (size_t i = 0; i < fs.size(); ++i)
        for (size_t j = i + 1; j < fs.size(); ++j) {
            const T db = fs[i].slope - fs[j].slope;
            if (db == T(0)) continue;
            T t = (fs[j].intercept - fs[i].intercept) / db;
            if (t > T(0) && t < T(1)) knots.push_back(std::move(t));
        }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    PiecewiseLinear<T> out;
    out.values.reserve(knots.size());
    for (const T& t : knots) out.values.push_back(detail::kth_largest_value(fs, k, t));
    out.knots = std::move(knots);
    return out;
}

template <class T>
T expected_kth_largest(std::span<const AffinePValue<T>> fs, int k) {
    return tau_expectation(kth_largest(fs, k));
}

} // namespace conformal
