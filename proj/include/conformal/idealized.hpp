#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "conformal/core.hpp"
#include "conformal/piecewise.hpp"

namespace conformal {

enum class PValueMode { Unconditional, LabelConditional };

// Idealised conformal transducer over a known finite joint distribution.
// p-values are cached as affine functions of the shared smoothing variable.
template <class T>
struct IdealizedTransducer {
    FiniteJoint<T> joint;
    WeakOrder order;
    PValueMode mode = PValueMode::Unconditional;
    std::vector<AffinePValue<T>> pvals; // x-major

    const AffinePValue<T>& p(ObjectId x, LabelId y) const {
        return pvals[size_t(x) * joint.n_labels + y];
    }

    std::vector<AffinePValue<T>> row(ObjectId x) const {
        return {pvals.begin() + size_t(x) * joint.n_labels,
                pvals.begin() + size_t(x + 1) * joint.n_labels};
    }

    static IdealizedTransducer from_order(FiniteJoint<T> q, WeakOrder ord, PValueMode mode) {
        validate_joint(q, mode == PValueMode::LabelConditional);
        IdealizedTransducer t;
        t.pvals.resize(q.size());
        if (mode == PValueMode::Unconditional) {
            // class masses, then prefix sums in rank order
            std::vector<T> mass(ord.num_classes, T(0));
            for (int i = 0; i < q.size(); ++i) mass[ord.rank[i]] += q.probs[i];
            std::vector<T> below(ord.num_classes, T(0));
            for (int c = 1; c < ord.num_classes; ++c) below[c] = below[c - 1] + mass[c - 1];
            for (int i = 0; i < q.size(); ++i)
                t.pvals[i] = AffinePValue<T>{below[ord.rank[i]], mass[ord.rank[i]]};
        } else {
            // per class: masses of within-class equality groups over Q(x|y)
            for (LabelId y = 0; y < q.n_labels; ++y) {
                const T qy = q.label_marginal(y);
                for (ObjectId x = 0; x < q.n_objects; ++x) {
                    T below(0), equal(0);
                    for (ObjectId x2 = 0; x2 < q.n_objects; ++x2) {
                        if (ord.at(x2, y) < ord.at(x, y)) below += q.at(x2, y);
                        else if (ord.at(x2, y) == ord.at(x, y)) equal += q.at(x2, y);
                    }
                    t.pvals[size_t(x) * q.n_labels + y] = AffinePValue<T>{below / qy, equal / qy};
                }
            }
        }
        t.joint = std::move(q);
        t.order = std::move(ord);
        t.mode = mode;
        return t;
    }

    static IdealizedTransducer make(FiniteJoint<T> q, const ScoreTable<T>& a, PValueMode mode) {
        return from_order(std::move(q), order_of(a), mode);
    }
};

// p(x,y): strict-below mass + tau * equality-class mass.
template <class T>
AffinePValue<T> idealized_p_value(const FiniteJoint<T>& q, const ScoreTable<T>& a, ObjectId x,
                                  LabelId y) {
    validate_joint(q);
    const T& s = a.at(x, y);
    T below(0), equal(0);
    for (ObjectId x2 = 0; x2 < q.n_objects; ++x2)
        for (LabelId y2 = 0; y2 < q.n_labels; ++y2) {
            if (a.at(x2, y2) < s) below += q.at(x2, y2);
            else if (a.at(x2, y2) == s) equal += q.at(x2, y2);
        }
    return {below, equal};
}

// Label-conditional variant: masses taken within class y and normalised by
// the label marginal.
template <class T>
AffinePValue<T> idealized_p_value_label_conditional(const FiniteJoint<T>& q, const ScoreTable<T>& a,
                                                    ObjectId x, LabelId y) {
    validate_joint(q);
    const T qy = q.label_marginal(y);
    if (!(qy > T(0))) throw DegenerateMarginal("label-conditional p-value with Q_Y(y)=0");
    const T& s = a.at(x, y);
    T below(0), equal(0);
    for (ObjectId x2 = 0; x2 < q.n_objects; ++x2) {
        if (a.at(x2, y) < s) below += q.at(x2, y);
        else if (a.at(x2, y) == s) equal += q.at(x2, y);
    }
    return {below / qy, equal / qy};
}

// Labels whose p-value strictly exceeds eps at the given tau.
template <class T>
std::vector<LabelId> prediction_set_at(const IdealizedTransducer<T>& t, ObjectId x, const T& eps,
                                       const T& tau) {
    std::vector<LabelId> out;
    for (LabelId y = 0; y < t.joint.n_labels; ++y)
        if (t.p(x, y).at(tau) > eps) out.push_back(y);
    return out;
}

// A(x,y) = Q(y|x)
template <class T>
ScoreTable<T> cp_measure(const FiniteJoint<T>& q) {
    validate_joint(q);
    ScoreTable<T> a(q.n_objects, q.n_labels);
    for (ObjectId x = 0; x < q.n_objects; ++x) {
        const auto cond = conditional(q, x);
        for (LabelId y = 0; y < q.n_labels; ++y) a.at(x, y) = cond[y];
    }
    return a;
}

// Signed predictability: f(x) on the chosen label, -f(x) elsewhere.
// One table per choice function, in canonical order.
template <class T>
std::vector<ScoreTable<T>> sp_measures(const FiniteJoint<T>& q) {
    validate_joint(q);
    std::vector<ScoreTable<T>> out;
    for (const auto& yhat : choice_functions(q)) {
        ScoreTable<T> a(q.n_objects, q.n_labels);
        for (ObjectId x = 0; x < q.n_objects; ++x) {
            const T f = predictability(q, x);
            for (LabelId y = 0; y < q.n_labels; ++y) a.at(x, y) = (y == yhat[x]) ? f : -f;
        }
        out.push_back(std::move(a));
    }
    return out;
}

// Modified conditional probability: Q(y|x) on the chosen label, Q(y|x)-1
// elsewhere. One table per choice function.
template <class T>
std::vector<ScoreTable<T>> mcp_measures(const FiniteJoint<T>& q) {
    validate_joint(q);
    std::vector<ScoreTable<T>> out;
    for (const auto& yhat : choice_functions(q)) {
        ScoreTable<T> a(q.n_objects, q.n_labels);
        for (ObjectId x = 0; x < q.n_objects; ++x) {
            const auto cond = conditional(q, x);
            for (LabelId y = 0; y < q.n_labels; ++y)
                a.at(x, y) = (y == yhat[x]) ? cond[y] : cond[y] - T(1);
        }
        out.push_back(std::move(a));
    }
    return out;
}

// Modified signed predictability; independent of the choice of choice
// function, hence a single table.
template <class T>
ScoreTable<T> msp_measure(const FiniteJoint<T>& q) {
    validate_joint(q);
    const T half = T(1) / T(2);
    ScoreTable<T> a(q.n_objects, q.n_labels);
    for (ObjectId x = 0; x < q.n_objects; ++x) {
        const auto cond = conditional(q, x);
        const T f = *std::max_element(cond.begin(), cond.end());
        for (LabelId y = 0; y < q.n_labels; ++y) {
            if (f <= half) a.at(x, y) = T(0);
            else a.at(x, y) = (cond[y] == f) ? f : -f;
        }
    }
    return a;
}

// Note: when f(x) > 1/2 the chosen label is unique, so "y = yhat(x)" and
// "Q(y|x) = f(x)" coincide and the table above matches every choice function.

// B(z1) < B(z2)  =>  A(z1) < A(z2), over all pairs.
inline bool is_refinement(const WeakOrder& a, const WeakOrder& b) {
    if (a.size() != b.size()) throw DimensionMismatch("refinement check on different shapes");
    for (int i = 0; i < a.size(); ++i)
        for (int j = 0; j < a.size(); ++j)
            if (b.rank[i] < b.rank[j] && !(a.rank[i] < a.rank[j])) return false;
    return true;
}

template <class T>
bool is_refinement(const ScoreTable<T>& a, const ScoreTable<T>& b) {
    return is_refinement(order_of(a), order_of(b));
}

// Per-class implication only; cross-class pairs are unconstrained.
inline bool is_label_conditional_refinement(const WeakOrder& a, const WeakOrder& b) {
    if (a.size() != b.size() || a.n_labels != b.n_labels)
        throw DimensionMismatch("refinement check on different shapes");
    for (LabelId y = 0; y < a.n_labels; ++y)
        for (ObjectId x1 = 0; x1 < a.n_objects; ++x1)
            for (ObjectId x2 = 0; x2 < a.n_objects; ++x2)
                if (b.at(x1, y) < b.at(x2, y) && !(a.at(x1, y) < a.at(x2, y))) return false;
    return true;
}

template <class T>
bool is_label_conditional_refinement(const ScoreTable<T>& a, const ScoreTable<T>& b) {
    return is_label_conditional_refinement(order_of(a), order_of(b));
}

namespace detail {

// refinement + preservation of within-object ties of the base table
inline bool refines_with_tie_preservation(const WeakOrder& a, const WeakOrder& b) {
    if (!is_refinement(a, b)) return false;
    for (ObjectId x = 0; x < a.n_objects; ++x)
        for (LabelId y1 = 0; y1 < a.n_labels; ++y1)
            for (LabelId y2 = 0; y2 < a.n_labels; ++y2)
                if (b.at(x, y1) == b.at(x, y2) && a.at(x, y1) != a.at(x, y2)) return false;
    return true;
}

} // namespace detail

// Membership in R'(SP): some SP table is refined by A with its within-object
// ties preserved.
inline bool in_R_prime_SP(const WeakOrder& a, const FiniteJoint<Rational>& q) {
    for (const auto& sp : sp_measures(q))
        if (detail::refines_with_tie_preservation(a, order_of(sp))) return true;
    return false;
}

template <class T>
bool in_R_prime_SP(const ScoreTable<T>& a, const FiniteJoint<T>& q) {
    for (const auto& sp : sp_measures(q))
        if (detail::refines_with_tie_preservation(order_of(a), order_of(sp))) return true;
    return false;
}

// Membership in R''(MSP): refinement of the MSP table plus the two equality
// clauses on conditional probabilities.
template <class T>
bool in_R_doubleprime_MSP_order(const WeakOrder& a, const FiniteJoint<T>& q) {
    if (!is_refinement(a, order_of(msp_measure(q)))) return false;
    const T half = T(1) / T(2);
    for (ObjectId x = 0; x < q.n_objects; ++x) {
        const auto cond = conditional(q, x);
        const T f = *std::max_element(cond.begin(), cond.end());
        for (LabelId y1 = 0; y1 < q.n_labels; ++y1)
            for (LabelId y2 = 0; y2 < q.n_labels; ++y2) {
                if (f < half && a.at(x, y1) != a.at(x, y2)) return false;
                if (f >= half && cond[y1] < half && cond[y2] < half &&
                    a.at(x, y1) != a.at(x, y2))
                    return false;
            }
    }
    return true;
}

template <class T>
bool in_R_doubleprime_MSP(const ScoreTable<T>& a, const FiniteJoint<T>& q) {
    return in_R_doubleprime_MSP_order(order_of(a), q);
}

} // namespace conformal
