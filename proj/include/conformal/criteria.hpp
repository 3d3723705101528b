#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "conformal/idealized.hpp"
#include "conformal/rng.hpp"

namespace conformal {

// The ten efficiency criteria, plus the phi-generalised sum criterion.
enum class Criterion { S, N, U, F, M, E, OU, OF, OM, OE, SPhi };

inline const char* criterion_name(Criterion c) {
    switch (c) {
        case Criterion::S: return "S";
        case Criterion::N: return "N";
        case Criterion::U: return "U";
        case Criterion::F: return "F";
        case Criterion::M: return "M";
        case Criterion::E: return "E";
        case Criterion::OU: return "OU";
        case Criterion::OF: return "OF";
        case Criterion::OM: return "OM";
        case Criterion::OE: return "OE";
        case Criterion::SPhi: return "S_PHI";
    }
    return "?";
}

inline std::optional<Criterion> criterion_from_name(std::string s) {
    for (char& c : s) c = char(std::toupper(static_cast<unsigned char>(c)));
    if (s == "S") return Criterion::S;
    if (s == "N") return Criterion::N;
    if (s == "U") return Criterion::U;
    if (s == "F") return Criterion::F;
    if (s == "M") return Criterion::M;
    if (s == "E") return Criterion::E;
    if (s == "OU") return Criterion::OU;
    if (s == "OF") return Criterion::OF;
    if (s == "OM") return Criterion::OM;
    if (s == "OE") return Criterion::OE;
    if (s == "S_PHI" || s == "SPHI") return Criterion::SPhi;
    return std::nullopt;
}

inline bool criterion_needs_epsilon(Criterion c) {
    return c == Criterion::N || c == Criterion::M || c == Criterion::E || c == Criterion::OM ||
           c == Criterion::OE;
}
inline bool criterion_is_observed(Criterion c) {
    return c == Criterion::OU || c == Criterion::OF || c == Criterion::OM || c == Criterion::OE;
}
inline bool criterion_needs_two_labels(Criterion c) {
    return c == Criterion::U || c == Criterion::F || c == Criterion::OU;
}

// Strictly increasing C^1 function for the S_phi criterion. Non-identity
// phi is integrated numerically, so it is a double-mode feature.
struct PhiFunction {
    std::string name = "identity";
    std::function<double(double)> fn; // empty => identity
};

namespace detail {

// adaptive Simpson to relative tolerance 1e-10
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, int depth) {
    const double m = (a + b) / 2;
    const double lm = (a + m) / 2, rm = (m + b) / 2;
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6 * (fm + 4 * frm + fb);
    const double d = left + right - whole;
    if (depth <= 0 || std::abs(d) <= 1e-10 * std::abs(left + right) + 1e-15)
        return left + right + d / 15;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, depth - 1);
}

inline double integrate01(const std::function<double(double)>& f) {
    const double fa = f(0.0), fb = f(1.0), fm = f(0.5);
    const double whole = (fa + 4 * fm + fb) / 6;
    return adaptive_simpson(f, 0.0, 1.0, fa, fm, fb, whole, 40);
}

template <class T>
T expected_p(const AffinePValue<T>& p) {
    return p.intercept + p.slope / T(2);
}

// E over tau of max_{y' != y} p(x,y')
template <class T>
T expected_max_excluding(const std::vector<AffinePValue<T>>& row, LabelId skip) {
    std::vector<AffinePValue<T>> rest;
    rest.reserve(row.size() - 1);
    for (size_t y = 0; y < row.size(); ++y)
        if (LabelId(y) != skip) rest.push_back(row[y]);
    return expected_kth_largest<T>(rest, 1);
}

} // namespace detail

// Exact idealised criterion value: expectation over (x or (x,y)) ~ Q and
// tau ~ U[0,1], computed symbolically. Linear criteria reduce to per-cell
// intercept + slope/2 or exceed_probability; order-statistic criteria go
// through the piecewise-linear engine; count criteria use sorted membership
// thresholds.
template <class T>
CriterionValue<T> evaluate_idealized(const IdealizedTransducer<T>& t, Criterion c,
                                     const std::optional<T>& epsilon = std::nullopt,
                                     const PhiFunction* phi = nullptr) {
    const auto& q = t.joint;
    const int ny = q.n_labels;
    if (criterion_needs_epsilon(c)) {
        if (!epsilon) throw MissingEpsilon("criterion requires a significance level");
        (void)SignificanceLevel<T>(*epsilon); // validates (0,1)
    }
    if (criterion_needs_two_labels(c) && ny < 2)
        throw TooFewLabels("criterion needs at least two labels");

    CriterionValue<T> out;
    switch (c) {
        case Criterion::S: {
            T acc(0);
            for (ObjectId x = 0; x < q.n_objects; ++x) {
                const T wx = q.object_marginal(x);
                for (LabelId y = 0; y < ny; ++y) acc += wx * detail::expected_p(t.p(x, y));
            }
            out.primary = acc;
            return out;
        }
        case Criterion::SPhi: {
            if (phi == nullptr || !phi->fn) {
                auto s = evaluate_idealized(t, Criterion::S);
                out.primary = s.primary;
                return out;
            }
            if constexpr (std::is_same_v<T, double>) {
                double acc = 0;
                for (ObjectId x = 0; x < q.n_objects; ++x) {
                    const double wx = q.object_marginal(x);
                    for (LabelId y = 0; y < ny; ++y) {
                        const auto& p = t.p(x, y);
                        acc += wx * detail::integrate01([&](double tau) {
                            return phi->fn(p.intercept + tau * p.slope);
                        });
                    }
                }
                out.primary = acc;
                return out;
            } else {
                throw std::invalid_argument("non-identity phi requires double mode");
            }
        }
        case Criterion::OF: {
            T acc(0);
            for (ObjectId x = 0; x < q.n_objects; ++x)
                for (LabelId y = 0; y < ny; ++y) {
                    const T w = q.object_marginal(x) - q.at(x, y);
                    acc += w * detail::expected_p(t.p(x, y));
                }
            out.primary = acc;
            return out;
        }
        case Criterion::N: {
            T acc(0);
            for (ObjectId x = 0; x < q.n_objects; ++x) {
                const T wx = q.object_marginal(x);
                for (LabelId y = 0; y < ny; ++y)
                    acc += wx * exceed_probability(t.p(x, y), *epsilon);
            }
            out.primary = acc;
            return out;
        }
        case Criterion::OE: {
            T acc(0);
            for (ObjectId x = 0; x < q.n_objects; ++x)
                for (LabelId y = 0; y < ny; ++y) {
                    const T w = q.object_marginal(x) - q.at(x, y);
                    acc += w * exceed_probability(t.p(x, y), *epsilon);
                }
            out.primary = acc;
            return out;
        }
        case Criterion::U:
        case Criterion::F: {
            T prim(0), cred(0);
            for (ObjectId x = 0; x < q.n_objects; ++x) {
                const T wx = q.object_marginal(x);
                const auto row = t.row(x);
                const T emax = expected_kth_largest<T>(row, 1);
                cred += wx * emax;
                if (c == Criterion::U) {
                    prim += wx * expected_kth_largest<T>(row, 2);
                } else {
                    T sum(0);
                    for (const auto& p : row) sum += detail::expected_p(p);
                    prim += wx * (sum - emax);
                }
            }
            out.primary = prim;
            out.secondary = cred;
            return out;
        }
        case Criterion::OU: {
            T acc(0);
            for (ObjectId x = 0; x < q.n_objects; ++x) {
                const auto row = t.row(x);
                for (LabelId y = 0; y < ny; ++y) {
                    const T w = q.at(x, y);
                    if (!(w > T(0)) || ny < 2) continue;
                    acc += w * detail::expected_max_excluding(row, y);
                }
            }
            out.primary = acc;
            return out;
        }
        case Criterion::M:
        case Criterion::E: {
            T prim(0), empty(0);
            for (ObjectId x = 0; x < q.n_objects; ++x) {
                const T wx = q.object_marginal(x);
                std::vector<T> th(ny);
                for (LabelId y = 0; y < ny; ++y)
                    th[y] = membership_threshold(t.p(x, y), *epsilon);
                std::sort(th.begin(), th.end());
                // count(tau) >= k  <=>  tau > k-th smallest threshold
                empty += wx * th[0];
                if (c == Criterion::M) {
                    if (ny >= 2) prim += wx * (T(1) - th[1]);
                } else {
                    for (int k = 1; k < ny; ++k) prim += wx * (T(1) - th[k]);
                }
            }
            out.primary = prim;
            out.secondary = empty;
            out.secondary_dir = Direction::LargerBetter;
            return out;
        }
        case Criterion::OM: {
            T acc(0);
            for (ObjectId x = 0; x < q.n_objects; ++x) {
                std::vector<T> th(ny);
                for (LabelId y = 0; y < ny; ++y)
                    th[y] = membership_threshold(t.p(x, y), *epsilon);
                for (LabelId y = 0; y < ny; ++y) {
                    const T w = q.at(x, y);
                    if (!(w > T(0))) continue;
                    T tmin(1);
                    for (LabelId y2 = 0; y2 < ny; ++y2)
                        if (y2 != y && th[y2] < tmin) tmin = th[y2];
                    acc += w * (T(1) - tmin);
                }
            }
            out.primary = acc;
            return out;
        }
    }
    throw std::logic_error("unreachable criterion");
}

// Monte Carlo estimate of the primary (and secondary, where defined)
// component; the sampling oracle the exact engine is checked against.
struct McEstimate {
    double mean = 0;
    double stderr_ = 0;
    double secondary_mean = 0;
    double secondary_stderr = 0;
    bool has_secondary = false;
    std::size_t n = 0;
};

inline McEstimate evaluate_idealized_mc(const IdealizedTransducer<double>& t, Criterion c,
                                        std::optional<double> epsilon, std::size_t n_samples,
                                        std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    if (criterion_needs_epsilon(c) && !epsilon)
        throw MissingEpsilon("criterion requires a significance level");
    if (criterion_needs_two_labels(c) && t.joint.n_labels < 2)
        throw TooFewLabels("criterion needs at least two labels");
    if (c == Criterion::SPhi) throw std::invalid_argument("S_PHI has no MC sampler");

    const int ny = t.joint.n_labels;
    std::vector<double> cum(t.joint.probs.size());
    double run = 0;
    for (size_t i = 0; i < cum.size(); ++i) {
        run += t.joint.probs[i];
        cum[i] = run;
    }
    Rng rng = derive_rng(seed, 0x9c0ull);
    double s1 = 0, s2 = 0, q1 = 0, q2 = 0;
    bool has_secondary = c == Criterion::U || c == Criterion::F || c == Criterion::M ||
                         c == Criterion::E;
    std::vector<double> p(ny);
    for (std::size_t it = 0; it < n_samples; ++it) {
        const double u = rng.uniform01() * run;
        const size_t cell = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
        const ObjectId x = ObjectId(cell / ny);
        const LabelId y = LabelId(cell % ny);
        const double tau = rng.uniform01();
        for (LabelId yy = 0; yy < ny; ++yy) p[yy] = t.p(x, yy).at(tau);
        double stat = 0, sec = 0;
        switch (c) {
            case Criterion::S:
                for (double v : p) stat += v;
                break;
            case Criterion::N:
                for (double v : p) stat += v > *epsilon ? 1 : 0;
                break;
            case Criterion::U:
            case Criterion::F: {
                double m1 = -1, m2 = -1;
                for (double v : p) {
                    if (v > m1) { m2 = m1; m1 = v; }
                    else if (v > m2) m2 = v;
                }
                if (c == Criterion::U) stat = m2;
                else {
                    for (double v : p) stat += v;
                    stat -= m1;
                }
                sec = m1;
                break;
            }
            case Criterion::M:
            case Criterion::E: {
                int cnt = 0;
                for (double v : p) cnt += v > *epsilon ? 1 : 0;
                stat = c == Criterion::M ? (cnt > 1 ? 1 : 0) : std::max(cnt - 1, 0);
                sec = cnt == 0 ? 1 : 0;
                break;
            }
            case Criterion::OU: {
                double m = 0;
                for (LabelId yy = 0; yy < ny; ++yy)
                    if (yy != y) m = std::max(m, p[yy]);
                stat = m;
                break;
            }
            case Criterion::OF:
                for (LabelId yy = 0; yy < ny; ++yy)
                    if (yy != y) stat += p[yy];
                break;
            case Criterion::OM: {
                for (LabelId yy = 0; yy < ny; ++yy)
                    if (yy != y && p[yy] > *epsilon) { stat = 1; break; }
                break;
            }
            case Criterion::OE:
                for (LabelId yy = 0; yy < ny; ++yy)
                    if (yy != y && p[yy] > *epsilon) stat += 1;
                break;
            default:
                break;
        }
        s1 += stat;
        q1 += stat * stat;
        s2 += sec;
        q2 += sec * sec;
    }
    McEstimate est;
    est.n = n_samples;
    est.mean = s1 / double(n_samples);
    est.secondary_mean = s2 / double(n_samples);
    est.has_secondary = has_secondary;
    const double var1 = std::max(0.0, q1 / double(n_samples) - est.mean * est.mean);
    const double var2 = std::max(0.0, q2 / double(n_samples) - est.secondary_mean * est.secondary_mean);
    est.stderr_ = std::sqrt(var1 / double(n_samples));
    est.secondary_stderr = std::sqrt(var2 / double(n_samples));
    return est;
}

inline IdealizedTransducer<double> to_double(const IdealizedTransducer<Rational>& t) {
    IdealizedTransducer<double> d;
    d.joint.n_objects = t.joint.n_objects;
    d.joint.n_labels = t.joint.n_labels;
    d.joint.probs.reserve(t.joint.probs.size());
    for (const auto& v : t.joint.probs) d.joint.probs.push_back(to_double(v));
    d.order = t.order;
    d.mode = t.mode;
    d.pvals.reserve(t.pvals.size());
    for (const auto& p : t.pvals)
        d.pvals.push_back(AffinePValue<double>{to_double(p.intercept), to_double(p.slope)});
    return d;
}

// ---- empirical (finite-sample) evaluation ---------------------------------

// p-values for a batch of test objects; one shared tau per object.
struct PValueTable {
    int n_test = 0;
    int n_labels = 0;
    std::vector<double> p; // row-major: p[i * n_labels + y]
    std::vector<double> tau;
    std::uint64_t seed = 0;

    double at(int i, LabelId y) const { return p[size_t(i) * n_labels + y]; }
    double& at(int i, LabelId y) { return p[size_t(i) * n_labels + y]; }
};

inline CriterionValue<double> evaluate_empirical(Criterion c, const PValueTable& pv,
                                                 const std::vector<LabelId>* observed = nullptr,
                                                 std::optional<double> epsilon = std::nullopt,
                                                 const PhiFunction* phi = nullptr) {
    const int k = pv.n_test, ny = pv.n_labels;
    if (k <= 0) throw std::invalid_argument("empty p-value table");
    if (criterion_needs_epsilon(c)) {
        if (!epsilon) throw MissingEpsilon("criterion requires a significance level");
        (void)SignificanceLevel<double>(*epsilon);
    }
    if (criterion_is_observed(c)) {
        if (observed == nullptr || int(observed->size()) != k)
            throw MissingLabels("observed labels required for observed criteria");
    }
    if (criterion_needs_two_labels(c) && ny < 2)
        throw TooFewLabels("criterion needs at least two labels");

    CriterionValue<double> out;
    double prim = 0, sec = 0;
    for (int i = 0; i < k; ++i) {
        double sum = 0, m1 = -1, m2 = -1;
        int in_set = 0;
        for (LabelId y = 0; y < ny; ++y) {
            const double v = pv.at(i, y);
            sum += v;
            if (v > m1) { m2 = m1; m1 = v; }
            else if (v > m2) m2 = v;
            if (epsilon && v > *epsilon) ++in_set;
        }
        switch (c) {
            case Criterion::S: prim += sum; break;
            case Criterion::SPhi: {
                if (phi == nullptr || !phi->fn) { prim += sum; break; }
                for (LabelId y = 0; y < ny; ++y) prim += phi->fn(pv.at(i, y));
                break;
            }
            case Criterion::N: prim += in_set; break;
            case Criterion::U: prim += m2; sec += m1; break;
            case Criterion::F: prim += sum - m1; sec += m1; break;
            case Criterion::M: prim += in_set > 1 ? 1 : 0; sec += in_set == 0 ? 1 : 0; break;
            case Criterion::E: prim += std::max(in_set - 1, 0); sec += in_set == 0 ? 1 : 0; break;
            case Criterion::OU: {
                double m = 0;
                for (LabelId y = 0; y < ny; ++y)
                    if (y != (*observed)[i]) m = std::max(m, pv.at(i, y));
                prim += m;
                break;
            }
            case Criterion::OF: prim += sum - pv.at(i, (*observed)[i]); break;
            case Criterion::OM: {
                bool multiple = false;
                for (LabelId y = 0; y < ny && !multiple; ++y)
                    multiple = y != (*observed)[i] && pv.at(i, y) > *epsilon;
                prim += multiple ? 1 : 0;
                break;
            }
            case Criterion::OE: {
                for (LabelId y = 0; y < ny; ++y)
                    if (y != (*observed)[i] && pv.at(i, y) > *epsilon) prim += 1;
                break;
            }
        }
    }
    out.primary = prim / k;
    if (c == Criterion::U || c == Criterion::F) out.secondary = sec / k;
    if (c == Criterion::M || c == Criterion::E) {
        out.secondary = sec / k;
        out.secondary_dir = Direction::LargerBetter;
    }
    return out;
}

} // namespace conformal
