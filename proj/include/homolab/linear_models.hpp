#pragma once

#include <homolab/errors.hpp>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace homolab {

/// The three linear GNNs analysed in closed form.
enum class ModelKind {
    Homophilous1Layer,    // (A+I)XW
    Homophilous2Layer,    // (A+I)^2 XW
    HeterophilousConcat,  // (X || AX)W
};

inline std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::Homophilous1Layer: return "homophilous";
    case ModelKind::Homophilous2Layer: return "homophilous2";
    case ModelKind::HeterophilousConcat: return "concat";
    }
    return "unknown";
}

inline ModelKind parse_model_kind(const std::string& s) {
    if (s == "homophilous" || s == "homophilous1") return ModelKind::Homophilous1Layer;
    if (s == "homophilous2" || s == "two-layer") return ModelKind::Homophilous2Layer;
    if (s == "concat" || s == "heterophilous") return ModelKind::HeterophilousConcat;
    throw ValidationError("kind: unknown model kind '" + s + "'");
}

/// Binary two-pattern training setup: every training node has degree d, a share h
/// of same-class neighbors, and features (0.5 +- p, 0.5 -+ p).
struct TheorySetup {
    double h{0.5};
    double d{1.0};
    double p{0.25};
};

namespace detail {

// Relative threshold under which a reduced system counts as singular.
inline constexpr double kSingularTol = 1e-12;
inline constexpr double kMaxCondition = 1e12;

inline void validate_setup(const TheorySetup& s) {
    require(s.h >= 0.0 && s.h <= 1.0, "h: must lie in [0,1]");
    require(s.d >= 1.0 && std::floor(s.d) == s.d, "d: must be an integer >= 1");
    require(s.p >= 0.0 && s.p <= 0.5, "p: must lie in [0,0.5]");
}

// 1 + d(2h - 1) vanishing makes the homophilous reduced systems singular.
inline bool homophilous_denominator_vanishes(double h, double d) {
    return std::abs(1.0 + d * (2.0 * h - 1.0)) <= kSingularTol * std::max(1.0, d);
}

} // namespace detail

/// Class-0 features are (0.5+p, 0.5-p); class 1 swaps the entries.
inline Eigen::Vector2d theory_features(int cls, double p) {
    detail::require(cls == 0 || cls == 1, "class must be 0 or 1");
    detail::require(p >= 0.0 && p <= 0.5, "p: must lie in [0,0.5]");
    return cls == 0 ? Eigen::Vector2d(0.5 + p, 0.5 - p) : Eigen::Vector2d(0.5 - p, 0.5 + p);
}

namespace detail {

// Scalar of the reduced-system solves: IEEE quad, 113-bit significand.
using Real = boost::multiprecision::cpp_bin_float_quad;

template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec2 = Eigen::Matrix<T, 2, 1>;

template <typename T>
Vec2<T> derivation_features(int cls, const T& p) {
    const T hi = (T(1) + p) / 2;
    const T lo = (T(1) - p) / 2;
    return cls == 0 ? Vec2<T>(hi, lo) : Vec2<T>(lo, hi);
}

// Sum of the features of h*d same-class and (1-h)*d other-class neighbors.
template <typename T>
Vec2<T> neighbor_sum(int cls, const T& p, const T& d, const T& h_row) {
    return Vec2<T>(h_row * d * derivation_features(cls, p) +
                   (T(1) - h_row) * d * derivation_features(1 - cls, p));
}

// One (A+I) step over the two-pattern graph.
template <typename T>
Vec2<T> one_hop(int cls, const T& p, const T& d, const T& h_row) {
    return Vec2<T>(derivation_features(cls, p) + neighbor_sum(cls, p, d, h_row));
}

template <typename T>
Vec<T> aggregate_row(ModelKind kind, int cls, const T& p, const T& d, const T& h_row) {
    switch (kind) {
    case ModelKind::Homophilous1Layer:
        return one_hop(cls, p, d, h_row);
    case ModelKind::Homophilous2Layer: {
        const Vec2<T> same = one_hop(cls, p, d, h_row);
        const Vec2<T> other = one_hop(1 - cls, p, d, h_row);
        return Vec2<T>(same + h_row * d * same + (T(1) - h_row) * d * other);
    }
    case ModelKind::HeterophilousConcat: {
        Vec<T> row(4);
        row << derivation_features(cls, p), neighbor_sum(cls, p, d, h_row);
        return row;
    }
    }
    throw ValidationError("unknown model kind");
}

template <typename T>
Mat<T> reduced_system(ModelKind kind, const TheorySetup& s) {
    const T p(s.p), d(s.d), h(s.h);
    const Vec<T> r0 = aggregate_row<T>(kind, 0, p, d, h);
    const Vec<T> r1 = aggregate_row<T>(kind, 1, p, d, h);
    Mat<T> R(2, r0.size());
    R.row(0) = r0.transpose();
    R.row(1) = r1.transpose();
    return R;
}

template <typename T>
T b1(const T& h, const T& d) {
    return d / (T(1) + d * (T(2) * h - T(1)));
}

template <typename T>
T b1_prime(const T& h, const T& d) {
    const T x = T(2) * h - T(1);
    return d * d * x / (T(1) + d * d * x * x);
}

template <typename T>
T b2(const T& h, const T& d) {
    const T den = T(1) + d * (T(2) * h - T(1));
    return d / (den * den);
}

} // namespace detail

/// Feature vectors the closed-form rows are built from: (1+p, 1-p)/2 for class 0,
/// swapped for class 1.
inline Eigen::Vector2d derivation_features(int cls, double p) {
    detail::require(cls == 0 || cls == 1, "class must be 0 or 1");
    detail::require(p >= 0.0 && p <= 0.5, "p: must lie in [0,0.5]");
    return detail::derivation_features<double>(cls, p);
}

/// Aggregated representation of a node of class `cls` whose local homophily is
/// `h_row`, under the model's propagation. Rows are built by summing feature
/// vectors over the idealised neighborhood. For the 2-layer model the node's
/// neighbors share its local homophily.
inline Eigen::VectorXd aggregate_row(ModelKind kind, int cls, const TheorySetup& setup,
                                     double h_row) {
    detail::require(cls == 0 || cls == 1, "class must be 0 or 1");
    detail::require(h_row >= 0.0 && h_row <= 1.0, "h_row: must lie in [0,1]");
    detail::require(setup.p >= 0.0 && setup.p <= 0.5, "p: must lie in [0,0.5]");
    return detail::aggregate_row<double>(kind, cls, setup.p, setup.d, h_row);
}

/// Reduced two-row system: row c is the aggregated class-c training pattern.
inline Eigen::MatrixXd reduced_system(ModelKind kind, const TheorySetup& setup) {
    return detail::reduced_system<double>(kind, setup);
}

/// Weights solved from the unique training patterns.
struct ClosedFormModel {
    ModelKind kind{ModelKind::Homophilous1Layer};
    Eigen::MatrixXd weights;
    TheorySetup setup;
    detail::Mat<detail::Real> exact_weights;  // the solve itself, before rounding
};

/// Right pseudo-inverse R^T (R R^T)^{-1} of a full-row-rank 2-row matrix.
template <typename T>
detail::Mat<T> right_pseudo_inverse(const detail::Mat<T>& R) {
    detail::require(R.rows() == 2, "right_pseudo_inverse: expected 2 rows");
    const detail::Mat<T> gram = R * R.transpose();
    const double a = static_cast<double>(gram(0, 0));
    const double b = static_cast<double>(gram(0, 1));
    const double c = static_cast<double>(gram(1, 1));
    const double det = static_cast<double>(T(gram(0, 0) * gram(1, 1) - gram(0, 1) * gram(1, 0)));
    const double hi = 0.5 * (a + c) + std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    const double lo = hi > 0.0 ? det / hi : 0.0;
    if (!(lo > 0.0) || hi / lo >= detail::kMaxCondition) {
        throw DegenerateError("degenerate setup: R R^T is singular or ill-conditioned");
    }
    return R.transpose() * gram.inverse();
}

/// Solves R W = I on the two class patterns. The homophilous models use the
/// exact 2x2 inverse; the concatenation model uses the minimum-norm right
/// pseudo-inverse.
inline ClosedFormModel solve(ModelKind kind, const TheorySetup& setup) {
    using detail::Real;
    detail::validate_setup(setup);
    if (setup.p == 0.0) throw DegenerateError("degenerate setup: p = 0 makes classes identical");
    const detail::Mat<Real> R = detail::reduced_system<Real>(kind, setup);
    ClosedFormModel model{kind, {}, setup, {}};
    if (kind == ModelKind::HeterophilousConcat) {
        model.exact_weights = right_pseudo_inverse(R);
    } else {
        const Real det = R(0, 0) * R(1, 1) - R(0, 1) * R(1, 0);
        const Real scale = R.cwiseAbs().maxCoeff();
        if (abs(det) <= Real(detail::kSingularTol) * scale * scale ||
            detail::homophilous_denominator_vanishes(setup.h, setup.d)) {
            throw DegenerateError("degenerate setup: 1 + d(2h-1) = 0");
        }
        detail::Mat<Real> inv(2, 2);
        inv << R(1, 1), -R(0, 1), -R(1, 0), R(0, 0);
        model.exact_weights = inv / det;
    }
    model.weights = model.exact_weights.cast<double>();
    return model;
}
/// Closed-form optimum of the 1-layer homophilous model, c1 * [[a, b], [b, a]].
inline Eigen::Matrix2d homophilous_closed_form_weights(const TheorySetup& s) {
    const double h = s.h, d = s.d, p = s.p;
    const double denom = 2.0 * (p - d * d * p + 2.0 * d * h * p + 2.0 * d * d * h * p);
    if (denom == 0.0 || detail::homophilous_denominator_vanishes(h, d)) {
        throw DegenerateError("degenerate setup: c1 is singular");
    }
    const double c1 = 1.0 / denom;
    const double a = 1.0 + d + p + d * p * (2.0 * h - 1.0);
    const double b = -1.0 + p - d * (1.0 + p - 2.0 * h * p);
    Eigen::Matrix2d W;
    W << a, b, b, a;
    return c1 * W;
}

namespace detail {

inline Vec<Real> predict_shifted_exact(const ClosedFormModel& model, double alpha) {
    Real h_row = Real(model.setup.h) + Real(alpha);
    require(h_row >= Real(-1e-12) && h_row <= Real(1.0 + 1e-12), "alpha: h + alpha must lie in [0,1]");
    h_row = h_row < Real(0) ? Real(0) : (h_row > Real(1) ? Real(1) : h_row);
    const Vec<Real> row = aggregate_row<Real>(model.kind, 0, Real(model.setup.p), Real(model.setup.d), h_row);
    return model.exact_weights.transpose() * row;
}

} // namespace detail

/// Logits of a class-0 test node whose local homophily is h + alpha.
inline Eigen::Vector2d predict_shifted(const ClosedFormModel& model, double alpha) {
    return detail::predict_shifted_exact(model, alpha).cast<double>();
}

/// Argmax with ties going to the lowest index.
template <typename Vec>
int predicted_class(const Vec& z) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(z.size()); ++i) {
        if (z[i] > z[best]) best = i;
    }
    return best;
}

/// b1 = d / (1 + d(2h-1)).
inline double homophilous_coefficient(double h, double d) {
    if (detail::homophilous_denominator_vanishes(h, d)) {
        throw DegenerateError("degenerate setup: 1 + d(2h-1) = 0");
    }
    return detail::b1(h, d);
}

/// b1' = d^2 (2h-1) / (1 + d^2 (2h-1)^2).
inline double concat_coefficient(double h, double d) { return detail::b1_prime(h, d); }

/// b2 = d / (1 + d(2h-1))^2.
inline double two_layer_coefficient(double h, double d) {
    if (detail::homophilous_denominator_vanishes(h, d)) {
        throw DegenerateError("degenerate setup: 1 + d(2h-1) = 0");
    }
    return detail::b2(h, d);
}

/// Perturbation coefficient of the model: b1, b1' or b2.
inline double coefficient(ModelKind kind, const TheorySetup& s) {
    switch (kind) {
    case ModelKind::Homophilous1Layer: return homophilous_coefficient(s.h, s.d);
    case ModelKind::Homophilous2Layer: return two_layer_coefficient(s.h, s.d);
    case ModelKind::HeterophilousConcat: return concat_coefficient(s.h, s.d);
    }
    throw ValidationError("unknown model kind");
}

namespace detail {

template <typename T>
T effective_coefficient(ModelKind kind, const TheorySetup& s, double alpha) {
    const T h(s.h), d(s.d), a(alpha);
    switch (kind) {
    case ModelKind::Homophilous1Layer: return b1(h, d);
    case ModelKind::Homophilous2Layer: return T(2) * (T(1) + d * (T(2) * h - T(1) + a)) * b2(h, d);
    case ModelKind::HeterophilousConcat: return b1_prime(h, d);
    }
    throw ValidationError("unknown model kind");
}

} // namespace detail

/// Scalar multiplying (alpha, -alpha) in the logit change at shift alpha.
inline double effective_coefficient(ModelKind kind, const TheorySetup& s, double alpha) {
    if (kind != ModelKind::HeterophilousConcat && detail::homophilous_denominator_vanishes(s.h, s.d)) {
        throw DegenerateError("degenerate setup: 1 + d(2h-1) = 0");
    }
    return static_cast<double>(detail::effective_coefficient<detail::Real>(kind, s, alpha));
}

/// Closed-form ratio of the 2-layer to the 1-layer logit change.
inline double two_layer_ratio(const TheorySetup& s, double alpha) {
    if (detail::homophilous_denominator_vanishes(s.h, s.d)) {
        throw DegenerateError("degenerate setup: 1 + d(2h-1) = 0");
    }
    using detail::Real;
    const Real h(s.h), d(s.d), a(alpha);
    return static_cast<double>(Real(2) * (Real(1) + d * (Real(2) * h - Real(1) + a)) /
                               (Real(1) + d * (Real(2) * h - Real(1))));
}

struct TheoremCheck {
    ModelKind kind{};
    TheorySetup setup;
    double alpha{};
    double coefficient{};  // b1, b1', or 2(1 + d(2h-1+alpha)) b2
    Eigen::Vector2d predicted_delta{Eigen::Vector2d::Zero()};
    Eigen::Vector2d observed_delta{Eigen::Vector2d::Zero()};
    double residual{};
    int class_at_zero{};
    int class_at_alpha{};
};

/// Compares the solved model's logit change at shift alpha with the closed form.
inline TheoremCheck verify_theorem(ModelKind kind, const TheorySetup& setup, double alpha) {
    using detail::Real;
    const ClosedFormModel model = solve(kind, setup);
    const detail::Vec<Real> z0 = detail::predict_shifted_exact(model, 0.0);
    const detail::Vec<Real> za = detail::predict_shifted_exact(model, alpha);
    const Real coef = detail::effective_coefficient<Real>(kind, setup, alpha);
    TheoremCheck check;
    check.kind = kind;
    check.setup = setup;
    check.alpha = alpha;
    check.coefficient = static_cast<double>(coef);
    check.predicted_delta = Eigen::Vector2d(static_cast<double>(coef * Real(alpha)),
                                            static_cast<double>(-coef * Real(alpha)));
    const detail::Vec<Real> observed = za - z0;
    check.observed_delta = observed.cast<double>();
    const Real r0 = abs(coef * Real(alpha) - observed(0));
    const Real r1 = abs(-coef * Real(alpha) - observed(1));
    check.residual = static_cast<double>(r0 > r1 ? r0 : r1);
    check.class_at_zero = predicted_class(z0);
    check.class_at_alpha = predicted_class(za);
    return check;
}

// Coefficient comparison grid.

struct CoefficientRow {
    double d{};
    double h{};
    double b1{};       // +inf when degenerate
    double bprime1{};
    double diff{};     // |b1'| - |b1|; -inf when degenerate
    bool degenerate{};
};

/// Degrees used for the published coefficient comparison.
inline std::vector<double> default_grid_degrees() { return {1, 5, 10, 15, 20, 25}; }

/// |b1'| - |b1| over every d in `d_values` and h = 0, step, 2 step, ..., 1.
/// Points where b1's denominator vanishes are flagged; |b1| is taken as +inf.
inline std::vector<CoefficientRow> coefficient_grid(std::span<const double> d_values,
                                                    double h_step) {
    detail::require(h_step > 0.0 && h_step <= 1.0, "h_step: must lie in (0,1]");
    const auto steps = static_cast<long>(std::llround(1.0 / h_step));
    detail::require(std::abs(static_cast<double>(steps) * h_step - 1.0) < 1e-9,
                    "h_step: must divide 1");
    std::vector<CoefficientRow> rows;
    rows.reserve(d_values.size() * static_cast<std::size_t>(steps + 1));
    for (double d : d_values) {
        detail::require(d > 0.0, "d: grid degrees must be positive");
        for (long i = 0; i <= steps; ++i) {
            CoefficientRow row;
            row.d = d;
            row.h = static_cast<double>(i) / static_cast<double>(steps);
            row.bprime1 = concat_coefficient(row.h, d);
            row.degenerate = detail::homophilous_denominator_vanishes(row.h, d);
            if (row.degenerate) {
                row.b1 = std::numeric_limits<double>::infinity();
                row.diff = -std::numeric_limits<double>::infinity();
            } else {
                row.b1 = homophilous_coefficient(row.h, d);
                row.diff = std::abs(row.bprime1) - std::abs(row.b1);
            }
            rows.push_back(row);
        }
    }
    return rows;
}

// Regime classification.

enum class Regime {
    StrongHeterophily,  // h < 0.5 and d(2h-1) < -1: b1 < 0
    WeakHeterophily,    // h < 0.5 and d(2h-1) > -1: b1 > 0
    Mixed,              // h = 0.5: b1 = d
    Homophily,          // h > 0.5: b1 > 0
};

enum class Degradation {
    AsLocalHomophilyIncreases,
    AsLocalHomophilyDecreases,
};

inline std::string to_string(Regime r) {
    switch (r) {
    case Regime::StrongHeterophily: return "strong-heterophily";
    case Regime::WeakHeterophily: return "weak-heterophily";
    case Regime::Mixed: return "mixed";
    case Regime::Homophily: return "homophily";
    }
    return "unknown";
}

inline std::string to_string(Degradation d) {
    return d == Degradation::AsLocalHomophilyIncreases ? "degrades as local homophily increases"
                                                       : "degrades as local homophily decreases";
}

struct SettingsReport {
    Regime regime{};
    double b1{};
    Degradation degrades{};
    /// Shift at which the class-0 prediction would flip, -1/(2 b1).
    double flip_alpha{};
    /// Whether that shift lies inside [-h, 1-h].
    bool flip_reachable{};
};

/// Classifies the 1-layer homophilous model's regime. Raw direction only: the
/// class-0 logit moves by b1 * alpha, so the prediction worsens as alpha moves
/// against the sign of b1.
inline SettingsReport settings_report(const TheorySetup& setup) {
    detail::validate_setup(setup);
    SettingsReport out;
    out.b1 = homophilous_coefficient(setup.h, setup.d);
    const double tilt = setup.d * (2.0 * setup.h - 1.0);
    if (std::abs(setup.h - 0.5) <= 1e-12) {
        out.regime = Regime::Mixed;
    } else if (setup.h > 0.5) {
        out.regime = Regime::Homophily;
    } else {
        out.regime = tilt < -1.0 ? Regime::StrongHeterophily : Regime::WeakHeterophily;
    }
    out.degrades = out.b1 < 0.0 ? Degradation::AsLocalHomophilyIncreases
                                : Degradation::AsLocalHomophilyDecreases;
    out.flip_alpha = -1.0 / (2.0 * out.b1);
    out.flip_reachable = out.flip_alpha >= -setup.h && out.flip_alpha <= 1.0 - setup.h;
    return out;
}

} // namespace homolab
