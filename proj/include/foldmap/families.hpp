#pragma once

// Concrete map families (tent, quadratic, cubic, stunted sawtooth), the
// parameter polytope P^m, conversions between critical-value vectors and
// p-parameters, and itinerary / kneading extraction.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "foldmap/symbolic.hpp"

namespace foldmap {

struct RealInterval {
    double a = 0.0;
    double b = 1.0;

    RealInterval() = default;
    RealInterval(double a_, double b_) : a(a_), b(b_) {
        if (!(a < b)) throw ConstraintError("interval needs a < b");
    }
    double length() const { return b - a; }
    bool contains(double x, double slack = 0.0) const { return x >= a - slack && x <= b + slack; }
};

// ---------------------------------------------------------------------------
// Parameter polytope P^m: p in [0,1]^m with p_i + p_{i+1} >= 1.
// ---------------------------------------------------------------------------
class ParamVector {
public:
    explicit ParamVector(std::vector<double> p);

    int modality() const { return static_cast<int>(p_.size()); }
    double operator[](int i) const { return p_.at(static_cast<std::size_t>(i)); }
    const std::vector<double>& values() const { return p_; }

    // Relative image lengths Delta_0..Delta_m.
    std::vector<double> relative_lengths() const;

    static bool in_polytope(const std::vector<double>& p, double eps = 1e-12);

private:
    std::vector<double> p_;
};

// All 0/1 vertices of P^m (no two consecutive zeros), lexicographic.
std::vector<ParamVector> polytope_vertices(int m);

// ---------------------------------------------------------------------------
// Critical (folding) value vectors, constrained by the weak inequality
// sigma_i (v_{i+1} - v_i) >= 0.
// ---------------------------------------------------------------------------
class CriticalValueVector {
public:
    CriticalValueVector(std::vector<double> v, Shape shape);

    const std::vector<double>& values() const { return v_; }
    const Shape& shape() const { return shape_; }
    int modality() const { return static_cast<int>(v_.size()); }
    double operator[](int i) const { return v_.at(static_cast<std::size_t>(i)); }

    // Strict interior inequalities (2').
    bool strictly_interior() const;
    // Weak inequalities extended with the boundary anchors (Eq. 5 values).
    bool extended_weak(RealInterval domain) const;

private:
    std::vector<double> v_;
    Shape shape_;
};

ParamVector p_from_v(const CriticalValueVector& v, RealInterval domain);
CriticalValueVector v_from_p(const ParamVector& p, const Shape& shape, RealInterval domain);

// ---------------------------------------------------------------------------
// IntervalMap
// ---------------------------------------------------------------------------
enum class Family { Tent, Quadratic, Cubic, StuntedSawtooth };

const char* family_name(Family f);
Family family_from_name(std::string_view name);

class IntervalMap {
public:
    Family family() const { return family_; }
    const Shape& shape() const { return shape_; }
    RealInterval domain() const { return dom_; }
    int modality() const { return shape_.modality(); }

    const std::vector<double>& folding_points() const { return folds_; }
    std::vector<double> folding_values() const;

    double operator()(double x) const;

    bool piecewise_linear() const {
        return family_ == Family::Tent || family_ == Family::StuntedSawtooth;
    }

    // Cubic coefficients in descending degree order; Cubic maps only.
    std::array<double, 4> cubic_coefficients() const;

    // Unimodal folding value (Tent / Quadratic only).
    double unimodal_value() const;

    // Breakpoints of the graph for piecewise-linear maps (domain coords,
    // including the endpoints and plateau edges).
    std::vector<double> linear_breakpoints() const;

    // --- exact stunted-sawtooth core (fixed-denominator integer arithmetic) ---
    bool exact() const { return family_ == Family::StuntedSawtooth; }
    std::int64_t exact_den() const { return den_; }
    std::int64_t exact_fold_num(int j) const;    // designated fold c_j, 1-based
    std::int64_t to_exact(double x) const;       // nearest representable point
    double from_exact(std::int64_t num) const;
    std::int64_t eval_exact(std::int64_t num) const;
    // Address of an exact point: fold index j (>=1) when num equals the
    // designated folding point, otherwise -(lap index)-1.
    int address_exact(std::int64_t num) const;

    friend IntervalMap make_family_map(Family, const Shape&, const ParamVector&, RealInterval);
    friend IntervalMap cubic_from_critical_values(const Shape&, const CriticalValueVector&,
                                                  RealInterval);

private:
    IntervalMap() = default;

    Family family_ = Family::Tent;
    Shape shape_ = Shape(1, 1);
    RealInterval dom_{0.0, 1.0};
    std::vector<double> folds_;

    std::array<double, 4> coef_{};  // cubic
    double v_ = 0.0;                // tent / quadratic folding value

    // sawtooth core: normalized coordinates n/den_ over [0,1]
    std::int64_t den_ = 0;
    std::vector<std::int64_t> fold_num_;    // designated folds, size m
    std::vector<std::int64_t> level_num_;   // stunt levels v_1..v_m
    std::vector<std::int64_t> lap_lo_, lap_hi_, lap_tip_;  // per lap clamp bounds & left tip
};

IntervalMap make_family_map(Family family, const Shape& shape, const ParamVector& p,
                            RealInterval domain);

// The unique boundary-anchored cubic with the given critical values (m = 2).
// Degenerate inputs (equality in the weak inequality) return the limiting
// cubic with a double critical point.
IntervalMap cubic_from_critical_values(const Shape& shape, const CriticalValueVector& v,
                                       RealInterval domain);

// ---------------------------------------------------------------------------
// Itineraries and kneading data
// ---------------------------------------------------------------------------
double default_address_tol(const IntervalMap& map);

SymbolWord itinerary(const IntervalMap& map, double x, std::size_t depth, double tol = -1.0);

KneadingData kneading_data_of(const IntervalMap& map, std::size_t depth, double tol = -1.0);

}  // namespace foldmap
