#include "foldmap/families.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace foldmap {

namespace {
constexpr double kPolytopeEps = 1e-12;
constexpr std::int64_t kExactScale = 1ll << 53;
}

// ---------------------------------------------------------------------------
// ParamVector / polytope
// ---------------------------------------------------------------------------
ParamVector::ParamVector(std::vector<double> p) : p_(std::move(p)) {
    if (p_.empty()) throw ConstraintError("parameter vector must be non-empty");
    if (!in_polytope(p_))
        throw ConstraintError("parameter vector outside the polytope P^m");
}

bool ParamVector::in_polytope(const std::vector<double>& p, double eps) {
    for (double x : p)
        if (!(x >= -eps && x <= 1.0 + eps)) return false;
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
        if (!(p[i] + p[i + 1] >= 1.0 - eps)) return false;
    return true;
}

std::vector<double> ParamVector::relative_lengths() const {
    const int m = modality();
    std::vector<double> d(static_cast<std::size_t>(m) + 1);
    d[0] = p_[0];
    for (int j = 1; j < m; ++j) d[static_cast<std::size_t>(j)] = p_[static_cast<std::size_t>(j - 1)] + p_[static_cast<std::size_t>(j)] - 1.0;
    d[static_cast<std::size_t>(m)] = p_[static_cast<std::size_t>(m - 1)];
    return d;
}

std::vector<ParamVector> polytope_vertices(int m) {
    if (m < 1) throw ConstraintError("polytope_vertices needs m >= 1");
    std::vector<ParamVector> out;
    for (std::uint64_t mask = 0; mask < (1ull << m); ++mask) {
        std::vector<double> p(static_cast<std::size_t>(m));
        bool ok = true;
        for (int i = 0; i < m; ++i)
            p[static_cast<std::size_t>(i)] = (mask >> (m - 1 - i)) & 1 ? 1.0 : 0.0;
        for (int i = 0; i + 1 < m; ++i)
            if (p[static_cast<std::size_t>(i)] == 0.0 && p[static_cast<std::size_t>(i + 1)] == 0.0) ok = false;
        if (ok) out.emplace_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CriticalValueVector and the p <-> v conversion
// ---------------------------------------------------------------------------
CriticalValueVector::CriticalValueVector(std::vector<double> v, Shape shape)
    : v_(std::move(v)), shape_(std::move(shape)) {
    if (static_cast<int>(v_.size()) != shape_.modality())
        throw ConstraintError("critical value count must equal modality");
    double scale = 1.0;
    for (double x : v_) scale = std::max(scale, std::fabs(x));
    for (std::size_t i = 0; i + 1 < v_.size(); ++i) {
        double d = shape_.sign(static_cast<int>(i) + 1) == 1 ? (v_[i + 1] - v_[i]) : (v_[i] - v_[i + 1]);
        // sigma_i (v_{i+1} - v_i) >= 0 with sigma_i read at the lap between c_i, c_{i+1}
        if (d < -1e-9 * scale)
            throw ConstraintError("critical values violate the weak folding inequality");
    }
}

bool CriticalValueVector::strictly_interior() const {
    for (std::size_t i = 0; i + 1 < v_.size(); ++i) {
        double d = shape_.sign(static_cast<int>(i) + 1) == 1 ? (v_[i + 1] - v_[i]) : (v_[i] - v_[i + 1]);
        if (!(d > 0.0)) return false;
    }
    return true;
}

bool CriticalValueVector::extended_weak(RealInterval dom) const {
    const int m = modality();
    std::vector<double> ext;
    ext.push_back(shape_.sign(0) == 1 ? dom.a : dom.b);
    for (double x : v_) ext.push_back(x);
    ext.push_back(shape_.sign(m) == 1 ? dom.b : dom.a);
    for (int i = 0; i <= m; ++i) {
        double d = shape_.sign(i) == 1 ? (ext[static_cast<std::size_t>(i) + 1] - ext[static_cast<std::size_t>(i)])
                                       : (ext[static_cast<std::size_t>(i)] - ext[static_cast<std::size_t>(i) + 1]);
        if (d < -1e-9 * dom.length()) return false;
    }
    return true;
}

ParamVector p_from_v(const CriticalValueVector& v, RealInterval dom) {
    const int m = v.modality();
    const double L = dom.length();
    std::vector<double> p(static_cast<std::size_t>(m));
    for (int i = 1; i <= m; ++i) {
        double x = v[i - 1];
        if (!dom.contains(x, 1e-9 * L))
            throw ConstraintError("critical value outside the domain interval");
        // p_i measures the reach of the folding value in the folding direction:
        // distance from a at a local maximum (sigma_i = -1), from b at a minimum.
        double pi = v.shape().sign(i) == -1 ? (x - dom.a) / L : (dom.b - x) / L;
        p[static_cast<std::size_t>(i - 1)] = std::clamp(pi, 0.0, 1.0);
    }
    return ParamVector(std::move(p));
}

CriticalValueVector v_from_p(const ParamVector& p, const Shape& shape, RealInterval dom) {
    if (p.modality() != shape.modality())
        throw ConstraintError("parameter vector modality must match shape");
    const double L = dom.length();
    std::vector<double> v(static_cast<std::size_t>(p.modality()));
    for (int i = 1; i <= p.modality(); ++i)
        v[static_cast<std::size_t>(i - 1)] =
            shape.sign(i) == -1 ? dom.a + L * p[i - 1] : dom.b - L * p[i - 1];
    return CriticalValueVector(std::move(v), shape);
}

// ---------------------------------------------------------------------------
// Family names
// ---------------------------------------------------------------------------
const char* family_name(Family f) {
    switch (f) {
        case Family::Tent: return "tent";
        case Family::Quadratic: return "quadratic";
        case Family::Cubic: return "cubic";
        case Family::StuntedSawtooth: return "sawtooth";
    }
    return "?";
}

Family family_from_name(std::string_view name) {
    if (name == "tent") return Family::Tent;
    if (name == "quadratic") return Family::Quadratic;
    if (name == "cubic") return Family::Cubic;
    if (name == "sawtooth" || name == "stunted-sawtooth") return Family::StuntedSawtooth;
    throw ConstraintError("unknown family: " + std::string(name));
}

// ---------------------------------------------------------------------------
// IntervalMap evaluation
// ---------------------------------------------------------------------------
std::vector<double> IntervalMap::folding_values() const {
    std::vector<double> out;
    out.reserve(folds_.size());
    for (double c : folds_) out.push_back((*this)(c));
    return out;
}

std::array<double, 4> IntervalMap::cubic_coefficients() const {
    if (family_ != Family::Cubic) throw ConstraintError("not a cubic map");
    return coef_;
}

double IntervalMap::unimodal_value() const {
    if (family_ != Family::Tent && family_ != Family::Quadratic)
        throw ConstraintError("unimodal_value applies to tent/quadratic maps");
    return v_;
}

double IntervalMap::operator()(double x) const {
    const double L = dom_.length();
    switch (family_) {
        case Family::Tent: {
            double u = (x - dom_.a) / L;
            return dom_.a + L * (2.0 * v_ * std::min(u, 1.0 - u));
        }
        case Family::Quadratic: {
            double u = (x - dom_.a) / L;
            return dom_.a + L * (4.0 * v_ * u * (1.0 - u));
        }
        case Family::Cubic: {
            double y = ((coef_[0] * x + coef_[1]) * x + coef_[2]) * x + coef_[3];
            return std::clamp(y, dom_.a, dom_.b);
        }
        case Family::StuntedSawtooth:
            return from_exact(eval_exact(to_exact(x)));
    }
    return x;
}

std::int64_t IntervalMap::exact_fold_num(int j) const {
    if (!exact() || j < 1 || j > modality())
        throw ConstraintError("exact_fold_num: bad fold index or not a sawtooth map");
    return fold_num_[static_cast<std::size_t>(j - 1)];
}

std::int64_t IntervalMap::to_exact(double x) const {
    double u = (x - dom_.a) / dom_.length();
    return std::llround(std::clamp(u, 0.0, 1.0) * static_cast<double>(den_));
}

double IntervalMap::from_exact(std::int64_t num) const {
    return dom_.a + dom_.length() * (static_cast<double>(num) / static_cast<double>(den_));
}

std::int64_t IntervalMap::eval_exact(std::int64_t num) const {
    const int m = shape_.modality();
    // locate lap: fold_num_ ascending; lap j spans [edge_j, edge_{j+1}]
    int lap = 0;
    while (lap < m && num > fold_num_[static_cast<std::size_t>(lap)]) ++lap;
    // base value: tip_j + sigma_j * (m+1) * (num - lap_left_edge)
    std::int64_t left = lap == 0 ? 0 : fold_num_[static_cast<std::size_t>(lap - 1)];
    std::int64_t base = lap_tip_[static_cast<std::size_t>(lap)] +
                        static_cast<std::int64_t>(shape_.sign(lap)) * (m + 1) * (num - left);
    return std::clamp(base, lap_lo_[static_cast<std::size_t>(lap)], lap_hi_[static_cast<std::size_t>(lap)]);
}

int IntervalMap::address_exact(std::int64_t num) const {
    const int m = shape_.modality();
    for (int j = 0; j < m; ++j)
        if (num == fold_num_[static_cast<std::size_t>(j)]) return j + 1;
    int lap = 0;
    while (lap < m && num > fold_num_[static_cast<std::size_t>(lap)]) ++lap;
    return -lap - 1;
}

std::vector<double> IntervalMap::linear_breakpoints() const {
    std::vector<double> xs{dom_.a};
    if (family_ == Family::Tent) {
        xs.push_back(folds_[0]);
    } else if (family_ == Family::StuntedSawtooth) {
        const int m = shape_.modality();
        for (int j = 0; j < m; ++j) {
            // plateau edges around fold j at slope m+1
            std::int64_t fn = fold_num_[static_cast<std::size_t>(j)];
            int lap_left = j;  // lap to the left of fold j has index j
            std::int64_t tip = lap_tip_[static_cast<std::size_t>(j + 1)];  // value at the fold on lap j+1's left edge
            std::int64_t lev = level_num_[static_cast<std::size_t>(j)];
            std::int64_t half = std::llabs(tip - lev) / (m + 1);
            (void)lap_left;
            if (half > 0) {
                xs.push_back(from_exact(fn - half));
                xs.push_back(from_exact(fn + half));
            } else {
                xs.push_back(from_exact(fn));
            }
        }
    } else {
        throw ConstraintError("linear_breakpoints applies to piecewise-linear maps");
    }
    xs.push_back(dom_.b);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------
namespace {

IntervalMap make_sawtooth(const Shape& shape, const ParamVector& p, RealInterval dom);

}  // namespace

IntervalMap make_family_map(Family family, const Shape& shape, const ParamVector& p,
                            RealInterval dom) {
    const int m = shape.modality();
    if (p.modality() != m)
        throw ConstraintError("parameter count must equal shape modality");

    switch (family) {
        case Family::Tent:
        case Family::Quadratic: {
            if (m != 1 || shape.sign(0) != 1)
                throw ConstraintError("tent/quadratic families require shape (+,-)");
            IntervalMap map;
            map.family_ = family;
            map.shape_ = shape;
            map.dom_ = dom;
            map.v_ = p[0];
            map.folds_ = {dom.a + 0.5 * dom.length()};
            return map;
        }
        case Family::Cubic: {
            if (m != 2) throw ConstraintError("cubic family requires m = 2");
            return cubic_from_critical_values(shape, v_from_p(p, shape, dom), dom);
        }
        case Family::StuntedSawtooth:
            return make_sawtooth(shape, p, dom);
    }
    throw ConstraintError("unknown family");
}

namespace {

IntervalMap make_sawtooth(const Shape& shape, const ParamVector& p, RealInterval dom) {
    const int m = shape.modality();
    IntervalMap map;
    map.family_ = Family::StuntedSawtooth;
    map.shape_ = shape;
    map.dom_ = dom;
    map.den_ = static_cast<std::int64_t>(m + 1) * kExactScale;

    // designated folds at j/(m+1); stunt levels from the critical values
    CriticalValueVector v = v_from_p(p, shape, RealInterval(0.0, 1.0));
    map.fold_num_.resize(static_cast<std::size_t>(m));
    map.level_num_.resize(static_cast<std::size_t>(m));
    map.folds_.resize(static_cast<std::size_t>(m));
    for (int j = 1; j <= m; ++j) {
        map.fold_num_[static_cast<std::size_t>(j - 1)] = static_cast<std::int64_t>(j) * kExactScale;
        map.level_num_[static_cast<std::size_t>(j - 1)] =
            std::llround(v[j - 1] * static_cast<double>(map.den_));
        map.folds_[static_cast<std::size_t>(j - 1)] =
            dom.a + dom.length() * (static_cast<double>(j) / (m + 1));
    }

    // per-lap data: base tips alternate between the boundary values 0/1,
    // clamping bounds come from the stunt levels (or the anchors).
    map.lap_tip_.resize(static_cast<std::size_t>(m) + 1);
    map.lap_lo_.resize(static_cast<std::size_t>(m) + 1);
    map.lap_hi_.resize(static_cast<std::size_t>(m) + 1);
    auto tip_at = [&](int j) -> std::int64_t {
        // base value at c_j (j = 0..m+1, boundaries included): a local max tip is 1
        if (j == 0) return shape.sign(0) == 1 ? 0 : map.den_;
        if (j == m + 1) return shape.sign(m) == 1 ? map.den_ : 0;
        return shape.sign(j) == -1 ? map.den_ : 0;  // falling out of c_j => max
    };
    auto level_at = [&](int j) -> std::int64_t {
        if (j == 0) return tip_at(0);          // boundary anchor, not stunted
        if (j == m + 1) return tip_at(m + 1);
        return map.level_num_[static_cast<std::size_t>(j - 1)];
    };
    for (int lap = 0; lap <= m; ++lap) {
        map.lap_tip_[static_cast<std::size_t>(lap)] = tip_at(lap);
        std::int64_t l = level_at(lap), r = level_at(lap + 1);
        map.lap_lo_[static_cast<std::size_t>(lap)] = std::min(l, r);
        map.lap_hi_[static_cast<std::size_t>(lap)] = std::max(l, r);
    }
    return map;
}

// --- cubic solver -----------------------------------------------------------

struct CubicWork {
    double a, b, v0, v3, dv;
    double G(double x, double c1, double c2) const {
        auto H = [&](double t) { return t * t * t / 3.0 - (c1 + c2) * t * t / 2.0 + c1 * c2 * t; };
        return H(x) - H(a);
    }
    double dG_dc1(double x, double c2) const {
        return -((x * x - a * a) / 2.0 - c2 * (x - a));
    }
    // f(x) = v0 + dv * G(x)/G(b)
    double f(double x, double c1, double c2) const { return v0 + dv * G(x, c1, c2) / G(b, c1, c2); }
};

IntervalMap finish_cubic(const Shape& shape, RealInterval dom, double v0, double c1, double c2,
                         double k) {
    IntervalMap map;
    map.family_ = Family::Cubic;
    map.shape_ = shape;
    map.dom_ = dom;
    map.folds_ = {c1, c2};
    const double a = dom.a;
    double H_a = a * a * a / 3.0 - (c1 + c2) * a * a / 2.0 + c1 * c2 * a;
    map.coef_ = {k, -1.5 * k * (c1 + c2), 3.0 * k * c1 * c2, v0 - 3.0 * k * H_a};
    return map;
}

// Degenerate branch: equal critical values produce the limiting cubic with a
// double critical point c, f(x) = k (x-c)^3 + w.
IntervalMap cubic_double_fold(const Shape& shape, RealInterval dom, double w) {
    const double a = dom.a, b = dom.b;
    const double v0 = shape.sign(0) == 1 ? a : b;
    const double v3 = shape.sign(2) == 1 ? b : a;
    // solve (v0-w)(b-c)^3 = (v3-w)(a-c)^3 for c in [a,b]
    auto phi = [&](double c) {
        auto cube = [](double t) { return t * t * t; };
        return (v0 - w) * cube(b - c) - (v3 - w) * cube(a - c);
    };
    double lo = a, hi = b;
    double plo = phi(lo);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if ((phi(mid) <= 0.0) == (plo <= 0.0)) { lo = mid; plo = phi(mid); }
        else hi = mid;
    }
    double c = 0.5 * (lo + hi);
    double k = (c - a > b - c) ? (v0 - w) / ((a - c) * (a - c) * (a - c))
                               : (v3 - w) / ((b - c) * (b - c) * (b - c));
    IntervalMap map;
    map.family_ = Family::Cubic;
    map.shape_ = shape;
    map.dom_ = dom;
    map.folds_ = {c, c};
    map.coef_ = {k, -3.0 * k * c, 3.0 * k * c * c, w - k * c * c * c};
    return map;
}

bool newton_2d(const CubicWork& W, double v1, double v2, double& c1, double& c2, int max_iter,
               double tol) {
    auto residual = [&](double x1, double x2, double& r1, double& r2, bool& feasible) {
        double gb = W.G(W.b, x1, x2);
        feasible = (W.dv > 0 ? gb > 0 : gb < 0) || true;  // gb sign checked via k below
        if (gb == 0.0) { feasible = false; r1 = r2 = 1e30; return; }
        r1 = W.v0 + W.dv * W.G(x1, x1, x2) / gb - v1;
        r2 = W.v0 + W.dv * W.G(x2, x1, x2) / gb - v2;
    };
    double r1, r2;
    bool feas;
    residual(c1, c2, r1, r2, feas);
    for (int it = 0; it < max_iter; ++it) {
        if (std::fabs(r1) <= tol && std::fabs(r2) <= tol) return true;
        double gb = W.G(W.b, c1, c2);
        double g1 = W.G(c1, c1, c2), g2 = W.G(c2, c1, c2);
        double dgb_1 = W.dG_dc1(W.b, c2), dgb_2 = W.dG_dc1(W.b, c1);
        // d f(ci)/dc1 etc.; the direct x-dependence vanishes at critical points
        double j11 = W.dv * (W.dG_dc1(c1, c2) * gb - g1 * dgb_1) / (gb * gb);
        double j12 = W.dv * (W.dG_dc1(c1, c1) * gb - g1 * dgb_2) / (gb * gb);
        double j21 = W.dv * (W.dG_dc1(c2, c2) * gb - g2 * dgb_1) / (gb * gb);
        double j22 = W.dv * (W.dG_dc1(c2, c1) * gb - g2 * dgb_2) / (gb * gb);
        double det = j11 * j22 - j12 * j21;
        if (!(std::fabs(det) > 1e-300)) return false;
        double d1 = (j22 * r1 - j12 * r2) / det;
        double d2 = (-j21 * r1 + j11 * r2) / det;
        double lam = 1.0;
        double base = r1 * r1 + r2 * r2;
        bool stepped = false;
        while (lam > 1e-6) {
            double n1 = c1 - lam * d1, n2 = c2 - lam * d2;
            if (W.a <= n1 && n1 <= n2 && n2 <= W.b) {
                double s1, s2;
                bool f2;
                residual(n1, n2, s1, s2, f2);
                if (f2 && s1 * s1 + s2 * s2 < base * (1.0 - 0.25 * lam) + 1e-300) {
                    c1 = n1; c2 = n2; r1 = s1; r2 = s2; stepped = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if (!stepped) return false;
    }
    return std::fabs(r1) <= tol && std::fabs(r2) <= tol;
}

}  // namespace

IntervalMap cubic_from_critical_values(const Shape& shape, const CriticalValueVector& v,
                                       RealInterval dom) {
    if (shape.modality() != 2)
        throw ConstraintError("cubic_from_critical_values requires m = 2");
    if (!(v.shape() == shape))
        throw ConstraintError("critical value vector shape mismatch");
    const double L = dom.length();
    const double v1 = v[0], v2 = v[1];
    if (!dom.contains(v1, 1e-9 * L) || !dom.contains(v2, 1e-9 * L))
        throw ConstraintError("critical values must lie in the domain interval");

    if (std::fabs(v1 - v2) <= 1e-12 * L) return cubic_double_fold(shape, dom, 0.5 * (v1 + v2));

    CubicWork W;
    W.a = dom.a;
    W.b = dom.b;
    W.v0 = shape.sign(0) == 1 ? dom.a : dom.b;
    W.v3 = shape.sign(2) == 1 ? dom.b : dom.a;
    W.dv = W.v3 - W.v0;

    const double tol = 1e-12 * L;
    double c1 = dom.a + 0.25 * L, c2 = dom.a + 0.75 * L;
    bool ok = newton_2d(W, v1, v2, c1, c2, 200, tol);

    if (!ok) {
        // homotopy from the Chebyshev representative
        double w1 = shape.sign(1) == -1 ? dom.b : dom.a;  // c_1 is a max iff sigma_1 = -1
        double w2 = shape.sign(2) == 1 ? dom.a : dom.b;
        c1 = dom.a + 0.25 * L;
        c2 = dom.a + 0.75 * L;
        const int steps = 64;
        ok = true;
        for (int s = 1; s <= steps; ++s) {
            double t = static_cast<double>(s) / steps;
            double u1 = (1.0 - t) * w1 + t * v1;
            double u2 = (1.0 - t) * w2 + t * v2;
            if (std::fabs(u1 - u2) <= 1e-12 * L) continue;
            if (!newton_2d(W, u1, u2, c1, c2, 80, s == steps ? tol : 1e-10 * L)) { ok = false; break; }
        }
    }
    if (!ok)
        throw NumericError("cubic critical-value solve did not converge for v = (" +
                           std::to_string(v1) + ", " + std::to_string(v2) + ")");

    double gb = W.G(dom.b, c1, c2);
    double k = W.dv / (3.0 * gb);
    if ((k > 0) != (shape.sign(2) > 0))
        throw NumericError("cubic solve landed with wrong leading-coefficient sign");
    return finish_cubic(shape, dom, W.v0, c1, c2, k);
}

// ---------------------------------------------------------------------------
// Itineraries
// ---------------------------------------------------------------------------
double default_address_tol(const IntervalMap& map) { return 1e-12 * map.domain().length(); }

namespace {

// Numeric address with fold snapping: within tol of the nearest designated
// fold the point reads as C_j and the orbit continues from the fold itself.
int numeric_address(const IntervalMap& map, double& x, double tol) {
    const auto& folds = map.folding_points();
    int nearest = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < folds.size(); ++j) {
        double d = std::fabs(x - folds[j]);
        if (d <= tol && d < best) { best = d; nearest = static_cast<int>(j); }
    }
    if (nearest >= 0) {
        x = folds[static_cast<std::size_t>(nearest)];
        return nearest + 1;  // fold index
    }
    int lap = 0;
    while (lap < static_cast<int>(folds.size()) && x > folds[static_cast<std::size_t>(lap)]) ++lap;
    return -lap - 1;
}

struct OrbitData {
    std::vector<Symbol> syms;
    std::vector<double> points;        // numeric orbit (or exact nums cast)
    std::vector<std::int64_t> nums;    // exact orbit when available
    bool exact = false;
};

OrbitData run_orbit_exact(const IntervalMap& map, std::int64_t num, std::size_t depth) {
    OrbitData od;
    od.exact = true;
    od.syms.reserve(depth);
    for (std::size_t t = 0; t < depth; ++t) {
        od.nums.push_back(num);
        int addr = map.address_exact(num);
        od.syms.push_back(addr > 0 ? Symbol::fold(addr) : Symbol::interval(-addr - 1));
        num = map.eval_exact(num);
    }
    return od;
}

OrbitData run_orbit(const IntervalMap& map, double x0, std::size_t depth, double tol) {
    if (map.exact()) return run_orbit_exact(map, map.to_exact(x0), depth);
    OrbitData od;
    od.syms.reserve(depth);
    double x = x0;
    for (std::size_t t = 0; t < depth; ++t) {
        int addr = numeric_address(map, x, tol);
        od.points.push_back(x);
        od.syms.push_back(addr > 0 ? Symbol::fold(addr) : Symbol::interval(-addr - 1));
        x = std::clamp(map(x), map.domain().a, map.domain().b);
    }
    return od;
}

std::optional<Periodicity> detect_periodicity(const OrbitData& od, double tol) {
    const std::size_t d = od.exact ? od.nums.size() : od.points.size();
    if (d < 3) return std::nullopt;
    auto match = [&](std::size_t i, std::size_t j) {
        if (od.exact) return od.nums[i] == od.nums[j];
        return std::fabs(od.points[i] - od.points[j]) <= tol;
    };
    for (std::size_t s = 1; s <= d / 2; ++s) {
        if (!match(d - 1, d - 1 - s)) continue;
        // minimal preperiod for this candidate period
        std::size_t r = d - s;
        while (r > 0 && match(r - 1, r - 1 + s)) --r;
        if (r + 2 * s > d) continue;  // want at least two full periods in view
        bool sym_ok = true;
        for (std::size_t t = r; t + s < d && sym_ok; ++t)
            sym_ok = od.syms[t] == od.syms[t + s];
        if (sym_ok) return Periodicity{r, s};
    }
    return std::nullopt;
}

}  // namespace

SymbolWord itinerary(const IntervalMap& map, double x, std::size_t depth, double tol) {
    if (tol < 0) tol = default_address_tol(map);
    if (!map.domain().contains(x, 1e-9 * map.domain().length()))
        throw ConstraintError("itinerary start point outside the domain");
    OrbitData od = run_orbit(map, x, depth, tol);
    return SymbolWord(std::move(od.syms));
}

KneadingData kneading_data_of(const IntervalMap& map, std::size_t depth, double tol) {
    if (depth < 1) throw ConstraintError("kneading depth must be >= 1");
    if (tol < 0) tol = default_address_tol(map);
    const int m = map.modality();
    std::vector<KneadingSequence> seqs;
    seqs.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        OrbitData od;
        if (map.exact()) {
            od = run_orbit_exact(map, map.eval_exact(map.exact_fold_num(j + 1)), depth);
        } else {
            double c = map.folding_points()[static_cast<std::size_t>(j)];
            double x0 = std::clamp(map(c), map.domain().a, map.domain().b);
            od = run_orbit(map, x0, depth, tol);
        }
        auto flags = detect_periodicity(od, tol);
        seqs.emplace_back(SymbolWord(std::move(od.syms)), flags);
    }
    return KneadingData(map.shape(), std::move(seqs));
}

}  // namespace foldmap
