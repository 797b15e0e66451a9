#include "foldmap/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace foldmap {

namespace {

// ---------------------------------------------------------------------------
// Materialized kneading bounds shared by the counting engines.
//
// Sequences are indexed 0..m+1 (K_0 and K_{m+1} are the derived boundary
// itineraries).  For an interval symbol I_j the suffix that follows must
// satisfy  lo(j) <= suffix <= hi(j)  in twisted order, where
//   sigma_j = +1:  lo = K_j,   hi = K_{j+1}
//   sigma_j = -1:  lo = K_{j+1}, hi = K_j.
// ---------------------------------------------------------------------------
struct Bounds {
    int m = 0;
    std::vector<std::vector<std::int16_t>> codes;  // materialized symbol codes
    std::vector<std::size_t> avail;                // usable length per sequence
    std::vector<int> pre, per;                     // period structure, per = 0 if none
    std::vector<std::int8_t> eps_code;             // epsilon by symbol code
    std::vector<int> lo, hi;                       // bound sequence ids per interval j

    Bounds(const KneadingData& K, std::size_t need) {
        m = K.modality();
        const Shape& shape = K.shape();
        codes.resize(static_cast<std::size_t>(m) + 2);
        avail.resize(static_cast<std::size_t>(m) + 2);
        pre.resize(static_cast<std::size_t>(m) + 2);
        per.resize(static_cast<std::size_t>(m) + 2);
        for (int q = 0; q <= m + 1; ++q) {
            const KneadingSequence& seq = K.bound_sequence(q);
            std::size_t len = seq.flags() ? need : std::min(need, seq.stored_depth());
            auto& v = codes[static_cast<std::size_t>(q)];
            v.reserve(len);
            for (std::size_t t = 0; t < len; ++t)
                v.push_back(static_cast<std::int16_t>(seq.at(t).code()));
            avail[static_cast<std::size_t>(q)] = len;
            pre[static_cast<std::size_t>(q)] =
                seq.flags() ? static_cast<int>(seq.flags()->preperiod) : 0;
            per[static_cast<std::size_t>(q)] =
                seq.flags() ? static_cast<int>(seq.flags()->period) : 0;
        }
        eps_code.resize(2 * static_cast<std::size_t>(m) + 1);
        for (int c = 0; c <= 2 * m; ++c)
            eps_code[static_cast<std::size_t>(c)] =
                (c % 2 == 1) ? 0 : static_cast<std::int8_t>(shape.sign(c / 2));
        lo.resize(static_cast<std::size_t>(m) + 1);
        hi.resize(static_cast<std::size_t>(m) + 1);
        for (int j = 0; j <= m; ++j) {
            lo[static_cast<std::size_t>(j)] = shape.sign(j) == 1 ? j : j + 1;
            hi[static_cast<std::size_t>(j)] = shape.sign(j) == 1 ? j + 1 : j;
        }
    }
};

struct Tie {
    std::int16_t seq;
    std::int16_t ge;   // 1: suffix must be >= bound; 0: <=
    std::int16_t sign; // accumulated twisted sign along the equal prefix
    std::int32_t off;
};

// ---------------------------------------------------------------------------
// Admissible-word DFS: extends words only while admissible, counting words of
// every length along the way.  A tie survives while the suffix tracks the
// bound sequence symbol-for-symbol; the first difference resolves it.
// ---------------------------------------------------------------------------
class AdmEngine {
public:
    AdmEngine(const KneadingData& K, std::size_t k_max)
        : B_(K, k_max), kmax_(k_max), counts_(k_max + 1, 0) {
        pool_.resize(k_max + 1);
    }

    const std::vector<std::uint64_t>& run() {
        std::vector<Tie> root;
        dfs(0, root);
        return counts_;
    }

private:
    void dfs(std::size_t depth, const std::vector<Tie>& ties) {
        ++counts_[depth];
        if (depth == kmax_) return;
        auto& child = pool_[depth];
        for (int j = 0; j <= B_.m; ++j) {
            const std::int16_t code = static_cast<std::int16_t>(2 * j);
            child.clear();
            bool ok = true;
            for (const Tie& t : ties) {
                const auto& q = B_.codes[static_cast<std::size_t>(t.seq)];
                if (static_cast<std::size_t>(t.off) >= q.size())
                    throw UndecidableError("kneading truncation exhausted during counting");
                std::int16_t qc = q[static_cast<std::size_t>(t.off)];
                if (qc == code) {
                    child.push_back(Tie{t.seq, t.ge,
                                        static_cast<std::int16_t>(t.sign * B_.eps_code[static_cast<std::size_t>(code)]),
                                        t.off + 1});
                } else {
                    bool less = code < qc;
                    if (t.sign < 0) less = !less;
                    if (t.ge ? less : !less) { ok = false; break; }
                }
            }
            if (!ok) continue;
            child.push_back(Tie{static_cast<std::int16_t>(B_.lo[static_cast<std::size_t>(j)]), 1, 1, 0});
            child.push_back(Tie{static_cast<std::int16_t>(B_.hi[static_cast<std::size_t>(j)]), 0, 1, 0});
            dfs(depth + 1, child);
        }
    }

    Bounds B_;
    std::size_t kmax_;
    std::vector<std::uint64_t> counts_;
    std::vector<std::vector<Tie>> pool_;
};

// ---------------------------------------------------------------------------
// Negative periodic words: DFS over finitely admissible words (prefix-closed,
// so pruning is sound) plus a cyclic admissibility check of w^infinity.
// ---------------------------------------------------------------------------
class NegEngine {
public:
    NegEngine(const KneadingData& K, std::size_t p_max)
        : pmax_(p_max), counts_(p_max + 1, 0) {
        // Materialization horizon: flagged sequences resolve or repeat within
        // pre + lcm(p, per) + p; unflagged ones are cut at the 4p policy.
        std::size_t need = 4 * p_max + 2;
        for (int q = 0; q <= K.modality() + 1; ++q) {
            const KneadingSequence& seq = K.bound_sequence(q);
            if (seq.flags()) {
                std::size_t per = seq.flags()->period;
                std::size_t l = 1;
                for (std::size_t p = 1; p <= p_max; ++p) l = std::max(l, std::lcm(p, per));
                need = std::max(need, seq.flags()->preperiod + l + p_max + 2);
            }
        }
        B_.emplace(K, need);
        pool_.resize(p_max + 1);
        path_.resize(p_max);
        signs_.resize(p_max + 1);
        signs_[0] = 1;
    }

    const std::vector<long long>& run() {
        std::vector<Tie> root;
        dfs(0, root);
        return counts_;
    }

    long long undecided() const { return undecided_; }

private:
    void dfs(std::size_t depth, const std::vector<Tie>& ties) {
        if (depth > 0 && signs_[depth] == -1 && cyclic_admissible(depth)) ++counts_[depth];
        if (depth == pmax_) return;
        auto& child = pool_[depth];
        const Bounds& B = *B_;
        for (int j = 0; j <= B.m; ++j) {
            const std::int16_t code = static_cast<std::int16_t>(2 * j);
            child.clear();
            bool ok = true;
            for (const Tie& t : ties) {
                const auto& q = B.codes[static_cast<std::size_t>(t.seq)];
                if (static_cast<std::size_t>(t.off) >= q.size())
                    throw UndecidableError("kneading truncation exhausted during counting");
                std::int16_t qc = q[static_cast<std::size_t>(t.off)];
                if (qc == code) {
                    child.push_back(Tie{t.seq, t.ge,
                                        static_cast<std::int16_t>(t.sign * B.eps_code[static_cast<std::size_t>(code)]),
                                        t.off + 1});
                } else {
                    bool less = code < qc;
                    if (t.sign < 0) less = !less;
                    if (t.ge ? less : !less) { ok = false; break; }
                }
            }
            if (!ok) continue;
            child.push_back(Tie{static_cast<std::int16_t>(B.lo[static_cast<std::size_t>(j)]), 1, 1, 0});
            child.push_back(Tie{static_cast<std::int16_t>(B.hi[static_cast<std::size_t>(j)]), 0, 1, 0});
            path_[depth] = code;
            signs_[depth + 1] = static_cast<std::int16_t>(
                signs_[depth] * B.eps_code[static_cast<std::size_t>(code)]);
            dfs(depth + 1, child);
        }
    }

    // Does w^infinity satisfy the compatibility conditions?  Constraints are
    // spawned for the first p positions only; comparisons run until each tie
    // resolves, repeats provably forever (flagged bound), or hits the 4p
    // truncation policy (conservative rejection).
    bool cyclic_admissible(std::size_t p) {
        const Bounds& B = *B_;
        cyc_.clear();
        std::size_t cap = 4 * p + 2;
        for (const auto& q : B.codes) cap = std::max(cap, q.size());
        for (std::size_t idx = 0;; ++idx) {
            if (idx > cap + 2 * p) { ++undecided_; return false; }
            const std::int16_t s = path_[idx % p];
            std::size_t keep = 0;
            for (std::size_t i = 0; i < cyc_.size(); ++i) {
                Tie t = cyc_[i];
                const auto& q = B.codes[static_cast<std::size_t>(t.seq)];
                std::size_t qa = B.avail[static_cast<std::size_t>(t.seq)];
                if (static_cast<std::size_t>(t.off) >= qa) { ++undecided_; return false; }
                std::int16_t qc = q[static_cast<std::size_t>(t.off)];
                if (qc == s) {
                    t.sign = static_cast<std::int16_t>(t.sign * B.eps_code[static_cast<std::size_t>(s)]);
                    ++t.off;
                    int perq = B.per[static_cast<std::size_t>(t.seq)];
                    if (perq > 0) {
                        std::size_t bound = static_cast<std::size_t>(B.pre[static_cast<std::size_t>(t.seq)]) +
                                            std::lcm(p, static_cast<std::size_t>(perq));
                        if (static_cast<std::size_t>(t.off) >= bound + p) continue;  // equal forever
                    } else if (static_cast<std::size_t>(t.off) >= std::min(qa, 4 * p)) {
                        ++undecided_;
                        return false;  // tied at the truncation policy
                    }
                    cyc_[keep++] = t;
                } else {
                    bool less = s < qc;
                    if (t.sign < 0) less = !less;
                    if (t.ge ? less : !less) return false;
                    // resolved in the satisfying direction: drop
                }
            }
            cyc_.resize(keep);
            if (idx < p) {
                int j = s / 2;
                cyc_.push_back(Tie{static_cast<std::int16_t>(B.lo[static_cast<std::size_t>(j)]), 1, 1, 0});
                cyc_.push_back(Tie{static_cast<std::int16_t>(B.hi[static_cast<std::size_t>(j)]), 0, 1, 0});
            }
            if (cyc_.empty() && idx + 1 >= p) return true;
        }
    }

    std::optional<Bounds> B_;
    std::size_t pmax_;
    std::vector<long long> counts_;
    std::vector<std::vector<Tie>> pool_;
    std::vector<std::int16_t> path_;
    std::vector<std::int16_t> signs_;
    std::vector<Tie> cyc_;
    long long undecided_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Counting API
// ---------------------------------------------------------------------------
std::vector<BigCount> adm_counts(const KneadingData& K, std::size_t k_max) {
    if (k_max > 40) throw ConstraintError("adm_counts depth too large to enumerate");
    if (!K.decidable_to(k_max))
        throw UndecidableError("kneading data not decidable to requested depth");
    AdmEngine engine(K, k_max);
    const auto& raw = engine.run();
    std::vector<BigCount> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i];
    return out;
}

BigCount adm_count(const KneadingData& K, std::size_t k) { return adm_counts(K, k).back(); }

NegCounts neg_counts(const KneadingData& K, std::size_t p_max) {
    if (p_max > 40) throw ConstraintError("neg_counts depth too large to enumerate");
    if (p_max < 1) throw ConstraintError("neg_counts needs p_max >= 1");
    if (!K.decidable_to(p_max))
        throw UndecidableError("kneading data not decidable to requested depth");
    NegEngine engine(K, p_max);
    NegCounts out;
    out.counts = engine.run();
    out.undecided_rejected = engine.undecided();
    return out;
}

long long neg_count(const KneadingData& K, std::size_t p) {
    return neg_counts(K, p).counts.back();
}

// ---------------------------------------------------------------------------
// Entropy estimates
// ---------------------------------------------------------------------------
const char* method_name(EntropyMethod m) {
    switch (m) {
        case EntropyMethod::Adm: return "adm";
        case EntropyMethod::Neg: return "neg";
        case EntropyMethod::Markov: return "markov";
        case EntropyMethod::Lap: return "lap";
    }
    return "?";
}

double EntropyEstimate::gamma() const { return std::exp(value); }

namespace {

double diff_ratio(const std::vector<BigCount>& A, std::size_t k) {
    BigCount d1 = A[k] - A[k - 1];
    BigCount d0 = A[k - 1] - A[k - 2];
    if (d1 <= 0) return 0.0;
    if (d0 <= 0) return std::log(static_cast<double>(A[k]) / static_cast<double>(A[k - 1]));
    return std::log(static_cast<double>(d1) / static_cast<double>(d0));
}

}  // namespace

EntropyEstimate entropy_from_adm(const KneadingData& K, std::size_t k_max) {
    if (k_max < 4) throw ConstraintError("entropy_from_adm needs k_max >= 4");
    const auto A = adm_counts(K, k_max);
    const double hmax = std::log(static_cast<double>(K.modality() + 1));

    double e2 = std::clamp(diff_ratio(A, k_max - 2), 0.0, hmax);
    double e1 = std::clamp(diff_ratio(A, k_max - 1), 0.0, hmax);
    double e0 = std::clamp(diff_ratio(A, k_max), 0.0, hmax);

    EntropyEstimate est;
    est.method = EntropyMethod::Adm;
    est.depth_used = k_max;
    est.upper = std::log(static_cast<double>(A[k_max])) / static_cast<double>(k_max);
    est.value = std::min(e0, est.upper);
    double spread = std::max({e0, e1, e2}) - std::min({e0, e1, e2});
    est.lower = std::clamp(est.value - spread, 0.0, est.value);
    return est;
}

EntropyEstimate entropy_from_neg(const KneadingData& K, std::size_t k_max) {
    if (k_max < 6) throw ConstraintError("entropy_from_neg needs k_max >= 6");
    NegCounts N = neg_counts(K, k_max);
    const double hmax = std::log(static_cast<double>(K.modality() + 1));

    double best = 0.0;
    for (std::size_t k = k_max / 2; k <= k_max; ++k) {
        if (N.counts[k] > 1)
            best = std::max(best, std::log(static_cast<double>(N.counts[k])) / static_cast<double>(k));
    }
    EntropyEstimate est;
    est.method = EntropyMethod::Neg;
    est.depth_used = k_max;
    est.value = std::clamp(best, 0.0, hmax);
    est.upper = hmax;
    est.lower = 0.0;
    return est;
}

// ---------------------------------------------------------------------------
// Markov route
// ---------------------------------------------------------------------------
namespace {

long long det_integer(std::vector<std::vector<BigCount>> a) {
    // fraction-free Bareiss
    const std::size_t n = a.size();
    if (n == 0) return 1;
    BigCount denom = 1;
    int sign = 1;
    for (std::size_t k = 0; k < n - 1; ++k) {
        if (a[k][k] == 0) {
            std::size_t piv = k + 1;
            while (piv < n && a[piv][k] == 0) ++piv;
            if (piv == n) return 0;
            std::swap(a[k], a[piv]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / denom;
        denom = a[k][k];
    }
    BigCount det = sign * a[n - 1][n - 1];
    return det.convert_to<long long>();
}

long long det_int_matrix(const std::vector<std::vector<int>>& m) {
    std::vector<std::vector<BigCount>> a(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) a[i].assign(m[i].begin(), m[i].end());
    return det_integer(std::move(a));
}

}  // namespace

MarkovMatrix markov_from_orbit_map(const std::vector<double>& points,
                                   const std::vector<double>& images, double tol) {
    const std::size_t np = points.size();
    if (np < 2) throw ConstraintError("orbit table needs at least two points");
    if (images.size() != np) throw ConstraintError("points/images size mismatch");
    for (std::size_t i = 0; i + 1 < np; ++i)
        if (!(points[i] < points[i + 1]))
            throw ConstraintError("orbit points must be strictly increasing");

    std::vector<int> img(np);
    for (std::size_t i = 0; i < np; ++i) {
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < np; ++j) {
            double d = std::fabs(images[i] - points[j]);
            if (d < bd) { bd = d; best = static_cast<int>(j); }
        }
        if (bd > tol)
            throw ConstraintError("orbit table not closed: image " + std::to_string(images[i]) +
                                  " is not one of the points");
        img[i] = best;
    }

    const std::size_t n = np - 1;  // intervals
    // direct interval-image construction
    std::vector<std::vector<int>> M(n, std::vector<int>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        int lo = std::min(img[i], img[i + 1]);
        int hi = std::max(img[i], img[i + 1]);
        for (int j = lo; j < hi; ++j) M[i][static_cast<std::size_t>(j)] = 1;
    }

    // four-step construction from the point action
    std::vector<std::vector<int>> A(np, std::vector<int>(np, 0));
    for (std::size_t i = 0; i < np; ++i) A[i][static_cast<std::size_t>(img[i])] = 1;
    std::vector<std::vector<int>> A1(np, std::vector<int>(np, 0));  // ones to the left of every one
    for (std::size_t i = 0; i < np; ++i)
        for (int j = 0; j <= img[i]; ++j) A1[i][static_cast<std::size_t>(j)] = 1;
    std::vector<std::vector<int>> A2 = A1;  // row differences, first row kept
    for (std::size_t i = np; i-- > 1;)
        for (std::size_t j = 0; j < np; ++j) A2[i][j] = A1[i][j] - A1[i - 1][j];
    std::vector<std::vector<int>> A3(n, std::vector<int>(n, 0));  // drop first row and column
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) A3[i][j] = A2[i + 1][j + 1];

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(A3[i][j]) != M[i][j])
                throw NumericError("four-step and interval-image Markov matrices disagree");

    MarkovMatrix out;
    out.entries = std::move(M);
    out.endpoints = points;
    FourStepReport rep;
    std::vector<int> col_count(np, 0);
    for (std::size_t i = 0; i < np; ++i) ++col_count[static_cast<std::size_t>(img[i])];
    rep.permutation = std::all_of(col_count.begin(), col_count.end(), [](int c) { return c == 1; });
    rep.dets = {det_int_matrix(A), det_int_matrix(A1), det_int_matrix(A2), det_int_matrix(A3)};
    out.four_step = rep;
    return out;
}

namespace {

struct OrbitTable {
    std::vector<double> points;
    std::vector<double> images;
};

OrbitTable collect_orbit_table(const IntervalMap& map, std::size_t max_orbit, double tol) {
    const double L = map.domain().length();
    const double match = tol * std::max(1.0, L);
    std::vector<double> pts;
    auto find = [&](double x) {
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (std::fabs(pts[i] - x) <= match) return static_cast<int>(i);
        return -1;
    };
    for (double c : map.folding_points()) {
        double x = c;
        while (find(x) < 0) {
            pts.push_back(x);
            x = std::clamp(map(x), map.domain().a, map.domain().b);
            if (pts.size() > max_orbit)
                throw NumericError("folding orbits did not close within the orbit budget");
        }
    }
    std::sort(pts.begin(), pts.end());
    OrbitTable t;
    t.points = pts;
    t.images.reserve(pts.size());
    for (double x : pts) {
        double y = std::clamp(map(x), map.domain().a, map.domain().b);
        int j = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double d = std::fabs(pts[i] - y);
            if (d < bd) { bd = d; j = static_cast<int>(i); }
        }
        if (bd > match) throw NumericError("collected orbit set is not forward closed");
        t.images.push_back(pts[static_cast<std::size_t>(j)]);
    }
    // monotonicity between consecutive points, sampled
    for (std::size_t i = 0; i + 1 < t.points.size(); ++i) {
        double x0 = t.points[i], x1 = t.points[i + 1];
        double prev = map(x0);
        bool up = map(x1) >= map(x0);
        for (int s = 1; s <= 5; ++s) {
            double x = x0 + (x1 - x0) * s / 6.0;
            double y = map(x);
            if (up ? y < prev - 1e-9 * L : y > prev + 1e-9 * L)
                throw ConstraintError("map is not monotone between consecutive orbit points");
            prev = y;
        }
    }
    return t;
}

}  // namespace

MarkovMatrix markov_from_map(const IntervalMap& map, std::size_t max_orbit, double tol) {
    OrbitTable t = collect_orbit_table(map, max_orbit, tol);
    return markov_from_orbit_map(t.points, t.images, tol * std::max(1.0, map.domain().length()) * 4.0);
}

// --- Perron root ------------------------------------------------------------
namespace {

// Largest real root of a monic polynomial given by coefficients c[0..n-1]
// for lambda^n + c[0] lambda^{n-1} + ... + c[n-1], by recursive critical-point
// isolation and bisection.
std::vector<double> poly_real_roots(const std::vector<double>& c);

double poly_eval(const std::vector<double>& c, double x) {
    double y = 1.0;
    for (double ci : c) y = y * x + ci;
    return y;
}

std::vector<double> poly_real_roots(const std::vector<double>& c) {
    const std::size_t n = c.size();
    if (n == 0) return {};
    if (n == 1) return {-c[0]};
    // derivative, re-normalized monic
    std::vector<double> d(n - 1);
    const double deg = static_cast<double>(n);
    for (std::size_t i = 0; i < n - 1; ++i)
        d[i] = c[i] * static_cast<double>(n - 1 - i) / deg;
    std::vector<double> crit = poly_real_roots(d);
    std::sort(crit.begin(), crit.end());

    double bound = 1.0;
    for (double ci : c) bound = std::max(bound, std::fabs(ci));
    bound += 1.0;

    std::vector<double> grid{-bound};
    for (double t : crit)
        if (t > -bound && t < bound) grid.push_back(t);
    grid.push_back(bound);

    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        double a = grid[i], b = grid[i + 1];
        double fa = poly_eval(c, a), fb = poly_eval(c, b);
        if (std::fabs(fa) < 1e-12) { roots.push_back(a); continue; }
        if ((fa < 0) != (fb < 0)) {
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (a + b);
                double fm = poly_eval(c, mid);
                if ((fm < 0) == (fa < 0)) { a = mid; fa = fm; }
                else b = mid;
            }
            roots.push_back(0.5 * (a + b));
        }
    }
    // touching root at the right end or at critical points with p == 0
    double fb = poly_eval(c, grid.back());
    if (std::fabs(fb) < 1e-12) roots.push_back(grid.back());
    for (double t : crit)
        if (std::fabs(poly_eval(c, t)) < 1e-9) roots.push_back(t);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double x, double y) { return std::fabs(x - y) < 1e-9; }),
                roots.end());
    return roots;
}

// Characteristic polynomial (monic) of an integer matrix, exactly, via
// Faddeev-LeVerrier.
std::vector<double> char_poly(const std::vector<std::vector<int>>& m) {
    const std::size_t n = m.size();
    std::vector<std::vector<BigCount>> A(n, std::vector<BigCount>(n)), Mk;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) A[i][j] = m[i][j];
    Mk = A;
    std::vector<BigCount> coef(n);
    for (std::size_t k = 1; k <= n; ++k) {
        if (k > 1) {
            // Mk = A * (Mk_prev + c_{k-1} I)
            std::vector<std::vector<BigCount>> T = Mk;
            for (std::size_t i = 0; i < n; ++i) T[i][i] += coef[k - 2];
            std::vector<std::vector<BigCount>> P(n, std::vector<BigCount>(n, 0));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t l = 0; l < n; ++l) {
                    if (A[i][l] == 0) continue;
                    for (std::size_t j = 0; j < n; ++j) P[i][j] += A[i][l] * T[l][j];
                }
            Mk = std::move(P);
        }
        BigCount tr = 0;
        for (std::size_t i = 0; i < n; ++i) tr += Mk[i][i];
        coef[k - 1] = -tr / static_cast<long long>(k);
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = coef[i].convert_to<double>();
    return out;
}

double perron_root_poly(const std::vector<std::vector<int>>& m) {
    auto roots = poly_real_roots(char_poly(m));
    if (roots.empty()) throw NumericError("no real eigenvalue found for Markov matrix");
    return roots.back();
}

}  // namespace

double perron_root(const MarkovMatrix& M) {
    const std::size_t n = static_cast<std::size_t>(M.size());
    if (n == 0) throw ConstraintError("empty Markov matrix");
    for (const auto& row : M.entries) {
        if (row.size() != n) throw ConstraintError("Markov matrix must be square");
        for (int e : row)
            if (e < 0) throw ConstraintError("Markov matrix must be nonnegative");
    }

    // Power iteration on M + I keeps the iterate positive and makes the
    // dominant eigenvalue unique for irreducible matrices; Collatz-Wielandt
    // ratios bracket the root.
    std::vector<double> x(n, 1.0), y(n);
    double result = std::numeric_limits<double>::quiet_NaN();
    for (int it = 0; it < 5000; ++it) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = x[i];
            for (std::size_t j = 0; j < n; ++j)
                if (M.entries[i][j]) s += M.entries[i][j] * x[j];
            y[i] = s;
            double r = s / x[i];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        if (hi - lo <= 1e-10 * std::max(1.0, hi)) { result = 0.5 * (lo + hi) - 1.0; break; }
        double mx = *std::max_element(y.begin(), y.end());
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / mx;
    }

    if (std::isnan(result)) {
        if (n > 12)
            throw NumericError("power iteration stalled and matrix too large for the "
                               "characteristic-polynomial fallback");
        result = perron_root_poly(M.entries);
    } else if (n <= 4) {
        double check = perron_root_poly(M.entries);
        if (std::fabs(check - result) > 1e-8)
            throw NumericError("power iteration and characteristic polynomial disagree");
    }
    return std::max(0.0, result);
}

EntropyEstimate entropy_from_markov(const MarkovMatrix& M) {
    double g = perron_root(M);
    EntropyEstimate est;
    est.method = EntropyMethod::Markov;
    est.depth_used = static_cast<std::size_t>(M.size());
    est.value = std::max(0.0, std::log(std::max(g, 1e-300)));
    est.upper = est.value + 1e-10;
    est.lower = std::max(0.0, est.value - 1e-10);
    return est;
}

// ---------------------------------------------------------------------------
// Piecewise-linear propagation
// ---------------------------------------------------------------------------
namespace {

struct PiecewiseGraph {
    std::vector<double> xs, ys;
};

std::size_t count_laps(const PiecewiseGraph& g, double eps) {
    std::size_t laps = 1;
    int dir = 0;
    for (std::size_t i = 0; i + 1 < g.xs.size(); ++i) {
        double dy = g.ys[i + 1] - g.ys[i];
        int s = dy > eps ? 1 : (dy < -eps ? -1 : 0);
        if (s == 0) continue;
        if (dir == 0) dir = s;
        else if (s != dir) { ++laps; dir = s; }
    }
    return laps;
}

// One composition step: refine at preimages of the base breakpoints, then
// map the values through the base map.
void compose(PiecewiseGraph& g, const IntervalMap& base, const std::vector<double>& base_breaks,
             std::size_t budget, double eps_x, double eps_y) {
    std::vector<double> nxs, nys;
    nxs.reserve(g.xs.size() * 2);
    nys.reserve(g.xs.size() * 2);
    nxs.push_back(g.xs[0]);
    nys.push_back(base(g.ys[0]));
    for (std::size_t i = 0; i + 1 < g.xs.size(); ++i) {
        double x0 = g.xs[i], x1 = g.xs[i + 1];
        double y0 = g.ys[i], y1 = g.ys[i + 1];
        double lo = std::min(y0, y1), hi = std::max(y0, y1);
        if (hi - lo > eps_y) {
            // interior crossings of base breakpoints, in x order
            std::vector<double> cuts;
            for (double b : base_breaks) {
                if (b > lo + eps_y && b < hi - eps_y) {
                    double t = (b - y0) / (y1 - y0);
                    cuts.push_back(x0 + t * (x1 - x0));
                }
            }
            std::sort(cuts.begin(), cuts.end());
            for (double cx : cuts) {
                if (cx > nxs.back() + eps_x && cx < x1 - eps_x) {
                    double t = (cx - x0) / (x1 - x0);
                    nxs.push_back(cx);
                    nys.push_back(base(y0 + t * (y1 - y0)));
                }
            }
        }
        if (x1 > nxs.back() + eps_x || i + 2 == g.xs.size()) {
            nxs.push_back(x1);
            nys.push_back(base(y1));
        }
        if (nxs.size() > budget)
            throw ResourceError("piecewise-linear propagation exceeded the piece budget");
    }
    g.xs = std::move(nxs);
    g.ys = std::move(nys);
}

PiecewiseGraph base_graph(const IntervalMap& map) {
    PiecewiseGraph g;
    g.xs = map.linear_breakpoints();
    g.ys.reserve(g.xs.size());
    for (double x : g.xs) g.ys.push_back(map(x));
    return g;
}

std::vector<std::size_t> lap_sequence(const IntervalMap& map, std::size_t k_max,
                                      std::size_t budget) {
    if (!map.piecewise_linear())
        throw ConstraintError("lap propagation applies to piecewise-linear maps");
    if (k_max < 1) throw ConstraintError("lap propagation needs k >= 1");
    const double L = map.domain().length();
    const double eps_x = 1e-13 * L, eps_y = 1e-9 * L;
    std::vector<double> breaks = map.linear_breakpoints();
    PiecewiseGraph g = base_graph(map);
    std::vector<std::size_t> laps{count_laps(g, eps_y)};
    for (std::size_t k = 2; k <= k_max; ++k) {
        compose(g, map, breaks, budget, eps_x, eps_y);
        laps.push_back(count_laps(g, eps_y));
    }
    return laps;
}

}  // namespace

std::size_t lap_count_exact(const IntervalMap& map, std::size_t k, std::size_t piece_budget) {
    return lap_sequence(map, k, piece_budget).back();
}

EntropyEstimate entropy_from_laps(const IntervalMap& map, std::size_t k_max,
                                  std::size_t piece_budget) {
    if (k_max < 4) throw ConstraintError("entropy_from_laps needs k_max >= 4");
    auto laps = lap_sequence(map, k_max, piece_budget);
    std::vector<BigCount> A(k_max + 1);
    A[0] = 1;
    for (std::size_t k = 1; k <= k_max; ++k) A[k] = laps[k - 1];
    const double hmax = std::log(static_cast<double>(map.modality() + 1));
    double e2 = std::clamp(diff_ratio(A, k_max - 2), 0.0, hmax);
    double e1 = std::clamp(diff_ratio(A, k_max - 1), 0.0, hmax);
    double e0 = std::clamp(diff_ratio(A, k_max), 0.0, hmax);
    EntropyEstimate est;
    est.method = EntropyMethod::Lap;
    est.depth_used = k_max;
    est.upper = std::log(static_cast<double>(A[k_max])) / static_cast<double>(k_max);
    est.value = std::min(e0, est.upper);
    double spread = std::max({e0, e1, e2}) - std::min({e0, e1, e2});
    est.lower = std::clamp(est.value - spread, 0.0, est.value);
    return est;
}

long long fixed_point_count(const IntervalMap& map, std::size_t k, std::size_t piece_budget) {
    if (!map.piecewise_linear())
        throw ConstraintError("fixed_point_count applies to piecewise-linear maps");
    const double L = map.domain().length();
    const double eps_x = 1e-13 * L, eps_y = 1e-9 * L;
    std::vector<double> breaks = map.linear_breakpoints();
    PiecewiseGraph g = base_graph(map);
    for (std::size_t it = 2; it <= k; ++it) compose(g, map, breaks, piece_budget, eps_x, eps_y);

    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < g.xs.size(); ++i) {
        double d0 = g.ys[i] - g.xs[i];
        double d1 = g.ys[i + 1] - g.xs[i + 1];
        if (std::fabs(d0) <= eps_y) roots.push_back(g.xs[i]);
        if (std::fabs(d1) <= eps_y) roots.push_back(g.xs[i + 1]);
        if ((d0 < -eps_y && d1 > eps_y) || (d0 > eps_y && d1 < -eps_y)) {
            double t = d0 / (d0 - d1);
            roots.push_back(g.xs[i] + t * (g.xs[i + 1] - g.xs[i]));
        }
    }
    std::sort(roots.begin(), roots.end());
    long long count = 0;
    double last = -std::numeric_limits<double>::infinity();
    for (double r : roots) {
        if (r - last > 1e-8 * L) { ++count; last = r; }
    }
    return count;
}

// ---------------------------------------------------------------------------
// Constant-slope model diagnostic
// ---------------------------------------------------------------------------
LinearModelCheck markov_linear_model_check(const MarkovMatrix& M, const IntervalMap& original,
                                           std::size_t depth) {
    LinearModelCheck out;
    const std::size_t n = static_cast<std::size_t>(M.size());
    if (n == 0) return out;
    double g = perron_root(M);
    out.gamma = g;

    // Perron eigenvector by power iteration on M + I.
    std::vector<double> x(n, 1.0), y(n);
    for (int it = 0; it < 20000; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = x[i];
            for (std::size_t j = 0; j < n; ++j) s += M.entries[i][j] * x[j];
            y[i] = s;
        }
        double mx = *std::max_element(y.begin(), y.end());
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double nx = y[i] / mx;
            delta = std::max(delta, std::fabs(nx - x[i]));
            x[i] = nx;
        }
        if (delta < 1e-13) break;
    }
    if (*std::min_element(x.begin(), x.end()) <= 1e-9) return out;  // not strictly positive
    out.built = true;

    // Model nodes: cumulative eigenvector lengths over [0,1]; node i of the
    // original (orbit point) maps to node table(i), so the model is the
    // piecewise-linear interpolation through (u_i, u_{table(i)}).
    OrbitTable t = collect_orbit_table(original, 256, 1e-9);
    if (t.points.size() != n + 1) return out;
    double total = std::accumulate(x.begin(), x.end(), 0.0);
    std::vector<double> u(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) u[i + 1] = u[i] + x[i] / total;
    u[n] = 1.0;
    std::vector<double> uimg(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        std::size_t j = 0;
        while (j + 1 < t.points.size() && std::fabs(t.points[j] - t.images[i]) > 1e-9) ++j;
        uimg[i] = u[j];
    }
    auto model = [&](double v) {
        std::size_t i = 0;
        while (i + 1 < n && v > u[i + 1]) ++i;
        double s = (v - u[i]) / (u[i + 1] - u[i]);
        return uimg[i] + s * (uimg[i + 1] - uimg[i]);
    };
    // model folds: interior nodes where the direction flips
    std::vector<double> folds;
    for (std::size_t i = 1; i < n; ++i) {
        double d0 = uimg[i] - uimg[i - 1], d1 = uimg[i + 1] - uimg[i];
        if ((d0 > 0) != (d1 > 0)) folds.push_back(u[i]);
    }
    if (folds.size() != original.folding_points().size()) return out;

    const double tol = 1e-9;
    auto model_itinerary = [&](double v, std::size_t d) {
        std::vector<Symbol> syms;
        for (std::size_t s = 0; s < d; ++s) {
            int near = -1;
            for (std::size_t j = 0; j < folds.size(); ++j)
                if (std::fabs(v - folds[j]) <= tol) { near = static_cast<int>(j); break; }
            if (near >= 0) {
                v = folds[static_cast<std::size_t>(near)];
                syms.push_back(Symbol::fold(near + 1));
            } else {
                int lap = 0;
                while (lap < static_cast<int>(folds.size()) && v > folds[static_cast<std::size_t>(lap)]) ++lap;
                syms.push_back(Symbol::interval(lap));
            }
            v = std::clamp(model(v), 0.0, 1.0);
        }
        return SymbolWord(std::move(syms));
    };

    KneadingData orig = kneading_data_of(original, depth);
    out.depth_compared = depth;
    out.kneading_matches = true;
    for (std::size_t j = 0; j < folds.size(); ++j) {
        SymbolWord mk = model_itinerary(std::clamp(model(folds[j]), 0.0, 1.0), depth);
        SymbolWord ok_word = orig.sequence(static_cast<int>(j) + 1).truncation(depth);
        if (!(mk == ok_word)) out.kneading_matches = false;
    }
    return out;
}

}  // namespace foldmap
