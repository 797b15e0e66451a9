#pragma once

// Topological entropy by three routes: admissible-word counting, counting of
// negative-type periodic symbol sequences, and the Markov/Perron route for
// maps with finite folding orbits.  Plus exact lap-number and fixed-point
// cross-checks for piecewise-linear maps.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "foldmap/families.hpp"
#include "foldmap/symbolic.hpp"

namespace foldmap {

using BigCount = boost::multiprecision::cpp_int;

// ---------------------------------------------------------------------------
// Counting admissible words
// ---------------------------------------------------------------------------

// Adm(K, k) for every k = 0..k_max in a single pruned depth-first pass.
// Requires K decidable to depth k_max.
std::vector<BigCount> adm_counts(const KneadingData& K, std::size_t k_max);

// Number of acritical admissible words of length exactly k.
BigCount adm_count(const KneadingData& K, std::size_t k);

struct NegCounts {
    std::vector<long long> counts;    // counts[p], p = 0..p_max
    long long undecided_rejected = 0; // ties unresolved at the depth policy; counted out
};

// Neg(p) for p = 1..p_max: acritical words of length p with sign product -1
// whose infinite periodic extension is admissible.  Cyclic comparisons are
// carried to depth 4p (or the exact period-structure bound when the kneading
// sequences carry period flags); unresolved ties reject the word and are
// reported in undecided_rejected.
NegCounts neg_counts(const KneadingData& K, std::size_t p_max);

long long neg_count(const KneadingData& K, std::size_t p);

// ---------------------------------------------------------------------------
// Entropy estimates
// ---------------------------------------------------------------------------
enum class EntropyMethod { Adm, Neg, Markov, Lap };

const char* method_name(EntropyMethod m);

struct EntropyEstimate {
    double value = 0.0;   // nats
    double upper = 0.0;
    double lower = 0.0;
    std::size_t depth_used = 0;
    EntropyMethod method = EntropyMethod::Adm;
    double gamma() const;
};

// Growth rate of Adm(k).  The point estimate is the first-difference ratio
// log((Adm(k)-Adm(k-1)) / (Adm(k-1)-Adm(k-2))), which cancels the constant
// term in the lap-count asymptotics; upper is the rigorous bound
// (1/k) log Adm(k); lower subtracts the spread of the last three estimates.
EntropyEstimate entropy_from_adm(const KneadingData& K, std::size_t k_max);

// Max-window form of the periodic-orbit growth rate:
// max over k in [k_max/2, k_max] of (1/k) log+ Neg(k).
EntropyEstimate entropy_from_neg(const KneadingData& K, std::size_t k_max);

// ---------------------------------------------------------------------------
// Markov route
// ---------------------------------------------------------------------------
struct FourStepReport {
    bool permutation = false;            // table is a bijection of the point set
    std::array<long long, 4> dets{};     // det A, A', A'', A'''
};

struct MarkovMatrix {
    std::vector<std::vector<int>> entries;   // n x n, 0/1 from interval coverings
    std::vector<double> endpoints;           // n+1 ordered interval endpoints
    std::optional<FourStepReport> four_step; // present when the table was functional

    int size() const { return static_cast<int>(entries.size()); }
};

// Build the transition matrix of the partition cut by a closed orbit table:
// points x_1 < ... < x_{n+1} with images f(x_i) drawn from the same set.
// Runs both the direct interval-image construction and the four-step matrix
// construction and insists they agree.
MarkovMatrix markov_from_orbit_map(const std::vector<double>& points,
                                   const std::vector<double>& images, double tol = 1e-9);

// Collect the folding-point orbits of a map with eventually periodic folding
// orbits and build the matrix; verifies monotonicity between consecutive
// points by sampling.
MarkovMatrix markov_from_map(const IntervalMap& map, std::size_t max_orbit = 256,
                             double tol = 1e-9);

// Largest real eigenvalue of a nonnegative integer matrix via power iteration
// with Collatz-Wielandt bounds (shifted to handle periodic irreducible
// matrices); falls back to characteristic-polynomial root isolation for
// small matrices when the bounds stall.
double perron_root(const MarkovMatrix& M);

EntropyEstimate entropy_from_markov(const MarkovMatrix& M);

// Rebuilds the constant-slope model from the Perron eigenvector (when it is
// strictly positive) and compares its kneading data against the original map.
struct LinearModelCheck {
    bool built = false;          // eigenvector strictly positive
    bool kneading_matches = false;
    double gamma = 0.0;
    std::size_t depth_compared = 0;
};
LinearModelCheck markov_linear_model_check(const MarkovMatrix& M, const IntervalMap& original,
                                           std::size_t depth = 24);

// ---------------------------------------------------------------------------
// Piecewise-linear cross-checks
// ---------------------------------------------------------------------------

// Exact lap number of the k-th iterate of a piecewise-linear map, by
// breakpoint propagation.  Throws ResourceError past the piece budget.
std::size_t lap_count_exact(const IntervalMap& map, std::size_t k,
                            std::size_t piece_budget = 2'000'000);

EntropyEstimate entropy_from_laps(const IntervalMap& map, std::size_t k_max,
                                  std::size_t piece_budget = 2'000'000);

// Number of fixed points of the k-th iterate (piecewise-linear maps only;
// crossings and tangential touches each count once).
long long fixed_point_count(const IntervalMap& map, std::size_t k,
                            std::size_t piece_budget = 2'000'000);

}  // namespace foldmap
