#pragma once

// Parameter-space experiments: isentrope rasters over the triangle P^2,
// bone detection on one-parameter segments, and file emission.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "foldmap/entropy.hpp"
#include "foldmap/families.hpp"

namespace foldmap {

struct ScanSpec {
    Family family = Family::Cubic;
    Shape shape = Shape(2, 1);            // (+,-,+) by default
    int resolution = 81;                  // grid points per axis, >= 2
    std::size_t depth = 12;               // symbolic depth k, >= 4
    EntropyMethod method = EntropyMethod::Adm;
    int workers = 0;                      // 0: hardware concurrency
};

struct RasterCell {
    EntropyEstimate estimate;
    std::string error;                    // non-empty when the cell failed
    bool failed() const { return !error.empty(); }
};

struct Raster {
    ScanSpec spec;
    // row-major cell (i, j) <-> p = (i/(res-1), j/(res-1)); cells outside P^2
    // stay empty.
    std::vector<std::optional<RasterCell>> grid;
    double seconds = 0.0;                 // wall clock, reporting only

    int resolution() const { return spec.resolution; }
    const std::optional<RasterCell>& cell(int i, int j) const {
        return grid[static_cast<std::size_t>(i) * static_cast<std::size_t>(spec.resolution) +
                    static_cast<std::size_t>(j)];
    }
    bool in_polytope(int i, int j) const;
    std::size_t populated_cells() const;
    std::size_t failed_cells() const;
};

// Rasterize the entropy estimate over the grid; per-cell failures are
// recorded in the cell, never abort the scan.  Output is deterministic and
// independent of the worker count.
Raster scan_isentropes(const ScanSpec& spec);

// Number of 4-connected components among populated cells with
// |h - level| <= band_halfwidth (diagnostic for isentrope bands).
int band_component_count(const Raster& r, double level, double band_halfwidth);

// ---------------------------------------------------------------------------
// Bones
// ---------------------------------------------------------------------------
struct BoneSegment {
    std::vector<double> p0, p1;  // endpoints in P^m, p(t) = (1-t) p0 + t p1
};

struct BoneHit {
    double t = 0.0;                            // segment parameter of the hit
    std::vector<double> p;                     // parameter vector at the hit
    double param = 0.0;                        // p[0] convenience for 1-d scans
    int minimal_period = 0;
    SymbolWord orbit_itinerary;                // itinerary of the located orbit
    std::optional<std::pair<double, double>> capture;  // plateau capture interval (t units)
};

// Locate parameters on the segment where folding point c_{critical_index}
// is periodic of period n: brackets sign changes of f_t^n(c) - c on a grid
// and bisects to tol in t.  For plateau families the surrounding closed
// capture interval is reported as well.
std::vector<BoneHit> find_bone_on_segment(Family family, const Shape& shape,
                                          const BoneSegment& segment, int critical_index,
                                          int period, double tol = 1e-12,
                                          std::size_t grid = 2048,
                                          RealInterval domain = RealInterval(0.0, 1.0));

// ---------------------------------------------------------------------------
// Emission: basename.pgm (ASCII P2), basename.csv, basename.json
// ---------------------------------------------------------------------------
void emit_raster(const Raster& r, const std::string& basename);

}  // namespace foldmap
