#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shmtk/geometry.hpp"
#include "shmtk/random.hpp"
#include "shmtk/shm.hpp"

namespace shmtk::opt {

struct OptimizerParams {
    std::uint64_t seed = 42;
    int min_s = 2; // rectangle side range, cells
    int max_s = 6;
    int attempts = 100; // placement retries per rectangle
    int start = 100;    // iteration schedule; first batch is start - (start-100)
    int stop = 8000;
    int step = 50;
    int closing_radius = 2;
    double area_weight = 0.6; // lambda in R = D - lambda * normalized area
    double convexity_ratio_threshold = 1.05;
    double enlarge_lo = 0.1; // convex mode bounding-rect growth fraction range
    double enlarge_hi = 0.3;

    void validate() const;
};

struct TraceRow {
    double disparity = 0.0;
    std::size_t added_cells = 0;
    double normalized_area = 0.0;
    double reward = 0.0;
    std::size_t snapshot_id = 0;
};

enum class OptimizeMode { ConcaveAdd, ConvexRemove };

struct OptimizationResult {
    geom::ShapeMask optimized_mask;
    std::size_t optimized_index = 0;
    std::vector<TraceRow> trace;
    OptimizeMode mode = OptimizeMode::ConcaveAdd;
    std::vector<geom::ShapeMask> snapshots;
    std::size_t skipped_placements = 0;
    std::size_t capacity_cells = 0; // eligible-region size normalized areas refer to
};

// Paints up to n random rectangles. Draw order per attempt is rw, rh, x, y.
// A rectangle is accepted when it overlaps both the eligible region and the
// current shape (overlap with the current shape keeps the union 8-connected).
geom::ShapeMask add_rects(const geom::ShapeMask& current, const geom::ShapeMask& img_neg, int n,
                          const OptimizerParams& params, Rand64& rng,
                          std::size_t* skipped = nullptr);

OptimizationResult optimize_obfuscation(const geom::ShapeMask& original,
                                        const OptimizerParams& params);

shm::Boundary mask_to_boundary(const OptimizationResult& result, double simplify_tolerance_mm);

// CSV with header iter,disparity,added_cells,normalized_area,reward
void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

} // namespace shmtk::opt
