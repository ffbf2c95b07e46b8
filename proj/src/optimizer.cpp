#include "shmtk/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace shmtk::opt {

void OptimizerParams::validate() const {
    if (min_s < 1 || min_s > max_s) throw Error("optimizer: need 1 <= min_s <= max_s");
    if (attempts < 1) throw Error("optimizer: attempts must be >= 1");
    if (step <= 0) throw Error("optimizer: step must be > 0");
    if (area_weight <= 0.0) throw Error("optimizer: area_weight must be > 0");
    if (enlarge_lo < 0.0 || enlarge_hi < enlarge_lo)
        throw Error("optimizer: invalid bounding enlargement range");
}

namespace {

struct CellRect {
    int x, y, w, h;
};

bool rect_overlaps(const geom::ShapeMask& mask, const CellRect& r) {
    for (int row = r.y; row < r.y + r.h; ++row)
        for (int col = r.x; col < r.x + r.w; ++col)
            if (mask.at(col, row)) return true;
    return false;
}

void paint_rect(geom::ShapeMask& mask, const CellRect& r, bool value) {
    for (int row = r.y; row < r.y + r.h; ++row)
        for (int col = r.x; col < r.x + r.w; ++col) mask.set(col, row, value);
}

CellRect draw_rect(const geom::ShapeMask& grid, const OptimizerParams& p, Rand64& rng) {
    const int rw = static_cast<int>(rng.uniform_int(p.min_s, std::min(p.max_s, grid.width())));
    const int rh = static_cast<int>(rng.uniform_int(p.min_s, std::min(p.max_s, grid.height())));
    const int x = static_cast<int>(rng.uniform_int(0, grid.width() - rw));
    const int y = static_cast<int>(rng.uniform_int(0, grid.height() - rh));
    return {x, y, rw, rh};
}

} // namespace

geom::ShapeMask add_rects(const geom::ShapeMask& current, const geom::ShapeMask& img_neg, int n,
                          const OptimizerParams& params, Rand64& rng, std::size_t* skipped) {
    if (!current.same_grid(img_neg)) throw Error("add_rects: dimension mismatch");
    if (n < 0) throw Error("add_rects: n must be >= 0");
    geom::ShapeMask out = current;
    for (int i = 0; i < n; ++i) {
        bool placed = false;
        for (int j = 0; j < params.attempts; ++j) {
            const CellRect r = draw_rect(out, params, rng);
            if (rect_overlaps(img_neg, r) && rect_overlaps(out, r)) {
                paint_rect(out, r, true);
                placed = true;
                break;
            }
        }
        if (!placed && skipped) ++*skipped;
    }
    return out;
}

namespace {

// Convex mode: clear rect & img_neg, keeping original cells untouched and the
// mask 8-connected. Reverts a removal that would split the shape.
bool remove_rect_once(geom::ShapeMask& mask, const geom::ShapeMask& img_neg,
                      const OptimizerParams& params, Rand64& rng) {
    for (int j = 0; j < params.attempts; ++j) {
        const CellRect r = draw_rect(mask, params, rng);
        std::vector<std::pair<int, int>> cleared;
        for (int row = r.y; row < r.y + r.h; ++row)
            for (int col = r.x; col < r.x + r.w; ++col)
                if (mask.at(col, row) && img_neg.at(col, row)) cleared.push_back({col, row});
        if (cleared.empty()) continue;
        for (auto [c, rr] : cleared) mask.set(c, rr, false);
        if (geom::is_connected(mask)) return true;
        for (auto [c, rr] : cleared) mask.set(c, rr, true);
    }
    return false;
}

geom::ShapeMask embed(const geom::ShapeMask& src, int new_w, int new_h, int off_c, int off_r) {
    const Point2 new_origin{src.origin().x - off_c * src.resolution(),
                            src.origin().y - off_r * src.resolution()};
    geom::ShapeMask out(new_w, new_h, src.resolution(), new_origin);
    for (int r = 0; r < src.height(); ++r)
        for (int c = 0; c < src.width(); ++c)
            if (src.at(c, r)) out.set(c + off_c, r + off_r, true);
    return out;
}

} // namespace

namespace {

// Tight canvas: the optimization runs on the shape's own bounding box, the
// way the algorithm treats its input image. This keeps rectangle placement
// coordinates relative to the shape and the disparity registration stable
// regardless of how much padding the caller's raster carried.
geom::ShapeMask crop_to_bbox(const geom::ShapeMask& m) {
    int minc = m.width(), maxc = -1, minr = m.height(), maxr = -1;
    for (int r = 0; r < m.height(); ++r)
        for (int c = 0; c < m.width(); ++c)
            if (m.at(c, r)) {
                minc = std::min(minc, c);
                maxc = std::max(maxc, c);
                minr = std::min(minr, r);
                maxr = std::max(maxr, r);
            }
    if (maxc < 0) throw Error("optimize_obfuscation: empty original mask");
    const Point2 origin{m.origin().x + minc * m.resolution(),
                        m.origin().y + minr * m.resolution()};
    geom::ShapeMask out(maxc - minc + 1, maxr - minr + 1, m.resolution(), origin);
    for (int r = minr; r <= maxr; ++r)
        for (int c = minc; c <= maxc; ++c)
            if (m.at(c, r)) out.set(c - minc, r - minr, true);
    return out;
}

} // namespace

OptimizationResult optimize_obfuscation(const geom::ShapeMask& raw_original,
                                        const OptimizerParams& params) {
    params.validate();
    if (raw_original.foreground_count() == 0)
        throw Error("optimize_obfuscation: empty original mask");
    const geom::ShapeMask original = crop_to_bbox(raw_original);
    const std::size_t orig_count = original.foreground_count();
    if (!geom::is_connected(original)) throw Error("optimize_obfuscation: disconnected original");

    Rand64 rng(params.seed);
    OptimizationResult result;

    const geom::ShapeMask hull = geom::convex_hull_mask(original);
    const std::size_t hull_count = hull.foreground_count();
    const double ratio = static_cast<double>(hull_count) / static_cast<double>(orig_count);

    geom::ShapeMask work(1, 1, 1.0, {});
    geom::ShapeMask img_neg(1, 1, 1.0, {});
    geom::ShapeMask reference = original;
    bool concave = ratio >= params.convexity_ratio_threshold;

    if (concave) {
        result.mode = OptimizeMode::ConcaveAdd;
        img_neg = geom::ShapeMask(original.width(), original.height(), original.resolution(),
                                  original.origin());
        for (int r = 0; r < original.height(); ++r)
            for (int c = 0; c < original.width(); ++c)
                img_neg.set(c, r, hull.at(c, r) && !original.at(c, r));
        work = original;
    } else {
        result.mode = OptimizeMode::ConvexRemove;
        // enlarged bounding rectangle; fractions drawn before any rect draws
        const double fx = rng.uniform(params.enlarge_lo, params.enlarge_hi);
        const double fy = rng.uniform(params.enlarge_lo, params.enlarge_hi);

        int minc = original.width(), maxc = -1, minr = original.height(), maxr = -1;
        for (int r = 0; r < original.height(); ++r)
            for (int c = 0; c < original.width(); ++c)
                if (original.at(c, r)) {
                    minc = std::min(minc, c);
                    maxc = std::max(maxc, c);
                    minr = std::min(minr, r);
                    maxr = std::max(maxr, r);
                }
        const int bw = maxc - minc + 1, bh = maxr - minr + 1;
        const int grow_c = std::max(1, static_cast<int>(std::ceil(bw * fx / 2.0)));
        const int grow_r = std::max(1, static_cast<int>(std::ceil(bh * fy / 2.0)));

        // re-embed so the enlarged rectangle plus one guard cell fits
        const int need_left = std::max(0, grow_c - minc) + 1;
        const int need_right = std::max(0, grow_c - (original.width() - 1 - maxc)) + 1;
        const int need_bot = std::max(0, grow_r - minr) + 1;
        const int need_top = std::max(0, grow_r - (original.height() - 1 - maxr)) + 1;
        reference = embed(original, original.width() + need_left + need_right,
                          original.height() + need_bot + need_top, need_left, need_bot);
        const int rminc = minc + need_left - grow_c, rmaxc = maxc + need_left + grow_c;
        const int rminr = minr + need_bot - grow_r, rmaxr = maxr + need_bot + grow_r;

        work = geom::ShapeMask(reference.width(), reference.height(), reference.resolution(),
                               reference.origin());
        for (int r = rminr; r <= rmaxr; ++r)
            for (int c = rminc; c <= rmaxc; ++c) work.set(c, r, true);
        img_neg = geom::ShapeMask(reference.width(), reference.height(), reference.resolution(),
                                  reference.origin());
        for (int r = 0; r < reference.height(); ++r)
            for (int c = 0; c < reference.width(); ++c)
                img_neg.set(c, r, work.at(c, r) && !reference.at(c, r));
    }

    const std::size_t capacity = img_neg.foreground_count();
    if (capacity == 0) throw Error("optimize_obfuscation: no eligible region to modify");
    result.capacity_cells = capacity;

    int prev = params.start - 100;
    for (int i = params.start; i <= params.stop; i += params.step) {
        const int n = i - prev;
        prev = i;
        if (concave) {
            work = add_rects(work, img_neg, n, params, rng, &result.skipped_placements);
            work = geom::binary_closing(work, params.closing_radius);
            if (work.foreground_count() > hull_count) break;
        } else {
            for (int k = 0; k < n; ++k)
                if (!remove_rect_once(work, img_neg, params, rng)) ++result.skipped_placements;
        }
        TraceRow row;
        row.added_cells = geom::added_area(work, img_neg);
        row.disparity = geom::procrustes_disparity(work, reference);
        row.normalized_area = static_cast<double>(row.added_cells) / static_cast<double>(capacity);
        row.reward = row.disparity - params.area_weight * row.normalized_area;
        row.snapshot_id = result.snapshots.size();
        result.snapshots.push_back(work);
        result.trace.push_back(row);
    }
    if (result.trace.empty())
        throw Error("optimize_obfuscation: schedule produced zero iterations");

    std::size_t best = 0;
    for (std::size_t k = 1; k < result.trace.size(); ++k)
        if (result.trace[k].reward > result.trace[best].reward) best = k;
    result.optimized_index = best;
    result.optimized_mask = result.snapshots[result.trace[best].snapshot_id];
    return result;
}

shm::Boundary mask_to_boundary(const OptimizationResult& result, double simplify_tolerance_mm) {
    const geom::Polygon poly =
        geom::extract_boundary_polygon(result.optimized_mask, simplify_tolerance_mm);
    return shm::Boundary::make_poly(poly);
}

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("save_trace_csv: cannot open " + path);
    f << "iter,disparity,added_cells,normalized_area,reward\n";
    char buf[160];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%zu,%.12g,%.12g\n", i, trace[i].disparity,
                      trace[i].added_cells, trace[i].normalized_area, trace[i].reward);
        f << buf;
    }
}

} // namespace shmtk::opt
