#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shmtk/gcode.hpp"
#include "shmtk/geometry.hpp"

namespace shmtk::shm {

// Obfuscation boundary every motion is extended to.
struct Boundary {
    enum class Kind { Rect, Poly };
    Kind kind = Kind::Rect;
    geom::Rect rect;
    geom::Polygon poly;

    static Boundary make_rect(const geom::Rect& r);
    static Boundary make_poly(const geom::Polygon& p);

    bool contains(const Point2& p, double tol = 1e-6) const;
};

struct ShmConfig {
    double margin_mm = 2.0;        // rect mode bounding margin
    double min_extension_mm = 1.0; // endpoints closer to the boundary are left alone
    enum class Filter { AllMoves, ExtrudingOnly };
    Filter segment_filter = Filter::AllMoves;
    // unset: extension moves inherit the segment feedrate
    std::optional<double> fixed_extension_feedrate;
};

// Nearest forward intersection of {end + t*dir, t>0} with the boundary, or
// nullopt when the travel would be shorter than min_extension. The segment
// endpoint must lie inside or on the boundary.
std::optional<Point2> extension_point(const gcode::Segment& segment, const Boundary& boundary,
                                      double min_extension_mm);

struct ShmResult {
    gcode::GCodeProgram program;
    bool warning_no_motion = false;
    std::size_t extended_count = 0;
    double added_xy_length_mm = 0.0;
};

// Rewrites the program: after every selected motion with a valid extension
// point Q, inserts a non-extruding move to Q and a non-extruding move back to
// the original endpoint. Original commands are preserved verbatim.
ShmResult apply_shm(const gcode::GCodeProgram& program, const Boundary& boundary,
                    const ShmConfig& config);

// Axis-aligned bounding rectangle of the toolpath's XY motion plus margin.
Boundary rect_boundary_for(const gcode::Toolpath& toolpath, double margin_mm);

struct OverheadRow {
    double feedrate;  // mm/min
    double t_orig_s;
    double t_obf_s;
    double added_s;
    double percent;
};

// Times with every feedrate overridden to the row's value (constant-velocity
// model, so added * feedrate is constant across rows).
std::vector<OverheadRow> overhead_report(const gcode::Toolpath& original,
                                         const gcode::Toolpath& obfuscated,
                                         const std::vector<double>& feedrates);

// Polygon JSON {"vertices": [[x_mm, y_mm], ...]}; rects are saved as their
// four corners.
void save_boundary_json(const Boundary& boundary, const std::string& path);
Boundary load_boundary_json(const std::string& path);

} // namespace shmtk::shm
