#include "shmtk/shm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace shmtk::shm {

Boundary Boundary::make_rect(const geom::Rect& r) {
    if (!r.valid()) throw Error("Boundary: invalid rectangle");
    Boundary b;
    b.kind = Kind::Rect;
    b.rect = r;
    return b;
}

Boundary Boundary::make_poly(const geom::Polygon& p) {
    if (p.vertices.size() < 3) throw Error("Boundary: polygon needs at least 3 vertices");
    Boundary b;
    b.kind = Kind::Poly;
    b.poly = p;
    return b;
}

bool Boundary::contains(const Point2& p, double tol) const {
    if (kind == Kind::Rect) return rect.contains(p, tol);
    return geom::point_in_polygon(poly, p, tol);
}

namespace {

// Smallest positive travel from p along dir to the boundary. Vertex passes
// resolve to the smallest positive candidate.
std::optional<double> ray_exit(const Boundary& b, const Point2& p, const Point2& dir) {
    constexpr double kTiny = 1e-12;
    double best = std::numeric_limits<double>::infinity();
    if (b.kind == Boundary::Kind::Rect) {
        if (dir.x > kTiny) best = std::min(best, (b.rect.max.x - p.x) / dir.x);
        if (dir.x < -kTiny) best = std::min(best, (b.rect.min.x - p.x) / dir.x);
        if (dir.y > kTiny) best = std::min(best, (b.rect.max.y - p.y) / dir.y);
        if (dir.y < -kTiny) best = std::min(best, (b.rect.min.y - p.y) / dir.y);
    } else {
        const auto& v = b.poly.vertices;
        const std::size_t n = v.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 a = v[i];
            const Point2 e = v[(i + 1) % n] - a;
            const double denom = dir.cross(e);
            if (std::abs(denom) < kTiny) continue; // parallel edge
            const Point2 ap = a - p;
            const double t = ap.cross(e) / denom;
            const double s = ap.cross(dir) / denom;
            if (t > -1e-9 && s >= -1e-9 && s <= 1.0 + 1e-9) best = std::min(best, std::max(t, 0.0));
        }
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

} // namespace

std::optional<Point2> extension_point(const gcode::Segment& segment, const Boundary& boundary,
                                      double min_extension_mm) {
    const Point2 start = segment.start.xy();
    const Point2 end = segment.end.xy();
    const Point2 delta = end - start;
    const double len = delta.norm();
    if (len <= 0.0) throw Error("extension_point: zero-length XY segment");
    if (!boundary.contains(end, 1e-6)) throw Error("toolpath escapes boundary");

    const Point2 dir = delta * (1.0 / len);
    const std::optional<double> t = ray_exit(boundary, end, dir);
    if (!t) throw Error("toolpath escapes boundary"); // inside but no forward exit: degenerate
    if (*t < min_extension_mm) return std::nullopt;
    return end + dir * *t;
}

ShmResult apply_shm(const gcode::GCodeProgram& program, const Boundary& boundary,
                    const ShmConfig& config) {
    using gcode::Command;
    ShmResult result;

    // modal interpreter state, matching to_toolpath
    std::optional<double> px, py, pz, last_e;
    double modal_feed = 0.0;
    bool any_motion = false;

    for (std::size_t i = 0; i < program.commands.size(); ++i) {
        const Command& cmd = program.commands[i];
        const std::size_t line = i < program.source_lines.size() ? program.source_lines[i] : 0;
        result.program.commands.push_back(cmd);
        result.program.source_lines.push_back(line);

        if (cmd.kind == Command::Kind::Home) {
            if (cmd.home_x) px = 0.0;
            if (cmd.home_y) py = 0.0;
            if (cmd.home_z) pz = 0.0;
            continue;
        }
        if (cmd.kind != Command::Kind::Move) continue;
        if (cmd.f) modal_feed = *cmd.f;
        if (!cmd.has_axis_word()) {
            if (cmd.e) last_e = cmd.e;
            continue;
        }
        const bool full_xyz = cmd.x && cmd.y && cmd.z;
        if ((!px || !py || !pz) && !full_xyz)
            throw Error("unknown start position at line " + std::to_string(line));

        const Point3 start{px.value_or(*cmd.x), py.value_or(*cmd.y), pz.value_or(*cmd.z)};
        const Point3 end{cmd.x.value_or(start.x), cmd.y.value_or(start.y), cmd.z.value_or(start.z)};

        bool extruding = false;
        if (cmd.e && !cmd.rapid) {
            if (last_e && *cmd.e > *last_e) extruding = true;
            if (!last_e && *cmd.e > 0.0) extruding = true;
        }
        if (cmd.e) last_e = cmd.e;
        px = end.x;
        py = end.y;
        pz = end.z;

        const double xy_len = (end.xy() - start.xy()).norm();
        if (xy_len <= 0.0) continue;
        any_motion = true;

        const bool selected = config.segment_filter == ShmConfig::Filter::AllMoves || extruding;
        if (!selected) continue;

        gcode::Segment seg;
        seg.start = start;
        seg.end = end;
        seg.feedrate = modal_feed > 0.0 ? modal_feed : 1.0;
        const std::optional<Point2> q = extension_point(seg, boundary, config.min_extension_mm);
        if (!q) continue;

        Command out;
        out.kind = Command::Kind::Move;
        out.rapid = false;
        out.x = q->x;
        out.y = q->y;
        if (config.fixed_extension_feedrate) out.f = *config.fixed_extension_feedrate;
        result.program.commands.push_back(out);
        result.program.source_lines.push_back(0);

        Command back;
        back.kind = Command::Kind::Move;
        back.rapid = false;
        back.x = end.x;
        back.y = end.y;
        // restore the modal feedrate disturbed by a fixed extension feedrate
        if (config.fixed_extension_feedrate && modal_feed > 0.0) back.f = modal_feed;
        result.program.commands.push_back(back);
        result.program.source_lines.push_back(0);

        ++result.extended_count;
        result.added_xy_length_mm += 2.0 * (*q - end.xy()).norm();
    }

    result.warning_no_motion = !any_motion;
    return result;
}

Boundary rect_boundary_for(const gcode::Toolpath& toolpath, double margin_mm) {
    if (margin_mm < 0.0) throw Error("rect_boundary_for: margin must be >= 0");
    if (toolpath.empty()) throw Error("rect_boundary_for: empty toolpath");
    double minx = std::numeric_limits<double>::infinity(), miny = minx;
    double maxx = -minx, maxy = -minx;
    for (const gcode::Segment& s : toolpath.segments) {
        minx = std::min({minx, s.start.x, s.end.x});
        miny = std::min({miny, s.start.y, s.end.y});
        maxx = std::max({maxx, s.start.x, s.end.x});
        maxy = std::max({maxy, s.start.y, s.end.y});
    }
    geom::Rect r{{minx - margin_mm, miny - margin_mm}, {maxx + margin_mm, maxy + margin_mm}};
    if (!r.valid()) {
        // degenerate (single line); pad the flat axis so the rect stays valid
        const double pad = std::max(margin_mm, 1e-6);
        r.min.x = std::min(r.min.x, minx - pad);
        r.min.y = std::min(r.min.y, miny - pad);
        r.max.x = std::max(r.max.x, maxx + pad);
        r.max.y = std::max(r.max.y, maxy + pad);
    }
    return Boundary::make_rect(r);
}

std::vector<OverheadRow> overhead_report(const gcode::Toolpath& original,
                                         const gcode::Toolpath& obfuscated,
                                         const std::vector<double>& feedrates) {
    double len_orig = 0.0, len_obf = 0.0;
    for (const gcode::Segment& s : original.segments) len_orig += s.length();
    for (const gcode::Segment& s : obfuscated.segments) len_obf += s.length();

    std::vector<OverheadRow> rows;
    rows.reserve(feedrates.size());
    for (double f : feedrates) {
        if (f <= 0.0) throw Error("overhead_report: feedrate must be > 0");
        OverheadRow row;
        row.feedrate = f;
        row.t_orig_s = len_orig / f * 60.0;
        row.t_obf_s = len_obf / f * 60.0;
        row.added_s = row.t_obf_s - row.t_orig_s;
        row.percent = row.t_orig_s > 0.0 ? 100.0 * row.added_s / row.t_orig_s : 0.0;
        rows.push_back(row);
    }
    return rows;
}

void save_boundary_json(const Boundary& boundary, const std::string& path) {
    nlohmann::ordered_json j;
    auto& verts = j["vertices"];
    verts = nlohmann::json::array();
    if (boundary.kind == Boundary::Kind::Rect) {
        const geom::Rect& r = boundary.rect;
        verts.push_back({r.min.x, r.min.y});
        verts.push_back({r.max.x, r.min.y});
        verts.push_back({r.max.x, r.max.y});
        verts.push_back({r.min.x, r.max.y});
    } else {
        for (const Point2& v : boundary.poly.vertices) verts.push_back({v.x, v.y});
    }
    std::ofstream f(path);
    if (!f) throw Error("save_boundary_json: cannot open " + path);
    f << j.dump(2) << "\n";
}

Boundary load_boundary_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("load_boundary_json: cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(f, nullptr, /*allow_exceptions=*/true);
    geom::Polygon poly;
    for (const auto& v : j.at("vertices")) {
        poly.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    }
    return Boundary::make_poly(poly);
}

} // namespace shmtk::shm
