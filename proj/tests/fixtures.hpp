#pragma once

// Deterministic specimen generators shared by the unit tests, the acceptance
// suite, and the genfix tool.

#include <cmath>
#include <string>
#include <vector>

#include "shmtk/gcode.hpp"
#include "shmtk/geometry.hpp"

namespace fixtures {

using shmtk::Point2;
using shmtk::gcode::Command;
using shmtk::gcode::GCodeProgram;

inline void push(GCodeProgram& p, Command c) {
    p.commands.push_back(std::move(c));
    p.source_lines.push_back(0);
}

inline Command move_cmd(double x, double y, std::optional<double> e = std::nullopt,
                        std::optional<double> f = std::nullopt, bool rapid = false) {
    Command c;
    c.kind = Command::Kind::Move;
    c.rapid = rapid;
    c.x = x;
    c.y = y;
    c.e = e;
    c.f = f;
    return c;
}

inline Command home_cmd() {
    Command c;
    c.kind = Command::Kind::Home;
    c.home_x = c.home_y = c.home_z = true;
    return c;
}

inline Command z_cmd(double z) {
    Command c;
    c.kind = Command::Kind::Move;
    c.z = z;
    return c;
}

// Right triangle drawn as aligned zigzag infill, apex at the bottom: every
// row runs right-to-left at constant y, the return is a single diagonal back
// to the next (wider) row's right end. Each junction is a near-reversal, so
// one acoustic spike per turn, and with the apex at the bottom every forward
// extension exits through a side wall rather than the top.
// Row i width: base * (i+1)/rows; vertical pitch between rows.
inline GCodeProgram triangle_zigzag(double base = 60.0, int rows = 20, double pitch = 2.0,
                                    double feed = 1200.0, int layers = 1,
                                    double layer_height = 0.2) {
    GCodeProgram p;
    const double w0 = base / rows;
    // position-establishing zero move: the specimen starts at the apex row's
    // right end, so the first audible turn is the first real corner
    {
        Command start = move_cmd(w0, 0.0);
        start.z = 0.0;
        start.f = feed;
        push(p, start);
    }
    double e = 0.0;
    const double e_per_mm = 0.05;
    for (int layer = 0; layer < layers; ++layer) {
        if (layer > 0) {
            push(p, z_cmd(layer * layer_height));
            push(p, move_cmd(w0, 0.0)); // travel back to the start corner
        }
        double x = w0, y = 0.0;
        for (int i = 0; i < rows; ++i) {
            const double w = base * static_cast<double>(i + 1) / rows;
            e += w * e_per_mm;
            push(p, move_cmd(x - w, y, e)); // print row westward
            x -= w;
            if (i + 1 < rows) {
                const double nxt = base * static_cast<double>(i + 2) / rows;
                push(p, move_cmd(x + nxt, y + pitch)); // diagonal return, travel
                x += nxt;
                y += pitch;
            }
        }
    }
    return p;
}

// Serpentine variant: rows alternate direction, connectors step along the
// shape edge. This is the slicer-style fill whose connectors are tiny
// relative to the rows. The default proportions are the equal-area naive
// case: bounding the 88 x 38 right triangle in its own bounding box and
// extending every motion there triples the print time.
inline GCodeProgram triangle_serpentine(double base = 88.0, int rows = 20, double pitch = 2.0,
                                        double feed = 1200.0) {
    GCodeProgram p;
    push(p, home_cmd());
    Command f = move_cmd(0.0, 0.0);
    f.f = feed;
    push(p, f);
    double e = 0.0;
    const double e_per_mm = 0.05;
    double x = 0.0, y = 0.0;
    for (int i = 0; i < rows; ++i) {
        const double w = base * (1.0 - static_cast<double>(i) / rows);
        const double target = (i % 2 == 0) ? x + w : x - w;
        e += w * e_per_mm;
        push(p, move_cmd(target, y, e));
        x = target;
        if (i + 1 < rows) {
            const double nxt = base * (1.0 - static_cast<double>(i + 1) / rows);
            // step up, staying on the shape edge for the next row
            double sx = x;
            if (i % 2 == 0) sx = nxt; // came east; next row is westward from its right end
            else sx = 0.0;
            y += pitch;
            push(p, move_cmd(sx, y));
            x = sx;
        }
    }
    return p;
}

// The single-axis calibration sweep.
inline GCodeProgram sweep_gcode(double x0 = 0.0, double x1 = 180.0, double feed = 500.0) {
    GCodeProgram p;
    push(p, home_cmd());
    Command a = move_cmd(x0, 0.0);
    a.f = feed;
    push(p, a);
    push(p, move_cmd(x1, 0.0));
    return p;
}

// Hold-pattern script: 0 -> 100 -> 50 -> 120 -> 80 -> 160 -> 0 mm at F500.
inline GCodeProgram hold_pattern_gcode(double feed = 500.0) {
    GCodeProgram p;
    push(p, home_cmd());
    const double xs[] = {100.0, 50.0, 120.0, 80.0, 160.0, 0.0};
    bool first = true;
    for (double x : xs) {
        Command c = move_cmd(x, 0.0);
        if (first) {
            c.f = feed;
            first = false;
        }
        push(p, c);
    }
    return p;
}

// Key silhouette drawn as outlines: ring head with a hole, thin shaft, three
// teeth hanging from the shaft's far half. Deeply concave, so the convex
// hull leaves a large eligible region.
inline GCodeProgram key_gcode(int layers = 3, double feed = 1200.0, double layer_height = 0.2) {
    GCodeProgram p;
    push(p, home_cmd());
    double e = 0.0;
    const double e_per_mm = 0.05;

    auto ring = [&](GCodeProgram& prog, double cx, double cy, double r, int n, bool extrude,
                    bool rapid_approach) {
        Command approach = move_cmd(cx + r, cy);
        approach.rapid = rapid_approach;
        push(prog, approach);
        for (int k = 1; k <= n; ++k) {
            const double a = 2.0 * 3.14159265358979323846 * k / n;
            const double x = cx + r * std::cos(a);
            const double yy = cy + r * std::sin(a);
            if (extrude) {
                const double prevx = cx + r * std::cos(a - 2.0 * 3.14159265358979323846 / n);
                const double prevy = cy + r * std::sin(a - 2.0 * 3.14159265358979323846 / n);
                e += std::hypot(x - prevx, yy - prevy) * e_per_mm;
                push(prog, move_cmd(x, yy, e));
            } else {
                push(prog, move_cmd(x, yy));
            }
        }
    };
    auto box = [&](GCodeProgram& prog, double x0, double y0, double x1, double y1) {
        Command approach = move_cmd(x0, y0);
        approach.rapid = true;
        push(prog, approach);
        const double pts[4][2] = {{x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
        double px = x0, py = y0;
        for (auto& q : pts) {
            e += std::hypot(q[0] - px, q[1] - py) * e_per_mm;
            push(prog, move_cmd(q[0], q[1], e));
            px = q[0];
            py = q[1];
        }
    };

    for (int layer = 0; layer < layers; ++layer) {
        if (layer == 0) {
            Command f = move_cmd(0.0, 0.0);
            f.f = feed;
            push(p, f);
        } else {
            push(p, z_cmd(layer * layer_height));
        }
        // two-pass walls one line width apart, like a sliced double perimeter
        ring(p, 19.0, 37.0, 15.0, 48, true, true); // head outline
        ring(p, 19.0, 37.0, 14.5, 48, true, true);
        ring(p, 19.0, 37.0, 6.5, 32, true, true);  // hole outline
        ring(p, 19.0, 37.0, 7.0, 32, true, true);
        box(p, 19.0, 35.0, 107.0, 40.0);           // shaft
        box(p, 19.5, 35.5, 106.5, 39.5);
        box(p, 75.0, 17.0, 80.0, 35.0);            // teeth
        box(p, 75.5, 17.5, 79.5, 34.5);
        box(p, 86.0, 17.0, 91.0, 35.0);
        box(p, 86.5, 17.5, 90.5, 34.5);
        box(p, 97.0, 17.0, 102.0, 35.0);
        box(p, 97.5, 17.5, 101.5, 34.5);
    }
    return p;
}

// XY segments of one layer of a toolpath; by default only the deposited
// (extruding) moves, which is what the printed shape consists of.
inline std::vector<shmtk::geom::SegmentXY> layer_segments(const shmtk::gcode::Toolpath& t,
                                                          int layer,
                                                          bool extruding_only = true) {
    std::vector<shmtk::geom::SegmentXY> out;
    for (const auto& s : t.segments) {
        if (s.layer != layer) continue;
        if (extruding_only && !s.extruding) continue;
        if (s.xy_length() <= 0.0) continue;
        out.push_back({s.start.xy(), s.end.xy()});
    }
    return out;
}

// The key silhouette rasterized from its own toolpath; the optimizer fixture.
inline shmtk::geom::ShapeMask key_mask(double resolution = 0.5, double padding = 6.0) {
    const shmtk::gcode::GCodeProgram prog = key_gcode(1);
    shmtk::gcode::ToolpathDefaults d;
    d.feedrate = 1200.0;
    const shmtk::gcode::Toolpath t = shmtk::gcode::to_toolpath(prog, d);
    return shmtk::geom::rasterize(layer_segments(t, 0), resolution, padding);
}

// Mixed corpus exercising every modeled command plus passthroughs; used for
// the parser round-trip gate. Deterministic, about 200 lines.
inline std::string corpus_text() {
    std::string out;
    out += "; test corpus\n";
    out += "G28\n";
    out += "M104 S235\n";
    out += "M106 S50\n";
    char buf[96];
    double e = 0.0;
    for (int i = 0; i < 90; ++i) {
        const double x = 5.0 + 2.5 * i;
        const double y = 3.0 + 1.5 * (i % 7);
        e += 0.21;
        std::snprintf(buf, sizeof(buf), "G1 X%.3f Y%.3f E%.5f\n", x, y, e);
        out += buf;
        if (i % 6 == 0) out += "; layer comment\n";
        if (i % 9 == 0) {
            std::snprintf(buf, sizeof(buf), "G0 X%.3f Y%.3f\n", x + 1.0, y + 1.0);
            out += buf;
        }
        if (i % 12 == 0) out += "M400\n";
    }
    for (int i = 0; i < 60; ++i) {
        const double x = 150.0 - 2.0 * i;
        std::snprintf(buf, sizeof(buf), "G1 X%.3f F%d\n", x, 600 + 10 * i);
        out += buf;
        if (i % 8 == 0) out += "G28 X Y\n";
        if (i % 10 == 0) out += "M997\n";
        if (i % 13 == 0) out += "M999\n";
        if (i % 5 == 0) out += "\n";
    }
    out += "M106 S0\n";
    out += "M104 S0\n";
    return out;
}

} // namespace fixtures
