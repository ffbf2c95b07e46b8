#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "shmtk/common.hpp"

namespace shmtk::gcode {

// One parsed line. Move keeps only the words that were present on the line;
// an absent word is "unset", never zero.
struct Command {
    enum class Kind {
        Move,        // G0 / G1
        Home,        // G28
        FanSpeed,    // M106 S<percent>
        HotendTemp,  // M104 S<celsius>
        WaitMoves,   // M400
        Passthrough, // anything recognized as a command we do not model
        Comment,     // empty line or ';'-prefixed line, kept verbatim
    };

    Kind kind = Kind::Comment;

    bool rapid = false; // G0 vs G1
    std::optional<double> x, y, z, e, f;

    bool home_x = false, home_y = false, home_z = false;

    double s_value = 0.0;    // FanSpeed percent / HotendTemp celsius
    std::string text;        // Passthrough and Comment payload, verbatim

    bool has_axis_word() const { return x || y || z; }
};

struct GCodeProgram {
    std::vector<Command> commands;
    std::vector<std::size_t> source_lines; // 1-based origin; 0 for synthetic commands

    std::size_t size() const { return commands.size(); }
};

// Timed straight-line motion in machine coordinates.
struct Segment {
    Point3 start;
    Point3 end;
    double feedrate = 0.0; // mm/min, > 0
    bool extruding = false;
    int layer = 0;

    double length() const { return (end - start).norm(); }
    double xy_length() const { return (end.xy() - start.xy()).norm(); }
    double duration_s() const { return length() / feedrate * 60.0; }
};

struct Toolpath {
    std::vector<Segment> segments;
    Point3 initial_position;

    bool empty() const { return segments.empty(); }
};

struct ToolpathDefaults {
    std::optional<Point3> position; // unset: first move must establish axes (or home first)
    double feedrate = 0.0;          // mm/min, required > 0
};

struct EmitOptions {
    int coord_decimals = 3; // X/Y/Z and S words
    int e_decimals = 5;
};

// Parsing accepts arbitrary text; a line is either a Comment, a recognized
// command, or a Passthrough. Malformed numeric words and G91/M83 raise Error
// with the 1-based line number.
GCodeProgram parse_gcode(const std::string& text);

std::string emit_gcode(const GCodeProgram& program, const EmitOptions& opts = {});
std::string emit_command(const Command& cmd, const EmitOptions& opts = {});

// Kinematic interpretation under absolute positioning and a constant-velocity
// model. Extrusion flag: E word present with positive delta on a G1.
Toolpath to_toolpath(const GCodeProgram& program, const ToolpathDefaults& defaults);

double print_time_s(const Toolpath& toolpath);

// Total XY-projected path length, mm.
double xy_path_length(const Toolpath& toolpath);

} // namespace shmtk::gcode
