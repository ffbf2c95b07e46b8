#include "shmtk/gcode.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace shmtk::gcode {

namespace {

struct Word {
    char letter;
    bool has_value;
    double value;
};

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string strip_inline_comment(const std::string& line) {
    auto pos = line.find(';');
    if (pos == std::string::npos) return line;
    return line.substr(0, pos);
}

// Splits "G1 X1.0 Y3.3" into letter/value words. A bare letter (as in
// "G28 X Y") is a word without a value. Throws on garbage like "Xabc".
std::vector<Word> split_words(const std::string& body, std::size_t line_no) {
    std::vector<Word> words;
    std::size_t i = 0;
    const std::size_t n = body.size();
    while (i < n) {
        if (std::isspace(static_cast<unsigned char>(body[i]))) {
            ++i;
            continue;
        }
        char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(body[i])));
        if (!std::isalpha(static_cast<unsigned char>(body[i]))) {
            throw Error("parse error at line " + std::to_string(line_no) +
                        ": unexpected character '" + std::string(1, body[i]) + "'");
        }
        ++i;
        std::size_t start = i;
        while (i < n && !std::isspace(static_cast<unsigned char>(body[i])) &&
               !std::isalpha(static_cast<unsigned char>(body[i]))) {
            ++i;
        }
        std::string token = body.substr(start, i - start);
        if (token.empty()) {
            words.push_back({letter, false, 0.0});
            continue;
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || ptr != token.data() + token.size()) {
            throw Error("parse error at line " + std::to_string(line_no) +
                        ": malformed numeric word '" + std::string(1, letter) + token + "'");
        }
        words.push_back({letter, true, value});
    }
    return words;
}

std::string format_number(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

// Minimal representation for S/F words: integers print bare, otherwise
// shortest round-trip form.
std::string format_minimal(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", v);
        return buf;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double parsed = 0.0;
    std::sscanf(buf, "%lf", &parsed);
    for (int prec = 1; prec < 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        std::sscanf(buf, "%lf", &parsed);
        if (parsed == v) break;
    }
    return buf;
}

Command parse_line(const std::string& raw, std::size_t line_no) {
    Command cmd;
    if (is_blank(raw) || raw[raw.find_first_not_of(" \t")] == ';') {
        cmd.kind = Command::Kind::Comment;
        cmd.text = raw;
        return cmd;
    }
    const std::string body = strip_inline_comment(raw);
    std::vector<Word> words = split_words(body, line_no);
    if (words.empty()) {
        cmd.kind = Command::Kind::Comment;
        cmd.text = raw;
        return cmd;
    }
    const Word& head = words.front();
    if (!head.has_value) {
        cmd.kind = Command::Kind::Passthrough;
        cmd.text = raw;
        return cmd;
    }
    const int code = static_cast<int>(std::lround(head.value));
    const bool integral = head.value == std::floor(head.value);

    auto want_value = [&](const Word& w) {
        if (!w.has_value)
            throw Error("parse error at line " + std::to_string(line_no) + ": word '" +
                        std::string(1, w.letter) + "' requires a value");
        return w.value;
    };

    if (head.letter == 'G' && integral && (code == 0 || code == 1)) {
        cmd.kind = Command::Kind::Move;
        cmd.rapid = (code == 0);
        for (std::size_t k = 1; k < words.size(); ++k) {
            const Word& w = words[k];
            switch (w.letter) {
            case 'X': cmd.x = want_value(w); break;
            case 'Y': cmd.y = want_value(w); break;
            case 'Z': cmd.z = want_value(w); break;
            case 'E': cmd.e = want_value(w); break;
            case 'F': cmd.f = want_value(w); break;
            default:
                throw Error("parse error at line " + std::to_string(line_no) +
                            ": unsupported word '" + std::string(1, w.letter) + "' on move");
            }
        }
        if (cmd.f && *cmd.f <= 0.0)
            throw Error("parse error at line " + std::to_string(line_no) + ": feedrate must be > 0");
        return cmd;
    }
    if (head.letter == 'G' && integral && code == 28) {
        cmd.kind = Command::Kind::Home;
        bool any = false;
        for (std::size_t k = 1; k < words.size(); ++k) {
            switch (words[k].letter) {
            case 'X': cmd.home_x = true; any = true; break;
            case 'Y': cmd.home_y = true; any = true; break;
            case 'Z': cmd.home_z = true; any = true; break;
            default: break;
            }
        }
        if (!any) cmd.home_x = cmd.home_y = cmd.home_z = true;
        return cmd;
    }
    if (head.letter == 'G' && integral && code == 91) {
        throw Error("parse error at line " + std::to_string(line_no) +
                    ": relative positioning (G91) is unsupported");
    }
    if (head.letter == 'M' && integral && code == 83) {
        throw Error("parse error at line " + std::to_string(line_no) +
                    ": relative extrusion (M83) is unsupported");
    }
    if (head.letter == 'M' && integral && code == 106) {
        cmd.kind = Command::Kind::FanSpeed;
        cmd.s_value = 0.0;
        for (std::size_t k = 1; k < words.size(); ++k)
            if (words[k].letter == 'S') cmd.s_value = want_value(words[k]);
        if (cmd.s_value < 0.0 || cmd.s_value > 100.0)
            throw Error("parse error at line " + std::to_string(line_no) +
                        ": fan speed percent out of [0,100]");
        return cmd;
    }
    if (head.letter == 'M' && integral && code == 104) {
        cmd.kind = Command::Kind::HotendTemp;
        cmd.s_value = 0.0;
        for (std::size_t k = 1; k < words.size(); ++k)
            if (words[k].letter == 'S') cmd.s_value = want_value(words[k]);
        if (cmd.s_value < 0.0)
            throw Error("parse error at line " + std::to_string(line_no) +
                        ": hotend temperature must be >= 0");
        return cmd;
    }
    if (head.letter == 'M' && integral && code == 400) {
        cmd.kind = Command::Kind::WaitMoves;
        return cmd;
    }
    cmd.kind = Command::Kind::Passthrough;
    cmd.text = raw;
    return cmd;
}

} // namespace

GCodeProgram parse_gcode(const std::string& text) {
    GCodeProgram program;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        if (pos == text.size()) {
            // no trailing newline: done (the final empty slice is not a line)
            break;
        }
        std::size_t nl = text.find('\n', pos);
        std::string line;
        if (nl == std::string::npos) {
            line = text.substr(pos);
            pos = text.size();
        } else {
            line = text.substr(pos, nl - pos);
            pos = nl + 1;
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no;
        program.commands.push_back(parse_line(line, line_no));
        program.source_lines.push_back(line_no);
    }
    return program;
}

std::string emit_command(const Command& cmd, const EmitOptions& opts) {
    switch (cmd.kind) {
    case Command::Kind::Move: {
        std::string out = cmd.rapid ? "G0" : "G1";
        if (cmd.x) out += " X" + format_number(*cmd.x, opts.coord_decimals);
        if (cmd.y) out += " Y" + format_number(*cmd.y, opts.coord_decimals);
        if (cmd.z) out += " Z" + format_number(*cmd.z, opts.coord_decimals);
        if (cmd.e) out += " E" + format_number(*cmd.e, opts.e_decimals);
        if (cmd.f) out += " F" + format_minimal(*cmd.f);
        return out;
    }
    case Command::Kind::Home: {
        std::string out = "G28";
        if (!(cmd.home_x && cmd.home_y && cmd.home_z)) {
            if (cmd.home_x) out += " X";
            if (cmd.home_y) out += " Y";
            if (cmd.home_z) out += " Z";
        }
        return out;
    }
    case Command::Kind::FanSpeed: return "M106 S" + format_minimal(cmd.s_value);
    case Command::Kind::HotendTemp: return "M104 S" + format_minimal(cmd.s_value);
    case Command::Kind::WaitMoves: return "M400";
    case Command::Kind::Passthrough:
    case Command::Kind::Comment: return cmd.text;
    }
    return {};
}

std::string emit_gcode(const GCodeProgram& program, const EmitOptions& opts) {
    std::string out;
    for (const Command& cmd : program.commands) {
        out += emit_command(cmd, opts);
        out += '\n';
    }
    return out;
}

Toolpath to_toolpath(const GCodeProgram& program, const ToolpathDefaults& defaults) {
    if (defaults.feedrate <= 0.0) throw Error("to_toolpath: default feedrate must be > 0");

    std::optional<double> px, py, pz;
    if (defaults.position) {
        px = defaults.position->x;
        py = defaults.position->y;
        pz = defaults.position->z;
    }
    double feed = defaults.feedrate;
    std::optional<double> last_e;
    int layer = 0;

    Toolpath path;
    bool initial_set = false;

    for (std::size_t i = 0; i < program.commands.size(); ++i) {
        const Command& cmd = program.commands[i];
        const std::size_t line = i < program.source_lines.size() ? program.source_lines[i] : 0;
        if (cmd.kind == Command::Kind::Home) {
            if (cmd.home_x) px = 0.0;
            if (cmd.home_y) py = 0.0;
            if (cmd.home_z) pz = 0.0;
            continue;
        }
        if (cmd.kind != Command::Kind::Move) continue;
        if (cmd.f) feed = *cmd.f;
        if (!cmd.has_axis_word()) {
            if (cmd.e) last_e = cmd.e; // E-only move: extrude/retract in place, no motion
            continue;
        }

        const bool full_xyz = cmd.x && cmd.y && cmd.z;
        if ((!px || !py || !pz) && !full_xyz) {
            throw Error("unknown start position at line " + std::to_string(line) +
                        ": move before position is established (home first or give full XYZ)");
        }
        Point3 start{px.value_or(*cmd.x), py.value_or(*cmd.y), pz.value_or(*cmd.z)};
        if (!initial_set) {
            path.initial_position = start;
            initial_set = true;
        }
        Point3 end{cmd.x.value_or(start.x), cmd.y.value_or(start.y), cmd.z.value_or(start.z)};

        bool extruding = false;
        if (cmd.e && !cmd.rapid) {
            if (last_e && *cmd.e > *last_e) extruding = true;
            if (!last_e && *cmd.e > 0.0) extruding = true;
        }
        if (cmd.e) last_e = cmd.e;

        if (end.z > start.z) ++layer;

        Segment seg;
        seg.start = start;
        seg.end = end;
        seg.feedrate = feed;
        seg.extruding = extruding;
        seg.layer = layer;
        path.segments.push_back(seg);

        px = end.x;
        py = end.y;
        pz = end.z;
    }
    if (!initial_set && defaults.position) path.initial_position = *defaults.position;
    return path;
}

double print_time_s(const Toolpath& toolpath) {
    double t = 0.0;
    for (const Segment& s : toolpath.segments) t += s.duration_s();
    return t;
}

double xy_path_length(const Toolpath& toolpath) {
    double len = 0.0;
    for (const Segment& s : toolpath.segments) len += s.xy_length();
    return len;
}

} // namespace shmtk::gcode
