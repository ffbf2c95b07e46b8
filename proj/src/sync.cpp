#include "shmtk/sync.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace shmtk::sync {

namespace {

double wall_seconds() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

} // namespace

SimulatedPrinter::SimulatedPrinter(ClockMode mode, std::optional<Point3> initial_position,
                                   double default_feedrate)
    : mode_(mode), feed_(default_feedrate) {
    if (initial_position) {
        px_ = initial_position->x;
        py_ = initial_position->y;
        pz_ = initial_position->z;
    }
    if (mode_ == ClockMode::Realtime) wall_start_s_ = wall_seconds();
}

double SimulatedPrinter::now_s() {
    if (mode_ == ClockMode::Virtual) return clock_s_;
    return wall_seconds() - wall_start_s_;
}

Point3 SimulatedPrinter::position() const {
    return {px_.value_or(0.0), py_.value_or(0.0), pz_.value_or(0.0)};
}

void SimulatedPrinter::send(const std::string& line) {
    execute(line);
}

std::string SimulatedPrinter::receive() {
    if (replies_.empty()) throw Error("SimulatedPrinter: receive() with no pending reply");
    std::string r = replies_.front();
    replies_.erase(replies_.begin());
    return r;
}

void SimulatedPrinter::execute(const std::string& line) {
    gcode::GCodeProgram prog = gcode::parse_gcode(line + "\n");
    if (prog.commands.empty()) {
        replies_.push_back("ok");
        return;
    }
    const gcode::Command& cmd = prog.commands.front();
    using K = gcode::Command::Kind;
    switch (cmd.kind) {
    case K::Home: {
        if (cmd.home_x) px_ = 0.0;
        if (cmd.home_y) py_ = 0.0;
        if (cmd.home_z) pz_ = 0.0;
        replies_.push_back("ok");
        return;
    }
    case K::Move: {
        if (cmd.f) feed_ = *cmd.f;
        if (!cmd.has_axis_word()) {
            replies_.push_back("ok");
            return;
        }
        const bool full = cmd.x && cmd.y && cmd.z;
        if ((!px_ || !py_ || !pz_) && !full)
            throw Error("SimulatedPrinter: move before homing: " + line);
        const Point3 start{px_.value_or(*cmd.x), py_.value_or(*cmd.y), pz_.value_or(*cmd.z)};
        const Point3 end{cmd.x.value_or(start.x), cmd.y.value_or(start.y),
                         cmd.z.value_or(start.z)};
        const double dist = (end - start).norm();
        const double duration = feed_ > 0.0 ? dist / feed_ * 60.0 : 0.0;
        motion_end_s_ = std::max(motion_end_s_, now_s()) + duration;
        px_ = end.x;
        py_ = end.y;
        pz_ = end.z;
        replies_.push_back("ok"); // moves are buffered; ok is immediate
        return;
    }
    case K::WaitMoves: {
        if (mode_ == ClockMode::Virtual) {
            clock_s_ = std::max(clock_s_, motion_end_s_);
        } else {
            const double wait = motion_end_s_ - now_s();
            if (wait > 0.0)
                std::this_thread::sleep_for(std::chrono::duration<double>(wait));
        }
        replies_.push_back("ok");
        return;
    }
    default:
        replies_.push_back("ok");
        return;
    }
}

ExtractedXYZ extract_xyz(const std::string& line) {
    ExtractedXYZ out;
    std::size_t i = 0;
    const std::size_t n = line.size();
    // comments end the scannable part
    const std::size_t end = std::min(n, line.find(';'));
    while (i < end) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(line[i])));
        if (c == 'X' || c == 'Y' || c == 'Z') {
            std::size_t j = i + 1;
            std::size_t k = j;
            while (k < end && !std::isspace(static_cast<unsigned char>(line[k]))) ++k;
            if (k > j) {
                double v = 0.0;
                const char* first = line.data() + j;
                const char* last = line.data() + k;
                auto [ptr, ec] = std::from_chars(first, last, v);
                if (ec != std::errc{} || ptr != last)
                    throw Error("extract_xyz: malformed number in line: " + line);
                if (c == 'X') out.x = v;
                if (c == 'Y') out.y = v;
                if (c == 'Z') out.z = v;
            }
            i = std::max(k, j);
        } else {
            ++i;
        }
    }
    return out;
}

SimulatedAudioSource::SimulatedAudioSource(gcode::Toolpath toolpath,
                                           acoustics::AcousticModel model, double sample_rate,
                                           std::uint64_t seed)
    : toolpath_(std::move(toolpath)), model_(model), sample_rate_(sample_rate), seed_(seed) {}

acoustics::AudioBuffer SimulatedAudioSource::stop() {
    return acoustics::synthesize_audio(toolpath_, model_, sample_rate_, seed_);
}

SyncRun stream_with_sync(const gcode::GCodeProgram& program, PrinterPort& port,
                         AudioSource& audio_source) {
    SyncRun run;
    audio_source.start();

    auto wait_ok = [&](std::size_t line_index) {
        for (int tries = 0; tries < 1000; ++tries) {
            const std::string r = port.receive();
            if (r == "ok") return;
        }
        throw Error("stream_with_sync: no ok after line " + std::to_string(line_index));
    };

    for (std::size_t i = 0; i < program.commands.size(); ++i) {
        const gcode::Command& cmd = program.commands[i];
        if (cmd.kind == gcode::Command::Kind::Comment) continue; // skip rule
        const std::string line = gcode::emit_command(cmd);
        if (line.empty()) continue;
        port.send(line);
        wait_ok(i);
        port.send("M400");
        wait_ok(i);
        const ExtractedXYZ coords = extract_xyz(line);
        if (coords.any()) {
            SyncEntry entry;
            entry.elapsed_s = port.now_s();
            entry.x = coords.x;
            entry.y = coords.y;
            entry.z = coords.z;
            run.log.entries.push_back(entry);
        }
    }
    run.audio = audio_source.stop();
    return run;
}

void save_sync_log(const SyncLog& log, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("save_sync_log: cannot open " + path);
    f << "t_seconds,x_mm,y_mm,z_mm\n";
    char buf[64];
    auto field = [&](const std::optional<double>& v) -> std::string {
        if (!v) return "";
        std::snprintf(buf, sizeof(buf), "%.9g", *v);
        return buf;
    };
    for (const SyncEntry& e : log.entries) {
        std::snprintf(buf, sizeof(buf), "%.9g", e.elapsed_s);
        f << buf << "," << field(e.x) << "," << field(e.y) << "," << field(e.z) << "\n";
    }
}

SyncLog load_sync_log(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("load_sync_log: cannot open " + path);
    SyncLog log;
    std::string line;
    std::size_t row = 0;
    double prev_t = -std::numeric_limits<double>::infinity();
    while (std::getline(f, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (row == 1) {
            if (line != "t_seconds,x_mm,y_mm,z_mm")
                throw Error("load_sync_log: bad header at row 1");
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        while (cols.size() < 4) cols.push_back("");
        if (cols.size() != 4)
            throw Error("load_sync_log: malformed row " + std::to_string(row));
        auto parse_field = [&](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size())
                throw Error("load_sync_log: malformed number at row " + std::to_string(row));
            return v;
        };
        SyncEntry e;
        const std::optional<double> t = parse_field(cols[0]);
        if (!t) throw Error("load_sync_log: missing time at row " + std::to_string(row));
        e.elapsed_s = *t;
        e.x = parse_field(cols[1]);
        e.y = parse_field(cols[2]);
        e.z = parse_field(cols[3]);
        if (!e.x && !e.y && !e.z)
            throw Error("load_sync_log: row " + std::to_string(row) + " has no axis values");
        if (e.elapsed_s <= prev_t)
            throw Error("load_sync_log: non-monotonic time at row " + std::to_string(row));
        prev_t = e.elapsed_s;
        log.entries.push_back(e);
    }
    return log;
}

} // namespace shmtk::sync
