#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shmtk/acoustics.hpp"
#include "shmtk/gcode.hpp"

namespace shmtk::sync {

// Line channel to a printer. Every accepted command is eventually
// acknowledged with "ok"; M400's ok is delayed until queued motion completes.
// now_s() is the clock the host timestamps against (virtual time for the
// simulator, wall time for real hardware adapters).
class PrinterPort {
public:
    virtual ~PrinterPort() = default;
    virtual void send(const std::string& line) = 0;
    virtual std::string receive() = 0;
    virtual double now_s() = 0;
};

enum class ClockMode { Virtual, Realtime };

class SimulatedPrinter final : public PrinterPort {
public:
    explicit SimulatedPrinter(ClockMode mode = ClockMode::Virtual,
                              std::optional<Point3> initial_position = std::nullopt,
                              double default_feedrate = 1200.0);

    void send(const std::string& line) override;
    std::string receive() override;
    double now_s() override;

    Point3 position() const;

private:
    void execute(const std::string& line);

    ClockMode mode_;
    std::optional<double> px_, py_, pz_;
    double feed_;
    double motion_end_s_ = 0.0; // when queued motion finishes, on the virtual clock
    double clock_s_ = 0.0;
    double wall_start_s_ = -1.0;
    std::vector<std::string> replies_;
};

struct SyncEntry {
    double elapsed_s = 0.0;
    std::optional<double> x, y, z;
};

struct SyncLog {
    std::vector<SyncEntry> entries;
};

// X/Y/Z words with numeric values on the line; bare axis letters ("G28 X Y")
// carry no coordinates. Malformed numbers raise Error quoting the line.
struct ExtractedXYZ {
    std::optional<double> x, y, z;
    bool any() const { return x || y || z; }
};
ExtractedXYZ extract_xyz(const std::string& line);

// Provides the audio that shares the streaming clock origin.
class AudioSource {
public:
    virtual ~AudioSource() = default;
    virtual void start() = 0;
    virtual acoustics::AudioBuffer stop() = 0;
};

// Synthesizes audio for the program being streamed; start() pins t=0 to the
// first motion, matching the simulated printer's clock origin.
class SimulatedAudioSource final : public AudioSource {
public:
    SimulatedAudioSource(gcode::Toolpath toolpath, acoustics::AcousticModel model,
                         double sample_rate, std::uint64_t seed);
    void start() override {}
    acoustics::AudioBuffer stop() override;

private:
    gcode::Toolpath toolpath_;
    acoustics::AcousticModel model_;
    double sample_rate_;
    std::uint64_t seed_;
};

struct SyncRun {
    SyncLog log;
    acoustics::AudioBuffer audio;
};

// Streams the program line by line with an M400 barrier after every sent
// line; motion-bearing lines are timestamped right after the barrier's ok.
// Empty lines and comments are never sent.
SyncRun stream_with_sync(const gcode::GCodeProgram& program, PrinterPort& port,
                         AudioSource& audio_source);

// CSV t_seconds,x_mm,y_mm,z_mm with blanks for unset axes.
void save_sync_log(const SyncLog& log, const std::string& path);
SyncLog load_sync_log(const std::string& path);

} // namespace shmtk::sync
