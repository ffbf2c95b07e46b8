// Command-line front end: obfuscate G-code with stealth head movements,
// run the acoustic attack against real or simulated audio, report print-time
// overhead, and stream programs to the simulated printer with synchronized
// audio. Every subcommand is deterministic given its inputs and seed; a
// one-line JSON summary goes to stdout, errors go to stderr as JSON.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "shmtk/acoustics.hpp"
#include "shmtk/gcode.hpp"
#include "shmtk/optimizer.hpp"
#include "shmtk/shm.hpp"
#include "shmtk/sync.hpp"

using nlohmann::ordered_json;
using namespace shmtk;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    f << content;
    if (!f) throw Error("write failed for " + path);
}

gcode::Toolpath load_toolpath(const std::string& path, double default_feedrate) {
    gcode::GCodeProgram prog = gcode::parse_gcode(read_file(path));
    gcode::ToolpathDefaults d;
    d.feedrate = default_feedrate;
    return gcode::to_toolpath(prog, d);
}

struct ObfuscateArgs {
    std::string in, out, mode = "naive";
    std::string boundary_in, boundary_out, trace_out;
    double margin = 2.0;
    double min_extension = 1.0;
    std::string filter = "all";
    double ext_feedrate = 0.0;
    double default_feedrate = 1200.0;
    double resolution = 0.5;
    double simplify_tolerance = 0.25;
    opt::OptimizerParams opt_params;
};

int cmd_obfuscate(const ObfuscateArgs& args) {
    gcode::GCodeProgram prog = gcode::parse_gcode(read_file(args.in));
    gcode::ToolpathDefaults d;
    d.feedrate = args.default_feedrate;
    gcode::Toolpath orig = gcode::to_toolpath(prog, d);

    ordered_json summary;
    summary["subcommand"] = "obfuscate";
    summary["seed"] = args.opt_params.seed;
    summary["mode"] = args.mode;

    if (orig.empty()) {
        write_file(args.out, gcode::emit_gcode(prog));
        summary["warning_no_motion"] = true;
        summary["added_path_mm"] = 0.0;
        summary["added_time_s_at_input_feedrate"] = 0.0;
        summary["percent_overhead"] = 0.0;
        summary["output"] = args.out;
        std::cout << summary.dump() << "\n";
        return 0;
    }

    shm::ShmConfig cfg;
    cfg.margin_mm = args.margin;
    cfg.min_extension_mm = args.min_extension;
    cfg.segment_filter = args.filter == "extruding" ? shm::ShmConfig::Filter::ExtrudingOnly
                                                    : shm::ShmConfig::Filter::AllMoves;
    if (args.ext_feedrate > 0.0) cfg.fixed_extension_feedrate = args.ext_feedrate;

    shm::Boundary boundary;
    if (!args.boundary_in.empty()) {
        boundary = shm::load_boundary_json(args.boundary_in);
    } else if (args.mode == "naive") {
        boundary = shm::rect_boundary_for(orig, args.margin);
    } else if (args.mode == "optimized") {
        // union of deposited motion across layers, rasterized once
        std::vector<geom::SegmentXY> segs;
        for (const auto& s : orig.segments) {
            if (!s.extruding || s.xy_length() <= 0.0) continue;
            segs.push_back({s.start.xy(), s.end.xy()});
        }
        if (segs.empty()) {
            for (const auto& s : orig.segments)
                if (s.xy_length() > 0.0) segs.push_back({s.start.xy(), s.end.xy()});
        }
        if (segs.empty()) throw Error("obfuscate: no XY motion to optimize around");
        const geom::ShapeMask mask = geom::rasterize(segs, args.resolution, 4.0 * args.resolution);
        opt::OptimizationResult res = opt::optimize_obfuscation(mask, args.opt_params);
        boundary = opt::mask_to_boundary(res, args.simplify_tolerance);
        if (!args.trace_out.empty()) {
            opt::save_trace_csv(res.trace, args.trace_out);
            summary["trace"] = args.trace_out;
        }
        summary["optimizer_iterations"] = res.trace.size();
        summary["optimizer_argmax"] = res.optimized_index;
        // deposited geometry must sit inside the optimized boundary
        for (const geom::SegmentXY& s : segs) {
            if (!boundary.contains(s.start, 1e-6) || !boundary.contains(s.end, 1e-6))
                throw Error("obfuscate: optimized boundary does not contain the deposited path");
        }
    } else {
        throw Error("obfuscate: mode must be naive or optimized");
    }

    shm::ShmResult res = apply_shm(prog, boundary, cfg);
    write_file(args.out, gcode::emit_gcode(res.program));
    if (!args.boundary_out.empty()) {
        shm::save_boundary_json(boundary, args.boundary_out);
        summary["boundary"] = args.boundary_out;
    }

    gcode::Toolpath obf = gcode::to_toolpath(res.program, d);
    const double t_orig = gcode::print_time_s(orig);
    const double t_obf = gcode::print_time_s(obf);
    summary["warning_no_motion"] = res.warning_no_motion;
    summary["extended_count"] = res.extended_count;
    summary["added_path_mm"] = res.added_xy_length_mm;
    summary["added_time_s_at_input_feedrate"] = t_obf - t_orig;
    summary["percent_overhead"] = t_orig > 0.0 ? 100.0 * (t_obf - t_orig) / t_orig : 0.0;
    summary["output"] = args.out;
    std::cout << summary.dump() << "\n";
    return 0;
}

struct AttackArgs {
    std::string audio, simulate, out;
    std::string synth_out, spikes_out, spectrogram_out;
    std::string energy_line_wav, energy_out;
    double calib_x0 = 0.0, calib_x1 = 180.0, calib_speed = 500.0;
    double highpass_fc = 4000.0;
    double speed = 1200.0;
    double y_step = 1.0;
    int sg_window = 5, sg_polyorder = 2;
    acoustics::SpikeDetectParams detect;
    double sample_rate = 44100.0;
    double noise = 0.0;
    std::uint64_t seed = 42;
    double default_feedrate = 1200.0;
    int fft_size = 4096, hop = 1024;
};

int cmd_attack(const AttackArgs& args) {
    ordered_json summary;
    summary["subcommand"] = "attack";
    summary["seed"] = args.seed;

    acoustics::AudioBuffer audio;
    if (!args.simulate.empty()) {
        gcode::Toolpath t = load_toolpath(args.simulate, args.default_feedrate);
        acoustics::AcousticModel model;
        model.noise_sigma = args.noise;
        audio = acoustics::synthesize_audio(t, model, args.sample_rate, args.seed);
        if (!args.synth_out.empty()) {
            acoustics::write_wav(audio, args.synth_out);
            summary["synth_wav"] = args.synth_out;
        }
    } else {
        audio = acoustics::read_wav(args.audio);
    }

    acoustics::SpikeTrain spikes = acoustics::detect_spikes(audio, args.detect);
    if (spikes.times_s.size() < 2) {
        throw Error("no spikes detected; adjust --threshold (" +
                    std::to_string(args.detect.threshold) + ") or --min-separation (" +
                    std::to_string(args.detect.min_separation_s) + ")");
    }
    if (!args.spikes_out.empty()) {
        acoustics::save_spike_csv(spikes, args.spikes_out);
        summary["spikes"] = args.spikes_out;
    }

    acoustics::ReconstructedPath recon = acoustics::reconstruct_from_spikes(
        spikes, args.speed, args.y_step, args.sg_window, args.sg_polyorder);
    acoustics::save_recon_csv(recon, args.out);
    summary["spike_count"] = spikes.times_s.size();
    summary["recon_points"] = recon.points.size();
    summary["output"] = args.out;

    if (!args.energy_line_wav.empty()) {
        acoustics::AudioBuffer calib = acoustics::read_wav(args.energy_line_wav);
        acoustics::EnergyLine line = acoustics::fit_energy_line(
            calib, {args.calib_x0, args.calib_x1, args.calib_speed}, args.highpass_fc);
        auto positions = acoustics::predict_positions(audio, line, args.highpass_fc, 0.1);
        if (!args.energy_out.empty()) {
            acoustics::save_positions_csv(positions, args.energy_out);
            summary["energy_positions"] = args.energy_out;
        }
        summary["energy_line_slope"] = line.slope;
        summary["energy_line_r_squared"] = line.r_squared;
    }

    if (!args.spectrogram_out.empty()) {
        acoustics::Spectrogram spec = acoustics::spectrogram(audio, args.fft_size, args.hop);
        acoustics::save_spectrogram_csv(spec, args.spectrogram_out);
        summary["spectrogram"] = args.spectrogram_out;
    }

    std::cout << summary.dump() << "\n";
    return 0;
}

struct ReportArgs {
    std::string orig, obf, out;
    std::vector<double> feedrates{300.0, 500.0, 1200.0};
    double default_feedrate = 1200.0;
};

int cmd_report_time(const ReportArgs& args) {
    gcode::Toolpath orig = load_toolpath(args.orig, args.default_feedrate);
    gcode::Toolpath obf = load_toolpath(args.obf, args.default_feedrate);
    auto rows = shm::overhead_report(orig, obf, args.feedrates);
    std::ofstream f(args.out);
    if (!f) throw Error("cannot open " + args.out + " for writing");
    f << "feedrate,t_orig_s,t_obf_s,added_s,percent\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g\n", r.feedrate, r.t_orig_s,
                      r.t_obf_s, r.added_s, r.percent);
        f << buf;
    }
    ordered_json summary;
    summary["subcommand"] = "report-time";
    summary["rows"] = rows.size();
    summary["output"] = args.out;
    std::cout << summary.dump() << "\n";
    return 0;
}

struct SyncArgs {
    std::string in, port = "sim://virtual", out_prefix;
    double sample_rate = 44100.0;
    std::uint64_t seed = 42;
    double default_feedrate = 1200.0;
};

int cmd_sync(const SyncArgs& args) {
    gcode::GCodeProgram prog = gcode::parse_gcode(read_file(args.in));
    gcode::ToolpathDefaults d;
    d.feedrate = args.default_feedrate;
    gcode::Toolpath t = gcode::to_toolpath(prog, d);

    sync::ClockMode mode;
    if (args.port == "sim://virtual")
        mode = sync::ClockMode::Virtual;
    else if (args.port == "sim://realtime")
        mode = sync::ClockMode::Realtime;
    else
        throw Error("unknown port '" + args.port + "' (use sim://virtual or sim://realtime)");

    sync::SimulatedPrinter port(mode);
    acoustics::AcousticModel model;
    sync::SimulatedAudioSource audio(t, model, args.sample_rate, args.seed);
    sync::SyncRun run = sync::stream_with_sync(prog, port, audio);

    const std::string csv = args.out_prefix + ".csv";
    const std::string wav = args.out_prefix + ".wav";
    sync::save_sync_log(run.log, csv);
    acoustics::write_wav(run.audio, wav);

    ordered_json summary;
    summary["subcommand"] = "sync";
    summary["seed"] = args.seed;
    summary["entries"] = run.log.entries.size();
    summary["audio_seconds"] = run.audio.duration_s();
    summary["log"] = csv;
    summary["wav"] = wav;
    std::cout << summary.dump() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"G-code stealth head movement obfuscation and acoustic attack toolkit"};
    app.require_subcommand(1);

    ObfuscateArgs ob;
    CLI::App* obf = app.add_subcommand("obfuscate", "rewrite a program with boundary extensions");
    obf->add_option("--in", ob.in, "input .gcode")->required();
    obf->add_option("--out", ob.out, "output .gcode")->required();
    obf->add_option("--mode", ob.mode, "naive|optimized")->default_str("naive");
    obf->add_option("--margin", ob.margin, "rect boundary margin, mm");
    obf->add_option("--min-extension", ob.min_extension, "skip extensions shorter than this, mm");
    obf->add_option("--filter", ob.filter, "all|extruding");
    obf->add_option("--ext-feedrate", ob.ext_feedrate, "fixed feedrate for extension moves");
    obf->add_option("--default-feedrate", ob.default_feedrate, "modal feedrate before any F word");
    obf->add_option("--resolution", ob.resolution, "raster resolution, mm/cell");
    obf->add_option("--simplify-tolerance", ob.simplify_tolerance, "boundary polygon tolerance, mm");
    obf->add_option("--boundary-in", ob.boundary_in,
                    "use this boundary polygon JSON instead of computing one");
    obf->add_option("--boundary-out", ob.boundary_out, "boundary polygon JSON path");
    obf->add_option("--trace-out", ob.trace_out, "reward trace CSV path (optimized mode)");
    obf->add_option("--seed", ob.opt_params.seed, "optimizer seed");
    obf->add_option("--lambda", ob.opt_params.area_weight, "area weight in the reward");
    obf->add_option("--opt-start", ob.opt_params.start, "iteration schedule start");
    obf->add_option("--opt-stop", ob.opt_params.stop, "iteration schedule stop");
    obf->add_option("--opt-step", ob.opt_params.step, "iteration schedule step");
    obf->add_option("--rect-min", ob.opt_params.min_s, "smallest random rectangle side, cells");
    obf->add_option("--rect-max", ob.opt_params.max_s, "largest random rectangle side, cells");
    obf->add_option("--attempts", ob.opt_params.attempts, "placement retries per rectangle");
    obf->add_option("--closing-radius", ob.opt_params.closing_radius, "binary closing radius, cells");

    AttackArgs at;
    CLI::App* atk = app.add_subcommand("attack", "reconstruct a path from audio");
    auto* audio_opt = atk->add_option("--audio", at.audio, "recorded WAV input");
    auto* sim_opt = atk->add_option("--simulate", at.simulate, "synthesize audio from this .gcode");
    audio_opt->excludes(sim_opt);
    atk->add_option("--out", at.out, "reconstructed polyline CSV")->required();
    atk->add_option("--synth-out", at.synth_out, "write the synthesized WAV here");
    atk->add_option("--spikes-out", at.spikes_out, "detected spike train CSV");
    atk->add_option("--spectrogram-out", at.spectrogram_out, "spectrogram CSV");
    atk->add_option("--fft-size", at.fft_size, "spectrogram FFT size (power of two)");
    atk->add_option("--hop", at.hop, "spectrogram hop size");
    atk->add_option("--speed", at.speed, "assumed constant speed, mm/min");
    atk->add_option("--y-step", at.y_step, "assumed Y increment per detected turn, mm");
    atk->add_option("--sg-window", at.sg_window, "Savitzky-Golay window (odd)");
    atk->add_option("--sg-polyorder", at.sg_polyorder, "Savitzky-Golay polynomial order");
    atk->add_option("--threshold", at.detect.threshold, "peak threshold, fraction of max");
    atk->add_option("--min-separation", at.detect.min_separation_s, "minimum spike spacing, s");
    atk->add_option("--band-lo", at.detect.band_lo_hz, "bandpass low edge, Hz");
    atk->add_option("--band-hi", at.detect.band_hi_hz, "bandpass high edge, Hz");
    atk->add_option("--envelope-window", at.detect.envelope_window_s, "envelope smoothing, s");
    atk->add_option("--energy-line", at.energy_line_wav, "calibration sweep WAV for positions");
    atk->add_option("--energy-out", at.energy_out, "energy-based position series CSV");
    atk->add_option("--calib-x0", at.calib_x0, "sweep start, mm");
    atk->add_option("--calib-x1", at.calib_x1, "sweep end, mm");
    atk->add_option("--calib-speed", at.calib_speed, "sweep speed, mm/min");
    atk->add_option("--highpass-fc", at.highpass_fc, "energy high-pass cutoff, Hz");
    atk->add_option("--sample-rate", at.sample_rate, "synthesis sample rate, Hz");
    atk->add_option("--noise", at.noise, "synthesis noise sigma");
    atk->add_option("--seed", at.seed, "synthesis seed");
    atk->add_option("--default-feedrate", at.default_feedrate, "modal feedrate before any F word");

    ReportArgs rp;
    CLI::App* rep = app.add_subcommand("report-time", "print-time overhead table");
    rep->add_option("--orig", rp.orig, "original .gcode")->required();
    rep->add_option("--obf", rp.obf, "obfuscated .gcode")->required();
    rep->add_option("--out", rp.out, "output CSV")->required();
    rep->add_option("--feedrates", rp.feedrates, "feedrates to tabulate, mm/min");
    rep->add_option("--default-feedrate", rp.default_feedrate, "modal feedrate before any F word");

    SyncArgs sy;
    CLI::App* syn = app.add_subcommand("sync", "stream with M400 barriers and record audio");
    syn->add_option("--in", sy.in, "input .gcode")->required();
    syn->add_option("--port", sy.port, "sim://virtual or sim://realtime");
    syn->add_option("--out", sy.out_prefix, "output prefix (.csv and .wav)")->required();
    syn->add_option("--sample-rate", sy.sample_rate, "audio sample rate, Hz");
    syn->add_option("--seed", sy.seed, "synthesis seed");
    syn->add_option("--default-feedrate", sy.default_feedrate, "modal feedrate before any F word");

    CLI11_PARSE(app, argc, argv);

    try {
        if (obf->parsed()) return cmd_obfuscate(ob);
        if (atk->parsed()) {
            if (at.audio.empty() && at.simulate.empty())
                throw Error("attack: provide --audio or --simulate");
            return cmd_attack(at);
        }
        if (rep->parsed()) return cmd_report_time(rp);
        if (syn->parsed()) return cmd_sync(sy);
    } catch (const std::exception& e) {
        ordered_json err;
        err["error"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
