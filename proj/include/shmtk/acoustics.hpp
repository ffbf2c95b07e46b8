#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shmtk/common.hpp"
#include "shmtk/gcode.hpp"
#include "shmtk/geometry.hpp"

namespace shmtk::acoustics {

struct AudioBuffer {
    double sample_rate = 44100.0;
    std::vector<double> samples;

    double duration_s() const { return samples.size() / sample_rate; }
    bool empty() const { return samples.empty(); }
};

// Fan tone amplitude follows a(x) = fan_base_amp * 10^(k * |x - mic_x|) with
// k < 0 for a mic on the low-X side; direction changes past the turn
// threshold add a decaying sinusoid burst.
struct AcousticModel {
    double fan_freq_hz = 8000.0;
    double fan_base_amp = 0.4;
    double energy_slope_k = -0.004; // log10 units per mm
    double spike_center_hz = 250.0;
    double spike_duration_s = 0.03;
    double spike_amp = 0.5;
    double noise_sigma = 0.0;
    double mic_x_mm = 0.0;
    double turn_threshold_deg = 30.0;
};

struct SpikeTrain {
    std::vector<double> times_s; // strictly increasing
};

struct EnergyLine {
    double slope = 0.0; // per mm
    double intercept = 0.0;
    double r_squared = 0.0;
};

struct ReconstructedPath {
    std::vector<Point2> points;
    double assumed_speed_mm_min = 0.0;
};

struct EnergySample {
    double t_center_s;
    double energy;
};

struct PositionSample {
    double t_s;
    double x_mm;
    bool valid;
};

struct SweepMotion {
    double x0_mm;
    double x1_mm;
    double speed_mm_min;
};

AudioBuffer synthesize_audio(const gcode::Toolpath& toolpath, const AcousticModel& model,
                             double sample_rate, std::uint64_t seed);

// Direction changes >= threshold between consecutive nonzero-XY segments;
// these are the junctions synthesis turns into bursts.
std::vector<double> direction_change_times(const gcode::Toolpath& toolpath,
                                           double threshold_deg);
std::size_t count_direction_changes(const gcode::Toolpath& toolpath, double threshold_deg);

// Butterworth IIR, bilinear transform with prewarping, cascade of biquads.
// Order is the analog prototype order (even, >= 2); a bandpass therefore has
// 2*order poles.
AudioBuffer butterworth_highpass(const AudioBuffer& audio, double fc_hz, int order = 4);
AudioBuffer butterworth_bandpass(const AudioBuffer& audio, double f1_hz, double f2_hz,
                                 int order = 4);

struct Biquad {
    double b0, b1, b2, a1, a2;
};
std::vector<Biquad> design_butterworth_highpass(double fc_hz, double sample_rate, int order);
std::vector<Biquad> design_butterworth_bandpass(double f1_hz, double f2_hz, double sample_rate,
                                                int order);
std::vector<double> apply_biquads(const std::vector<Biquad>& sections,
                                  const std::vector<double>& x);

// Mean absolute value per non-overlapping window; the trailing partial
// window is dropped.
std::vector<EnergySample> windowed_energy(const AudioBuffer& audio, double window_s = 0.1);

EnergyLine fit_energy_line(const AudioBuffer& sweep_audio, const SweepMotion& motion,
                           double highpass_fc_hz, double window_s = 0.1);

std::vector<PositionSample> predict_positions(const AudioBuffer& audio, const EnergyLine& line,
                                              double highpass_fc_hz, double window_s = 0.1);

struct SpikeDetectParams {
    double band_lo_hz = 100.0;
    double band_hi_hz = 600.0;
    double threshold = 0.3;     // fraction of envelope max
    double min_separation_s = 0.1;
    double envelope_window_s = 0.015;
};

SpikeTrain detect_spikes(const AudioBuffer& audio, const SpikeDetectParams& params = {});

// Least-squares polynomial smoothing with mirror padding (edge sample not
// repeated). polyorder = window-1 reproduces the input exactly.
std::vector<double> savitzky_golay(const std::vector<double>& values, int window, int polyorder);

ReconstructedPath reconstruct_from_spikes(const SpikeTrain& spikes, double speed_mm_min,
                                          double y_step_mm, int sg_window = 5,
                                          int sg_polyorder = 2);

struct Spectrogram {
    double sample_rate = 0.0;
    int fft_size = 0;
    int hop = 0;
    std::vector<double> freqs_hz;                 // fft_size/2 + 1 bins
    std::vector<double> times_s;                  // frame centers
    std::vector<std::vector<double>> magnitudes;  // [frame][bin]
};

Spectrogram spectrogram(const AudioBuffer& audio, int fft_size, int hop);

struct ReconEval {
    double procrustes;
    double iou;
};

// Rasterizes both shapes on one shared grid, closes gaps, floods exteriors,
// then compares the filled interiors. Alignment-free: shapes are compared at
// their absolute coordinates.
ReconEval evaluate_reconstruction(const ReconstructedPath& recon, const gcode::Toolpath& original,
                                  double resolution_mm, int fill_closing_radius = 4);

// WAV PCM 16-bit little-endian mono
void write_wav(const AudioBuffer& audio, const std::string& path);
AudioBuffer read_wav(const std::string& path);

void save_spike_csv(const SpikeTrain& spikes, const std::string& path);
void save_positions_csv(const std::vector<PositionSample>& positions, const std::string& path);
void save_recon_csv(const ReconstructedPath& recon, const std::string& path);
void save_spectrogram_csv(const Spectrogram& spec, const std::string& path);

} // namespace shmtk::acoustics
