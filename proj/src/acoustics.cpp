#include "shmtk/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

#include "shmtk/random.hpp"

namespace shmtk::acoustics {

namespace {

constexpr double kPi = std::numbers::pi;

struct Timeline {
    std::vector<double> boundaries; // segment start times, plus total at the end
    double total = 0.0;
};

Timeline build_timeline(const gcode::Toolpath& toolpath) {
    Timeline tl;
    tl.boundaries.reserve(toolpath.segments.size() + 1);
    double t = 0.0;
    tl.boundaries.push_back(0.0);
    for (const gcode::Segment& s : toolpath.segments) {
        t += s.duration_s();
        tl.boundaries.push_back(t);
    }
    tl.total = t;
    return tl;
}

} // namespace

std::vector<double> direction_change_times(const gcode::Toolpath& toolpath,
                                           double threshold_deg) {
    const Timeline tl = build_timeline(toolpath);
    std::vector<double> times;
    int prev = -1; // previous segment with nonzero XY extent
    for (std::size_t i = 0; i < toolpath.segments.size(); ++i) {
        if (toolpath.segments[i].xy_length() <= 0.0) continue;
        if (prev >= 0) {
            const gcode::Segment& a = toolpath.segments[prev];
            const gcode::Segment& b = toolpath.segments[i];
            const Point2 da = (a.end.xy() - a.start.xy()) * (1.0 / a.xy_length());
            const Point2 db = (b.end.xy() - b.start.xy()) * (1.0 / b.xy_length());
            const double cosang = std::clamp(da.dot(db), -1.0, 1.0);
            const double deg = std::acos(cosang) * 180.0 / kPi;
            if (deg >= threshold_deg) times.push_back(tl.boundaries[i]);
        }
        prev = static_cast<int>(i);
    }
    return times;
}

std::size_t count_direction_changes(const gcode::Toolpath& toolpath, double threshold_deg) {
    return direction_change_times(toolpath, threshold_deg).size();
}

AudioBuffer synthesize_audio(const gcode::Toolpath& toolpath, const AcousticModel& model,
                             double sample_rate, std::uint64_t seed) {
    if (toolpath.empty()) throw Error("synthesize_audio: empty toolpath");
    if (model.fan_freq_hz >= sample_rate / 2.0)
        throw Error("synthesize_audio: fan frequency at or above Nyquist");

    const Timeline tl = build_timeline(toolpath);
    const std::size_t n = static_cast<std::size_t>(std::ceil(tl.total * sample_rate));
    if (n == 0) throw Error("synthesize_audio: toolpath has zero duration");

    AudioBuffer audio;
    audio.sample_rate = sample_rate;
    audio.samples.assign(n, 0.0);

    // fan tone with position-dependent amplitude
    std::size_t seg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        while (seg + 1 < toolpath.segments.size() && t >= tl.boundaries[seg + 1]) ++seg;
        const gcode::Segment& s = toolpath.segments[seg];
        const double t0 = tl.boundaries[seg];
        const double t1 = tl.boundaries[seg + 1];
        const double f = t1 > t0 ? std::clamp((t - t0) / (t1 - t0), 0.0, 1.0) : 1.0;
        const double x = s.start.x + f * (s.end.x - s.start.x);
        const double amp = model.fan_base_amp *
                           std::pow(10.0, model.energy_slope_k * std::abs(x - model.mic_x_mm));
        audio.samples[i] = amp * std::sin(2.0 * kPi * model.fan_freq_hz * t);
    }

    // bursts at direction changes
    const double tau = model.spike_duration_s / 5.0;
    for (double tj : direction_change_times(toolpath, model.turn_threshold_deg)) {
        const std::size_t i0 = static_cast<std::size_t>(tj * sample_rate);
        const std::size_t i1 =
            std::min(n, i0 + static_cast<std::size_t>(model.spike_duration_s * sample_rate));
        for (std::size_t i = i0; i < i1; ++i) {
            const double dt = static_cast<double>(i) / sample_rate - tj;
            audio.samples[i] += model.spike_amp * std::exp(-dt / tau) *
                                std::sin(2.0 * kPi * model.spike_center_hz * dt);
        }
    }

    if (model.noise_sigma > 0.0) {
        Rand64 rng(seed);
        for (double& v : audio.samples) v += rng.gaussian(0.0, model.noise_sigma);
    }
    for (double& v : audio.samples) v = std::clamp(v, -1.0, 1.0);
    return audio;
}

std::vector<EnergySample> windowed_energy(const AudioBuffer& audio, double window_s) {
    if (audio.empty()) throw Error("windowed_energy: empty audio");
    if (window_s <= 0.0 || window_s > audio.duration_s())
        throw Error("windowed_energy: window must be in (0, duration]");
    const std::size_t w = static_cast<std::size_t>(window_s * audio.sample_rate);
    if (w == 0) throw Error("windowed_energy: window shorter than one sample");
    const std::size_t count = audio.samples.size() / w;
    std::vector<EnergySample> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        double acc = 0.0;
        for (std::size_t i = k * w; i < (k + 1) * w; ++i) acc += std::abs(audio.samples[i]);
        out.push_back({(k + 0.5) * static_cast<double>(w) / audio.sample_rate,
                       acc / static_cast<double>(w)});
    }
    return out;
}

EnergyLine fit_energy_line(const AudioBuffer& sweep_audio, const SweepMotion& motion,
                           double highpass_fc_hz, double window_s) {
    const double dist = std::abs(motion.x1_mm - motion.x0_mm);
    if (dist <= 0.0 || motion.speed_mm_min <= 0.0)
        throw Error("fit_energy_line: degenerate sweep motion");
    const double expect_s = dist / motion.speed_mm_min * 60.0;
    if (std::abs(sweep_audio.duration_s() - expect_s) > 0.05 * expect_s)
        throw Error("fit_energy_line: audio duration inconsistent with sweep motion");

    const AudioBuffer filtered = butterworth_highpass(sweep_audio, highpass_fc_hz, 4);
    const std::vector<EnergySample> energy = windowed_energy(filtered, window_s);

    const double dir = motion.x1_mm >= motion.x0_mm ? 1.0 : -1.0;
    const double v = motion.speed_mm_min / 60.0;
    std::vector<double> xs, ys;
    for (const EnergySample& e : energy) {
        if (e.energy <= 0.0) throw Error("fit_energy_line: silent window");
        xs.push_back(motion.x0_mm + dir * v * e.t_center_s);
        ys.push_back(std::log10(e.energy));
    }
    const std::size_t n = xs.size();
    if (n < 2) throw Error("fit_energy_line: not enough windows");

    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw Error("fit_energy_line: degenerate x span");

    EnergyLine line;
    line.slope = sxy / sxx;
    line.intercept = my - line.slope * mx;
    line.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return line;
}

std::vector<PositionSample> predict_positions(const AudioBuffer& audio, const EnergyLine& line,
                                              double highpass_fc_hz, double window_s) {
    if (line.slope == 0.0) throw Error("predict_positions: zero slope line");
    const AudioBuffer filtered = butterworth_highpass(audio, highpass_fc_hz, 4);
    const std::vector<EnergySample> energy = windowed_energy(filtered, window_s);
    std::vector<PositionSample> out;
    out.reserve(energy.size());
    for (const EnergySample& e : energy) {
        PositionSample p;
        p.t_s = e.t_center_s;
        if (e.energy > 0.0) {
            p.x_mm = (std::log10(e.energy) - line.intercept) / line.slope;
            p.valid = true;
        } else {
            p.x_mm = 0.0;
            p.valid = false;
        }
        out.push_back(p);
    }
    return out;
}

SpikeTrain detect_spikes(const AudioBuffer& audio, const SpikeDetectParams& params) {
    if (params.threshold <= 0.0 || params.threshold > 1.0)
        throw Error("detect_spikes: threshold must be in (0,1]");
    if (params.min_separation_s <= 0.0)
        throw Error("detect_spikes: min_separation must be > 0");
    SpikeTrain train;
    if (audio.empty()) return train;

    const AudioBuffer band =
        butterworth_bandpass(audio, params.band_lo_hz, params.band_hi_hz, 4);

    // rectified envelope: centered moving average of |x|
    std::vector<double> rect(band.samples.size());
    for (std::size_t i = 0; i < rect.size(); ++i) rect[i] = std::abs(band.samples[i]);
    int w = std::max(1, static_cast<int>(params.envelope_window_s * audio.sample_rate));
    if (w % 2 == 0) ++w;
    const int half = w / 2;
    std::vector<double> prefix(rect.size() + 1, 0.0);
    for (std::size_t i = 0; i < rect.size(); ++i) prefix[i + 1] = prefix[i] + rect[i];
    std::vector<double> env(rect.size());
    const int n = static_cast<int>(rect.size());
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        env[i] = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1);
    }
    const double peak = *std::max_element(env.begin(), env.end());
    if (peak <= 0.0) return train; // silence

    std::vector<int> maxima;
    for (int i = 1; i + 1 < n; ++i) {
        if (env[i] >= params.threshold * peak && env[i] >= env[i - 1] && env[i] > env[i + 1])
            maxima.push_back(i);
    }
    // greedy: larger peaks claim their separation window first
    std::stable_sort(maxima.begin(), maxima.end(),
                     [&](int a, int b) { return env[a] > env[b]; });
    const double min_sep = params.min_separation_s * audio.sample_rate;
    std::vector<int> kept;
    for (int m : maxima) {
        bool ok = true;
        for (int k : kept)
            if (std::abs(m - k) < min_sep) {
                ok = false;
                break;
            }
        if (ok) kept.push_back(m);
    }
    std::sort(kept.begin(), kept.end());
    for (int k : kept) train.times_s.push_back(k / audio.sample_rate);
    return train;
}

ReconstructedPath reconstruct_from_spikes(const SpikeTrain& spikes, double speed_mm_min,
                                          double y_step_mm, int sg_window, int sg_polyorder) {
    if (spikes.times_s.size() < 2)
        throw Error("reconstruct_from_spikes: need at least 2 spikes");
    if (speed_mm_min <= 0.0) throw Error("reconstruct_from_spikes: speed must be > 0");

    std::vector<double> dts(spikes.times_s.size() - 1);
    for (std::size_t i = 0; i + 1 < spikes.times_s.size(); ++i)
        dts[i] = spikes.times_s[i + 1] - spikes.times_s[i];
    const std::vector<double> smooth = savitzky_golay(dts, sg_window, sg_polyorder);

    ReconstructedPath path;
    path.assumed_speed_mm_min = speed_mm_min;
    path.points.push_back({0.0, 0.0});
    double sign = 1.0;
    const double v = speed_mm_min / 60.0;
    for (std::size_t i = 0; i < smooth.size(); ++i) {
        const Point2 prev = path.points.back();
        path.points.push_back({prev.x + sign * smooth[i] * v,
                               static_cast<double>(i + 1) * y_step_mm});
        sign = -sign;
    }
    return path;
}

namespace {

void rasterize_into(geom::ShapeMask& mask, const std::vector<geom::SegmentXY>& segments) {
    // same supercover as geom::rasterize, drawn onto an existing grid
    const double res = mask.resolution();
    const Point2 org = mask.origin();
    for (const geom::SegmentXY& s : segments) {
        const double ax = (s.start.x - org.x) / res;
        const double ay = (s.start.y - org.y) / res;
        const double bx = (s.end.x - org.x) / res;
        const double by = (s.end.y - org.y) / res;
        const double len = std::hypot(bx - ax, by - ay);
        if (len == 0.0) {
            const int c = static_cast<int>(std::lround(ax));
            const int r = static_cast<int>(std::lround(ay));
            if (mask.in_bounds(c, r)) mask.set(c, r, true);
            continue;
        }
        const int steps = std::max(1, static_cast<int>(std::ceil(len * 4.0)));
        for (int k = 0; k <= steps; ++k) {
            const double t = static_cast<double>(k) / steps;
            const double px = ax + t * (bx - ax);
            const double py = ay + t * (by - ay);
            const int cc = static_cast<int>(std::lround(px));
            const int cr = static_cast<int>(std::lround(py));
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const int c = cc + dc, r = cr + dr;
                    if (!mask.in_bounds(c, r) || mask.at(c, r)) continue;
                    // closed-box intersection via distance from center to segment
                    const Point2 center{org.x + c * res, org.y + r * res};
                    const Point2 a{s.start.x, s.start.y}, b{s.end.x, s.end.y};
                    const Point2 ab = b - a;
                    const double l2 = ab.dot(ab);
                    double tt = l2 > 0.0 ? std::clamp((center - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
                    const Point2 proj = a + ab * tt;
                    const double dx = std::abs(proj.x - center.x);
                    const double dy = std::abs(proj.y - center.y);
                    if (dx <= res / 2.0 + 1e-12 && dy <= res / 2.0 + 1e-12) mask.set(c, r, true);
                }
        }
    }
}

} // namespace

ReconEval evaluate_reconstruction(const ReconstructedPath& recon, const gcode::Toolpath& original,
                                  double resolution_mm, int fill_closing_radius) {
    if (recon.points.size() < 2) throw Error("evaluate_reconstruction: empty reconstruction");
    if (original.empty()) throw Error("evaluate_reconstruction: empty original");

    std::vector<geom::SegmentXY> orig_segs;
    for (const gcode::Segment& s : original.segments)
        orig_segs.push_back({s.start.xy(), s.end.xy()});
    std::vector<geom::SegmentXY> recon_segs;
    for (std::size_t i = 0; i + 1 < recon.points.size(); ++i)
        recon_segs.push_back({recon.points[i], recon.points[i + 1]});

    // shared grid over both shapes; padding leaves room for closing
    std::vector<geom::SegmentXY> all = orig_segs;
    all.insert(all.end(), recon_segs.begin(), recon_segs.end());
    const double padding = (fill_closing_radius + 3) * resolution_mm;
    const geom::ShapeMask grid = geom::rasterize(all, resolution_mm, padding);

    geom::ShapeMask a(grid.width(), grid.height(), grid.resolution(), grid.origin());
    geom::ShapeMask b(grid.width(), grid.height(), grid.resolution(), grid.origin());
    rasterize_into(a, orig_segs);
    rasterize_into(b, recon_segs);
    if (fill_closing_radius > 0) {
        a = geom::binary_closing(a, fill_closing_radius);
        b = geom::binary_closing(b, fill_closing_radius);
    }
    a = geom::fill_interior(a);
    b = geom::fill_interior(b);

    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.bits().size(); ++i) {
        const bool av = a.bits()[i] != 0, bv = b.bits()[i] != 0;
        inter += (av && bv) ? 1 : 0;
        uni += (av || bv) ? 1 : 0;
    }
    ReconEval eval;
    eval.iou = uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
    eval.procrustes = geom::procrustes_disparity(b, a);
    return eval;
}

namespace {

void put_u32(std::ofstream& f, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    f.write(b, 4);
}

void put_u16(std::ofstream& f, std::uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    f.write(b, 2);
}

} // namespace

void write_wav(const AudioBuffer& audio, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("write_wav: cannot open " + path);
    const std::uint32_t sr = static_cast<std::uint32_t>(audio.sample_rate);
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
    f.write("RIFF", 4);
    put_u32(f, 36 + data_bytes);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    put_u32(f, 16);
    put_u16(f, 1); // PCM
    put_u16(f, 1); // mono
    put_u32(f, sr);
    put_u32(f, sr * 2);
    put_u16(f, 2);
    put_u16(f, 16);
    f.write("data", 4);
    put_u32(f, data_bytes);
    for (double v : audio.samples) {
        const double c = std::clamp(v, -1.0, 1.0);
        const std::int16_t q = static_cast<std::int16_t>(std::lround(c * 32767.0));
        put_u16(f, static_cast<std::uint16_t>(q));
    }
    if (!f) throw Error("write_wav: write failed for " + path);
}

AudioBuffer read_wav(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("read_wav: cannot open " + path);
    auto u32 = [&]() {
        unsigned char b[4];
        f.read(reinterpret_cast<char*>(b), 4);
        return static_cast<std::uint32_t>(b[0]) | (b[1] << 8) | (b[2] << 16) |
               (static_cast<std::uint32_t>(b[3]) << 24);
    };
    auto u16 = [&]() {
        unsigned char b[2];
        f.read(reinterpret_cast<char*>(b), 2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    };
    char tag[5] = {0};
    f.read(tag, 4);
    if (std::strncmp(tag, "RIFF", 4) != 0) throw Error("read_wav: not a RIFF file: " + path);
    u32();
    f.read(tag, 4);
    if (std::strncmp(tag, "WAVE", 4) != 0) throw Error("read_wav: not a WAVE file: " + path);

    AudioBuffer audio;
    std::uint16_t channels = 1, bits = 16;
    bool got_fmt = false;
    while (f.read(tag, 4)) {
        const std::uint32_t size = u32();
        if (std::strncmp(tag, "fmt ", 4) == 0) {
            const std::uint16_t fmt = u16();
            channels = u16();
            audio.sample_rate = static_cast<double>(u32());
            u32();
            u16();
            bits = u16();
            if (fmt != 1 || channels != 1 || bits != 16)
                throw Error("read_wav: only PCM 16-bit mono is supported: " + path);
            if (size > 16) f.seekg(size - 16, std::ios::cur);
            got_fmt = true;
        } else if (std::strncmp(tag, "data", 4) == 0) {
            if (!got_fmt) throw Error("read_wav: data chunk before fmt in " + path);
            const std::size_t count = size / 2;
            audio.samples.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::int16_t q = static_cast<std::int16_t>(u16());
                audio.samples[i] = static_cast<double>(q) / 32767.0;
            }
            return audio;
        } else {
            f.seekg(size + (size & 1), std::ios::cur);
        }
    }
    throw Error("read_wav: no data chunk in " + path);
}

void save_spike_csv(const SpikeTrain& spikes, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("save_spike_csv: cannot open " + path);
    f << "t_seconds,value\n";
    char buf[64];
    for (double t : spikes.times_s) {
        std::snprintf(buf, sizeof(buf), "%.9g,1\n", t);
        f << buf;
    }
}

void save_positions_csv(const std::vector<PositionSample>& positions, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("save_positions_csv: cannot open " + path);
    f << "t_seconds,value\n";
    char buf[96];
    for (const PositionSample& p : positions) {
        if (!p.valid) continue;
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", p.t_s, p.x_mm);
        f << buf;
    }
}

void save_recon_csv(const ReconstructedPath& recon, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("save_recon_csv: cannot open " + path);
    f << "x_mm,y_mm\n";
    char buf[96];
    for (const Point2& p : recon.points) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", p.x, p.y);
        f << buf;
    }
}

void save_spectrogram_csv(const Spectrogram& spec, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("save_spectrogram_csv: cannot open " + path);
    char buf[64];
    f << "freq_hz\\time_s";
    for (double t : spec.times_s) {
        std::snprintf(buf, sizeof(buf), ",%.9g", t);
        f << buf;
    }
    f << "\n";
    for (std::size_t b = 0; b < spec.freqs_hz.size(); ++b) {
        std::snprintf(buf, sizeof(buf), "%.9g", spec.freqs_hz[b]);
        f << buf;
        for (std::size_t fr = 0; fr < spec.magnitudes.size(); ++fr) {
            std::snprintf(buf, sizeof(buf), ",%.9g", spec.magnitudes[fr][b]);
            f << buf;
        }
        f << "\n";
    }
}

} // namespace shmtk::acoustics
