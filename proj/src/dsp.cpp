#include "shmtk/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace shmtk::acoustics {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// Left-half-plane analog Butterworth prototype poles for order n.
std::vector<cplx> prototype_poles(int order) {
    std::vector<cplx> poles;
    poles.reserve(order);
    for (int k = 0; k < order; ++k) {
        const double theta = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
        poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    return poles;
}

cplx bilinear(const cplx& s, double fs2) { return (fs2 + s) / (fs2 - s); }

// Builds biquads from conjugate pole pairs; zeros are supplied per section as
// (z1, z2) already in the z-domain.
std::vector<Biquad> sections_from_pairs(const std::vector<cplx>& zpoles,
                                        const std::vector<std::pair<cplx, cplx>>& zzeros) {
    std::vector<Biquad> sections;
    // pair conjugates: poles come ordered so that poles[i] and poles[n-1-i]
    // are conjugates; sort by imaginary part magnitude for stable pairing
    std::vector<cplx> ps = zpoles;
    std::sort(ps.begin(), ps.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    std::vector<cplx> upper;
    for (const cplx& p : ps)
        if (p.imag() > 1e-12) upper.push_back(p);
    if (upper.size() * 2 != ps.size())
        throw Error("butterworth design: expected conjugate pole pairs (even order only)");

    for (std::size_t i = 0; i < upper.size(); ++i) {
        const cplx p = upper[i];
        const double a1 = -2.0 * p.real();
        const double a2 = std::norm(p);
        const cplx z1 = zzeros[i].first;
        const cplx z2 = zzeros[i].second;
        const double b1 = -(z1 + z2).real();
        const double b2 = (z1 * z2).real();
        sections.push_back({1.0, b1, b2, a1, a2});
    }
    return sections;
}

double cascade_gain_at(const std::vector<Biquad>& sections, double freq_hz, double fs) {
    const cplx z = std::polar(1.0, 2.0 * kPi * freq_hz / fs);
    const cplx zi = 1.0 / z;
    cplx h = 1.0;
    for (const Biquad& s : sections) {
        h *= (s.b0 + s.b1 * zi + s.b2 * zi * zi) / (1.0 + s.a1 * zi + s.a2 * zi * zi);
    }
    return std::abs(h);
}

void normalize_gain(std::vector<Biquad>& sections, double ref_freq_hz, double fs) {
    const double g = cascade_gain_at(sections, ref_freq_hz, fs);
    if (g <= 0.0) throw Error("butterworth design: degenerate gain");
    const double scale = 1.0 / g;
    // spread the correction evenly so section coefficients stay well-scaled
    const double per = std::pow(scale, 1.0 / sections.size());
    for (Biquad& s : sections) {
        s.b0 *= per;
        s.b1 *= per;
        s.b2 *= per;
    }
}

} // namespace

std::vector<Biquad> design_butterworth_highpass(double fc_hz, double sample_rate, int order) {
    if (order < 2 || order % 2 != 0) throw Error("butterworth: order must be even and >= 2");
    if (fc_hz <= 0.0 || fc_hz >= sample_rate / 2.0)
        throw Error("butterworth: cutoff must lie in (0, Nyquist)");
    const double fs2 = 2.0 * sample_rate;
    const double warped = fs2 * std::tan(kPi * fc_hz / sample_rate);

    std::vector<cplx> zpoles;
    for (const cplx& p : prototype_poles(order)) zpoles.push_back(bilinear(warped / p, fs2));
    // analog zeros at s=0 map to z=1
    std::vector<std::pair<cplx, cplx>> zzeros(order / 2, {cplx(1.0, 0.0), cplx(1.0, 0.0)});
    std::vector<Biquad> sections = sections_from_pairs(zpoles, zzeros);
    normalize_gain(sections, sample_rate / 2.0 * 0.9999, sample_rate);
    return sections;
}

std::vector<Biquad> design_butterworth_bandpass(double f1_hz, double f2_hz, double sample_rate,
                                                int order) {
    if (order < 2 || order % 2 != 0) throw Error("butterworth: order must be even and >= 2");
    if (f1_hz <= 0.0 || f2_hz >= sample_rate / 2.0 || f1_hz >= f2_hz)
        throw Error("butterworth: band edges must satisfy 0 < f1 < f2 < Nyquist");
    const double fs2 = 2.0 * sample_rate;
    const double w1 = fs2 * std::tan(kPi * f1_hz / sample_rate);
    const double w2 = fs2 * std::tan(kPi * f2_hz / sample_rate);
    const double bw = w2 - w1;
    const double w0sq = w1 * w2;

    std::vector<cplx> zpoles;
    for (const cplx& p : prototype_poles(order)) {
        const cplx pb = p * (bw / 2.0);
        const cplx root = std::sqrt(pb * pb - w0sq);
        zpoles.push_back(bilinear(pb + root, fs2));
        zpoles.push_back(bilinear(pb - root, fs2));
    }
    // analog zeros: order at s=0 (z=1) and order at infinity (z=-1)
    std::vector<std::pair<cplx, cplx>> zzeros(order, {cplx(1.0, 0.0), cplx(-1.0, 0.0)});
    std::vector<Biquad> sections = sections_from_pairs(zpoles, zzeros);

    const double w0 = std::sqrt(w0sq);
    const double f_center = sample_rate / kPi * std::atan(w0 / fs2);
    normalize_gain(sections, f_center, sample_rate);
    return sections;
}

std::vector<double> apply_biquads(const std::vector<Biquad>& sections,
                                  const std::vector<double>& x) {
    std::vector<double> y = x;
    for (const Biquad& s : sections) {
        double s1 = 0.0, s2 = 0.0; // direct form II transposed
        for (double& v : y) {
            const double in = v;
            const double out = s.b0 * in + s1;
            s1 = s.b1 * in - s.a1 * out + s2;
            s2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
    return y;
}

AudioBuffer butterworth_highpass(const AudioBuffer& audio, double fc_hz, int order) {
    if (fc_hz >= audio.sample_rate / 2.0) throw Error("butterworth: cutoff at or above Nyquist");
    AudioBuffer out;
    out.sample_rate = audio.sample_rate;
    out.samples = apply_biquads(design_butterworth_highpass(fc_hz, audio.sample_rate, order),
                                audio.samples);
    return out;
}

AudioBuffer butterworth_bandpass(const AudioBuffer& audio, double f1_hz, double f2_hz, int order) {
    AudioBuffer out;
    out.sample_rate = audio.sample_rate;
    out.samples = apply_biquads(
        design_butterworth_bandpass(f1_hz, f2_hz, audio.sample_rate, order), audio.samples);
    return out;
}

std::vector<double> savitzky_golay(const std::vector<double>& values, int window, int polyorder) {
    if (window < 1 || window % 2 == 0) throw Error("savitzky_golay: window must be odd and >= 1");
    if (polyorder < 0 || polyorder >= window)
        throw Error("savitzky_golay: polyorder must satisfy 0 <= polyorder < window");
    const int n = static_cast<int>(values.size());
    if (n == 0) return {};
    if (n == 1 || window == 1) return values;

    // shrink the window on short inputs, keeping it odd and valid
    int w = std::min(window, n % 2 == 1 ? n : n - 1);
    if (w <= polyorder) return values; // exact fit: identity
    const int half = w / 2;

    Eigen::MatrixXd a(w, polyorder + 1);
    for (int i = 0; i < w; ++i) {
        double v = 1.0;
        for (int j = 0; j <= polyorder; ++j) {
            a(i, j) = v;
            v *= (i - half);
        }
    }
    const Eigen::MatrixXd ata = a.transpose() * a;
    const Eigen::VectorXd e0 = Eigen::VectorXd::Unit(polyorder + 1, 0);
    const Eigen::VectorXd w_row = a * ata.ldlt().solve(e0); // convolution weights

    auto mirrored = [&](int idx) {
        if (idx < 0) idx = -idx;
        if (idx >= n) idx = 2 * n - 2 - idx;
        return values[static_cast<std::size_t>(std::clamp(idx, 0, n - 1))];
    };
    std::vector<double> out(values.size());
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) acc += w_row(k + half) * mirrored(i + k);
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

namespace {

void fft_radix2(std::vector<cplx>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

} // namespace

Spectrogram spectrogram(const AudioBuffer& audio, int fft_size, int hop) {
    if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0)
        throw Error("spectrogram: fft_size must be a power of two");
    if (hop < 1 || hop > fft_size) throw Error("spectrogram: hop must be in [1, fft_size]");
    if (static_cast<int>(audio.samples.size()) < fft_size)
        throw Error("spectrogram: audio shorter than fft_size");

    Spectrogram spec;
    spec.sample_rate = audio.sample_rate;
    spec.fft_size = fft_size;
    spec.hop = hop;
    const int bins = fft_size / 2 + 1;
    for (int b = 0; b < bins; ++b) spec.freqs_hz.push_back(b * audio.sample_rate / fft_size);

    std::vector<double> hann(fft_size);
    for (int i = 0; i < fft_size; ++i)
        hann[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / fft_size);

    const int frames = 1 + (static_cast<int>(audio.samples.size()) - fft_size) / hop;
    spec.magnitudes.reserve(frames);
    std::vector<cplx> buf(fft_size);
    for (int f = 0; f < frames; ++f) {
        const int off = f * hop;
        for (int i = 0; i < fft_size; ++i)
            buf[i] = cplx(audio.samples[off + i] * hann[i], 0.0);
        fft_radix2(buf);
        std::vector<double> mags(bins);
        for (int b = 0; b < bins; ++b) mags[b] = std::abs(buf[b]);
        spec.magnitudes.push_back(std::move(mags));
        spec.times_s.push_back((off + fft_size / 2.0) / audio.sample_rate);
    }
    return spec;
}

} // namespace shmtk::acoustics
