#include "ancsp/signal_core.hpp"

#include "ancsp/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

namespace ancsp {

namespace {

void require_rate(int sample_rate) {
    if (sample_rate <= 0) {
        throw InvalidInput("sample rate must be positive, got " + std::to_string(sample_rate));
    }
}

double sum_squares(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

} // namespace

// ImpulseResponse -------------------------------------------------------------

ImpulseResponse::ImpulseResponse(std::vector<double> taps, int sample_rate)
    : taps_(std::move(taps)), sample_rate_(sample_rate) {
    if (taps_.empty()) throw InvalidInput("impulse response needs at least one tap");
    require_rate(sample_rate_);
    for (std::size_t k = 0; k < taps_.size(); ++k) {
        if (!std::isfinite(taps_[k])) {
            throw InvalidInput("impulse response tap " + std::to_string(k + 1) + " is not finite");
        }
    }
}

ImpulseResponse ImpulseResponse::zeros(std::size_t n, int sample_rate) {
    return ImpulseResponse(std::vector<double>(n, 0.0), sample_rate);
}

double ImpulseResponse::norm() const noexcept { return std::sqrt(sum_squares(taps_)); }

// Signal ----------------------------------------------------------------------

Signal::Signal(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
    require_rate(sample_rate_);
    for (std::size_t n = 0; n < samples_.size(); ++n) {
        if (!std::isfinite(samples_[n])) {
            throw InvalidInput("signal sample " + std::to_string(n) + " is not finite");
        }
    }
}

// DelayLine -------------------------------------------------------------------

DelayLine::DelayLine(std::size_t capacity) : cap_(capacity), buf_(2 * capacity, 0.0) {
    if (capacity == 0) throw InvalidInput("delay line capacity must be at least 1");
}

void DelayLine::push(double v) noexcept {
    pos_ = (pos_ == 0) ? cap_ - 1 : pos_ - 1;
    buf_[pos_] = v;
    buf_[pos_ + cap_] = v;
    ++pushes_;
}

void DelayLine::clear() noexcept {
    std::fill(buf_.begin(), buf_.end(), 0.0);
    pos_ = 0;
    pushes_ = 0;
}

double DelayLine::at(std::size_t k) const {
    if (k >= cap_) {
        throw InvalidInput("delay line read " + std::to_string(k) + " steps back exceeds capacity " +
                           std::to_string(cap_));
    }
    return buf_[pos_ + k];
}

// Filtering and generators ----------------------------------------------------

Signal fir_filter(const ImpulseResponse& ir, const Signal& input) {
    if (ir.sample_rate() != input.sample_rate()) {
        throw InvalidInput("fir_filter: impulse response at " + std::to_string(ir.sample_rate()) +
                           " Hz but input at " + std::to_string(input.sample_rate()) + " Hz");
    }
    const auto h = ir.taps();
    const auto x = input.samples();
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t n = 0; n < x.size(); ++n) {
        const std::size_t kmax = std::min(h.size(), n + 1);
        double acc = 0.0;
        for (std::size_t k = 0; k < kmax; ++k) acc += h[k] * x[n - k];
        y[n] = acc;
    }
    return Signal(std::move(y), input.sample_rate());
}

Signal white_noise(std::uint64_t seed, std::size_t n_samples, int sample_rate) {
    require_rate(sample_rate);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(n_samples);
    for (auto& s : v) s = gauss(rng);
    return Signal(std::move(v), sample_rate);
}

ImpulseResponse bandpass_fir(std::size_t order, double f_low, double f_high, int sample_rate) {
    require_rate(sample_rate);
    const double nyquist = 0.5 * sample_rate;
    if (!(f_low > 0.0 && f_low < f_high && f_high < nyquist)) {
        throw InvalidInput("band edges must satisfy 0 < f_low < f_high < sample_rate/2");
    }
    if (order == 0 || order % 2 != 0) throw InvalidInput("band-pass order must be even and positive");

    const double lo = f_low / sample_rate;
    const double hi = f_high / sample_rate;
    const double centre = 0.5 * static_cast<double>(order);
    std::vector<double> h(order + 1);
    for (std::size_t n = 0; n <= order; ++n) {
        const double m = static_cast<double>(n) - centre;
        const double ideal = 2.0 * hi * sinc(2.0 * hi * m) - 2.0 * lo * sinc(2.0 * lo * m);
        const double hamming =
            0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(order));
        h[n] = ideal * hamming;
    }
    return ImpulseResponse(std::move(h), sample_rate);
}

Signal bandlimited_noise(std::uint64_t seed, std::size_t n_samples, double f_low, double f_high,
                         int sample_rate) {
    const auto shaper = bandpass_fir(kNoiseFilterOrder, f_low, f_high, sample_rate);
    if (n_samples == 0) return Signal({}, sample_rate);

    const auto raw = white_noise(seed, n_samples + kNoiseFilterOrder, sample_rate);
    const Signal shaped = fir_filter(shaper, raw);
    std::vector<double> out(shaped.samples().begin() + kNoiseFilterOrder, shaped.samples().end());

    const double rms = std::sqrt(sum_squares(out) / static_cast<double>(out.size()));
    if (rms > 0.0) {
        for (auto& v : out) v /= rms;
    }
    return Signal(std::move(out), sample_rate);
}

ImpulseResponse synth_path(std::uint64_t seed, std::size_t length, std::size_t delay, double decay,
                           int sample_rate) {
    if (length == 0) throw InvalidInput("synth_path: length must be at least 1");
    if (delay >= length) throw InvalidInput("synth_path: delay must be shorter than length");
    if (!(decay > 0.0 && decay <= 1.0)) throw InvalidInput("synth_path: decay must lie in (0, 1]");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> taps(length, 0.0);
    double envelope = 1.0;
    for (std::size_t k = delay; k < length; ++k) {
        envelope *= decay;
        taps[k] = gauss(rng) * envelope;
    }
    const double norm = std::sqrt(sum_squares(taps));
    if (norm == 0.0) throw InvalidInput("synth_path: degenerate all-zero draw");
    for (auto& t : taps) t /= norm;
    return ImpulseResponse(std::move(taps), sample_rate);
}

// Metrics ---------------------------------------------------------------------

double misalignment_db(std::span<const double> reference, std::span<const double> estimate) {
    const double ref_energy = sum_squares(reference);
    if (!(ref_energy > 0.0)) throw InvalidInput("misalignment_db: reference has zero norm");

    const std::size_t n = std::max(reference.size(), estimate.size());
    double err_energy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = k < reference.size() ? reference[k] : 0.0;
        const double e = k < estimate.size() ? estimate[k] : 0.0;
        err_energy += (r - e) * (r - e);
    }
    if (err_energy == 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(err_energy / ref_energy);
}

double misalignment_db(const ImpulseResponse& reference, const ImpulseResponse& estimate) {
    return misalignment_db(reference.taps(), estimate.taps());
}

double attenuation_db(const Signal& before, const Signal& after, std::size_t window) {
    if (window == 0) throw InvalidInput("attenuation_db: window must be at least 1");
    if (window > before.size() || window > after.size()) {
        throw InvalidInput("attenuation_db: window longer than signal");
    }
    const auto tail = [window](const Signal& s) {
        return sum_squares(s.samples().last(window)) / static_cast<double>(window);
    };
    const double p_before = tail(before);
    if (!(p_before > 0.0)) throw InvalidInput("attenuation_db: reference window has zero power");
    const double p_after = tail(after);
    if (p_after == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(p_before / p_after);
}

// CSV -------------------------------------------------------------------------

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

std::string format_db(double db) {
    if (!std::isnan(db) && db < kDbFloor) db = kDbFloor;
    return format_real(db);
}

void write_impulse_response_csv(std::ostream& os, const ImpulseResponse& ir) {
    os << "index,tap\n";
    for (std::size_t k = 0; k < ir.size(); ++k) os << (k + 1) << ',' << format_real(ir[k]) << '\n';
}

ImpulseResponse read_impulse_response_csv(std::istream& is, int sample_rate) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidInput("impulse response CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "index,tap") throw InvalidInput("impulse response CSV must start with 'index,tap'");

    std::vector<double> taps;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw InvalidInput("impulse response CSV line " + std::to_string(lineno) + ": missing comma");
        }
        std::size_t index = 0;
        double tap = 0.0;
        const char* first = line.data();
        const char* last = line.data() + line.size();
        auto r1 = std::from_chars(first, first + comma, index);
        auto r2 = std::from_chars(first + comma + 1, last, tap);
        if (r1.ec != std::errc{} || r1.ptr != first + comma || r2.ec != std::errc{} || r2.ptr != last) {
            throw InvalidInput("impulse response CSV line " + std::to_string(lineno) + ": malformed");
        }
        if (index != taps.size() + 1) {
            throw InvalidInput("impulse response CSV line " + std::to_string(lineno) +
                               ": indices must run 1, 2, 3, ...");
        }
        taps.push_back(tap);
    }
    return ImpulseResponse(std::move(taps), sample_rate);
}

void write_signal_csv(std::ostream& os, const Signal& s) {
    os << "n,value\n";
    for (std::size_t n = 0; n < s.size(); ++n) os << (n + 1) << ',' << format_real(s[n]) << '\n';
}

} // namespace ancsp
