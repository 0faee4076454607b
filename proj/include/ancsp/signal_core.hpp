#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ancsp {

/// Finite FIR tap vector tagged with its sample rate. Holds both true plant
/// paths and adaptive estimates.
class ImpulseResponse {
public:
    /// Throws InvalidInput on empty taps, non-finite taps or sample_rate <= 0.
    ImpulseResponse(std::vector<double> taps, int sample_rate);

    /// Length-n all-zero response.
    static ImpulseResponse zeros(std::size_t n, int sample_rate);

    std::span<const double> taps() const noexcept { return taps_; }
    std::size_t size() const noexcept { return taps_.size(); }
    int sample_rate() const noexcept { return sample_rate_; }
    double operator[](std::size_t k) const noexcept { return taps_[k]; }
    double norm() const noexcept;

    friend bool operator==(const ImpulseResponse&, const ImpulseResponse&) = default;

private:
    std::vector<double> taps_;
    int sample_rate_;
};

/// Sampled real signal. May be empty.
class Signal {
public:
    Signal(std::vector<double> samples, int sample_rate);

    std::span<const double> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }
    int sample_rate() const noexcept { return sample_rate_; }
    double operator[](std::size_t n) const noexcept { return samples_[n]; }

    friend bool operator==(const Signal&, const Signal&) = default;

private:
    std::vector<double> samples_;
    int sample_rate_;
};

/// Fixed-capacity history of the most recent samples, newest first.
///
/// The storage is mirrored so that window() is always one contiguous span,
/// which keeps the per-sample dot products in the adaptive loops cheap.
class DelayLine {
public:
    explicit DelayLine(std::size_t capacity);

    void push(double v) noexcept;
    void clear() noexcept;

    /// Sample pushed k steps ago (k = 0 is the newest); zero before the
    /// first push. Throws InvalidInput when k >= capacity.
    double at(std::size_t k) const;
    double operator[](std::size_t k) const noexcept { return buf_[pos_ + k]; }

    /// Newest-first view of all capacity() samples.
    std::span<const double> window() const noexcept { return {buf_.data() + pos_, cap_}; }

    std::size_t capacity() const noexcept { return cap_; }
    std::uint64_t pushes() const noexcept { return pushes_; }

private:
    std::size_t cap_;
    std::size_t pos_ = 0;
    std::uint64_t pushes_ = 0;
    std::vector<double> buf_;
};

/// y(n) = sum_k taps(k) x(n-k), zero history before the first sample.
Signal fir_filter(const ImpulseResponse& ir, const Signal& input);

/// Unit-variance white Gaussian noise, deterministic per seed.
Signal white_noise(std::uint64_t seed, std::size_t n_samples, int sample_rate);

/// Linear-phase band-pass FIR: Hamming-windowed difference of two sincs.
ImpulseResponse bandpass_fir(std::size_t order, double f_low, double f_high, int sample_rate);

inline constexpr std::size_t kNoiseFilterOrder = 128;

/// Seeded white Gaussian noise shaped by bandpass_fir(kNoiseFilterOrder, ...)
/// and rescaled to unit mean power. The filter is run kNoiseFilterOrder
/// samples ahead so the returned block carries no start-up transient.
Signal bandlimited_noise(std::uint64_t seed, std::size_t n_samples, double f_low, double f_high,
                         int sample_rate);

/// Synthetic acoustic path: `delay` leading zeros, then Gaussian draws with
/// an exponential decay^(k - delay) envelope, normalized to unit 2-norm.
ImpulseResponse synth_path(std::uint64_t seed, std::size_t length, std::size_t delay, double decay,
                           int sample_rate = 1000);

/// 20 log10(||reference - estimate|| / ||reference||) after zero-padding the
/// shorter response. Exact match gives -infinity.
double misalignment_db(const ImpulseResponse& reference, const ImpulseResponse& estimate);
double misalignment_db(std::span<const double> reference, std::span<const double> estimate);

/// 10 log10 of the power ratio before/after over the last `window` samples.
/// Positive means `after` is quieter.
double attenuation_db(const Signal& before, const Signal& after, std::size_t window);

// CSV serialization ---------------------------------------------------------

/// Serialized stand-in for -infinity dB.
inline constexpr double kDbFloor = -400.0;

/// 17 significant digits, locale independent.
std::string format_real(double v);
/// format_real with values below kDbFloor (including -inf) clamped to it.
std::string format_db(double db);

/// Header `index,tap`, 1-based index.
void write_impulse_response_csv(std::ostream& os, const ImpulseResponse& ir);
ImpulseResponse read_impulse_response_csv(std::istream& is, int sample_rate);
/// Header `n,value`, 1-based n.
void write_signal_csv(std::ostream& os, const Signal& s);

} // namespace ancsp
