#pragma once

#include "ancsp/rank_analysis.hpp"
#include "ancsp/signal_core.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>

namespace ancsp {

/// Step size and normalization regularizer of normalized LMS.
struct NlmsParams {
    double step_size = 0.5;
    double regularizer = 1e-6;

    /// step_size in [0, 2), regularizer >= 0, both finite.
    void validate() const;
};

/// Exponentially weighted RLS. The inverse correlation matrix starts at
/// (1/delta) I.
struct RlsParams {
    double forgetting = 0.9995;
    double delta = 1e2;

    /// forgetting in (0, 1], delta > 0.
    void validate() const;
};

class RlsState;

/// Two-channel identifier: one FIR on the reference x1 (length L, estimates
/// the primary path) and one on the control output x2 (length M, estimates
/// the secondary path), driven by a common error.
///
/// Coefficients are stored stacked as [p_hat; s_hat], matching the regressor
/// u(n) = [x1(n) .. x1(n-L+1), x2(n) .. x2(n-M+1)].
class JointModelState {
public:
    JointModelState(std::size_t L, std::size_t M, int sample_rate = 1000);

    std::size_t primary_length() const noexcept { return l_; }
    std::size_t secondary_length() const noexcept { return m_; }
    std::uint64_t iteration() const noexcept { return iteration_; }
    int sample_rate() const noexcept { return sample_rate_; }

    const Eigen::VectorXd& coefficients() const noexcept { return coeffs_; }
    std::span<const double> primary_coefficients() const noexcept { return {coeffs_.data(), l_}; }
    std::span<const double> secondary_coefficients() const noexcept { return {coeffs_.data() + l_, m_}; }
    ImpulseResponse p_hat() const;
    ImpulseResponse s_hat() const;

    const DelayLine& x1_history() const noexcept { return x1_; }
    const DelayLine& x2_history() const noexcept { return x2_; }

    /// Output of the joint model for the current histories.
    double predict() const noexcept;

private:
    friend double nlms_step(JointModelState&, const NlmsParams&, double, double, double);
    friend class RlsState;
    friend double rls_step(RlsState&, const RlsParams&, double, double, double);

    /// Pushes the new samples and rebuilds regressor_.
    void advance(double x1_n, double x2_n);
    void check_finite(const char* loop) const;

    std::size_t l_;
    std::size_t m_;
    int sample_rate_;
    Eigen::VectorXd coeffs_;
    Eigen::VectorXd regressor_;
    DelayLine x1_;
    DelayLine x2_;
    std::uint64_t iteration_ = 0;
};

/// One NLMS update. Returns the a-priori residual e1 = d - u^T [p; s].
/// Throws InvalidInput on non-finite samples, Divergence when a coefficient
/// becomes non-finite.
double nlms_step(JointModelState& state, const NlmsParams& params, double x1_n, double x2_n, double d_n);

class RlsState {
public:
    RlsState(std::size_t L, std::size_t M, const RlsParams& params, int sample_rate = 1000);

    const JointModelState& model() const noexcept { return model_; }
    const Eigen::MatrixXd& inverse_correlation() const noexcept { return p_; }

private:
    friend double rls_step(RlsState&, const RlsParams&, double, double, double);

    JointModelState model_;
    Eigen::MatrixXd p_;
    Eigen::VectorXd pu_;
};

/// Largest relative asymmetry the inverse correlation matrix may show before
/// resymmetrization without being treated as a numerical breakdown.
inline constexpr double kRlsSymmetryTolerance = 1e-6;

/// One RLS update (gain k = P u / (lambda + u^T P u)), followed by
/// resymmetrization of P. Returns the a-priori residual. Throws
/// NumericalBreakdown on loss of symmetry or positivity, otherwise as
/// nlms_step.
double rls_step(RlsState& state, const RlsParams& params, double x1_n, double x2_n, double d_n);

struct WienerSolution {
    ImpulseResponse p;
    ImpulseResponse s;
    std::size_t rank_used;
};

/// Minimum-norm solution of R_x [p; s] = r_xe through an SVD
/// pseudo-inverse that keeps singular values >= kRankThreshold * sigma_max.
/// `desired` is time ordered with T samples, as in joint_autocorrelation.
WienerSolution wiener_solve(const DataMatrices& data, const Signal& desired);

} // namespace ancsp
