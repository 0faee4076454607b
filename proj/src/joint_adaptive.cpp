#include "ancsp/joint_adaptive.hpp"

#include "ancsp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ancsp {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void require_finite_samples(double x1, double x2, double d) {
    if (!std::isfinite(x1) || !std::isfinite(x2) || !std::isfinite(d)) {
        throw InvalidInput("adaptive step received a non-finite sample");
    }
}

} // namespace

void NlmsParams::validate() const {
    if (!(step_size >= 0.0 && step_size < 2.0)) throw InvalidInput("NLMS step size must lie in [0, 2)");
    if (!(regularizer >= 0.0 && std::isfinite(regularizer))) {
        throw InvalidInput("NLMS regularizer must be finite and non-negative");
    }
}

void RlsParams::validate() const {
    if (!(forgetting > 0.0 && forgetting <= 1.0)) throw InvalidInput("RLS forgetting factor must lie in (0, 1]");
    if (!(delta > 0.0 && std::isfinite(delta))) throw InvalidInput("RLS delta must be finite and positive");
}

// JointModelState -------------------------------------------------------------

JointModelState::JointModelState(std::size_t L, std::size_t M, int sample_rate)
    : l_(L), m_(M), sample_rate_(sample_rate),
      coeffs_(VectorXd::Zero(static_cast<Index>(L + M))),
      regressor_(VectorXd::Zero(static_cast<Index>(L + M))),
      x1_(std::max<std::size_t>(L, 1)), x2_(std::max<std::size_t>(M, 1)) {
    if (L == 0 || M == 0) throw InvalidInput("identifier lengths L and M must be at least 1");
    if (sample_rate <= 0) throw InvalidInput("sample rate must be positive");
}

ImpulseResponse JointModelState::p_hat() const {
    const auto c = primary_coefficients();
    return ImpulseResponse({c.begin(), c.end()}, sample_rate_);
}

ImpulseResponse JointModelState::s_hat() const {
    const auto c = secondary_coefficients();
    return ImpulseResponse({c.begin(), c.end()}, sample_rate_);
}

double JointModelState::predict() const noexcept { return regressor_.dot(coeffs_); }

void JointModelState::advance(double x1_n, double x2_n) {
    x1_.push(x1_n);
    x2_.push(x2_n);
    const Index l = static_cast<Index>(l_);
    const Index m = static_cast<Index>(m_);
    regressor_.head(l) = Eigen::Map<const VectorXd>(x1_.window().data(), l);
    regressor_.tail(m) = Eigen::Map<const VectorXd>(x2_.window().data(), m);
    ++iteration_;
}

void JointModelState::check_finite(const char* loop) const {
    if (!coeffs_.allFinite()) throw Divergence(loop, iteration_);
}

double nlms_step(JointModelState& state, const NlmsParams& params, double x1_n, double x2_n, double d_n) {
    require_finite_samples(x1_n, x2_n, d_n);
    state.advance(x1_n, x2_n);

    const VectorXd& u = state.regressor_;
    const double e1 = d_n - u.dot(state.coeffs_);
    const double energy = u.squaredNorm() + params.regularizer;
    if (energy > 0.0) state.coeffs_ += (params.step_size * e1 / energy) * u;
    state.check_finite("identifier");
    return e1;
}

// RLS -------------------------------------------------------------------------

RlsState::RlsState(std::size_t L, std::size_t M, const RlsParams& params, int sample_rate)
    : model_(L, M, sample_rate) {
    params.validate();
    const Index n = static_cast<Index>(L + M);
    p_ = MatrixXd::Identity(n, n) / params.delta;
    pu_ = VectorXd::Zero(n);
}

double rls_step(RlsState& state, const RlsParams& params, double x1_n, double x2_n, double d_n) {
    require_finite_samples(x1_n, x2_n, d_n);
    JointModelState& model = state.model_;
    model.advance(x1_n, x2_n);

    const VectorXd& u = model.regressor_;
    MatrixXd& p = state.p_;
    VectorXd& pu = state.pu_;
    pu.noalias() = p * u;
    const double denom = params.forgetting + u.dot(pu);
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        throw NumericalBreakdown("RLS lost positive definiteness at iteration " + std::to_string(model.iteration_));
    }

    const double e1 = d_n - u.dot(model.coeffs_);
    model.coeffs_ += (e1 / denom) * pu;

    p.noalias() -= (pu / denom) * pu.transpose();
    p /= params.forgetting;

    // Measure drift from symmetry, then fold it away.
    const Index n = p.rows();
    double asym = 0.0;
    double scale = 0.0;
    for (Index j = 0; j < n; ++j) {
        scale = std::max(scale, std::abs(p(j, j)));
        for (Index i = 0; i < j; ++i) {
            const double a = p(i, j);
            const double b = p(j, i);
            asym = std::max(asym, std::abs(a - b));
            scale = std::max(scale, std::max(std::abs(a), std::abs(b)));
            const double mid = 0.5 * (a + b);
            p(i, j) = mid;
            p(j, i) = mid;
        }
    }
    if (!std::isfinite(scale) || asym > kRlsSymmetryTolerance * scale) {
        throw NumericalBreakdown("RLS inverse correlation matrix lost symmetry at iteration " +
                                 std::to_string(model.iteration_));
    }
    model.check_finite("identifier");
    return e1;
}

// Batch least squares -----------------------------------------------------------

WienerSolution wiener_solve(const DataMatrices& data, const Signal& desired) {
    const JointCorrelation corr = joint_autocorrelation(data, desired);
    Eigen::JacobiSVD<MatrixXd> svd(corr.r_x(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd& sigma = svd.singularValues();
    const VectorXd& r_xe = *corr.r_xe();

    std::size_t rank = 0;
    VectorXd coords = svd.matrixU().transpose() * r_xe;
    if (sigma[0] > 0.0) {
        const double cutoff = kRankThreshold * sigma[0];
        for (Index i = 0; i < sigma.size(); ++i) {
            if (sigma[i] >= cutoff) {
                coords[i] /= sigma[i];
                ++rank;
            } else {
                coords[i] = 0.0;
            }
        }
    } else {
        coords.setZero();
    }
    const VectorXd theta = svd.matrixV() * coords;

    const Index l = static_cast<Index>(data.primary_rows());
    const Index m = static_cast<Index>(data.secondary_rows());
    std::vector<double> p(theta.data(), theta.data() + l);
    std::vector<double> s(theta.data() + l, theta.data() + l + m);
    return {ImpulseResponse(std::move(p), data.sample_rate()), ImpulseResponse(std::move(s), data.sample_rate()),
            rank};
}

} // namespace ancsp
