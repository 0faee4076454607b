#pragma once

#include "ancsp/signal_core.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ancsp {

/// Relative singular-value cutoff used for every numerical rank decision.
inline constexpr double kRankThreshold = 1e-10;

/// Hankel-structured data matrices of the two identifier inputs.
///
/// Row i (0-based) of x1 is the length-T window of the reference that ends
/// i samples before the anchor time, newest sample first; x2 likewise for
/// the control-filter output. Every column is therefore one stacked
/// regressor [x1 window; x2 window] as seen by the adaptive identifier.
class DataMatrices {
public:
    /// Throws InvalidInput unless both matrices share T columns and
    /// T >= max(rows).
    DataMatrices(Eigen::MatrixXd x1, Eigen::MatrixXd x2, int sample_rate);

    const Eigen::MatrixXd& x1() const noexcept { return x1_; }
    const Eigen::MatrixXd& x2() const noexcept { return x2_; }
    std::size_t primary_rows() const noexcept { return static_cast<std::size_t>(x1_.rows()); }
    std::size_t secondary_rows() const noexcept { return static_cast<std::size_t>(x2_.rows()); }
    std::size_t columns() const noexcept { return static_cast<std::size_t>(x1_.cols()); }
    int sample_rate() const noexcept { return sample_rate_; }

    /// [x1; x2], (L+M) x T.
    Eigen::MatrixXd stacked() const;

private:
    Eigen::MatrixXd x1_;
    Eigen::MatrixXd x2_;
    int sample_rate_;
};

/// rows x T Hankel matrix: element (i, j) = x[n - i - j].
/// Throws InvalidInput when n < rows + T - 2 or n >= x.size().
Eigen::MatrixXd hankel_rows(std::span<const double> x, std::size_t rows, std::size_t T, std::size_t n);

/// n is the 0-based index of the newest sample used; it needs
/// n >= T + max(L, M) - 2 samples of history.
DataMatrices build_data_matrices(const Signal& x1, const Signal& x2, std::size_t L, std::size_t M,
                                 std::size_t T, std::size_t n);

/// Joint auto-correlation R_x = (1/T) [X1; X2][X1; X2]^T and, when a desired
/// signal is supplied, the cross-correlation vector r_xe = (1/T) [X1; X2] e.
class JointCorrelation {
public:
    JointCorrelation(Eigen::MatrixXd r_x, std::size_t L, std::size_t M,
                     std::optional<Eigen::VectorXd> r_xe = std::nullopt);

    const Eigen::MatrixXd& r_x() const noexcept { return r_x_; }
    Eigen::MatrixXd r_x1() const { return r_x_.topLeftCorner(l_, l_); }
    Eigen::MatrixXd r_x2() const { return r_x_.bottomRightCorner(m_, m_); }
    Eigen::MatrixXd r_x1x2() const { return r_x_.topRightCorner(l_, m_); }
    const std::optional<Eigen::VectorXd>& r_xe() const noexcept { return r_xe_; }

    std::size_t primary_length() const noexcept { return static_cast<std::size_t>(l_); }
    std::size_t secondary_length() const noexcept { return static_cast<std::size_t>(m_); }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(l_ + m_); }

private:
    Eigen::MatrixXd r_x_;
    Eigen::Index l_;
    Eigen::Index m_;
    std::optional<Eigen::VectorXd> r_xe_;
};

JointCorrelation joint_autocorrelation(const DataMatrices& data);
/// `desired` holds T samples in time order; its last sample lines up with
/// the anchor time of the data matrices (column 0).
JointCorrelation joint_autocorrelation(const DataMatrices& data, const Signal& desired);

/// Projectors onto the row space of X1 (p1) and its orthogonal complement
/// (p2), both T x T. When built from DataMatrices, also carries
/// A = X2 P1 X2^T (X2 X2^T)^-1 and the reduced block I - A, both M x M.
struct ProjectionSet {
    Eigen::MatrixXd p1;
    Eigen::MatrixXd p2;
    std::optional<Eigen::MatrixXd> schur_a;
    std::optional<Eigen::MatrixXd> reduced;
};

/// Throws DegenerateInput when X1 is numerically row-rank deficient
/// (sigma_min / sigma_max < kRankThreshold), which is what a line-spectral
/// (pure tone) reference produces.
ProjectionSet projection_row_space(const Eigen::MatrixXd& x1);
ProjectionSet projection_row_space(const DataMatrices& data);

/// Rank of the reduced block I - A. Its eigenvalues lie in [0, 1], so the
/// cutoff is kRankThreshold against the identity's unit scale rather than
/// against its own largest singular value, which is round-off sized when
/// A = I. Throws InvalidInput if the set was built from X1 alone.
std::size_t reduced_block_rank(const ProjectionSet& set);

enum class IdentifiabilityCase { Case1, Case2, Case3 };

struct CasePrediction {
    IdentifiabilityCase label;
    bool full_rank;
    /// Case 3 only: every tap beyond L is zero, so the full-rank condition fails.
    bool tail_condition_failed = false;

    friend bool operator==(const CasePrediction&, const CasePrediction&) = default;
};

std::string_view case_name(IdentifiabilityCase c) noexcept;
/// "Case1", "Case2", "Case3" or "Case3-condition-failed".
std::string_view case_label(const CasePrediction& p) noexcept;
std::string_view verdict_name(const CasePrediction& p) noexcept;

struct RankReport {
    std::size_t dimension = 0;
    std::size_t rank = 0;
    std::size_t deficiency = 0;
    std::vector<double> singular_values;  // descending
    double threshold = kRankThreshold;
    std::optional<CasePrediction> predicted;
};

/// Singular values >= relative_threshold * sigma_max count towards the rank.
RankReport empirical_rank(const JointCorrelation& corr, double relative_threshold = kRankThreshold);

/// Number of singular values >= relative_threshold * sigma_max (0 for a zero matrix).
std::size_t numerical_rank(const Eigen::MatrixXd& m, double relative_threshold = kRankThreshold);

/// `dimension,rank,deficiency,threshold`, one value row, one `sigma_i,value`
/// row per singular value, then `predicted_case` / `predicted_verdict` rows
/// when a prediction is attached.
void write_rank_report_csv(std::ostream& os, const RankReport& report);

/// M x (N+M-1) banded matrix; row i holds w(1..N) starting at column i.
Eigen::MatrixXd build_w_matrix(std::span<const double> w, std::size_t M);
Eigen::MatrixXd build_w_matrix(const ImpulseResponse& w, std::size_t M);

/// Identifiability verdict from filter lengths and the zero pattern of w.
/// An empty w stands for a generic filter whose taps beyond L are not all
/// zero; otherwise w must have exactly N taps.
CasePrediction predict_case(std::size_t N, std::size_t L, std::size_t M, std::span<const double> w = {});

/// Identity-then-zeros selectors G1 (L x K) and G2 ((N+M-1) x K).
struct SelectorPair {
    Eigen::MatrixXd g1;
    Eigen::MatrixXd g2;
    std::size_t k = 0;
};

/// Throws InvalidInput when K < max(N+M-1, L).
SelectorPair make_selectors(std::size_t N, std::size_t L, std::size_t M, std::size_t K);

struct TvIdentifiability {
    bool identifiable = false;
    std::size_t rank = 0;       // rank of G2^T (W_a - W_b)^T
    std::size_t dimension = 0;  // M
};

/// Whether alternating between two control filters pins the secondary-path
/// estimate uniquely: the difference of their convolution matrices must have
/// full row rank M. Shorter filters are zero-padded at the tail.
TvIdentifiability tv_identifiability(const ImpulseResponse& w_a, const ImpulseResponse& w_b, std::size_t M);

} // namespace ancsp
