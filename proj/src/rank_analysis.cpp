#include "ancsp/rank_analysis.hpp"

#include "ancsp/errors.hpp"

#include <algorithm>
#include <ostream>
#include <string>

namespace ancsp {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t v) { return static_cast<Index>(v); }

std::size_t count_above(const VectorXd& sigma, double cutoff) {
    std::size_t r = 0;
    for (Index i = 0; i < sigma.size(); ++i) {
        if (sigma[i] >= cutoff) ++r;
    }
    return r;
}

// Exactly symmetric (1/T) S S^T.
MatrixXd gram(const MatrixXd& s) {
    MatrixXd g = MatrixXd::Zero(s.rows(), s.rows());
    g.selfadjointView<Eigen::Lower>().rankUpdate(s, 1.0 / static_cast<double>(s.cols()));
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
    return g;
}

} // namespace

// DataMatrices ----------------------------------------------------------------

DataMatrices::DataMatrices(MatrixXd x1, MatrixXd x2, int sample_rate)
    : x1_(std::move(x1)), x2_(std::move(x2)), sample_rate_(sample_rate) {
    if (x1_.rows() == 0 || x2_.rows() == 0) throw InvalidInput("data matrices need at least one row each");
    if (x1_.cols() != x2_.cols()) throw InvalidInput("X1 and X2 must have the same number of columns");
    if (x1_.cols() < std::max(x1_.rows(), x2_.rows())) throw InvalidInput("data matrices need T >= max(L, M)");
    if (sample_rate_ <= 0) throw InvalidInput("sample rate must be positive");
}

MatrixXd DataMatrices::stacked() const {
    MatrixXd s(x1_.rows() + x2_.rows(), x1_.cols());
    s << x1_, x2_;
    return s;
}

MatrixXd hankel_rows(std::span<const double> x, std::size_t rows, std::size_t T, std::size_t n) {
    if (rows == 0 || T == 0) throw InvalidInput("hankel_rows: rows and T must be positive");
    if (n >= x.size()) throw InvalidInput("hankel_rows: anchor index beyond end of signal");
    if (n + 2 < rows + T) {
        throw InvalidInput("hankel_rows: insufficient history, need n >= " + std::to_string(rows + T - 2));
    }
    MatrixXd h(idx(rows), idx(T));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < T; ++j) h(idx(i), idx(j)) = x[n - i - j];
    }
    return h;
}

DataMatrices build_data_matrices(const Signal& x1, const Signal& x2, std::size_t L, std::size_t M,
                                 std::size_t T, std::size_t n) {
    if (x1.sample_rate() != x2.sample_rate()) throw InvalidInput("x1 and x2 sample rates differ");
    if (L == 0 || M == 0) throw InvalidInput("filter lengths must be positive");
    if (T < std::max(L, M)) throw InvalidInput("data matrices need T >= max(L, M)");
    if (n + 2 < T + std::max(L, M)) {
        throw InvalidInput("insufficient history: need n >= T + max(L, M) - 2 = " +
                           std::to_string(T + std::max(L, M) - 2));
    }
    return DataMatrices(hankel_rows(x1.samples(), L, T, n), hankel_rows(x2.samples(), M, T, n),
                        x1.sample_rate());
}

// JointCorrelation ------------------------------------------------------------

JointCorrelation::JointCorrelation(MatrixXd r_x, std::size_t L, std::size_t M, std::optional<VectorXd> r_xe)
    : r_x_(std::move(r_x)), l_(idx(L)), m_(idx(M)), r_xe_(std::move(r_xe)) {
    if (L == 0 || M == 0) throw InvalidInput("correlation block sizes must be positive");
    if (r_x_.rows() != l_ + m_ || r_x_.cols() != l_ + m_) {
        throw InvalidInput("R_x must be (L+M) x (L+M)");
    }
    if (r_xe_ && r_xe_->size() != l_ + m_) throw InvalidInput("r_xe must have L+M entries");
}

JointCorrelation joint_autocorrelation(const DataMatrices& data) {
    return JointCorrelation(gram(data.stacked()), data.primary_rows(), data.secondary_rows());
}

JointCorrelation joint_autocorrelation(const DataMatrices& data, const Signal& desired) {
    const std::size_t T = data.columns();
    if (desired.size() != T) {
        throw InvalidInput("desired signal has " + std::to_string(desired.size()) + " samples, expected T = " +
                           std::to_string(T));
    }
    const MatrixXd s = data.stacked();
    VectorXd e(idx(T));
    for (std::size_t j = 0; j < T; ++j) e[idx(j)] = desired[T - 1 - j];
    VectorXd r_xe = s * e / static_cast<double>(T);
    return JointCorrelation(gram(s), data.primary_rows(), data.secondary_rows(), std::move(r_xe));
}

// Projections -----------------------------------------------------------------

ProjectionSet projection_row_space(const MatrixXd& x1) {
    if (x1.rows() == 0 || x1.cols() < x1.rows()) {
        throw InvalidInput("projection_row_space: X1 must be a non-empty wide matrix");
    }
    Eigen::JacobiSVD<MatrixXd> svd(x1, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& sigma = svd.singularValues();
    const double smax = sigma[0];
    const double smin = sigma[sigma.size() - 1];
    if (!(smax > 0.0) || smin < kRankThreshold * smax) {
        throw DegenerateInput(
            "X1 is numerically row-rank deficient (sigma_min/sigma_max below 1e-10); the reference must not "
            "be a line-spectral process for the data matrices to have full row rank");
    }
    const MatrixXd& v = svd.matrixV();
    ProjectionSet out;
    out.p1 = v * v.transpose();
    out.p2 = MatrixXd::Identity(x1.cols(), x1.cols()) - out.p1;
    return out;
}

ProjectionSet projection_row_space(const DataMatrices& data) {
    ProjectionSet out = projection_row_space(data.x1());

    const MatrixXd& x2 = data.x2();
    Eigen::JacobiSVD<MatrixXd> svd2(x2);
    const VectorXd& s2 = svd2.singularValues();
    if (!(s2[0] > 0.0) || s2[s2.size() - 1] < kRankThreshold * s2[0]) {
        throw DegenerateInput("X2 is numerically row-rank deficient; the Schur block needs (X2 X2^T)^-1");
    }

    // X2 P1 X2^T, kept exactly symmetric.
    MatrixXd x2p1 = x2 * out.p1;
    MatrixXd num = x2p1 * x2.transpose();
    num = 0.5 * (num + num.transpose()).eval();
    MatrixXd g = x2 * x2.transpose();
    g = 0.5 * (g + g.transpose()).eval();

    // A = num * g^-1  <=>  A^T = g^-1 num  (both symmetric).
    MatrixXd a = g.ldlt().solve(num).transpose();
    out.reduced = MatrixXd::Identity(a.rows(), a.cols()) - a;
    out.schur_a = std::move(a);
    return out;
}

std::size_t reduced_block_rank(const ProjectionSet& set) {
    if (!set.reduced) throw InvalidInput("reduced_block_rank: projection set carries no Schur block");
    if (set.reduced->size() == 0) return 0;
    Eigen::JacobiSVD<MatrixXd> svd(*set.reduced);
    return count_above(svd.singularValues(), std::max(1.0, svd.singularValues()[0]) * kRankThreshold);
}

// Rank ------------------------------------------------------------------------

std::size_t numerical_rank(const MatrixXd& m, double relative_threshold) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<MatrixXd> svd(m);
    const VectorXd& sigma = svd.singularValues();
    if (!(sigma[0] > 0.0)) return 0;
    return count_above(sigma, relative_threshold * sigma[0]);
}

RankReport empirical_rank(const JointCorrelation& corr, double relative_threshold) {
    if (!(relative_threshold > 0.0 && relative_threshold < 1.0)) {
        throw InvalidInput("rank threshold must lie in (0, 1)");
    }
    Eigen::JacobiSVD<MatrixXd> svd(corr.r_x());
    const VectorXd& sigma = svd.singularValues();

    RankReport report;
    report.dimension = corr.dimension();
    report.threshold = relative_threshold;
    report.singular_values.assign(sigma.data(), sigma.data() + sigma.size());
    report.rank = sigma[0] > 0.0 ? count_above(sigma, relative_threshold * sigma[0]) : 0;
    report.deficiency = report.dimension - report.rank;
    return report;
}

void write_rank_report_csv(std::ostream& os, const RankReport& report) {
    os << "dimension,rank,deficiency,threshold\n";
    os << report.dimension << ',' << report.rank << ',' << report.deficiency << ','
       << format_real(report.threshold) << '\n';
    for (std::size_t i = 0; i < report.singular_values.size(); ++i) {
        os << "sigma_" << (i + 1) << ',' << format_real(report.singular_values[i]) << '\n';
    }
    if (report.predicted) {
        os << "predicted_case," << case_label(*report.predicted) << '\n';
        os << "predicted_verdict," << verdict_name(*report.predicted) << '\n';
    }
}

// Case prediction -------------------------------------------------------------

std::string_view case_name(IdentifiabilityCase c) noexcept {
    switch (c) {
    case IdentifiabilityCase::Case1: return "Case1";
    case IdentifiabilityCase::Case2: return "Case2";
    case IdentifiabilityCase::Case3: return "Case3";
    }
    return "?";
}

std::string_view case_label(const CasePrediction& p) noexcept {
    if (p.tail_condition_failed) return "Case3-condition-failed";
    return case_name(p.label);
}

std::string_view verdict_name(const CasePrediction& p) noexcept { return p.full_rank ? "full" : "deficient"; }

MatrixXd build_w_matrix(std::span<const double> w, std::size_t M) {
    if (w.empty()) throw InvalidInput("build_w_matrix: control filter must have at least one tap");
    if (M == 0) throw InvalidInput("build_w_matrix: M must be at least 1");
    const std::size_t N = w.size();
    MatrixXd out = MatrixXd::Zero(idx(M), idx(N + M - 1));
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t k = 0; k < N; ++k) out(idx(i), idx(i + k)) = w[k];
    }
    return out;
}

MatrixXd build_w_matrix(const ImpulseResponse& w, std::size_t M) { return build_w_matrix(w.taps(), M); }

CasePrediction predict_case(std::size_t N, std::size_t L, std::size_t M, std::span<const double> w) {
    if (N == 0 || L == 0 || M == 0) throw InvalidInput("predict_case: N, L and M must be positive");
    if (!w.empty() && w.size() != N) {
        throw InvalidInput("predict_case: control filter has " + std::to_string(w.size()) + " taps but N = " +
                           std::to_string(N));
    }
    if (N + M - 1 <= L) return {IdentifiabilityCase::Case1, false};
    if (N <= L) return {IdentifiabilityCase::Case2, false};

    const bool tail_zero =
        !w.empty() && std::all_of(w.begin() + static_cast<std::ptrdiff_t>(L), w.end(), [](double t) { return t == 0.0; });
    return {IdentifiabilityCase::Case3, !tail_zero, tail_zero};
}

SelectorPair make_selectors(std::size_t N, std::size_t L, std::size_t M, std::size_t K) {
    if (N == 0 || L == 0 || M == 0) throw InvalidInput("make_selectors: N, L and M must be positive");
    const std::size_t rows2 = N + M - 1;
    if (K < std::max(rows2, L)) throw InvalidInput("make_selectors: K must be at least max(N+M-1, L)");
    SelectorPair sel;
    sel.k = K;
    sel.g1 = MatrixXd::Identity(idx(L), idx(K));
    sel.g2 = MatrixXd::Identity(idx(rows2), idx(K));
    return sel;
}

TvIdentifiability tv_identifiability(const ImpulseResponse& w_a, const ImpulseResponse& w_b, std::size_t M) {
    if (M == 0) throw InvalidInput("tv_identifiability: M must be at least 1");
    const std::size_t N = std::max(w_a.size(), w_b.size());
    std::vector<double> a(N, 0.0);
    std::vector<double> b(N, 0.0);
    std::copy(w_a.taps().begin(), w_a.taps().end(), a.begin());
    std::copy(w_b.taps().begin(), w_b.taps().end(), b.begin());

    const MatrixXd diff = build_w_matrix(a, M) - build_w_matrix(b, M);
    // G2 only enters through G2^T, which is full column rank; L plays no role here.
    const SelectorPair sel = make_selectors(N, 1, M, N + M - 1);
    const MatrixXd lifted = sel.g2.transpose() * diff.transpose();

    TvIdentifiability out;
    out.dimension = M;
    out.rank = numerical_rank(lifted);
    out.identifiable = out.rank == M;
    return out;
}

} // namespace ancsp
