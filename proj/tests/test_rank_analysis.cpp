#include "oracles.hpp"

#include <doctest.h>

#include "ancsp/errors.hpp"
#include "ancsp/rank_analysis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace ancsp;
using Eigen::MatrixXd;

namespace {

Signal sig(std::vector<double> v) { return Signal(std::move(v), 1000); }

// x white, x2 = w * x; data matrices anchored at the last sample.
DataMatrices control_data(std::uint64_t seed, const std::vector<double>& w, std::size_t L, std::size_t M,
                          std::size_t T) {
    const auto x = white_noise(seed, T + w.size() + L + M, 1000);
    const auto x2 = fir_filter(ImpulseResponse(w, 1000), x);
    return build_data_matrices(x, x2, L, M, T, x.size() - 1);
}

std::vector<double> taps_with_last(std::uint64_t seed, std::size_t n, double last) {
    auto w = oracle::random_vector(seed, n);
    w.back() = last;
    return w;
}

} // namespace

TEST_CASE("build_data_matrices: direct indexing example") {
    const auto x1 = sig({1, 2, 3, 4, 5});
    const auto d = build_data_matrices(x1, x1, 2, 1, 3, 4);
    MatrixXd expect(2, 3);
    expect << 5, 4, 3, 4, 3, 2;
    CHECK(d.x1() == expect);
    CHECK(d.x2() == expect.topRows(1));
    CHECK(d.columns() == 3);
    CHECK(d.primary_rows() == 2);
}

TEST_CASE("build_data_matrices: single row is the reversed window") {
    const auto x = white_noise(1, 20, 1000);
    const auto d = build_data_matrices(x, x, 1, 1, 8, 15);
    for (Eigen::Index j = 0; j < 8; ++j) CHECK(d.x1()(0, j) == x[15 - static_cast<std::size_t>(j)]);
}

TEST_CASE("build_data_matrices: Hankel structure at every interior entry") {
    const auto x1 = white_noise(2, 80, 1000);
    const auto x2 = white_noise(3, 80, 1000);
    const auto d = build_data_matrices(x1, x2, 4, 4, 50, 79);
    const auto ref = oracle::hankel(x1.samples(), 4, 50, 79);
    CHECK(d.x1() == ref);
    for (const MatrixXd* m : {&d.x1(), &d.x2()}) {
        for (Eigen::Index i = 0; i + 1 < m->rows(); ++i) {
            for (Eigen::Index j = 0; j + 1 < m->cols(); ++j) CHECK((*m)(i, j + 1) == (*m)(i + 1, j));
        }
    }
}

TEST_CASE("build_data_matrices: rejects insufficient history and bad shapes") {
    const auto x = white_noise(4, 30, 1000);
    CHECK_THROWS_AS(build_data_matrices(x, x, 4, 4, 20, 21), InvalidInput);
    CHECK_NOTHROW(build_data_matrices(x, x, 4, 4, 20, 22));
    CHECK_THROWS_AS(build_data_matrices(x, x, 4, 4, 3, 29), InvalidInput);
    CHECK_THROWS_AS(build_data_matrices(x, x, 0, 4, 10, 29), InvalidInput);
    CHECK_THROWS_AS(build_data_matrices(x, Signal(std::vector<double>(30, 0.0), 2000), 2, 2, 10, 29), InvalidInput);
    CHECK_THROWS_AS(DataMatrices(MatrixXd::Ones(2, 5), MatrixXd::Ones(2, 4), 1000), InvalidInput);
}

TEST_CASE("joint_autocorrelation: examples and triple-loop oracle") {
    const DataMatrices ones(MatrixXd::Ones(1, 4), MatrixXd::Ones(1, 4), 1000);
    CHECK(joint_autocorrelation(ones).r_x1()(0, 0) == 1.0);

    const auto x1 = white_noise(5, 120, 1000);
    const auto x2 = white_noise(6, 120, 1000);
    const auto d = build_data_matrices(x1, x2, 3, 5, 100, 119);
    const auto corr = joint_autocorrelation(d);
    const MatrixXd ref = oracle::triple_loop_gram(d.stacked());
    CHECK((corr.r_x() - ref).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(corr.r_x() == corr.r_x().transpose());
    CHECK(corr.r_x().diagonal().minCoeff() >= 0.0);
    CHECK(corr.r_x1() == corr.r_x().topLeftCorner(3, 3));
    CHECK(corr.r_x2() == corr.r_x().bottomRightCorner(5, 5));
    CHECK(corr.r_x1x2() == corr.r_x().topRightCorner(3, 5));
    CHECK(corr.dimension() == 8);
    CHECK_FALSE(corr.r_xe().has_value());

    const auto with_zero = joint_autocorrelation(d, sig(std::vector<double>(100, 0.0)));
    REQUIRE(with_zero.r_xe().has_value());
    CHECK(with_zero.r_xe()->isZero(0.0));
    CHECK_THROWS_AS(joint_autocorrelation(d, sig(std::vector<double>(99, 0.0))), InvalidInput);

    // r_xe pairs column j with the desired sample at time n - j.
    std::vector<double> desired(100);
    for (std::size_t t = 0; t < 100; ++t) desired[t] = x1[20 + t];  // d = x1, aligned with the window
    const auto with_d = joint_autocorrelation(d, sig(desired));
    for (Eigen::Index i = 0; i < 3; ++i) CHECK((*with_d.r_xe())(i) == doctest::Approx(corr.r_x()(0, i)).epsilon(1e-12));
}

TEST_CASE("projection_row_space: canonical rows") {
    MatrixXd x1(2, 3);
    x1 << 1, 0, 0, 0, 1, 0;
    const auto ps = projection_row_space(x1);
    MatrixXd expect = MatrixXd::Zero(3, 3);
    expect(0, 0) = expect(1, 1) = 1.0;
    CHECK((ps.p1 - expect).norm() <= 1e-12);
    CHECK((ps.p1 + ps.p2 - MatrixXd::Identity(3, 3)).norm() <= 1e-12);
    CHECK_FALSE(ps.schur_a.has_value());
}

TEST_CASE("projection_row_space: projector properties on random data") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto x = white_noise(200 + seed, 60, 1000);
        const MatrixXd x1 = oracle::hankel(x.samples(), 5, 40, 59);
        const auto ps = projection_row_space(x1);
        const double n = ps.p1.norm();
        CHECK((ps.p1 * ps.p1 - ps.p1).norm() <= 1e-9 * n);
        CHECK((ps.p1 - ps.p1.transpose()).norm() <= 1e-9 * n);
        CHECK((ps.p1 + ps.p2 - MatrixXd::Identity(40, 40)).cwiseAbs().maxCoeff() <= 1e-9);
        // P1 X1^T = X1^T: rows of X1 are fixed points.
        CHECK((ps.p1 * x1.transpose() - x1.transpose()).norm() <= 1e-9 * x1.norm());
    }
}

TEST_CASE("projection_row_space: reduced block spectrum and rank match the X2 P2 X2^T oracle") {
    const MatrixXd x1 = oracle::hankel(white_noise(300, 50, 1000).samples(), 4, 40, 49);
    const MatrixXd x2 = oracle::hankel(white_noise(301, 50, 1000).samples(), 3, 40, 49);
    const auto ps = projection_row_space(DataMatrices(x1, x2, 1000));
    REQUIRE(ps.reduced.has_value());
    REQUIRE(ps.schur_a.has_value());
    Eigen::EigenSolver<MatrixXd> es(*ps.reduced);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const auto lam = es.eigenvalues()(i);
        CHECK(std::abs(lam.imag()) <= 1e-9);
        CHECK(lam.real() >= -1e-9);
        CHECK(lam.real() <= 1.0 + 1e-9);
    }
    const MatrixXd p2 = MatrixXd::Identity(40, 40) - x1.transpose() * (x1 * x1.transpose()).inverse() * x1;
    CHECK(reduced_block_rank(ps) == oracle::svd_rank(x2 * p2 * x2.transpose(), 1e-10));
    // A = X2 P1 X2^T (X2 X2^T)^-1 by an explicit inverse.
    const MatrixXd a = x2 * (MatrixXd::Identity(40, 40) - p2) * x2.transpose() * (x2 * x2.transpose()).inverse();
    CHECK((a - *ps.schur_a).norm() <= 1e-9 * a.norm());
}

TEST_CASE("projection_row_space: pure sinusoid is a degenerate input") {
    std::vector<double> tone(200);
    for (std::size_t n = 0; n < tone.size(); ++n) tone[n] = std::sin(2.0 * std::numbers::pi * 0.1 * n);
    const MatrixXd x1 = oracle::hankel(tone, 6, 150, 199);
    CHECK_THROWS_AS(projection_row_space(x1), DegenerateInput);
    const auto s = sig(tone);
    CHECK_THROWS_AS(projection_row_space(build_data_matrices(s, s, 6, 6, 150, 199)), DegenerateInput);
    CHECK_THROWS_AS(reduced_block_rank(projection_row_space(MatrixXd::Identity(2, 3))), InvalidInput);
}

TEST_CASE("empirical_rank: duplicated blocks, Case 1, Case 3") {
    const auto x = white_noise(400, 400, 1000);
    const auto dup = empirical_rank(joint_autocorrelation(build_data_matrices(x, x, 5, 5, 300, 399)));
    CHECK(dup.rank == 5);
    CHECK(dup.deficiency == 5);
    CHECK(dup.dimension == 10);
    CHECK(std::is_sorted(dup.singular_values.rbegin(), dup.singular_values.rend()));

    const std::size_t L = 8, M = 4;
    const auto case1 = empirical_rank(joint_autocorrelation(control_data(401, oracle::random_vector(1, 3), L, M, 50 * (L + M))));
    CHECK(case1.rank == L);
    CHECK(case1.rank == oracle::svd_rank(control_data(401, oracle::random_vector(1, 3), L, M, 50 * (L + M)).stacked(),
                                         std::sqrt(1e-10)));

    const auto case3 =
        empirical_rank(joint_autocorrelation(control_data(402, taps_with_last(2, L + 1, 0.9), L, M, 50 * (L + M))));
    CHECK(case3.rank == L + M);
    CHECK(case3.rank + case3.deficiency == case3.dimension);

    CHECK_THROWS_AS(empirical_rank(joint_autocorrelation(build_data_matrices(x, x, 5, 5, 300, 399)), 0.0), InvalidInput);
    CHECK_THROWS_AS(empirical_rank(joint_autocorrelation(build_data_matrices(x, x, 5, 5, 300, 399)), 1.0), InvalidInput);
}

TEST_CASE("rank report CSV") {
    RankReport r;
    r.dimension = 2;
    r.rank = 1;
    r.deficiency = 1;
    r.singular_values = {2.0, 1e-12};
    r.predicted = CasePrediction{IdentifiabilityCase::Case2, false};
    std::ostringstream os;
    write_rank_report_csv(os, r);
    CHECK(os.str() ==
          "dimension,rank,deficiency,threshold\n2,1,1,1e-10\nsigma_1,2\nsigma_2,9.9999999999999998e-13\n"
          "predicted_case,Case2\npredicted_verdict,deficient\n");
}

TEST_CASE("build_w_matrix: shifted rows") {
    const auto w = build_w_matrix(std::vector<double>{2.0, 3.0}, 2);
    MatrixXd expect(2, 3);
    expect << 2, 3, 0, 0, 2, 3;
    CHECK(w == expect);
    const auto one = build_w_matrix(ImpulseResponse({1.0, -1.0, 4.0}, 1000), 1);
    CHECK(one.rows() == 1);
    CHECK(one(0, 2) == 4.0);
    CHECK_THROWS_AS(build_w_matrix(std::vector<double>{}, 2), InvalidInput);
}

TEST_CASE("build_w_matrix reproduces fir_filter through the stacked window") {
    const auto w = oracle::random_vector(500, 5);
    const std::size_t M = 4, N = 5;
    const auto x = white_noise(501, 60, 1000);
    const auto x2 = fir_filter(ImpulseResponse(w, 1000), x);
    const MatrixXd W = build_w_matrix(w, M);
    for (std::size_t n = N + M; n < 60; ++n) {
        Eigen::VectorXd window(static_cast<Eigen::Index>(N + M - 1));
        for (std::size_t k = 0; k < N + M - 1; ++k) window(static_cast<Eigen::Index>(k)) = x[n - k];
        const Eigen::VectorXd hist = W * window;
        for (std::size_t i = 0; i < M; ++i) CHECK(std::abs(hist(static_cast<Eigen::Index>(i)) - x2[n - i]) <= 1e-12);
    }
}

TEST_CASE("predict_case examples") {
    const auto a = predict_case(24, 48, 48);
    CHECK(a.label == IdentifiabilityCase::Case2);
    CHECK_FALSE(a.full_rank);
    std::vector<double> w49(49, 0.0);
    w49.front() = w49.back() = 1.0;
    const auto c = predict_case(49, 48, 48, w49);
    CHECK(c.label == IdentifiabilityCase::Case3);
    CHECK(c.full_rank);
    CHECK(case_label(c) == "Case3");
    const auto one = predict_case(3, 8, 4);
    CHECK(one.label == IdentifiabilityCase::Case1);
    CHECK_FALSE(one.full_rank);
    CHECK(predict_case(5, 8, 4).label == IdentifiabilityCase::Case1);  // N + M - 1 = L
    CHECK(predict_case(6, 8, 4).label == IdentifiabilityCase::Case2);
    CHECK(predict_case(48, 48, 48).label == IdentifiabilityCase::Case2);
    CHECK_THROWS_AS(predict_case(3, 2, 2, std::vector<double>{1.0}), InvalidInput);
}

TEST_CASE("predict_case: zero tail fails the Case 3 condition, OMA is Case 3") {
    std::vector<double> w = {1.0, 0.5, 0.0, 0.0};
    const auto p = predict_case(4, 2, 3, w);
    CHECK(p.label == IdentifiabilityCase::Case3);
    CHECK(p.tail_condition_failed);
    CHECK_FALSE(p.full_rank);
    CHECK(case_label(p) == "Case3-condition-failed");
    CHECK(verdict_name(p) == "deficient");

    const std::size_t L = 5, M = 4;
    std::vector<double> oma(L + 1, 0.0);
    oma.back() = 1.0;
    const auto q = predict_case(L + 1, L, M, oma);
    CHECK(q.label == IdentifiabilityCase::Case3);
    CHECK(q.full_rank);
    CHECK(empirical_rank(joint_autocorrelation(control_data(600, oma, L, M, 50 * (L + M)))).rank == L + M);
}

TEST_CASE("deficient predictions carry a null-space certificate") {
    for (const auto& [N, L, M] : {std::tuple{2ul, 6ul, 3ul}, std::tuple{4ul, 6ul, 5ul}, std::tuple{6ul, 6ul, 4ul}}) {
        CAPTURE(N);
        const auto w = oracle::random_vector(700 + N, N);
        REQUIRE_FALSE(predict_case(N, L, M, w).full_rank);
        const auto d = control_data(701, w, L, M, 100 * (L + M));
        const auto ps = projection_row_space(d.x1());
        const auto sv = oracle::svd_values(d.x2() * ps.p2 * d.x2().transpose());
        const double scale = oracle::svd_values(d.x2() * d.x2().transpose())(0);
        CHECK(sv(sv.size() - 1) <= 1e-8 * scale);
    }
}

TEST_CASE("make_selectors") {
    const auto s = make_selectors(3, 4, 2, 6);
    CHECK(s.k == 6);
    CHECK(s.g1 == MatrixXd::Identity(4, 6));
    CHECK(s.g2 == MatrixXd::Identity(4, 6));
    CHECK_THROWS_AS(make_selectors(3, 4, 2, 3), InvalidInput);
}

TEST_CASE("tv_identifiability") {
    const ImpulseResponse a({0.0, 1.0}, 1000), b({1.0, 0.0}, 1000);
    const auto t = tv_identifiability(a, b, 48);
    CHECK(t.identifiable);
    CHECK(t.rank == 48);
    CHECK(t.dimension == 48);

    const auto same = tv_identifiability(a, a, 48);
    CHECK_FALSE(same.identifiable);
    CHECK(same.rank == 0);

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto wa = oracle::random_vector(800 + seed, 5);
        const auto wb = oracle::random_vector(900 + seed, 5);
        const auto r = tv_identifiability(ImpulseResponse(wa, 1000), ImpulseResponse(wb, 1000), 6);
        MatrixXd diff = MatrixXd::Zero(6, 10);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t k = 0; k < 5; ++k) diff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + k)) = wa[k] - wb[k];
        const auto oracle_rank = oracle::svd_rank(diff, 1e-10);
        CHECK(r.rank == oracle_rank);
        CHECK(r.identifiable == (oracle_rank == 6));
    }

    // Unequal lengths are zero padded.
    const auto pad = tv_identifiability(ImpulseResponse({1.0}, 1000), ImpulseResponse({1.0, 0.0, 0.0}, 1000), 3);
    CHECK(pad.rank == 0);
}
