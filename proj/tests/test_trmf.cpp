#include "scenarios.hpp"
#include "support.hpp"
#include "trmf_oracles.hpp"

#include <hierfcst/error.hpp>
#include <hierfcst/trmf.hpp>

#include <doctest.h>

#include <cmath>

using namespace hierfcst;
using namespace hierfcst::trmf;
using namespace trmf_oracles;

TEST_CASE("config validation and parameter count") {
    TrmfConfig c;
    CHECK_NOTHROW(c.validate());
    c.rank = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.ar_order = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.lambda_ar = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    Rng rng(1);
    const Eigen::MatrixXd Y = testsupport::random_matrix(rng, 30, 7);
    TrmfConfig cfg;
    cfg.rank = 3;
    cfg.ar_order = 2;
    cfg.max_sweeps = 3;
    const auto m = factorize(Y, Mask::Constant(30, 7, true), cfg);
    CHECK(m.parameter_count() == 30 * 3 + 3 * 7 + 3 * 2);
    CHECK(m.Z.cols() == m.F.rows());
    CHECK(m.F.rows() == m.phi.rows());
}

TEST_CASE("input checks") {
    Rng rng(2);
    const Eigen::MatrixXd Y = testsupport::random_matrix(rng, 20, 10);
    TrmfConfig cfg;
    cfg.rank = 2;
    cfg.max_sweeps = 2;
    const Mask sparse = random_mask(rng, 20, 10, 0.05);
    CHECK(static_cast<double>(sparse.count()) / 200.0 < 0.25);
    CHECK_THROWS_AS(factorize(Y, sparse, cfg), DensityError);
    cfg.allow_sparse = true;
    const auto m = factorize(Y, sparse, cfg);
    CHECK_FALSE(m.warnings.empty());

    Eigen::MatrixXd bad = Y;
    bad(3, 3) = std::nan("");
    CHECK_THROWS_AS(factorize(bad, Mask::Constant(20, 10, true), cfg), DomainError);
    // Unobserved non-finite cells are ignored.
    Mask mask = Mask::Constant(20, 10, true);
    mask(3, 3) = false;
    CHECK_NOTHROW(factorize(bad, mask, cfg));

    cfg.ar_order = 25;
    CHECK_THROWS_AS(factorize(Y, mask, cfg), Error);
    CHECK_THROWS_AS(factorize(Y, Mask::Constant(3, 3, true), TrmfConfig{}), DimensionError);
}

TEST_CASE("objective never increases across sweeps") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto T = 20 + static_cast<Eigen::Index>(rng.below(30));
        const auto n = 5 + static_cast<Eigen::Index>(rng.below(20));
        const Eigen::MatrixXd Y = testsupport::random_matrix(rng, T, n);
        TrmfConfig cfg;
        cfg.rank = 1 + static_cast<int>(rng.below(4));
        cfg.ar_order = 1 + static_cast<int>(rng.below(3));
        cfg.lambda_f = rng.uniform(1e-4, 1.0);
        cfg.lambda_z = rng.uniform(1e-4, 1.0);
        cfg.lambda_ar = rng.uniform(0.0, 5.0);
        cfg.max_sweeps = 50;
        cfg.tol = 0.0;
        cfg.seed = trial;
        const auto m = factorize(Y, random_mask(rng, T, n, rng.uniform(0.3, 1.0)), cfg);
        REQUIRE(m.objective_trace.size() >= 2);
        for (std::size_t k = 1; k < m.objective_trace.size(); ++k) {
            CHECK(std::isfinite(m.objective_trace[k]));
            CHECK(m.objective_trace[k] <= m.objective_trace[k - 1] * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("rank-1 data is recovered exactly") {
    const int T = 40;
    const int n = 15;
    Eigen::VectorXd z(T);
    Eigen::RowVectorXd f(n);
    for (int t = 0; t < T; ++t) {
        z(t) = std::cos(0.3 * t) + 0.1 * t;
    }
    for (int i = 0; i < n; ++i) {
        f(i) = 1.0 + 0.2 * i;
    }
    const Eigen::MatrixXd Y = z * f;
    TrmfConfig cfg;
    cfg.rank = 1;
    cfg.ar_order = 1;
    cfg.lambda_f = 1e-12;
    cfg.lambda_z = 1e-12;
    cfg.lambda_ar = 1e-12;
    cfg.max_sweeps = 2000;
    cfg.tol = 1e-15;
    const auto m = factorize(Y, Mask::Constant(T, n, true), cfg);
    const double rmse = std::sqrt((Y - m.Z * m.F).squaredNorm() / (T * n));
    CHECK(rmse <= 1e-6);
}

TEST_CASE("dominant factor ridge drives the reconstruction to zero") {
    Rng rng(5);
    const Eigen::MatrixXd Y = testsupport::random_matrix(rng, 25, 8);
    TrmfConfig cfg;
    cfg.rank = 2;
    cfg.lambda_z = 1e8;
    cfg.lambda_ar = 0.0;
    cfg.max_sweeps = 20;
    const auto m = factorize(Y, Mask::Constant(25, 8, true), cfg);
    CHECK(m.Z.cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((m.Z * m.F).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("block updates match gradient-descent oracles") {
    Rng rng(6);
    for (int trial = 0; trial < 4; ++trial) {
        const Eigen::Index T = 12;
        const Eigen::Index n = 6;
        const int d = 2;
        const int p = 2;
        const Eigen::MatrixXd Y = testsupport::random_matrix(rng, T, n);
        const Mask mask = random_mask(rng, T, n, 0.6);
        const auto start = random_state(rng, T, n, d, p, mask);

        auto exact = start;
        update_loadings(exact, Y);
        auto oracle = start;
        descend(oracle, Y, [](FactorModel& m) -> Eigen::MatrixXd& { return m.F; },
                [&](const FactorModel& m) { return grad_F(m, Y); });
        CHECK((exact.F - oracle.F).cwiseAbs().maxCoeff() <= 1e-6);

        exact = start;
        update_factors(exact, Y);
        oracle = start;
        descend(oracle, Y, [](FactorModel& m) -> Eigen::MatrixXd& { return m.Z; },
                [&](const FactorModel& m) { return grad_Z(m, Y); });
        CHECK((exact.Z - oracle.Z).cwiseAbs().maxCoeff() <= 1e-6);

        exact = start;
        update_ar(exact);
        oracle = start;
        descend(oracle, Y, [](FactorModel& m) -> Eigen::MatrixXd& { return m.phi; },
                [&](const FactorModel& m) { return grad_phi(m); });
        CHECK((exact.phi - oracle.phi).cwiseAbs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("analytic gradient agrees with finite differences") {
    Rng rng(7);
    const Eigen::MatrixXd Y = testsupport::random_matrix(rng, 10, 5);
    const Mask mask = random_mask(rng, 10, 5, 0.7);
    auto m = random_state(rng, 10, 5, 2, 2, mask);
    const auto g = gradient(m, Y);
    CHECK((g.F - grad_F(m, Y)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((g.Z - grad_Z(m, Y)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((g.phi - grad_phi(m)).cwiseAbs().maxCoeff() <= 1e-10);

    const double h = 1e-6;
    const auto fd = [&](Eigen::MatrixXd& block, Eigen::Index r, Eigen::Index c) {
        const double saved = block(r, c);
        block(r, c) = saved + h;
        const double up = objective(m, Y);
        block(r, c) = saved - h;
        const double down = objective(m, Y);
        block(r, c) = saved;
        return (up - down) / (2.0 * h);
    };
    for (Eigen::Index r = 0; r < m.Z.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.Z.cols(); ++c) {
            CHECK(std::abs(fd(m.Z, r, c) - g.Z(r, c)) <= 1e-6);
        }
    }
    for (Eigen::Index r = 0; r < m.F.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.F.cols(); ++c) {
            CHECK(std::abs(fd(m.F, r, c) - g.F(r, c)) <= 1e-6);
        }
    }
    for (Eigen::Index r = 0; r < m.phi.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.phi.cols(); ++c) {
            CHECK(std::abs(fd(m.phi, r, c) - g.phi(r, c)) <= 1e-6);
        }
    }
}

TEST_CASE("converged fit is stationary in every block") {
    Rng rng(8);
    const auto panel = scenarios::ar_factor_panel(8, 30, 12, 2, 0.7);
    TrmfConfig cfg;
    cfg.rank = 2;
    cfg.ar_order = 2;
    cfg.lambda_f = 0.05;
    cfg.lambda_z = 0.05;
    cfg.lambda_ar = 0.5;
    cfg.max_sweeps = 20000;
    cfg.tol = 1e-15;
    const auto m = factorize(panel.Y, panel.observed, cfg);
    const double scale = 1e-4 * (1.0 + std::abs(objective(m, panel.Y)));
    const auto g = gradient(m, panel.Y);
    CHECK(g.Z.norm() <= scale);
    CHECK(g.F.norm() <= scale);
    CHECK(g.phi.norm() <= scale);
}

TEST_CASE("AR(1) forecast recursion") {
    FactorModel m;
    m.Z = Eigen::MatrixXd::Constant(3, 1, 1.0);
    m.F = Eigen::MatrixXd::Constant(1, 1, 2.0);
    m.phi = Eigen::MatrixXd::Constant(1, 1, 0.5);
    const auto zf = forecast_factors(m, 3);
    CHECK(zf(0, 0) == doctest::Approx(0.5));
    CHECK(zf(1, 0) == doctest::Approx(0.25));
    CHECK(zf(2, 0) == doctest::Approx(0.125));
    const auto y = forecast(m, 3);
    CHECK(y(0, 0) == doctest::Approx(1.0));
    CHECK(y(1, 0) == doctest::Approx(0.5));
    CHECK(y(2, 0) == doctest::Approx(0.25));
    CHECK_FALSE(has_explosive_factors(m));
}

TEST_CASE("one-step forecast is the recursion base case") {
    Rng rng(9);
    FactorModel m;
    m.Z = testsupport::random_matrix(rng, 10, 3);
    m.F = testsupport::random_matrix(rng, 3, 4);
    m.phi = testsupport::random_matrix(rng, 3, 2, 0.4);
    Eigen::RowVectorXd z(3);
    for (int j = 0; j < 3; ++j) {
        z(j) = m.phi(j, 0) * m.Z(9, j) + m.phi(j, 1) * m.Z(8, j);
    }
    CHECK((forecast(m, 1).row(0) - z * m.F).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("stationary dynamics level off to zero") {
    FactorModel m;
    m.Z = Eigen::MatrixXd::Constant(4, 2, 3.0);
    m.F = Eigen::MatrixXd::Ones(2, 3);
    m.phi.resize(2, 2);
    m.phi << 1.2, -0.5, 0.3, 0.2;
    CHECK_FALSE(has_explosive_factors(m));
    const auto y = forecast(m, 400);
    CHECK(y.row(399).cwiseAbs().maxCoeff() <= 1e-8);

    m.phi << 1.1, 0.0, 0.3, 0.2;
    CHECK(has_explosive_factors(m));
}

TEST_CASE("rolling refit") {
    SUBCASE("constant stream forecasts the constant") {
        const Eigen::MatrixXd Y = Eigen::MatrixXd::Constant(30, 6, 5.0);
        TrmfConfig cfg;
        cfg.rank = 1;
        cfg.ar_order = 1;
        cfg.lambda_f = 1e-8;
        cfg.lambda_z = 1e-8;
        cfg.lambda_ar = 1.0;
        cfg.max_sweeps = 500;
        cfg.tol = 1e-14;
        const auto r = rolling_refit(Y.topRows(24), Mask::Constant(24, 6, true), Y.bottomRows(6),
                                     Mask::Constant(6, 6, true), cfg);
        REQUIRE(r.forecasts.rows() == 6);
        CHECK((r.forecasts.array() - 5.0).abs().maxCoeff() <= 1e-3);
        CHECK(r.objectives.size() == 7);
    }
    SUBCASE("empty stream") {
        Rng rng(10);
        const Eigen::MatrixXd Y = testsupport::random_matrix(rng, 20, 4);
        TrmfConfig cfg;
        cfg.rank = 1;
        cfg.max_sweeps = 5;
        const auto r = rolling_refit(Y, Mask::Constant(20, 4, true), Eigen::MatrixXd(0, 4),
                                     Mask(0, 4), cfg);
        CHECK(r.forecasts.rows() == 0);
        CHECK(r.objectives.size() == 1);
    }
    SUBCASE("sliding window keeps the width") {
        Rng rng(11);
        const Eigen::MatrixXd Y = testsupport::random_matrix(rng, 30, 4);
        TrmfConfig cfg;
        cfg.rank = 1;
        cfg.max_sweeps = 5;
        const auto r = rolling_refit(Y.topRows(25), Mask::Constant(25, 4, true), Y.bottomRows(5),
                                     Mask::Constant(5, 4, true), cfg, WindowPolicy::sliding(20));
        CHECK(r.last.Z.rows() == 20);
    }
}

TEST_CASE("warm and cold starts reach the same objective") {
    const int T = 40;
    const int n = 10;
    Eigen::VectorXd z(T);
    Eigen::RowVectorXd f(n);
    for (int t = 0; t < T; ++t) {
        z(t) = std::pow(0.97, t) * 3.0;
    }
    for (int i = 0; i < n; ++i) {
        f(i) = 0.5 + 0.1 * i;
    }
    const Eigen::MatrixXd Y = z * f;
    TrmfConfig cfg;
    cfg.rank = 1;
    cfg.ar_order = 1;
    cfg.lambda_f = 1e-3;
    cfg.lambda_z = 1e-3;
    cfg.lambda_ar = 1.0;
    cfg.max_sweeps = 5000;
    cfg.tol = 1e-15;
    const Mask full = Mask::Constant(T, n, true);
    const auto cold = factorize(Y, full, cfg);

    auto warm = factorize(Y.topRows(T - 1), Mask::Constant(T - 1, n, true), cfg);
    const Eigen::MatrixXd next = forecast_factors(warm, 1);
    warm.Z.conservativeResize(T, Eigen::NoChange);
    warm.Z.row(T - 1) = next.row(0);
    const auto refit = factorize(Y, full, cfg, warm);
    const double a = cold.objective_trace.back();
    const double b = refit.objective_trace.back();
    CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(a)));
}

TEST_CASE("warm start checks dimensions and seeds are deterministic") {
    Rng rng(12);
    const Eigen::MatrixXd Y = testsupport::random_matrix(rng, 20, 5);
    TrmfConfig cfg;
    cfg.rank = 2;
    cfg.max_sweeps = 10;
    const Mask full = Mask::Constant(20, 5, true);
    const auto a = factorize(Y, full, cfg);
    const auto b = factorize(Y, full, cfg);
    CHECK(a.Z == b.Z);
    CHECK(a.F == b.F);
    CHECK(a.phi == b.phi);
    auto bad = a;
    bad.Z.conservativeResize(19, Eigen::NoChange);
    CHECK_THROWS_AS(factorize(Y, full, cfg, bad), DimensionError);
}
