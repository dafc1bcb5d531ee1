#pragma once

// Hand-rolled generators and small numerical oracles shared by the tests.

#include <hierfcst/dataset.hpp>
#include <hierfcst/rng.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace testsupport {

inline Eigen::MatrixXd random_matrix(hierfcst::Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                     double sd = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            m(i, j) = rng.normal(0.0, sd);
        }
    }
    return m;
}

inline std::vector<double> random_nonnegative(hierfcst::Rng& rng, std::size_t n, double hi = 10.0,
                                              double zero_share = 0.0) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = rng.bernoulli(zero_share) ? 0.0 : rng.uniform(0.0, hi);
    }
    return v;
}

//! Plain gradient descent with a fixed step until the gradient norm is tiny.
inline Eigen::VectorXd gradient_descent(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad, Eigen::VectorXd x,
    double step, int max_iter = 2000000, double tol = 1e-12) {
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd g = grad(x);
        if (g.norm() < tol) {
            break;
        }
        x -= step * g;
    }
    return x;
}

//! Largest singular value squared of X, a safe bound for step sizes.
inline double gram_norm(const Eigen::MatrixXd& X) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X.transpose() * X);
    return es.eigenvalues().maxCoeff();
}

//! 1 - |cos| between two directions.
inline double angular_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return 1.0 - std::abs(a.dot(b)) / (a.norm() * b.norm());
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("hierfcst_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

//! Tensor whose q^h values come from `value(item, t, h)`, all observed.
inline hierfcst::dataset::PreorderTensor make_tensor(
    std::size_t items, int periods, int leads,
    const std::function<double(std::size_t, int, int)>& value) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < items; ++i) {
        ids.push_back("item" + std::to_string(i));
    }
    hierfcst::dataset::PreorderTensor tensor(ids, periods, leads);
    for (std::size_t i = 0; i < items; ++i) {
        for (int t = 0; t < periods; ++t) {
            for (int h = 0; h < leads; ++h) {
                tensor.set(i, t, h, value(i, t, h));
            }
        }
    }
    return tensor;
}

} // namespace testsupport
