#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "pft/embedding.hpp"
#include "pft/evolve.hpp"
#include "pft/field_model.hpp"
#include "pft/lattice.hpp"

namespace testutil {

inline pft::LatticeSpec periodic(int n, double dx, double m) { return {n, dx, m, pft::Boundary::Periodic}; }
inline pft::LatticeSpec fixed(int n, double dx, double m) { return {n, dx, m, pft::Boundary::FixedZero}; }

inline pft::Embedding bump(const pft::LatticeSpec& s, double t0, double amp, double width) {
    pft::Embedding f = pft::Embedding::flat(s, t0);
    Eigen::VectorXd t = f.t().array() + amp * (-(s.labels().array() / width).square()).exp();
    return pft::Embedding(s, t, f.x(), f.wrap_t(), f.wrap_x());
}

inline pft::Embedding tilted(const pft::LatticeSpec& s, double lambda, double t0 = 0.0) {
    Eigen::VectorXd x = s.labels();
    Eigen::VectorXd t = (lambda * x.array() + t0).matrix();
    return pft::Embedding(s, t, x, lambda * s.length(), s.length());
}

inline Eigen::MatrixXd random_symmetric(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = g(rng);
    Eigen::MatrixXd s = 0.5 * (a + a.transpose());
    return s / s.norm();
}

inline Eigen::VectorXd packet(const pft::LatticeSpec& s, double amp, double width, double centre = 0.0) {
    return amp * (-((s.labels().array() - centre) / width).square()).exp();
}

template <typename Derived>
double max_abs(const Eigen::DenseBase<Derived>& m) {
    return m.size() ? m.derived().array().abs().maxCoeff() : 0.0;
}

}  // namespace testutil
