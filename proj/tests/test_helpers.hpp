#pragma once

#include "rfse/ggiw.hpp"
#include "rfse/likelihood.hpp"
#include "rfse/rng.hpp"

#include <vector>

namespace rfse::test {

/// A well-conditioned 2-D GGIW with the benchmark prior values.
inline GGIWParams default_ggiw(int s = 3, int d = 2) {
    GGIWParams p;
    p.alpha = 10.0;
    p.beta = 1.0;
    p.m = Eigen::VectorXd::Zero(s * d);
    p.P = Eigen::MatrixXd::Identity(s, s);
    p.P(0, 0) = 100.0;
    p.P(1, 1) = 6.25;
    p.v = 10.0;
    p.V = 100.0 * Eigen::MatrixXd::Identity(d, d);
    return p;
}

inline GGIWParams random_ggiw(Rng& rng, int s = 3, int d = 2) {
    GGIWParams p;
    p.alpha = rng.uniform(1.0, 30.0);
    p.beta = rng.uniform(0.5, 3.0);
    p.m = 50.0 * rng.normal_vec(s * d);
    Eigen::MatrixXd A(s, s);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) A(i, j) = rng.normal();
    p.P = A * A.transpose() + Eigen::MatrixXd::Identity(s, s);
    p.v = rng.uniform(2.0 * d + 3.0, 30.0);
    Eigen::MatrixXd B(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) B(i, j) = rng.normal();
    p.V = 20.0 * (B * B.transpose()) + 10.0 * Eigen::MatrixXd::Identity(d, d);
    return p;
}

inline ClutterModel unit_intensity_clutter(int d = 2) {
    // kappa(z) == 1 inside: lambda equal to the box volume.
    ClutterModel c;
    c.lo = Eigen::VectorXd::Constant(d, -200.0);
    c.hi = Eigen::VectorXd::Constant(d, 200.0);
    c.lambda = c.volume();
    return c;
}

inline ClutterModel default_clutter(double lambda = 10.0, double half = 1000.0, int d = 2) {
    ClutterModel c;
    c.lo = Eigen::VectorXd::Constant(d, -half);
    c.hi = Eigen::VectorXd::Constant(d, half);
    c.lambda = lambda;
    return c;
}

inline std::vector<Eigen::VectorXd> cluster_at(Rng& rng, const Eigen::VectorXd& center, int n,
                                               double sigma = 3.0) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i)
        out.push_back(center + sigma * rng.normal_vec(static_cast<int>(center.size())));
    return out;
}

}  // namespace rfse::test
