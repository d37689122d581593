#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace rfse {

/// Optimal sub-pattern assignment distance between two finite sets, with a
/// pluggable base distance cut at c.
template <typename T>
using BaseDistance = std::function<double(const T&, const T&)>;

double ospa_from_matrix(const Eigen::MatrixXd& base, double c, double p);

template <typename T>
double ospa(const std::vector<T>& X, const std::vector<T>& Y, double c, double p,
            const BaseDistance<T>& base) {
    Eigen::MatrixXd D(X.size(), Y.size());
    for (std::size_t i = 0; i < X.size(); ++i)
        for (std::size_t j = 0; j < Y.size(); ++j)
            D(static_cast<int>(i), static_cast<int>(j)) = base(X[i], Y[j]);
    return ospa_from_matrix(D, c, p);
}

/// Gaussian-Wasserstein distance between positive-definite extents:
/// sqrt(tr(A + B - 2 (A^1/2 B A^1/2)^1/2)).
double gaussian_wasserstein(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

struct ExtendedState {
    Eigen::VectorXd position;
    Eigen::MatrixXd extent;
    double rate = 0.0;
};

struct ExtendedDistanceWeights {
    double position = 1.0;
    double extent = 1.0;
    double rate = 0.1;
};

/// Weighted sum of centroid distance, Gaussian-Wasserstein extent distance
/// and absolute rate gap. Documented substitute for rate-and-extent-aware
/// set evaluation.
double extended_base_distance(const ExtendedState& a, const ExtendedState& b,
                              const ExtendedDistanceWeights& w = {});

struct SeriesStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

/// Elementwise mean and standard deviation across runs of equal length.
SeriesStats aggregate(const std::vector<std::vector<double>>& runs);

/// RFC-4180 CSV writer: quotes only when needed, LF line endings.
void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

}  // namespace rfse
