#include "rfse/metrics.hpp"

#include "rfse/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace rfse {

double ospa_from_matrix(const Eigen::MatrixXd& base, double c, double p) {
    if (c <= 0.0 || p < 1.0) throw std::invalid_argument("ospa: need c > 0 and p >= 1");
    const auto m = static_cast<int>(base.rows());
    const auto n = static_cast<int>(base.cols());
    if (m == 0 && n == 0) return 0.0;
    const int lo = std::min(m, n), hi = std::max(m, n);
    if (lo == 0) return c;

    Eigen::MatrixXd cut = m <= n ? base : Eigen::MatrixXd(base.transpose());
    for (int i = 0; i < cut.rows(); ++i)
        for (int j = 0; j < cut.cols(); ++j)
            cut(i, j) = std::pow(std::min(cut(i, j), c), p);

    const double match_cost = hungarian(cut).cost;
    const double total = match_cost + std::pow(c, p) * (hi - lo);
    return std::pow(total / hi, 1.0 / p);
}

double gaussian_wasserstein(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    auto sqrt_psd = [](const Eigen::MatrixXd& M) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        return Eigen::MatrixXd(es.eigenvectors() * ev.asDiagonal() *
                               es.eigenvectors().transpose());
    };
    const Eigen::MatrixXd As = sqrt_psd(A);
    const Eigen::MatrixXd inner = sqrt_psd(As * B * As);
    const double tr = (A + B - 2.0 * inner).trace();
    return std::sqrt(std::max(tr, 0.0));
}

double extended_base_distance(const ExtendedState& a, const ExtendedState& b,
                              const ExtendedDistanceWeights& w) {
    return w.position * (a.position - b.position).norm() +
           w.extent * gaussian_wasserstein(a.extent, b.extent) +
           w.rate * std::abs(a.rate - b.rate);
}

SeriesStats aggregate(const std::vector<std::vector<double>>& runs) {
    if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
    const std::size_t len = runs.front().size();
    for (const auto& r : runs)
        if (r.size() != len) throw std::invalid_argument("aggregate: length mismatch across runs");

    SeriesStats out;
    out.mean.assign(len, 0.0);
    out.stddev.assign(len, 0.0);
    const double n = static_cast<double>(runs.size());
    for (std::size_t i = 0; i < len; ++i) {
        double acc = 0.0;
        for (const auto& r : runs) acc += r[i];
        out.mean[i] = acc / n;
        double sq = 0.0;
        for (const auto& r : runs) sq += (r[i] - out.mean[i]) * (r[i] - out.mean[i]);
        out.stddev[i] = std::sqrt(sq / n);
    }
    return out;
}

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (columns.size() != header.size())
        throw std::invalid_argument("write_csv: header/column count mismatch");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) os << ',';
        os << csv_escape(header[i]);
    }
    os << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& col : columns)
        if (col.size() != rows) throw std::invalid_argument("write_csv: ragged columns");
    char buf[40];
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) os << ',';
            std::snprintf(buf, sizeof buf, "%.17g", columns[i][r]);
            os << buf;
        }
        os << '\n';
    }
}

}  // namespace rfse
