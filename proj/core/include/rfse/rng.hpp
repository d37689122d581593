#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace rfse {

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Combine a base seed with stream tags so that distinct tags yield
/// statistically independent substreams. Changing the draws consumed by
/// one substream leaves every other substream untouched.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = mix64(base);
    for (std::uint64_t t : tags) s = mix64(s ^ (t + 0x9e3779b97f4a7c15ULL));
    return s;
}

/// Deterministic random source. All transforms are pinned in this file so
/// a given seed reproduces the same draws on any build of this code base.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    /// Poisson count by Knuth's product method; fine for the rates used here.
    int poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        const double limit = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    Eigen::VectorXd normal_vec(int n) {
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z(i) = normal();
        return z;
    }

    /// Draw from N(mean, cov); cov must be symmetric positive definite.
    Eigen::VectorXd mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        return mean + llt.matrixL() * normal_vec(static_cast<int>(mean.size()));
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace rfse
