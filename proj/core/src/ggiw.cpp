#include "rfse/ggiw.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rfse {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void MotionModel::validate() const {
    require(F.rows() == F.cols() && F.rows() >= 1, "MotionModel: F must be square");
    require(Q.rows() == F.rows() && Q.cols() == F.cols(), "MotionModel: Q must match F");
    require(mu > 1.0, "MotionModel: mu must exceed 1");
    require(tau > 0.0, "MotionModel: tau must be positive");
    require(T > 0.0, "MotionModel: T must be positive");
}

MotionModel MotionModel::decaying_acceleration(double T, double theta, double sigma_acc,
                                      double mu, double tau) {
    MotionModel m;
    m.F.setZero(3, 3);
    m.F << 1.0, T, 0.5 * T * T,
           0.0, 1.0, T,
           0.0, 0.0, std::exp(-T / theta);
    m.Q.setZero(3, 3);
    m.Q(2, 2) = sigma_acc * sigma_acc * (1.0 - std::exp(-2.0 * T / theta));
    m.T = T;
    m.mu = mu;
    m.tau = tau;
    return m;
}

MotionModel MotionModel::constant_velocity(double T, double sigma_acc, double mu, double tau) {
    MotionModel m;
    m.F.setZero(2, 2);
    m.F << 1.0, T,
           0.0, 1.0;
    const double s2 = sigma_acc * sigma_acc;
    m.Q.setZero(2, 2);
    m.Q << 0.25 * T * T * T * T * s2, 0.5 * T * T * T * s2,
           0.5 * T * T * T * s2, T * T * s2;
    m.T = T;
    m.mu = mu;
    m.tau = tau;
    return m;
}

void GGIWParams::validate() const {
    require(alpha > 0.0, "GGIWParams: alpha must be positive");
    require(beta > 0.0, "GGIWParams: beta must be positive");
    const int d = extent_dim();
    require(d >= 1, "GGIWParams: V must be at least 1x1");
    require(V.rows() == V.cols(), "GGIWParams: V must be square");
    require(v > 2.0 * d, "GGIWParams: v must exceed 2d");
    require(P.rows() == P.cols() && P.rows() >= 1, "GGIWParams: P must be square");
    require(m.size() == P.rows() * d, "GGIWParams: len(m) must equal s*d");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V);
    require(es.eigenvalues().minCoeff() > 0.0, "GGIWParams: V must be positive definite");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ep(P);
    require(ep.eigenvalues().minCoeff() >= -1e-9 * std::max(1.0, ep.eigenvalues().maxCoeff()),
            "GGIWParams: P must be positive semidefinite");
}

Eigen::VectorXd kron_apply(const Eigen::MatrixXd& F, const Eigen::VectorXd& m, int d) {
    const int s = static_cast<int>(F.cols());
    if (m.size() != static_cast<Eigen::Index>(s) * d)
        throw std::invalid_argument("kron_apply: vector length must be s*d");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(F.rows() * d);
    for (int i = 0; i < F.rows(); ++i)
        for (int j = 0; j < s; ++j)
            if (F(i, j) != 0.0) out.segment(i * d, d) += F(i, j) * m.segment(j * d, d);
    return out;
}

Eigen::VectorXd observe(const Eigen::RowVectorXd& H, const Eigen::VectorXd& m, int d) {
    return kron_apply(H, m, d);
}

GGIWParams predict_ggiw(const GGIWParams& prior, const MotionModel& model) {
    prior.validate();
    model.validate();
    const int d = prior.extent_dim();
    if (model.order() != prior.motion_order())
        throw std::invalid_argument("predict_ggiw: motion model order does not match state");

    GGIWParams out;
    out.alpha = prior.alpha / model.mu;
    out.beta = prior.beta / model.mu;
    out.m = kron_apply(model.F, prior.m, d);
    out.P = model.F * prior.P * model.F.transpose() + model.Q;

    double v_next = std::exp(-model.T / model.tau) * prior.v;
    const double floor = 2.0 * d + 1e-6;
    if (v_next <= 2.0 * d) v_next = floor;
    out.v = v_next;
    out.V = ((v_next - d - 1.0) / (prior.v - d - 1.0)) * prior.V;
    return out;
}

GGIWUpdate update_ggiw(const GGIWParams& prior, const std::vector<Eigen::VectorXd>& W,
                       const Eigen::RowVectorXd& H) {
    prior.validate();
    const int d = prior.extent_dim();
    const int s = prior.motion_order();
    const auto n = static_cast<int>(W.size());
    if (n < 1) throw std::invalid_argument("update_ggiw: measurement group must be non-empty");
    if (H.size() != s) throw std::invalid_argument("update_ggiw: H must have one entry per motion block");
    for (const auto& w : W)
        if (w.size() != d) throw std::invalid_argument("update_ggiw: measurement dimension mismatch");

    Eigen::VectorXd wbar = Eigen::VectorXd::Zero(d);
    for (const auto& w : W) wbar += w;
    wbar /= static_cast<double>(n);

    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
    for (const auto& w : W) {
        const Eigen::VectorXd r = w - wbar;
        scatter += r * r.transpose();
    }

    const Eigen::VectorXd eps = wbar - observe(H, prior.m, d);
    const double S = (H * prior.P * H.transpose())(0, 0) + 1.0 / static_cast<double>(n);
    const Eigen::MatrixXd N = (eps * eps.transpose()) / S;
    const Eigen::VectorXd K = prior.P * H.transpose() / S;  // s x 1

    GGIWUpdate up;
    up.posterior.alpha = prior.alpha + n;
    up.posterior.beta = prior.beta + 1.0;
    up.posterior.m = prior.m;
    for (int i = 0; i < s; ++i) up.posterior.m.segment(i * d, d) += K(i) * eps;
    up.posterior.P = prior.P - K * S * K.transpose();
    up.posterior.v = prior.v + n;
    up.posterior.V = prior.V + N + scatter;

    // eta_gamma: marginal pmf of |W| under the Poisson-gamma mixture.
    up.log_eta_gamma = std::lgamma(up.posterior.alpha) - std::lgamma(prior.alpha)
                     - std::lgamma(n + 1.0)
                     + prior.alpha * std::log(prior.beta)
                     - up.posterior.alpha * std::log(up.posterior.beta);

    // eta_{x,chi}: marginal of the group under the Gaussian-IW factor.
    const double log_pi = std::log(std::numbers::pi);
    const double logdet_V = Eigen::LLT<Eigen::MatrixXd>(prior.V).matrixL()
                                .toDenseMatrix().diagonal().array().log().sum() * 2.0;
    const double logdet_VW = Eigen::LLT<Eigen::MatrixXd>(up.posterior.V).matrixL()
                                 .toDenseMatrix().diagonal().array().log().sum() * 2.0;
    up.log_eta_kin = -0.5 * d * (n * log_pi + std::log(static_cast<double>(n)))
                   + 0.5 * prior.v * logdet_V - 0.5 * up.posterior.v * logdet_VW
                   - 0.5 * d * std::log(S)
                   + log_multigamma(d, 0.5 * up.posterior.v) - log_multigamma(d, 0.5 * prior.v);

    up.log_evidence = up.log_eta_gamma + up.log_eta_kin;
    return up;
}

double log_evidence_misdetect(const GGIWParams& prior, double p_d, bool literal_mode) {
    if (p_d < 0.0 || p_d > 1.0) throw std::invalid_argument("log_evidence_misdetect: p_d must be in [0,1]");
    if (literal_mode) return std::log1p(-p_d);
    const double zero_prob = std::exp(prior.alpha * std::log(prior.beta / (prior.beta + 1.0)));
    return std::log((1.0 - p_d) + p_d * zero_prob);
}

Eigen::MatrixXd extent_point_estimate(const GGIWParams& params, bool* degraded) {
    const int d = params.extent_dim();
    const double denom = params.v - 2.0 * d - 2.0;
    if (denom > 0.0) {
        if (degraded) *degraded = false;
        return params.V / denom;
    }
    if (degraded) *degraded = true;
    return params.V / params.v;
}

double log_multigamma(int d, double a) {
    double out = 0.25 * d * (d - 1) * std::log(std::numbers::pi);
    for (int j = 1; j <= d; ++j) out += std::lgamma(a + 0.5 * (1.0 - j));
    return out;
}

}  // namespace rfse
