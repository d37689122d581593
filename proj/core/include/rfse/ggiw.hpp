#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rfse {

/// Linear-Gaussian motion model for the kinematic factor plus the scalar
/// dynamics of the rate and extent factors. F and Q act on the motion order
/// only; the extent dimension enters through Kronecker products.
struct MotionModel {
    Eigen::MatrixXd F;   // s x s transition
    Eigen::MatrixXd Q;   // s x s process noise factor
    double T = 1.0;      // sampling period [s]
    double mu = 1.25;    // rate forgetting factor, > 1
    double tau = 5.0;    // extent decay constant [s]

    [[nodiscard]] int order() const { return static_cast<int>(F.rows()); }
    void validate() const;

    /// Position / velocity / acceleration model with exponentially decaying
    /// acceleration (manoeuvre correlation time theta).
    static MotionModel decaying_acceleration(double T, double theta, double sigma_acc,
                                    double mu = 1.25, double tau = 5.0);

    /// Nearly-constant-velocity model with white acceleration noise.
    static MotionModel constant_velocity(double T, double sigma_acc,
                                         double mu = 1.25, double tau = 5.0);
};

/// Parameters of one gamma x Gaussian x inverse-Wishart density:
/// rate ~ GAM(alpha, beta), kinematics ~ N(m, P (x) chi), extent chi ~ IW(v, V).
struct GGIWParams {
    double alpha = 1.0;
    double beta = 1.0;
    Eigen::VectorXd m;   // length s*d
    Eigen::MatrixXd P;   // s x s
    double v = 7.0;
    Eigen::MatrixXd V;   // d x d

    [[nodiscard]] int extent_dim() const { return static_cast<int>(V.rows()); }
    [[nodiscard]] int motion_order() const {
        const int d = extent_dim();
        return d > 0 ? static_cast<int>(m.size()) / d : 0;
    }
    [[nodiscard]] double rate_mean() const { return alpha / beta; }

    /// Throws std::invalid_argument when any structural invariant is broken.
    void validate() const;
};

/// (F (x) I_d) m for a block-structured kinematic vector.
Eigen::VectorXd kron_apply(const Eigen::MatrixXd& F, const Eigen::VectorXd& m, int d);

/// (H (x) I_d) m for a single observation row.
Eigen::VectorXd observe(const Eigen::RowVectorXd& H, const Eigen::VectorXd& m, int d);

/// Closed-form GGIW time prediction. The rate keeps its mean while its
/// variance grows by mu; the extent keeps V/(v-d-1) while v decays by
/// exp(-T/tau). A floor of 2d + 1e-6 on the predicted v keeps the density
/// proper under repeated prediction; the V rescaling preserves the same
/// ratio through the clamp.
GGIWParams predict_ggiw(const GGIWParams& prior, const MotionModel& model);

struct GGIWUpdate {
    GGIWParams posterior;
    double log_evidence = 0.0;   // log(eta_gamma * eta_kin)
    double log_eta_gamma = 0.0;
    double log_eta_kin = 0.0;
};

/// Bayes update of a GGIW prior with a non-empty measurement group W.
/// H is the 1 x s observation row. Throws std::invalid_argument for W empty
/// or dimension mismatches. The evidence components are the marginal
/// likelihoods of |W| under the gamma-Poisson mixture and of the group
/// under the Gaussian-inverse-Wishart factor.
GGIWUpdate update_ggiw(const GGIWParams& prior, const std::vector<Eigen::VectorXd>& W,
                       const Eigen::RowVectorXd& H);

/// log-likelihood of a misdetection. Literal mode returns log(1 - p_d);
/// otherwise the gamma-expected probability of zero detections is folded in:
/// log(1 - p_d + p_d (beta/(beta+1))^alpha).
double log_evidence_misdetect(const GGIWParams& prior, double p_d, bool literal_mode = true);

/// Point estimate of the extent: the IW mean V/(v-2d-2) when it exists,
/// else the mode V/v with *degraded set.
Eigen::MatrixXd extent_point_estimate(const GGIWParams& params, bool* degraded = nullptr);

/// log of the multivariate gamma function Gamma_d(a).
double log_multigamma(int d, double a);

}  // namespace rfse
