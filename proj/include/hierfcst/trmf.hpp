#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hierfcst::trmf {

//! Observed-entry indicator, same shape as the data matrix.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct TrmfConfig {
    int rank = 4;      //!< d
    int ar_order = 2;  //!< p
    double lambda_f = 1e-3;
    double lambda_z = 1e-3;
    double lambda_ar = 1.0;
    int max_sweeps = 200;
    //! Stop when the relative objective decrease of a sweep falls below this.
    double tol = 1e-7;
    std::uint64_t seed = 0;
    double density_floor = 0.25;
    //! Proceed (with a warning) when the observed share is below the floor.
    bool allow_sparse = false;

    void validate() const;
};

//! Y (T x n) ~ Z F with Z (T x d) factor series following per-factor AR(p)
//! dynamics phi (d x p, row j = (phi_j1, ..., phi_jp)).
//!
//! Objective:
//!   1/(2|Omega|) ||P_Omega(Y - Z F)||^2 + lambda_f/2 ||F||^2 + lambda_z/2 ||Z||^2
//!   + lambda_ar/2 sum_{t>=p} sum_j (Z_tj - sum_i phi_ji Z_{t-i,j})^2
struct FactorModel {
    Eigen::MatrixXd Z;
    Eigen::MatrixXd F;
    Eigen::MatrixXd phi;
    double lambda_f = 0.0;
    double lambda_z = 0.0;
    double lambda_ar = 0.0;
    Mask observed;

    std::vector<double> objective_trace; //!< initial value, then one entry per sweep
    int sweeps = 0;
    bool converged = false;
    std::vector<std::string> warnings;

    Eigen::Index periods() const { return Z.rows(); }
    Eigen::Index rank() const { return Z.cols(); }
    Eigen::Index series() const { return F.cols(); }
    Eigen::Index ar_order() const { return phi.cols(); }

    //! T d + d n + d p.
    Eigen::Index parameter_count() const;
};

double objective(const FactorModel& model, const Eigen::MatrixXd& Y);

struct Gradient {
    Eigen::MatrixXd Z;
    Eigen::MatrixXd F;
    Eigen::MatrixXd phi;
};

//! Analytic gradient of objective() in every block.
Gradient gradient(const FactorModel& model, const Eigen::MatrixXd& Y);

//! Exact block minimizers. Each leaves the other blocks untouched.
void update_loadings(FactorModel& model, const Eigen::MatrixXd& Y);
void update_factors(FactorModel& model, const Eigen::MatrixXd& Y);
void update_ar(FactorModel& model);

//! Alternating minimization from the seeded initialization. Throws
//! DensityError when the observed share is below the floor (unless
//! allow_sparse) and DomainError on non-finite observed entries.
FactorModel factorize(const Eigen::MatrixXd& Y, const Mask& mask, const TrmfConfig& config);

//! Same, starting from `warm` (Z rows must equal Y rows).
FactorModel factorize(const Eigen::MatrixXd& Y, const Mask& mask, const TrmfConfig& config,
                      const FactorModel& warm);

//! Dynamic factor forecast (horizon x d): each step applies the AR recursion
//! to observed factors or prior forecasts.
Eigen::MatrixXd forecast_factors(const FactorModel& model, int horizon);

//! Forecast of Y (horizon x n), unclipped.
Eigen::MatrixXd forecast(const FactorModel& model, int horizon);

//! True when some factor's AR polynomial has a root on or outside the unit
//! circle (companion eigenvalue modulus >= 1).
bool has_explosive_factors(const FactorModel& model);

struct WindowPolicy {
    enum class Kind { expanding, sliding } kind = Kind::expanding;
    int width = 0; //!< rows kept by the sliding policy

    static WindowPolicy expanding() { return {}; }
    static WindowPolicy sliding(int width) { return {Kind::sliding, width}; }
};

struct RollingResult {
    Eigen::MatrixXd forecasts;      //!< row k: forecast of stream row k made before seeing it
    std::vector<double> objectives; //!< final objective of each fit (initial fit first)
    FactorModel last;
};

//! Fits on (initial, initial_mask), then for every stream row emits the
//! one-step forecast and refits warm-started on the extended matrix.
RollingResult rolling_refit(const Eigen::MatrixXd& initial, const Mask& initial_mask,
                            const Eigen::MatrixXd& stream, const Mask& stream_mask,
                            const TrmfConfig& config, WindowPolicy policy = {});

} // namespace hierfcst::trmf
