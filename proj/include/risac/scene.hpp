#pragma once

#include "risac/types.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace risac {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct Circle {
    Point2 center;
    double radius = 0.0;
};

/// How the err_* fields map to absolute error standard deviations.
enum class ErrorModel {
    /// err_* are per-entry standard deviations relative to the RMS entry of the
    /// estimated channel (resp. |alpha_hat|).
    relative,
    /// err_* are absolute per-entry standard deviations (channel units).
    absolute,
};

/// All physical and system parameters of one scenario. Defaults reproduce the
/// reference simulation setup.
struct ScenarioConfig {
    int n_tx = 16;
    int n_rx = 0;  ///< 0 means "same as n_tx"
    int n_ris = 16;
    int n_users = 2;
    int n_targets = 2;
    int phase_levels = 4;
    double rate_threshold_bps_hz = 2.0;
    double crb_threshold = 0.01;
    double outage_prob = 0.05;
    double fail_prob = 0.05;
    double noise_com_dbm = -110.0;
    double noise_sen_dbm = -110.0;
    double err_bu = 0.01;
    double err_bru = 0.01;
    double err_rc = 0.01;
    ErrorModel error_model = ErrorModel::relative;
    Point2 bs_pos{0.0, 0.0};
    Point2 ris_pos{50.0, 10.0};
    Circle user_circle{{70.0, 0.0}, 5.0};
    Circle target_circle{{0.0, 0.0}, 70.0};
    double rician_bu = 0.0;
    double rician_ru = 0.0;
    double rician_br = std::numeric_limits<double>::infinity();
    double pathloss_bu = 4.0;
    double pathloss_ru = 2.0;
    double pathloss_br = 2.2;
    double wavelength_m = 0.06;
    double rcs_m2 = 1.0;
    int n_samples = 1;  ///< radar snapshots T; multiplies the Fisher information
    std::uint64_t rng_seed = 1;

    int receive_antennas() const { return n_rx > 0 ? n_rx : n_tx; }

    /// Throws DomainError when an invariant is violated.
    void validate() const;
};

/// Parses a JSON document; every field is optional. Accepts `phase_bits` as an
/// alternative to `phase_levels` (levels = 2^bits). Throws DomainError on bad values.
ScenarioConfig config_from_json(const std::string& text);
std::string config_to_json(const ScenarioConfig& cfg);

/// Estimated channels, error scales and target geometry for one Monte Carlo trial.
struct ChannelRealization {
    std::vector<VecC> h_bu_hat;   ///< per user, N
    std::vector<MatC> h_bru_hat;  ///< per user, M x N cascaded channel
    std::vector<cdouble> alpha_hat;
    std::vector<double> aod;
    std::vector<double> aoa;
    std::vector<double> gamma_bu;
    std::vector<double> gamma_bru;
    std::vector<double> eps;
    std::vector<double> sigma2_com;
    double sigma2_sen = 0.0;

    int n_tx() const { return h_bu_hat.empty() ? 0 : static_cast<int>(h_bu_hat.front().size()); }
    int n_ris() const { return h_bru_hat.empty() ? 0 : static_cast<int>(h_bru_hat.front().rows()); }
    int n_users() const { return static_cast<int>(h_bu_hat.size()); }
    int n_targets() const { return static_cast<int>(alpha_hat.size()); }

    /// Effective channel c_k(theta) = h_bu^H + theta^H H_bru (row vector).
    RowC effective_channel(int k, const VecC& theta) const;
};

/// One draw of the CSI and reflection-coefficient errors.
struct ErrorDraw {
    std::vector<VecC> dh_bu;
    std::vector<MatC> dh_bru;
    std::vector<cdouble> dalpha;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// Large-scale path loss -30 - 10 p log10(d) in dB.
double pathloss_db(double distance_m, double exponent);

/// Half-wavelength ULA response, entry i = exp(j pi i sin(angle)).
VecC steering(double angle, int n);
inline VecC steering_tx(double angle, int n) { return steering(angle, n); }
inline VecC steering_rx(double angle, int n) { return steering(angle, n); }

/// d/d(angle) of the ULA response.
VecC steering_deriv(double angle, int n);
inline VecC steering_tx_deriv(double angle, int n) { return steering_deriv(angle, n); }
inline VecC steering_rx_deriv(double angle, int n) { return steering_deriv(angle, n); }

/// scale * (sqrt(b/(1+b)) LoS + sqrt(1/(1+b)) NLoS); b = inf gives scale * LoS.
MatC sample_rician(const MatC& los, double rician_factor, double scale, Rng& rng);

/// diag(h_ru)^H H_br^H, so that theta^H * result = h_ru^H Theta H_br^H.
MatC cascade(const VecC& h_ru, const MatC& h_br);

ErrorDraw sample_errors(const ChannelRealization& real, Rng& rng);

/// Standard deviation of the target reflection coefficient.
double target_coeff_scale(double distance_m, double wavelength_m, double rcs_m2);
cdouble sample_target_coeff(double distance_m, double wavelength_m, double rcs_m2, Rng& rng);

/// Uniform point in a disc (r = R sqrt(u)).
Point2 sample_in_circle(const Circle& c, Rng& rng);

/// Full trial: positions, channels, error scales, target angles.
ChannelRealization sample_realization(const ScenarioConfig& cfg, Rng& rng);

}  // namespace risac
