#include "risac/scene.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace risac {

namespace {

using nlohmann::json;

double angle_to(const Point2& from, const Point2& to) {
    const double dx = to.x - from.x;
    const double dy = to.y - from.y;
    const double r = std::hypot(dx, dy);
    if (r <= 0.0) return 0.0;
    // Broadside along +x; the ULA only sees sin(angle).
    return std::asin(std::clamp(dy / r, -1.0, 1.0));
}

double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double read_real(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity" || s == "Infinity") return std::numeric_limits<double>::infinity();
    }
    throw DomainError(std::string("config field '") + key + "' must be a number");
}

int read_int(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) throw DomainError(std::string("config field '") + key + "' must be an integer");
    return j.at(key).get<int>();
}

Point2 read_point(const json& j, const char* key, Point2 fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2) throw DomainError(std::string("config field '") + key + "' must be [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

Circle read_circle(const json& j, const char* key, Circle fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_object()) throw DomainError(std::string("config field '") + key + "' must be {center, radius}");
    Circle c = fallback;
    c.center = read_point(v, "center", fallback.center);
    c.radius = read_real(v, "radius", fallback.radius);
    return c;
}

json real_or_inf(double v) {
    if (std::isinf(v)) return "inf";
    return v;
}

}  // namespace

void ScenarioConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw DomainError(what);
    };
    require(n_tx >= 1, "n_tx must be >= 1");
    require(n_rx >= 0, "n_rx must be >= 0");
    require(n_ris >= 0, "n_ris must be >= 0");
    require(n_users >= 1, "n_users must be >= 1");
    require(n_targets >= 0, "n_targets must be >= 0");
    require(phase_levels >= 1, "phase_levels must be >= 1");
    require(rate_threshold_bps_hz > 0.0, "rate threshold must be > 0");
    require(crb_threshold > 0.0, "crb threshold must be > 0");
    require(outage_prob > 0.0 && outage_prob < 1.0, "outage_prob must lie in (0,1)");
    require(fail_prob > 0.0 && fail_prob < 1.0, "fail_prob must lie in (0,1)");
    require(err_bu >= 0.0 && err_bru >= 0.0 && err_rc >= 0.0, "error scales must be >= 0");
    require(rician_bu >= 0.0 && rician_ru >= 0.0 && rician_br >= 0.0, "rician factors must be >= 0");
    require(user_circle.radius >= 0.0 && target_circle.radius >= 0.0, "circle radii must be >= 0");
    require(wavelength_m > 0.0 && rcs_m2 > 0.0, "wavelength and rcs must be > 0");
    require(n_samples >= 1, "n_samples must be >= 1");
}

ScenarioConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DomainError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DomainError("config must be a JSON object");

    ScenarioConfig c;
    try {
        c.n_tx = read_int(j, "n_tx", c.n_tx);
        c.n_rx = read_int(j, "n_rx", c.n_rx);
        c.n_ris = read_int(j, "n_ris", c.n_ris);
        c.n_users = read_int(j, "n_users", c.n_users);
        c.n_targets = read_int(j, "n_targets", c.n_targets);
        c.phase_levels = read_int(j, "phase_levels", c.phase_levels);
        if (j.contains("phase_bits")) {
            const int bits = read_int(j, "phase_bits", 0);
            if (bits < 0 || bits > 16) throw DomainError("phase_bits must lie in [0,16]");
            if (j.contains("phase_levels") && c.phase_levels != (1 << bits))
                throw DomainError("phase_levels and phase_bits disagree");
            c.phase_levels = 1 << bits;
        }
        c.rate_threshold_bps_hz = read_real(j, "rate_threshold_bps_hz", c.rate_threshold_bps_hz);
        c.crb_threshold = read_real(j, "crb_threshold", c.crb_threshold);
        c.outage_prob = read_real(j, "outage_prob", c.outage_prob);
        c.fail_prob = read_real(j, "fail_prob", c.fail_prob);
        c.noise_com_dbm = read_real(j, "noise_com_dbm", c.noise_com_dbm);
        c.noise_sen_dbm = read_real(j, "noise_sen_dbm", c.noise_sen_dbm);
        c.err_bu = read_real(j, "err_bu", c.err_bu);
        c.err_bru = read_real(j, "err_bru", c.err_bru);
        c.err_rc = read_real(j, "err_rc", c.err_rc);
        if (j.contains("error_model")) {
            const auto m = j.at("error_model").get<std::string>();
            if (m == "relative") c.error_model = ErrorModel::relative;
            else if (m == "absolute") c.error_model = ErrorModel::absolute;
            else throw DomainError("error_model must be 'relative' or 'absolute'");
        }
        c.bs_pos = read_point(j, "bs_pos", c.bs_pos);
        c.ris_pos = read_point(j, "ris_pos", c.ris_pos);
        c.user_circle = read_circle(j, "user_circle", c.user_circle);
        c.target_circle = read_circle(j, "target_circle", c.target_circle);
        c.rician_bu = read_real(j, "rician_bu", c.rician_bu);
        c.rician_ru = read_real(j, "rician_ru", c.rician_ru);
        c.rician_br = read_real(j, "rician_br", c.rician_br);
        c.pathloss_bu = read_real(j, "pathloss_bu", c.pathloss_bu);
        c.pathloss_ru = read_real(j, "pathloss_ru", c.pathloss_ru);
        c.pathloss_br = read_real(j, "pathloss_br", c.pathloss_br);
        c.wavelength_m = read_real(j, "wavelength_m", c.wavelength_m);
        c.rcs_m2 = read_real(j, "rcs_m2", c.rcs_m2);
        c.n_samples = read_int(j, "n_samples", c.n_samples);
        if (j.contains("rng_seed")) c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw DomainError(std::string("bad config field: ") + e.what());
    }
    c.validate();
    return c;
}

std::string config_to_json(const ScenarioConfig& c) {
    json j;
    j["n_tx"] = c.n_tx;
    j["n_rx"] = c.receive_antennas();
    j["n_ris"] = c.n_ris;
    j["n_users"] = c.n_users;
    j["n_targets"] = c.n_targets;
    j["phase_levels"] = c.phase_levels;
    j["rate_threshold_bps_hz"] = c.rate_threshold_bps_hz;
    j["crb_threshold"] = c.crb_threshold;
    j["outage_prob"] = c.outage_prob;
    j["fail_prob"] = c.fail_prob;
    j["noise_com_dbm"] = c.noise_com_dbm;
    j["noise_sen_dbm"] = c.noise_sen_dbm;
    j["err_bu"] = c.err_bu;
    j["err_bru"] = c.err_bru;
    j["err_rc"] = c.err_rc;
    j["error_model"] = c.error_model == ErrorModel::relative ? "relative" : "absolute";
    j["bs_pos"] = {c.bs_pos.x, c.bs_pos.y};
    j["ris_pos"] = {c.ris_pos.x, c.ris_pos.y};
    j["user_circle"] = {{"center", {c.user_circle.center.x, c.user_circle.center.y}}, {"radius", c.user_circle.radius}};
    j["target_circle"] = {{"center", {c.target_circle.center.x, c.target_circle.center.y}},
                          {"radius", c.target_circle.radius}};
    j["rician_bu"] = real_or_inf(c.rician_bu);
    j["rician_ru"] = real_or_inf(c.rician_ru);
    j["rician_br"] = real_or_inf(c.rician_br);
    j["pathloss_bu"] = c.pathloss_bu;
    j["pathloss_ru"] = c.pathloss_ru;
    j["pathloss_br"] = c.pathloss_br;
    j["wavelength_m"] = c.wavelength_m;
    j["rcs_m2"] = c.rcs_m2;
    j["n_samples"] = c.n_samples;
    j["rng_seed"] = c.rng_seed;
    return j.dump(2);
}

RowC ChannelRealization::effective_channel(int k, const VecC& theta) const {
    RowC c = h_bu_hat[k].adjoint();
    if (theta.size() > 0) c += theta.adjoint() * h_bru_hat[k];
    return c;
}

double pathloss_db(double distance_m, double exponent) {
    if (!(distance_m > 0.0)) throw DomainError("pathloss_db: distance must be positive");
    return -30.0 - 10.0 * exponent * std::log10(distance_m);
}

VecC steering(double angle, int n) {
    VecC a(n);
    const double phase = kPi * std::sin(angle);
    for (int i = 0; i < n; ++i) a(i) = std::polar(1.0, phase * i);
    return a;
}

VecC steering_deriv(double angle, int n) {
    VecC a = steering(angle, n);
    const double c = kPi * std::cos(angle);
    for (int i = 0; i < n; ++i) a(i) *= kJ * (c * i);
    return a;
}

MatC sample_rician(const MatC& los, double rician_factor, double scale, Rng& rng) {
    if (rician_factor < 0.0) throw DomainError("sample_rician: negative rician factor");
    if (std::isinf(rician_factor)) return scale * los;
    const double w_los = std::sqrt(rician_factor / (1.0 + rician_factor));
    const double w_nlos = std::sqrt(1.0 / (1.0 + rician_factor));
    MatC nlos = rng.cscg_matrix(los.rows(), los.cols());
    return scale * (w_los * los + w_nlos * nlos);
}

MatC cascade(const VecC& h_ru, const MatC& h_br) {
    if (h_br.cols() != h_ru.size())
        throw DimensionError("cascade: H_br must have one column per RIS element");
    return h_ru.conjugate().asDiagonal() * h_br.adjoint();
}

ErrorDraw sample_errors(const ChannelRealization& real, Rng& rng) {
    ErrorDraw d;
    const int k_users = real.n_users();
    d.dh_bu.reserve(k_users);
    d.dh_bru.reserve(k_users);
    for (int k = 0; k < k_users; ++k) {
        d.dh_bu.push_back(real.gamma_bu[k] * rng.cscg_vector(real.h_bu_hat[k].size()));
        d.dh_bru.push_back(real.gamma_bru[k] * rng.cscg_matrix(real.h_bru_hat[k].rows(), real.h_bru_hat[k].cols()));
    }
    d.dalpha.reserve(real.n_targets());
    for (int l = 0; l < real.n_targets(); ++l) d.dalpha.push_back(real.eps[l] * rng.cscg());
    return d;
}

double target_coeff_scale(double distance_m, double wavelength_m, double rcs_m2) {
    if (!(distance_m > 0.0 && wavelength_m > 0.0 && rcs_m2 > 0.0))
        throw DomainError("target coefficient: inputs must be positive");
    const double d2 = distance_m * distance_m;
    return std::sqrt(wavelength_m * wavelength_m * rcs_m2 / (64.0 * kPi * kPi * kPi * d2 * d2));
}

cdouble sample_target_coeff(double distance_m, double wavelength_m, double rcs_m2, Rng& rng) {
    return target_coeff_scale(distance_m, wavelength_m, rcs_m2) * rng.cscg();
}

Point2 sample_in_circle(const Circle& c, Rng& rng) {
    const double r = c.radius * std::sqrt(rng.uniform());
    const double phi = 2.0 * kPi * rng.uniform();
    return {c.center.x + r * std::cos(phi), c.center.y + r * std::sin(phi)};
}

ChannelRealization sample_realization(const ScenarioConfig& cfg, Rng& rng) {
    cfg.validate();
    const int n = cfg.n_tx;
    const int m = cfg.n_ris;
    const int k_users = cfg.n_users;
    const int l_targets = cfg.n_targets;
    constexpr double kMinDistance = 1.0;

    ChannelRealization real;
    // Geometry and target draws use their own stream so that sweeps over N or M
    // see the same users and targets for the same trial seed.
    Rng geo(rng.engine()());
    Rng chan(rng.engine()());

    std::vector<Point2> users;
    for (int k = 0; k < k_users; ++k) users.push_back(sample_in_circle(cfg.user_circle, geo));
    for (int l = 0; l < l_targets; ++l) {
        const Point2 target = sample_in_circle(cfg.target_circle, geo);
        const double angle = angle_to(cfg.bs_pos, target);
        const double d_rt = std::max(distance(cfg.ris_pos, target), kMinDistance);
        real.aod.push_back(angle);
        real.aoa.push_back(angle);
        real.alpha_hat.push_back(sample_target_coeff(d_rt, cfg.wavelength_m, cfg.rcs_m2, geo));
    }

    // BS-RIS link, shared by all users.
    const double d_br = std::max(distance(cfg.bs_pos, cfg.ris_pos), kMinDistance);
    const MatC br_los = steering(angle_to(cfg.bs_pos, cfg.ris_pos), n) *
                        steering(angle_to(cfg.ris_pos, cfg.bs_pos), m).adjoint();
    const MatC h_br =
        sample_rician(br_los, cfg.rician_br, std::pow(10.0, pathloss_db(d_br, cfg.pathloss_br) / 20.0), chan);

    for (int k = 0; k < k_users; ++k) {
        const Point2 user = users[k];
        const double d_bu = std::max(distance(cfg.bs_pos, user), kMinDistance);
        const double d_ru = std::max(distance(cfg.ris_pos, user), kMinDistance);
        const MatC bu_los = steering(angle_to(cfg.bs_pos, user), n);
        const MatC ru_los = steering(angle_to(cfg.ris_pos, user), m);
        const VecC h_bu =
            sample_rician(bu_los, cfg.rician_bu, std::pow(10.0, pathloss_db(d_bu, cfg.pathloss_bu) / 20.0), chan).col(0);
        const VecC h_ru =
            sample_rician(ru_los, cfg.rician_ru, std::pow(10.0, pathloss_db(d_ru, cfg.pathloss_ru) / 20.0), chan).col(0);
        real.h_bu_hat.push_back(h_bu);
        real.h_bru_hat.push_back(m > 0 ? cascade(h_ru, h_br) : MatC(0, n));
    }

    const bool relative = cfg.error_model == ErrorModel::relative;
    for (int k = 0; k < k_users; ++k) {
        const double rms_bu = real.h_bu_hat[k].norm() / std::sqrt(static_cast<double>(n));
        const double rms_bru =
            m > 0 ? real.h_bru_hat[k].norm() / std::sqrt(static_cast<double>(m) * n) : 0.0;
        real.gamma_bu.push_back(relative ? cfg.err_bu * rms_bu : cfg.err_bu);
        real.gamma_bru.push_back(m > 0 ? (relative ? cfg.err_bru * rms_bru : cfg.err_bru) : 0.0);
        real.sigma2_com.push_back(dbm_to_watts(cfg.noise_com_dbm));
    }
    for (int l = 0; l < l_targets; ++l)
        real.eps.push_back(relative ? cfg.err_rc * std::abs(real.alpha_hat[l]) : cfg.err_rc);
    real.sigma2_sen = dbm_to_watts(cfg.noise_sen_dbm);
    return real;
}

}  // namespace risac
