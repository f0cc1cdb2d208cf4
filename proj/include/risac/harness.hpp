#pragma once

#include "risac/ao.hpp"
#include "risac/scene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace risac {

/// Thrown for malformed experiment or scenario documents.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SweepVar { n_tx, n_ris, err_scale, phase_levels };

const char* to_string(SweepVar v);
SweepVar sweep_from_string(const std::string& s);

struct ExperimentSpec {
    SweepVar sweep = SweepVar::n_ris;
    std::vector<double> values{16};
    int trials = 1;
    std::vector<AoScheme> schemes{AoScheme::sdr, AoScheme::gemm};
    ScenarioConfig base;
    AoConfig ao;
    std::uint64_t seed = 1;
    int certify_draws = 0;  ///< 0 skips certification
    int workers = 1;
    /// false zeroes every wall-clock field so reruns are byte-identical
    bool record_timing = true;
    std::string out_prefix = "out";

    /// Throws ConfigError.
    void validate() const;
    /// Scenario for one sweep value.
    ScenarioConfig scenario_at(double value) const;
};

/// Experiment document: {"sweep", "values", "trials", "schemes", "seed", "certify_draws",
/// "record_timing", "ao": {...}}. Scenario fields come from `base`.
ExperimentSpec experiment_from_json(const std::string& text, const ScenarioConfig& base);

struct TrialRecord {
    double sweep = 0.0;
    std::uint64_t seed = 0;
    AoScheme scheme = AoScheme::gemm;
    bool feasible = false;
    double power_dbm = 0.0;  ///< NaN when infeasible
    int ao_iters = 0;
    double wall_ms = 0.0;
    double max_outage = 0.0;    ///< NaN when not certified
    double max_crb_fail = 0.0;  ///< NaN when not certified
    std::string trace_json;     ///< not part of the CSV

    double power_w() const;
    bool certified() const;
    /// Compares the CSV columns; NaN equals NaN.
    bool same_row(const TrialRecord& o) const;
};

/// Seed shared by every sweep value for trial t, so sweep points see the same
/// users and targets.
std::uint64_t trial_seed(std::uint64_t base, int t);

/// Runs every sweep value x trial x scheme. Output order is (value, trial, scheme)
/// regardless of worker count.
std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec);

/// Measures outage and CRB failure for a feasible trial; leaves infeasible records unchanged.
TrialRecord certify_trial(TrialRecord rec, const RobustProblem& prob, const MatC& s_tx, const VecC& theta,
                          int n_draws, Rng& rng);

inline constexpr const char* kRecordsHeader =
    "sweep,seed,scheme,feasible,power_dbm,ao_iters,wall_ms,max_outage,max_crb_fail";

std::string records_csv(const std::vector<TrialRecord>& recs);
std::vector<TrialRecord> parse_records_csv(const std::string& text);

struct AggRow {
    double sweep = 0.0;
    AoScheme scheme = AoScheme::gemm;
    int trials = 0;
    int feasible = 0;
    double feas_rate = 0.0;
    double mean_power_dbm = 0.0;  ///< NaN for an empty bucket
    double std_power_dbm = 0.0;
    double mean_iters = 0.0;
    double mean_wall_ms = 0.0;
    double max_outage = 0.0;
};

std::vector<AggRow> aggregate(const std::vector<TrialRecord>& recs);
std::string agg_csv(const std::vector<AggRow>& rows);

/// Writes <prefix>_records.csv, <prefix>_agg.csv, <prefix>_traces.jsonl and <prefix>_plot.py.
/// Throws std::runtime_error naming the path on I/O failure.
void emit_outputs(const std::vector<TrialRecord>& recs, const std::string& prefix, const std::string& sweep_name);

}  // namespace risac
