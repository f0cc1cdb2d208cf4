#include "risac/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace risac {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt_real(double v) {
    if (std::isnan(v)) return "NA";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_real(const std::string& s) {
    if (s == "NA") return kNaN;
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("bad number in CSV: " + s);
    return v;
}

bool same_real(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << body;
    if (!f) throw std::runtime_error("write failed: " + path);
}

const char* kPlotScript = R"PY(#!/usr/bin/env python3
# Renders power, feasibility and iteration curves from the experiment CSVs.
import csv, sys, os
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

prefix = sys.argv[1] if len(sys.argv) > 1 else os.path.splitext(__file__)[0][:-len("_plot")]
SWEEP = "@SWEEP@"

def num(s):
    return float("nan") if s == "NA" else float(s)

agg = list(csv.DictReader(open(prefix + "_agg.csv")))
recs = list(csv.DictReader(open(prefix + "_records.csv")))
schemes = sorted({r["scheme"] for r in agg})

fig, ax = plt.subplots(1, 3, figsize=(14, 4))
for s in schemes:
    rows = [r for r in agg if r["scheme"] == s]
    x = [num(r["sweep"]) for r in rows]
    ax[0].plot(x, [num(r["mean_power_dbm"]) for r in rows], "o-", label=s)
    ax[1].plot(x, [num(r["feas_rate"]) for r in rows], "o-", label=s)
    it = [int(r["ao_iters"]) for r in recs if r["scheme"] == s and r["feasible"] == "1"]
    if it:
        ax[2].hist(it, bins=range(0, max(it) + 2), alpha=0.5, label=s)
ax[0].set_xlabel(SWEEP); ax[0].set_ylabel("average transmit power (dBm)")
ax[1].set_xlabel(SWEEP); ax[1].set_ylabel("feasibility rate"); ax[1].set_ylim(-0.05, 1.05)
ax[2].set_xlabel("AO iterations"); ax[2].set_ylabel("trials")
for a in ax:
    a.grid(True); a.legend()
fig.tight_layout()
fig.savefig(prefix + "_plot.png", dpi=120)
print("wrote", prefix + "_plot.png")
)PY";

}  // namespace

const char* to_string(SweepVar v) {
    switch (v) {
        case SweepVar::n_tx: return "n_tx";
        case SweepVar::n_ris: return "n_ris";
        case SweepVar::err_scale: return "err_scale";
        case SweepVar::phase_levels: return "phase_levels";
    }
    return "?";
}

SweepVar sweep_from_string(const std::string& s) {
    if (s == "n_tx") return SweepVar::n_tx;
    if (s == "n_ris") return SweepVar::n_ris;
    if (s == "err_scale") return SweepVar::err_scale;
    if (s == "phase_levels") return SweepVar::phase_levels;
    throw ConfigError("unknown sweep variable: " + s);
}

void ExperimentSpec::validate() const {
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (values.empty()) throw ConfigError("sweep values must not be empty");
    if (!std::is_sorted(values.begin(), values.end())) throw ConfigError("sweep values must be sorted ascending");
    if (schemes.empty()) throw ConfigError("schemes must not be empty");
    if (certify_draws < 0) throw ConfigError("certify_draws must be non-negative");
    if (workers < 1) throw ConfigError("workers must be at least 1");
    const bool integral = sweep != SweepVar::err_scale;
    for (double v : values) {
        if (integral && (v != std::floor(v) || v < 0)) throw ConfigError("sweep value must be a non-negative integer");
        if (!integral && !(v >= 0)) throw ConfigError("err_scale values must be non-negative");
    }
    try {
        for (double v : values) scenario_at(v).validate();
        ao.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

ScenarioConfig ExperimentSpec::scenario_at(double value) const {
    ScenarioConfig c = base;
    switch (sweep) {
        case SweepVar::n_tx: c.n_tx = static_cast<int>(value); break;
        case SweepVar::n_ris: c.n_ris = static_cast<int>(value); break;
        case SweepVar::err_scale: c.err_bu = c.err_bru = c.err_rc = value; break;
        case SweepVar::phase_levels: c.phase_levels = static_cast<int>(value); break;
    }
    return c;
}

ExperimentSpec experiment_from_json(const std::string& text, const ScenarioConfig& base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("experiment is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("experiment must be a JSON object");
    ExperimentSpec s;
    s.base = base;
    try {
        if (j.contains("sweep")) s.sweep = sweep_from_string(j.at("sweep").get<std::string>());
        if (j.contains("values")) s.values = j.at("values").get<std::vector<double>>();
        if (j.contains("trials")) s.trials = j.at("trials").get<int>();
        if (j.contains("schemes")) {
            s.schemes.clear();
            for (const auto& x : j.at("schemes")) s.schemes.push_back(scheme_from_string(x.get<std::string>()));
        }
        if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("certify_draws")) s.certify_draws = j.at("certify_draws").get<int>();
        if (j.contains("record_timing")) s.record_timing = j.at("record_timing").get<bool>();
        if (j.contains("ao")) {
            const auto& a = j.at("ao");
            if (a.contains("i_max")) s.ao.i_max = a.at("i_max").get<int>();
            if (a.contains("epsilon")) s.ao.epsilon = a.at("epsilon").get<double>();
            if (a.contains("g_max")) s.ao.g_max = a.at("g_max").get<int>();
            if (a.contains("rank_tol")) s.ao.rank_tol = a.at("rank_tol").get<double>();
            if (a.contains("solver_tol")) s.ao.solver_tol = a.at("solver_tol").get<double>();
            if (a.contains("lambda")) s.ao.lambda = a.at("lambda").get<double>();
            if (a.contains("gemm_i_max")) s.ao.gemm_i_max = a.at("gemm_i_max").get<int>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("experiment field has the wrong type: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return s;
}

double TrialRecord::power_w() const { return feasible ? dbm_to_watts(power_dbm) : kNaN; }

bool TrialRecord::certified() const { return !std::isnan(max_outage); }

bool TrialRecord::same_row(const TrialRecord& o) const {
    return same_real(sweep, o.sweep) && seed == o.seed && scheme == o.scheme && feasible == o.feasible &&
           same_real(power_dbm, o.power_dbm) && ao_iters == o.ao_iters && same_real(wall_ms, o.wall_ms) &&
           same_real(max_outage, o.max_outage) && same_real(max_crb_fail, o.max_crb_fail);
}

std::uint64_t trial_seed(std::uint64_t base, int t) {
    return Rng::stream(base, static_cast<std::uint64_t>(t)).engine()();
}

TrialRecord certify_trial(TrialRecord rec, const RobustProblem& prob, const MatC& s_tx, const VecC& theta,
                          int n_draws, Rng& rng) {
    if (!rec.feasible || n_draws <= 0) return rec;
    const OutageReport rep = empirical_outage(prob, s_tx, theta, n_draws, rng);
    rec.max_outage = rep.max_rate_outage();
    rec.max_crb_fail = rep.max_crb_failure();
    return rec;
}

std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const int n_values = static_cast<int>(spec.values.size());
    const int n_schemes = static_cast<int>(spec.schemes.size());
    const int n_tasks = n_values * spec.trials;
    std::vector<TrialRecord> out(static_cast<std::size_t>(n_tasks) * n_schemes);

    auto run_task = [&](int task) {
        const int vi = task / spec.trials;
        const int t = task % spec.trials;
        const double value = spec.values[vi];
        const std::uint64_t seed = trial_seed(spec.seed, t);
        const ScenarioConfig cfg = spec.scenario_at(value);
        Rng scene_rng(seed);
        const RobustProblem prob = make_problem(cfg, sample_realization(cfg, scene_rng));
        for (int si = 0; si < n_schemes; ++si) {
            AoConfig ao = spec.ao;
            ao.scheme = spec.schemes[si];
            // same AO stream for every scheme so they share the initial theta
            ao.rng_seed = Rng::stream(seed, 1).engine()();
            const AoTrace tr = run_ao(prob, ao);
            TrialRecord rec;
            rec.sweep = value;
            rec.seed = seed;
            rec.scheme = ao.scheme;
            rec.feasible = tr.feasible() && satisfies_constraints(prob, tr.s_tx, tr.theta);
            rec.power_dbm = rec.feasible ? watts_to_dbm(tr.power_w()) : kNaN;
            rec.ao_iters = tr.iterations();
            rec.wall_ms = spec.record_timing ? tr.wall_ms : 0.0;
            rec.max_outage = kNaN;
            rec.max_crb_fail = kNaN;
            AoTrace shown = tr;
            if (!spec.record_timing) {
                shown.wall_ms = 0.0;
                for (auto& it : shown.iters) it.transmit_ms = it.ris_ms = 0.0;
            }
            json line = json::parse(shown.to_json());
            line["sweep"] = value;
            line["seed"] = seed;
            line["scheme"] = to_string(ao.scheme);
            rec.trace_json = line.dump();
            Rng cert_rng = Rng::stream(seed, 2 + static_cast<std::uint64_t>(si));
            out[static_cast<std::size_t>(task) * n_schemes + si] =
                certify_trial(rec, prob, tr.s_tx, tr.theta, spec.certify_draws, cert_rng);
        }
    };

    const int workers = std::min(spec.workers, n_tasks);
    if (workers <= 1) {
        for (int i = 0; i < n_tasks; ++i) run_task(i);
        return out;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n_tasks; i = next++) {
                try {
                    run_task(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
    return out;
}

std::string records_csv(const std::vector<TrialRecord>& recs) {
    std::string s = std::string(kRecordsHeader) + "\n";
    for (const auto& r : recs) {
        s += fmt_real(r.sweep) + "," + std::to_string(r.seed) + "," + to_string(r.scheme) + "," +
             (r.feasible ? "1" : "0") + "," + fmt_real(r.power_dbm) + "," + std::to_string(r.ao_iters) + "," +
             fmt_real(r.wall_ms) + "," + fmt_real(r.max_outage) + "," + fmt_real(r.max_crb_fail) + "\n";
    }
    return s;
}

std::vector<TrialRecord> parse_records_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kRecordsHeader) throw ConfigError("records CSV: unexpected header");
    std::vector<TrialRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_csv(line);
        if (c.size() != 9) throw ConfigError("records CSV: expected 9 columns in: " + line);
        TrialRecord r;
        try {
            r.sweep = parse_real(c[0]);
            r.seed = std::stoull(c[1]);
            r.scheme = scheme_from_string(c[2]);
            r.feasible = c[3] == "1";
            r.power_dbm = parse_real(c[4]);
            r.ao_iters = std::stoi(c[5]);
            r.wall_ms = parse_real(c[6]);
            r.max_outage = parse_real(c[7]);
            r.max_crb_fail = parse_real(c[8]);
        } catch (const std::logic_error& e) {
            throw ConfigError("records CSV: bad row: " + line);
        }
        out.push_back(r);
    }
    return out;
}

std::vector<AggRow> aggregate(const std::vector<TrialRecord>& recs) {
    std::map<std::pair<double, int>, std::vector<const TrialRecord*>> buckets;
    for (const auto& r : recs) buckets[{r.sweep, static_cast<int>(r.scheme)}].push_back(&r);
    std::vector<AggRow> rows;
    for (const auto& [key, list] : buckets) {
        AggRow a;
        a.sweep = key.first;
        a.scheme = static_cast<AoScheme>(key.second);
        a.trials = static_cast<int>(list.size());
        double sum = 0.0, sum2 = 0.0, iters = 0.0, wall = 0.0, outage = kNaN;
        for (const auto* r : list) {
            wall += r->wall_ms;
            if (!r->feasible) continue;
            ++a.feasible;
            sum += r->power_dbm;
            sum2 += r->power_dbm * r->power_dbm;
            iters += r->ao_iters;
            if (r->certified()) outage = std::isnan(outage) ? r->max_outage : std::max(outage, r->max_outage);
        }
        a.feas_rate = static_cast<double>(a.feasible) / a.trials;
        a.mean_wall_ms = wall / a.trials;
        a.max_outage = outage;
        if (a.feasible == 0) {
            a.mean_power_dbm = a.std_power_dbm = a.mean_iters = kNaN;
        } else {
            a.mean_power_dbm = sum / a.feasible;
            a.std_power_dbm = std::sqrt(std::max(0.0, sum2 / a.feasible - a.mean_power_dbm * a.mean_power_dbm));
            a.mean_iters = iters / a.feasible;
        }
        rows.push_back(a);
    }
    return rows;
}

std::string agg_csv(const std::vector<AggRow>& rows) {
    std::string s = "sweep,scheme,trials,feasible,feas_rate,mean_power_dbm,std_power_dbm,mean_iters,mean_wall_ms,max_outage\n";
    for (const auto& a : rows)
        s += fmt_real(a.sweep) + "," + to_string(a.scheme) + "," + std::to_string(a.trials) + "," +
             std::to_string(a.feasible) + "," + fmt_real(a.feas_rate) + "," + fmt_real(a.mean_power_dbm) + "," +
             fmt_real(a.std_power_dbm) + "," + fmt_real(a.mean_iters) + "," + fmt_real(a.mean_wall_ms) + "," +
             fmt_real(a.max_outage) + "\n";
    return s;
}

void emit_outputs(const std::vector<TrialRecord>& recs, const std::string& prefix, const std::string& sweep_name) {
    if (recs.empty()) throw std::runtime_error("no records to write for " + prefix);
    write_file(prefix + "_records.csv", records_csv(recs));
    write_file(prefix + "_agg.csv", agg_csv(aggregate(recs)));
    std::string traces;
    for (const auto& r : recs) traces += r.trace_json + "\n";
    write_file(prefix + "_traces.jsonl", traces);
    std::string script = kPlotScript;
    script.replace(script.find("@SWEEP@"), 7, sweep_name);
    write_file(prefix + "_plot.py", script);
}

}  // namespace risac
