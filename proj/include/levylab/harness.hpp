#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "levylab/criteria.hpp"
#include "levylab/measure.hpp"
#include "levylab/norms.hpp"
#include "levylab/toml.hpp"

namespace levylab {

struct ExperimentConfig {
    std::string experiment;
    std::string measure_path; // file with a measure JSON document
    std::string measure_json; // inline alternative
    std::string family;       // "radial" (default) or "series" for converge
    double p = 2.0;
    double horizon = 1.0;
    std::vector<double> schedule; // strictly decreasing when present
    std::vector<std::int64_t> series_dims;
    std::size_t reps = 1000;
    std::size_t n_gauss = 200;
    std::size_t instances = 20;
    std::size_t radial_cells = 24;
    std::size_t n_duals = 5;
    std::uint64_t seed = 0;
    bool use_sup = false;
    SolverConfig solver;
    std::string out_dir = ".";
    std::string config_hash;

    static ExperimentConfig load(const std::string& path,
                                 std::optional<std::uint64_t> seed_override,
                                 const std::string& out_override);

    AnyMeasure load_measure() const;

    // the measure as a finite DiscreteMeasure: radial families are
    // materialised at the finest schedule level
    DiscreteMeasure finite_measure() const;

    CriteriaConfig criteria() const;
};

struct MetricRow {
    std::string metric;
    double level = 0.0; // truncation level, instance index, or 0
    double estimate = 0.0;
    double stderror = 0.0;
};

struct ResultRecord {
    std::string experiment;
    std::string config_hash;
    std::vector<MetricRow> metrics;
    std::map<std::string, std::string> verdicts;
    std::vector<std::string> notes;
    double wall_ms = 0.0; // excluded from persisted CSV

    bool inconclusive() const;
};

// long format: experiment,config_hash,metric,level,estimate,stderr
void write_csv(const std::string& path, const ResultRecord& record);
void write_json_summary(const std::string& path, const ResultRecord& record);

ResultRecord run_check(const ExperimentConfig& cfg);
ResultRecord run_simulate(const ExperimentConfig& cfg);
ResultRecord run_novikov(const ExperimentConfig& cfg);
ResultRecord run_umd(const ExperimentConfig& cfg);
ResultRecord run_gamma_norm(const ExperimentConfig& cfg);
ResultRecord run_converge(const ExperimentConfig& cfg);
ResultRecord run_criteria_matrix(const ExperimentConfig& cfg);

// dispatch + output writing; returns the process exit code
// (0 completed, 2 completed with inconclusive verdicts)
int run_command(const std::string& command, const ExperimentConfig& cfg);

} // namespace levylab
