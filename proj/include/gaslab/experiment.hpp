#ifndef GASLAB_EXPERIMENT_HPP
#define GASLAB_EXPERIMENT_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gaslab/config.hpp"
#include "gaslab/estimator.hpp"

namespace gaslab {

// Serialized result of one named check: pass/relaxed flags, the inequality
// rows it produced, and free-form detail lines for the summary.
struct CheckRecord {
    std::string name;
    bool pass = true;
    bool relaxed = false;
    std::vector<std::string> rows;   // InequalityReport::to_row() strings
    std::vector<std::string> lines;  // summary detail
};

// Per-chain bookkeeping flattened for chain_meta.tsv and the summary.
struct ChainMeta {
    std::string ensemble;
    int chain_id = 0;
    std::int64_t n_samples = 0;
    std::int64_t gauss_proposed = 0, gauss_accepted = 0;
    std::int64_t mim_proposed = 0, mim_accepted = 0;
    std::int64_t violations = 0;
    double max_drift = 0.0;
    double final_energy = 0.0, final_step_scale = 0.0;
    double energy_mean = 0.0, energy_var = 0.0, energy_se = 0.0;
    double split_half_delta = 0.0;  // equilibration diagnostic, reported not enforced
    bool error = false;
    std::string error_message;
};

struct ExperimentResult {
    ExperimentConfig cfg;
    std::vector<std::pair<Point, double>> frozen_atoms;  // exterior resolved for the main S
    std::vector<std::string> ensemble_order;             // "main", "beta2", "S=..."
    std::map<std::string, std::vector<ChainStats>> ensembles;  // by chain id
    std::map<std::string, ChainStats> merged;                  // fold ordered by chain id
    std::map<std::string, std::string> snapshots;              // "<ensemble>_chain<k>" -> text
    std::vector<ChainMeta> meta;
    std::vector<CheckRecord> checks;
    bool chains_ok = true;

    int exit_status() const;  // 0 iff chains ok and every non-relaxed check passes
};

// theorem hypotheses (T >= 100 S) cannot hold at desk scale; such checks are
// labeled relaxed and excluded from exit gating
bool check_relaxed(const ExperimentConfig& cfg, const CheckSpec& c);

// deterministic exterior draw: an equilibrated free-gas configuration;
// each ensemble keeps its restriction to the annulus between R and S
std::vector<std::pair<Point, double>> frozen_master(const ExperimentConfig& cfg);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_artifacts(const ExperimentResult& r);

std::string render_summary(const ExperimentConfig& cfg, const std::vector<ChainMeta>& meta,
                           const std::vector<CheckRecord>& checks, bool chains_ok);

// re-render the summary from the records stored in an output directory
std::string report_from_dir(const std::string& dir, int* exit_status);

}  // namespace gaslab

#endif
