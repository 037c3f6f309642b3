#ifndef GASLAB_CONFIG_HPP
#define GASLAB_CONFIG_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gaslab/estimator.hpp"
#include "gaslab/sampler.hpp"

namespace gaslab {

// One named estimator check requested by a config file.
struct CheckSpec {
    enum class Kind { Calibration, Deindex, ThreePoint, Overcrowding, Kpoint, Transport, Nonrigidity };
    Kind kind = Kind::Calibration;

    std::vector<int> n_values;     // deindex: count values (empty = all 0..M)
    int n = 1;                     // transport: prefix length
    double T = 0.0, T2 = 0.0;      // three_point / transport scales (T2 = 0: no scaling pair)
    double rho0 = 0.0;
    OvercrowdSpec over;            // overcrowding
    std::vector<Region> balls;     // kpoint
    std::vector<double> S_values;  // nonrigidity: growing outer radii

    static std::string kind_name(Kind k);
    static Kind kind_from_name(const std::string& name);
};

// A full experiment: gas + target + chain ensemble + requested checks.
// Defaults are resolved at parse time so the canonical echo is explicit.
struct ExperimentConfig {
    GasParams gas;

    ChainConfig::TargetKind target_kind = ChainConfig::TargetKind::FreeGas;
    double R = kInf;
    double S = kInf;
    bool has_frozen_seed = false;
    std::uint64_t frozen_seed = 0;
    std::vector<std::pair<Point, double>> atoms;  // explicit exterior atoms (position, weight)

    int n_chains = 4;
    std::int64_t n_burnin = -1;  // proposals; parse default: 1e5 sweeps = 100000 * M
    std::int64_t n_steps = 0;
    std::int64_t thinning = -1;  // parse default: one sweep = M proposals
    std::uint64_t seed = 1;
    double step_scale = 0.0;  // 0 = auto
    double mim_move_prob = 0.1;

    std::string out_dir = "out";
    std::int64_t snapshot_every = 0;

    std::vector<CheckSpec> checks;

    // chain template without the frozen exterior (the runner resolves mu)
    ChainConfig chain_config() const;
    void validate() const;  // cross-field constraints, names the violated rule
    std::string to_text() const;  // canonical echo; reparses to an equal config
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace gaslab

#endif
