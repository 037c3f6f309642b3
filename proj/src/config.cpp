#include "gaslab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gaslab {

std::string CheckSpec::kind_name(Kind k) {
    switch (k) {
        case Kind::Calibration: return "calibration";
        case Kind::Deindex: return "deindex";
        case Kind::ThreePoint: return "three_point";
        case Kind::Overcrowding: return "overcrowding";
        case Kind::Kpoint: return "kpoint";
        case Kind::Transport: return "transport";
        case Kind::Nonrigidity: return "nonrigidity";
    }
    return "";
}

CheckSpec::Kind CheckSpec::kind_from_name(const std::string& name) {
    for (Kind k : {Kind::Calibration, Kind::Deindex, Kind::ThreePoint, Kind::Overcrowding,
                   Kind::Kpoint, Kind::Transport, Kind::Nonrigidity})
        if (kind_name(k) == name) return k;
    throw ParseError("unknown check '" + name + "'");
}

namespace {

std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Cursor {
    int line = 0;
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("line " + std::to_string(line) + ": " + msg);
    }
    double num(const std::string& s) const {
        const std::string t = strip(s);
        char* end = nullptr;
        double v = std::strtod(t.c_str(), &end);
        if (t.empty() || end != t.c_str() + t.size()) fail("bad number '" + t + "'");
        return v;
    }
    std::int64_t integer(const std::string& s) const {
        double v = num(s);
        std::int64_t n = static_cast<std::int64_t>(v);
        if (v != static_cast<double>(n)) fail("expected integer, got '" + strip(s) + "'");
        return n;
    }
    std::uint64_t uinteger(const std::string& s) const {
        const std::string t = strip(s);
        char* end = nullptr;
        unsigned long long v = std::strtoull(t.c_str(), &end, 10);
        if (t.empty() || t[0] == '-' || end != t.c_str() + t.size())
            fail("bad unsigned integer '" + t + "'");
        return v;
    }
    std::vector<double> num_list(const std::string& s) const {
        std::vector<double> out;
        std::stringstream ss(s);
        std::string part;
        while (std::getline(ss, part, ',')) out.push_back(num(part));
        if (out.empty()) fail("empty list");
        return out;
    }
};

struct SectionState {
    bool gas_d = false, gas_m = false, gas_beta = false, chain_steps = false;
    bool target_R = false;
    std::set<std::string> seen;  // "<section>.<key>" for duplicate detection
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    cfg.gas.kernel = KernelSpec();  // resolved once d is known
    bool kernel_given = false, potential_given = false;
    std::string kernel_text = "coulomb";

    Cursor cur;
    SectionState st;
    std::string section;
    CheckSpec* check = nullptr;

    std::istringstream is(text);
    std::string raw;
    while (std::getline(is, raw)) {
        ++cur.line;
        std::string line = raw;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') cur.fail("unterminated section header");
            section = strip(line.substr(1, line.size() - 2));
            check = nullptr;
            if (section.rfind("check ", 0) == 0) {
                const std::string name = strip(section.substr(6));
                CheckSpec::Kind kind = CheckSpec::Kind::Calibration;
                try {
                    kind = CheckSpec::kind_from_name(name);
                } catch (const ParseError& e) {
                    cur.fail(e.what());
                }
                for (const CheckSpec& c : cfg.checks)
                    if (c.kind == kind) cur.fail("duplicate check '" + name + "'");
                cfg.checks.emplace_back();
                cfg.checks.back().kind = kind;
                check = &cfg.checks.back();
                section = "check";
            } else if (section != "gas" && section != "target" && section != "chain" &&
                       section != "output") {
                cur.fail("unknown section '" + section + "'");
            }
            continue;
        }

        size_t eq = line.find('=');
        if (eq == std::string::npos) cur.fail("expected 'key = value'");
        const std::string key = strip(line.substr(0, eq));
        const std::string val = strip(line.substr(eq + 1));
        if (key.empty() || val.empty()) cur.fail("expected 'key = value'");
        if (section.empty()) cur.fail("key outside any section");

        const bool repeatable = (section == "target" && key == "atom") ||
                                (section == "check" && key == "ball");
        const std::string dedup_key =
            section + (check ? "/" + CheckSpec::kind_name(check->kind) : "") + "." + key;
        if (!repeatable && !st.seen.insert(dedup_key).second) cur.fail("duplicate key '" + key + "'");

        try {
            if (section == "gas") {
                if (key == "d") { cfg.gas.d = static_cast<int>(cur.integer(val)); st.gas_d = true; }
                else if (key == "n_particles") { cfg.gas.n_particles = static_cast<int>(cur.integer(val)); st.gas_m = true; }
                else if (key == "beta") { cfg.gas.beta = cur.num(val); st.gas_beta = true; }
                else if (key == "kernel") { kernel_text = val; kernel_given = true; }
                else if (key == "potential") { cfg.gas.potential = PotentialSpec::parse(val); potential_given = true; }
                else if (key == "delta") cfg.gas.delta = cur.num(val);
                else cur.fail("[gas] unknown key '" + key + "'");
            } else if (section == "target") {
                if (key == "kind") {
                    if (val == "free") cfg.target_kind = ChainConfig::TargetKind::FreeGas;
                    else if (val == "conditional") cfg.target_kind = ChainConfig::TargetKind::ConditionalGas;
                    else cur.fail("target kind must be 'free' or 'conditional'");
                } else if (key == "R") { cfg.R = cur.num(val); st.target_R = true; }
                else if (key == "S") cfg.S = cur.num(val);
                else if (key == "frozen_seed") { cfg.frozen_seed = cur.uinteger(val); cfg.has_frozen_seed = true; }
                else if (key == "atom") {
                    size_t sc = val.find(';');
                    if (sc == std::string::npos) cur.fail("atom = x1,...,xd;weight expected");
                    Point p;
                    std::stringstream ss(val.substr(0, sc));
                    std::string part;
                    while (std::getline(ss, part, ',')) p.push_back(cur.num(part));
                    cfg.atoms.emplace_back(std::move(p), cur.num(val.substr(sc + 1)));
                } else cur.fail("[target] unknown key '" + key + "'");
            } else if (section == "chain") {
                if (key == "n_chains") cfg.n_chains = static_cast<int>(cur.integer(val));
                else if (key == "n_burnin") cfg.n_burnin = cur.integer(val);
                else if (key == "n_steps") { cfg.n_steps = cur.integer(val); st.chain_steps = true; }
                else if (key == "thinning") cfg.thinning = cur.integer(val);
                else if (key == "seed") cfg.seed = cur.uinteger(val);
                else if (key == "step_scale") cfg.step_scale = cur.num(val);
                else if (key == "mim_move_prob") cfg.mim_move_prob = cur.num(val);
                else cur.fail("[chain] unknown key '" + key + "'");
            } else if (section == "output") {
                if (key == "directory") cfg.out_dir = val;
                else if (key == "snapshot_every") cfg.snapshot_every = cur.integer(val);
                else cur.fail("[output] unknown key '" + key + "'");
            } else if (section == "check") {
                CheckSpec& c = *check;
                const std::string cname = CheckSpec::kind_name(c.kind);
                auto reject = [&] { cur.fail("[check " + cname + "] unknown key '" + key + "'"); };
                switch (c.kind) {
                    case CheckSpec::Kind::Calibration:
                        reject();
                        break;
                    case CheckSpec::Kind::Deindex:
                        if (key == "n") {
                            for (double v : cur.num_list(val)) {
                                if (v != static_cast<int>(v)) cur.fail("deindex n values must be integers");
                                c.n_values.push_back(static_cast<int>(v));
                            }
                        } else reject();
                        break;
                    case CheckSpec::Kind::ThreePoint:
                        if (key == "T") c.T = cur.num(val);
                        else if (key == "rho0") c.rho0 = cur.num(val);
                        else reject();
                        break;
                    case CheckSpec::Kind::Overcrowding:
                        if (key == "r") c.over.r = cur.num(val);
                        else if (key == "U") c.over.U = Region::parse(val);
                        else if (key == "rho") c.over.rho_grid = cur.num_list(val);
                        else if (key == "T") c.over.T = cur.num(val);
                        else if (key == "rho0") c.over.rho0 = cur.num(val);
                        else reject();
                        break;
                    case CheckSpec::Kind::Kpoint:
                        if (key == "ball") c.balls.push_back(Region::parse(val));
                        else reject();
                        break;
                    case CheckSpec::Kind::Transport:
                        if (key == "n") c.n = static_cast<int>(cur.integer(val));
                        else if (key == "T") {
                            auto ts = cur.num_list(val);
                            if (ts.size() > 2) cur.fail("transport T takes one or two values");
                            c.T = ts[0];
                            if (ts.size() == 2) c.T2 = ts[1];
                        } else if (key == "rho0") c.rho0 = cur.num(val);
                        else reject();
                        break;
                    case CheckSpec::Kind::Nonrigidity:
                        if (key == "S") c.S_values = cur.num_list(val);
                        else reject();
                        break;
                }
            }
        } catch (const ParseError& e) {
            const std::string msg = e.what();
            if (msg.rfind("line ", 0) == 0) throw;
            cur.fail(msg);
        }
    }

    if (!st.gas_d) throw ParseError("[gas] d is required");
    if (!st.gas_m) throw ParseError("[gas] n_particles is required");
    if (!st.gas_beta) throw ParseError("[gas] beta is required");
    if (!st.chain_steps) throw ParseError("[chain] n_steps is required");
    if (cfg.target_kind == ChainConfig::TargetKind::ConditionalGas && !st.target_R)
        throw ParseError("[target] conditional target requires R");

    cfg.gas.kernel = KernelSpec::parse(kernel_text, cfg.gas.d);
    (void)kernel_given;
    if (!potential_given) cfg.gas.potential = PotentialSpec::quadratic(1.0 / (2.0 * cfg.gas.d));
    if (cfg.n_burnin < 0) cfg.n_burnin = 100000LL * cfg.gas.n_particles;  // 1e5 sweeps
    if (cfg.thinning < 0) cfg.thinning = cfg.gas.n_particles;             // one sweep

    cfg.gas.validate();
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

ChainConfig ExperimentConfig::chain_config() const {
    ChainConfig cc;
    cc.target = target_kind;
    cc.params = gas;
    cc.R = target_kind == ChainConfig::TargetKind::ConditionalGas ? R : kInf;
    cc.S = target_kind == ChainConfig::TargetKind::ConditionalGas ? S : kInf;
    cc.step_scale = step_scale;
    cc.n_burnin = n_burnin;
    cc.n_steps = n_steps;
    cc.thinning = thinning;
    cc.seed = seed;
    cc.mim_move_prob = mim_move_prob;
    return cc;
}

void ExperimentConfig::validate() const {
    const bool conditional = target_kind == ChainConfig::TargetKind::ConditionalGas;
    const int M = gas.n_particles;
    if (n_chains < 1) throw ParseError("[chain] n_chains must be >= 1");
    if (n_steps < 1) throw ParseError("[chain] n_steps must be >= 1");
    if (snapshot_every < 0) throw ParseError("[output] snapshot_every must be >= 0");
    if (out_dir.empty()) throw ParseError("[output] directory must be nonempty");

    if (!conditional) {
        if (std::isfinite(R) || std::isfinite(S))
            throw ParseError("[target] R and S apply to conditional targets only");
        if (has_frozen_seed || !atoms.empty())
            throw ParseError("[target] frozen exterior applies to conditional targets only");
    } else {
        if (!(R > 0.0)) throw ParseError("[target] R must be positive");
        if (!(R < S)) throw ParseError("[target] conditional target needs R < S");
        if (has_frozen_seed && !atoms.empty())
            throw ParseError("[target] frozen_seed and explicit atoms are mutually exclusive");
        for (const auto& [x, w] : atoms) {
            if (static_cast<int>(x.size()) != gas.d)
                throw ParseError("[target] atom dimension disagrees with d");
            if (!(w >= 0.0)) throw ParseError("[target] atom weight must be >= 0");
            const double n2 = norm2(x);
            if (n2 < R * R || (std::isfinite(S) && n2 >= S * S))
                throw ParseError("[target] atom outside the annulus between R and S");
        }
    }

    chain_config().validate();

    for (const CheckSpec& c : checks) {
        const std::string where = "[check " + CheckSpec::kind_name(c.kind) + "] ";
        auto need_conditional = [&] {
            if (!conditional) throw ParseError(where + "requires a conditional target");
        };
        switch (c.kind) {
            case CheckSpec::Kind::Calibration:
                if (M != 1) throw ParseError(where + "needs a single-particle gas");
                if (conditional) {
                    if (std::isfinite(S)) throw ParseError(where + "conditional target must be a ball gas (S = inf)");
                    if (gas.potential.variant != PotentialSpec::Variant::Zero)
                        throw ParseError(where + "ball-gas oracle needs potential = zero");
                    if (has_frozen_seed || !atoms.empty())
                        throw ParseError(where + "ball-gas oracle needs an empty exterior");
                } else {
                    if (gas.potential.variant != PotentialSpec::Variant::Quadratic || !(gas.potential.a > 0.0))
                        throw ParseError(where + "free-gas oracle needs a confining quadratic potential");
                }
                break;
            case CheckSpec::Kind::Deindex:
                need_conditional();
                for (int n : c.n_values)
                    if (n < 0 || n > M) throw ParseError(where + "n out of range 0..M");
                break;
            case CheckSpec::Kind::ThreePoint:
                need_conditional();
                if (!(c.T > 0.0)) throw ParseError(where + "T must be positive");
                if (!(c.rho0 > 2.0)) throw ParseError(where + "rho0 must exceed 2");
                break;
            case CheckSpec::Kind::Overcrowding:
                if (!(c.over.r > 0.0)) throw ParseError(where + "r must be positive");
                if (c.over.rho_grid.empty()) throw ParseError(where + "rho grid must be nonempty");
                for (size_t k = 0; k < c.over.rho_grid.size(); ++k) {
                    if (c.over.rho_grid[k] < 0.0) throw ParseError(where + "rho values must be >= 0");
                    if (k > 0 && c.over.rho_grid[k] <= c.over.rho_grid[k - 1])
                        throw ParseError(where + "rho grid must be strictly increasing");
                }
                if (c.over.T > 0.0 && !(c.over.rho0 > 0.0))
                    throw ParseError(where + "density gate needs rho0 > 0");
                if (!(2.0 * gas.beta <= 1.0 / gas.delta))
                    throw ParseError(where + "paired run doubles beta past 1/delta; lower delta");
                break;
            case CheckSpec::Kind::Kpoint: {
                need_conditional();
                if (c.balls.empty()) throw ParseError(where + "needs at least one ball");
                if (static_cast<int>(c.balls.size()) != M)
                    throw ParseError(where + "needs n_particles == number of balls");
                for (size_t a = 0; a < c.balls.size(); ++a) {
                    const Region& A = c.balls[a];
                    if (A.kind() != Region::Kind::Ball) throw ParseError(where + "regions must be balls");
                    if (static_cast<int>(A.center().size()) != gas.d)
                        throw ParseError(where + "ball dimension disagrees with d");
                    if (!(R - std::sqrt(norm2(A.center())) - A.radius() > 0.0))
                        throw ParseError(where + "ball touches the domain boundary");
                    for (size_t b = a + 1; b < c.balls.size(); ++b)
                        if (!(std::sqrt(dist2(A.center(), c.balls[b].center())) - A.radius() -
                                  c.balls[b].radius() > 0.0))
                            throw ParseError(where + "balls overlap or touch");
                }
                break;
            }
            case CheckSpec::Kind::Transport:
                need_conditional();
                if (c.n < 1 || c.n + 1 > M) throw ParseError(where + "needs 1 <= n < n_particles");
                if (!(c.T > 0.0)) throw ParseError(where + "T must be positive");
                if (c.T2 != 0.0 && !(c.T2 > 0.0 && c.T2 != c.T))
                    throw ParseError(where + "second T must be positive and distinct");
                if (!(c.rho0 > 0.0)) throw ParseError(where + "rho0 must be positive");
                break;
            case CheckSpec::Kind::Nonrigidity:
                need_conditional();
                if (!has_frozen_seed && atoms.empty())
                    throw ParseError(where + "needs a frozen exterior (frozen_seed or atoms)");
                if (c.S_values.empty()) throw ParseError(where + "needs a list of S values");
                for (size_t k = 0; k < c.S_values.size(); ++k) {
                    if (!(c.S_values[k] > R)) throw ParseError(where + "every S must exceed R");
                    if (k > 0 && c.S_values[k] <= c.S_values[k - 1])
                        throw ParseError(where + "S values must increase");
                }
                break;
        }
    }
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream s;
    s << "[gas]\n";
    s << "d = " << gas.d << "\n";
    s << "n_particles = " << gas.n_particles << "\n";
    s << "beta = " << fmt17(gas.beta) << "\n";
    s << "kernel = " << gas.kernel.to_text() << "\n";
    s << "potential = " << gas.potential.to_text() << "\n";
    s << "delta = " << fmt17(gas.delta) << "\n";
    s << "\n[target]\n";
    const bool conditional = target_kind == ChainConfig::TargetKind::ConditionalGas;
    s << "kind = " << (conditional ? "conditional" : "free") << "\n";
    if (conditional) {
        s << "R = " << fmt17(R) << "\n";
        s << "S = " << fmt17(S) << "\n";
        if (has_frozen_seed) s << "frozen_seed = " << frozen_seed << "\n";
        for (const auto& [x, w] : atoms) {
            s << "atom = ";
            for (size_t k = 0; k < x.size(); ++k) s << (k ? "," : "") << fmt17(x[k]);
            s << ";" << fmt17(w) << "\n";
        }
    }
    s << "\n[chain]\n";
    s << "n_chains = " << n_chains << "\n";
    s << "n_burnin = " << n_burnin << "\n";
    s << "n_steps = " << n_steps << "\n";
    s << "thinning = " << thinning << "\n";
    s << "seed = " << seed << "\n";
    s << "step_scale = " << fmt17(step_scale) << "\n";
    s << "mim_move_prob = " << fmt17(mim_move_prob) << "\n";
    s << "\n[output]\n";
    s << "directory = " << out_dir << "\n";
    s << "snapshot_every = " << snapshot_every << "\n";
    for (const CheckSpec& c : checks) {
        s << "\n[check " << CheckSpec::kind_name(c.kind) << "]\n";
        auto list = [&](const std::vector<double>& v) {
            std::string out;
            for (size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + fmt17(v[k]);
            return out;
        };
        switch (c.kind) {
            case CheckSpec::Kind::Calibration:
                break;
            case CheckSpec::Kind::Deindex:
                if (!c.n_values.empty()) {
                    s << "n = ";
                    for (size_t k = 0; k < c.n_values.size(); ++k)
                        s << (k ? "," : "") << c.n_values[k];
                    s << "\n";
                }
                break;
            case CheckSpec::Kind::ThreePoint:
                s << "T = " << fmt17(c.T) << "\n";
                s << "rho0 = " << fmt17(c.rho0) << "\n";
                break;
            case CheckSpec::Kind::Overcrowding:
                s << "r = " << fmt17(c.over.r) << "\n";
                s << "U = " << c.over.U.to_text() << "\n";
                s << "rho = " << list(c.over.rho_grid) << "\n";
                if (c.over.T > 0.0) {
                    s << "T = " << fmt17(c.over.T) << "\n";
                    s << "rho0 = " << fmt17(c.over.rho0) << "\n";
                }
                break;
            case CheckSpec::Kind::Kpoint:
                for (const Region& b : c.balls) s << "ball = " << b.to_text() << "\n";
                break;
            case CheckSpec::Kind::Transport:
                s << "n = " << c.n << "\n";
                s << "T = " << fmt17(c.T);
                if (c.T2 > 0.0) s << "," << fmt17(c.T2);
                s << "\n";
                s << "rho0 = " << fmt17(c.rho0) << "\n";
                break;
            case CheckSpec::Kind::Nonrigidity:
                s << "S = " << list(c.S_values) << "\n";
                break;
        }
    }
    return s.str();
}

}  // namespace gaslab
