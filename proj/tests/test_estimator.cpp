#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gaslab/estimator.hpp"

using namespace gaslab;

namespace {

// ChainStats as a real run would have produced them: per sample, each
// CountEquals stream records the indicator of its count
ChainStats synth_count_stats(const Region& region, int M, const std::vector<int>& counts) {
    ChainStats st;
    st.n_samples = static_cast<std::int64_t>(counts.size());
    st.batch_size = batch_size_for(st.n_samples);
    std::vector<Observer> obs = count_observers(region, M);
    for (const Observer& ob : obs) st.streams.emplace(ob.name(), StreamStats(st.batch_size));
    for (int c : counts)
        for (int n = 0; n <= M; ++n)
            st.streams.at(obs[static_cast<size_t>(n)].name()).add(c == n ? 1.0 : 0.0);
    return st;
}

NumberDistribution synth_dist(std::vector<double> probs, std::int64_t total) {
    NumberDistribution nd;
    nd.total_samples = total;
    nd.noise_floor = 3.0 / static_cast<double>(total);
    nd.prob = std::move(probs);
    nd.se.resize(nd.prob.size());
    for (size_t k = 0; k < nd.prob.size(); ++k) {
        double p = nd.prob[k];
        nd.se[k] = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(total));
    }
    return nd;
}

std::vector<BadTermEstimate> zero_bad(size_t size, std::int64_t total) {
    std::vector<BadTermEstimate> v(size);
    for (auto& b : v) {
        b.total_samples = total;
        b.se = 3.0 / static_cast<double>(total);
    }
    return v;
}

}  // namespace

TEST_CASE("number distribution point masses") {
    Region ball = Region::ball({0.0, 0.0, 0.0}, 2.0);
    // M = 0: the only count is 0
    ChainStats empty_gas = synth_count_stats(ball, 0, std::vector<int>(100, 0));
    NumberDistribution nd0 = number_distribution(empty_gas, ball, 0);
    CHECK(nd0.prob.size() == 1);
    CHECK(nd0.prob[0] == doctest::Approx(1.0));
    CHECK(nd0.support_width() == 1);

    // one particle, region = everything: point mass at 1
    ChainStats one = synth_count_stats(Region::all(), 1, std::vector<int>(100, 1));
    NumberDistribution nd1 = number_distribution(one, Region::all(), 1);
    CHECK(nd1.prob[0] == doctest::Approx(0.0));
    CHECK(nd1.prob[1] == doctest::Approx(1.0));
    CHECK(nd1.support_width() == 1);
}

TEST_CASE("number distribution normalization and noise floor") {
    Region ball = Region::ball({0.0, 0.0, 0.0}, 2.0);
    std::vector<int> counts;
    for (int k = 0; k < 3000; ++k) counts.push_back(k % 3 == 0 ? 2 : (k % 2 ? 1 : 3));
    ChainStats st = synth_count_stats(ball, 4, counts);
    NumberDistribution nd = number_distribution(st, ball, 4);
    double total = 0.0;
    for (double p : nd.prob) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(nd.noise_floor == doctest::Approx(3.0 / 3000.0));
    CHECK(nd.support_width() == 3);  // mass on 1, 2, 3
    CHECK(nd.entropy() > 0.0);
}

TEST_CASE("support width is the longest consecutive run above the floor") {
    NumberDistribution nd = synth_dist({0.0, 0.3, 0.3, 0.0, 0.2, 0.2, 0.0}, 10000);
    CHECK(nd.support_width() == 2);
    NumberDistribution wide = synth_dist({0.1, 0.2, 0.3, 0.2, 0.1, 0.1, 0.0}, 10000);
    CHECK(wide.support_width() == 6);
}

TEST_CASE("three-point constants on the uniform {4,5,6} distribution") {
    std::vector<double> probs(11, 0.0);
    probs[4] = probs[5] = probs[6] = 1.0 / 3.0;
    NumberDistribution nd = synth_dist(probs, 30000);
    InequalityReport rep = three_point_check(nd, zero_bad(11, 30000));
    // maximum implied constant is 1, attained where one neighbour carries
    // no mass: C_4 = C_6 = 1 while C_5 = (1/3)/(2/3) = 1/2
    CHECK(rep.per_n.at(4) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.per_n.at(5) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(rep.per_n.at(6) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.implied_c == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.pass);
    CHECK(!rep.hard_failure);
}

TEST_CASE("three-point hard failure on an isolated point mass") {
    std::vector<double> probs(11, 0.0);
    probs[5] = 1.0;
    NumberDistribution nd = synth_dist(probs, 30000);
    InequalityReport rep = three_point_check(nd, zero_bad(11, 30000));
    CHECK(rep.hard_failure);
    CHECK(!rep.pass);
}

TEST_CASE("three-point check rejects mismatched bad-term vectors") {
    NumberDistribution nd = synth_dist({0.5, 0.5}, 1000);
    CHECK_THROWS(three_point_check(nd, zero_bad(5, 1000)));
}

TEST_CASE("bad term of never-observed events carries the rule-of-three error") {
    ThreePointSpec s;
    s.T = 2.0;
    s.rho0 = 4.0;
    s.R = 2.0;
    const int M = 4, n = 2;
    std::vector<Observer> obs = bad_term_observers(s, n, M, 3);
    CHECK(obs.size() == 3);
    ChainStats st;
    st.n_samples = 5000;
    st.batch_size = batch_size_for(st.n_samples);
    for (const Observer& ob : obs) {
        StreamStats zero(st.batch_size);
        for (int k = 0; k < st.n_samples; ++k) zero.add(0.0);
        st.streams.emplace(ob.name(), zero);
    }
    BadTermEstimate bad = bad_term(st, s, n, M, 3);
    CHECK(bad.value == doctest::Approx(0.0));
    CHECK(bad.se == doctest::Approx(3.0 / 5000.0));
}

TEST_CASE("atypical-density events resolve real-valued thresholds to integer counts") {
    ThreePointSpec s;
    s.T = 2.0;
    s.rho0 = 3.0;
    s.R = 2.0;
    const int M = 30, d = 3;
    std::vector<Observer> obs = bad_term_observers(s, 2, M, d);

    auto place = [](int k_mid, int k_ann, int k_shell) {
        std::vector<Point> ps;
        double step = 1e-3;
        // B_{3T}\B_{T/2} occupants at radius 2.5 (also inside B_{2T}\B_T)
        for (int k = 0; k < k_mid; ++k) ps.push_back({2.5 + step * k, 0.0, 0.0});
        // B_{2T}\B_T only: radius 2.5 is the same shell, so use 3.5
        for (int k = 0; k < k_ann; ++k) ps.push_back({0.0, 3.5 + step * k, 0.0});
        // boundary shell B_R\B_{R-1} at radius 1.5 (also inside B_{3T}\B_{T/2})
        for (int k = 0; k < k_shell; ++k) ps.push_back({0.0, 0.0, 1.5 + step * k});
        return ps;
    };

    // bad_1: count in B_6\B_1 > rho0 T^d = 24, so >= 25
    CHECK(!event_holds(obs[0].events[0], place(24, 0, 0)));
    CHECK(event_holds(obs[0].events[0], place(25, 0, 0)));
    // bad_2: count in B_4\B_2 < T^d/rho0 = 8/3, so <= 2
    CHECK(event_holds(obs[1].events[0], place(1, 1, 0)));
    CHECK(!event_holds(obs[1].events[0], place(2, 1, 0)));
    // bad_3: count in B_2\B_1 >= (1 - 1/rho0) n = 4/3, so >= 2
    CHECK(!event_holds(obs[2].events[0], place(0, 0, 1)));
    CHECK(event_holds(obs[2].events[0], place(0, 0, 2)));
}

TEST_CASE("integer thresholds honour exact-integer boundaries") {
    ThreePointSpec s;
    s.T = 2.0;
    s.rho0 = 2.0;  // (1 - 1/2) * 4 = 2 exactly
    s.R = 2.0;
    std::vector<Observer> obs = bad_term_observers(s, 4, 30, 3);
    std::vector<Point> two = {{0.0, 0.0, 1.5}, {0.0, 1.5, 0.0}};
    std::vector<Point> one = {{0.0, 0.0, 1.5}};
    CHECK(event_holds(obs[2].events[0], two));  // count >= 2 holds at exactly 2
    CHECK(!event_holds(obs[2].events[0], one));
}

TEST_CASE("overcrowding curve endpoints: certain at rho = 0, impossible past pigeonhole") {
    OvercrowdSpec s;
    s.r = 1.0;
    s.U = Region::all();
    s.rho_grid = {0.0, 100.0};
    const int d = 3, M = 3;
    std::vector<Observer> obs = overcrowding_observers(s, d);
    CHECK(obs.size() == 3);  // conditioning indicator + one per rho
    // the rho = 0 observer coincides with the conditioning indicator, so
    // the deduplicated stream set has one entry fewer
    ChainStats st;
    st.n_samples = 400;
    st.batch_size = batch_size_for(st.n_samples);
    for (const Observer& ob : obs) st.streams.emplace(ob.name(), StreamStats(st.batch_size));
    CHECK(st.streams.size() == 2);
    std::vector<Point> ps = {{0.0, 0.0, 0.0}, {0.1, 0.0, 0.0}, {5.0, 0.0, 0.0}};
    Configuration c{ps};
    GasParams p = GasParams::make(d, M, 1.0);
    BallAverageOracle oracle = BallAverageOracle::closed_form(1.0);
    for (int k = 0; k < st.n_samples; ++k)
        for (auto& [name, stream] : st.streams) {
            const Observer& ob =
                obs[name == obs[0].name() ? 0 : (name == obs[1].name() ? 1 : 2)];
            stream.add(ob.eval(p, FrozenExterior::empty(), c, 0.0, oracle));
        }
    OvercrowdingCurve curve = overcrowding_curve(st, s, d);
    CHECK(curve.n_conditioned == 400);
    CHECK(curve.points[0].prob == doctest::Approx(1.0));
    CHECK(curve.points[1].prob == doctest::Approx(0.0));
    // degenerate endpoints leave nothing for the log-linear fit
    CHECK(!curve.reported);
}

TEST_CASE("overcrowding curve fits a negative slope on interior points") {
    OvercrowdSpec s;
    s.r = 1.0;
    s.U = Region::all();
    s.rho_grid = {1.5, 2.5};
    const int d = 3, M = 4;
    std::vector<Observer> obs = overcrowding_observers(s, d);
    ChainStats st;
    st.n_samples = 600;
    st.batch_size = batch_size_for(st.n_samples);
    for (const Observer& ob : obs) st.streams.emplace(ob.name(), StreamStats(st.batch_size));
    GasParams p = GasParams::make(d, M, 1.0);
    BallAverageOracle oracle = BallAverageOracle::closed_form(1.0);
    // cycle ball counts 1, 2, 3 around the tag: p(>=2) = 2/3, p(>=3) = 1/3
    std::vector<Configuration> cs = {
        Configuration({{0, 0, 0}, {5, 0, 0}, {6, 0, 0}, {7, 0, 0}}),
        Configuration({{0, 0, 0}, {0.1, 0, 0}, {6, 0, 0}, {7, 0, 0}}),
        Configuration({{0, 0, 0}, {0.1, 0, 0}, {0.2, 0, 0}, {7, 0, 0}}),
    };
    for (int k = 0; k < st.n_samples; ++k)
        for (const Observer& ob : obs)
            st.streams.at(ob.name()).add(
                ob.eval(p, FrozenExterior::empty(), cs[static_cast<size_t>(k % 3)], 0.0, oracle));
    OvercrowdingCurve curve = overcrowding_curve(st, s, d);
    CHECK(curve.reported);
    CHECK(curve.points[0].prob == doctest::Approx(2.0 / 3.0).epsilon(0.01));
    CHECK(curve.points[1].prob == doctest::Approx(1.0 / 3.0).epsilon(0.01));
    CHECK(curve.slope < 0.0);
}

TEST_CASE("overcrowding curve requires an observed conditioning event") {
    OvercrowdSpec s;
    s.r = 1.0;
    s.U = Region::ball({100.0, 100.0, 100.0}, 0.1);
    s.rho_grid = {1.0};
    std::vector<Observer> obs = overcrowding_observers(s, 3);
    ChainStats st;
    st.n_samples = 100;
    st.batch_size = batch_size_for(st.n_samples);
    for (const Observer& ob : obs) {
        StreamStats zero(st.batch_size);
        for (int k = 0; k < st.n_samples; ++k) zero.add(0.0);
        st.streams.emplace(ob.name(), zero);
    }
    CHECK_THROWS_AS(overcrowding_curve(st, s, 3), std::runtime_error);
}

TEST_CASE("kpoint preconditions: balls inside the core, pairwise disjoint") {
    ChainStats st;
    double R = 2.0;
    // touching the boundary of B_R is rejected (min edge distance 0)
    CHECK_THROWS_AS(
        kpoint_correlation_check(st, {Region::ball({0.0, 0.0, 0.0}, 2.0)}, R, 3),
        std::invalid_argument);
    CHECK_THROWS_AS(
        kpoint_correlation_check(st, {Region::ball({1.6, 0.0, 0.0}, 0.5)}, R, 3),
        std::invalid_argument);
    // overlapping pair rejected
    CHECK_THROWS_AS(
        kpoint_correlation_check(
            st, {Region::ball({0.5, 0.0, 0.0}, 0.6), Region::ball({-0.5, 0.0, 0.0}, 0.6)}, R,
            3),
        std::invalid_argument);
    // annuli are not admissible occupancy sets
    CHECK_THROWS_AS(
        kpoint_correlation_check(st, {Region::annulus({0.0, 0.0, 0.0}, 0.1, 0.2)}, R, 3),
        std::invalid_argument);
}

TEST_CASE("nonrigidity signature") {
    std::vector<std::pair<double, NumberDistribution>> rigid = {
        {4.0, synth_dist({0.0, 1.0, 0.0}, 10000)},
        {6.0, synth_dist({0.0, 1.0, 0.0}, 10000)},
    };
    NonrigidityReport r1 = nonrigidity_indicator(rigid);
    CHECK(!r1.nonrigid_signature);
    CHECK(r1.widths[0] == 1);

    std::vector<std::pair<double, NumberDistribution>> fluct = {
        {4.0, synth_dist({0.1, 0.5, 0.4}, 10000)},
        {6.0, synth_dist({0.0, 0.6, 0.4}, 10000)},
    };
    NonrigidityReport r2 = nonrigidity_indicator(fluct);
    CHECK(r2.nonrigid_signature);
    CHECK(r2.widths[0] == 3);
    CHECK(r2.widths[1] == 2);

    // mixed: width collapses at the larger S
    std::vector<std::pair<double, NumberDistribution>> collapse = {
        {4.0, synth_dist({0.1, 0.5, 0.4}, 10000)},
        {6.0, synth_dist({0.0, 1.0, 0.0}, 10000)},
    };
    CHECK(!nonrigidity_indicator(collapse).nonrigid_signature);
}

TEST_CASE("weighted line fit recovers exact coefficients") {
    std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
    std::vector<double> y = {2.0, 5.0, 8.0, 11.0};  // y = 2 + 3x
    std::vector<double> var(4, 0.01);
    LineFit f = fit_line(x, y, var);
    CHECK(f.intercept == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-9));

    // down-weighting an outlier must pull the fit toward the clean points
    std::vector<double> y2 = {2.0, 5.0, 8.0, 50.0};
    std::vector<double> var2 = {0.01, 0.01, 0.01, 1e6};
    LineFit f2 = fit_line(x, y2, var2);
    CHECK(f2.slope == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("inequality report rows are flat tab-separated tables") {
    InequalityReport rep;
    rep.name = "demo";
    rep.params["T"] = 5.0;
    rep.params["n"] = 1.0;
    rep.lhs = 0.25;
    rep.rhs = 0.5;
    rep.implied_c = 0.5;
    rep.pass = true;
    std::string header = InequalityReport::row_header();
    std::string row = rep.to_row();
    auto tabs = [](const std::string& s) {
        int t = 0;
        for (char ch : s)
            if (ch == '\t') t++;
        return t;
    };
    CHECK(tabs(header) == tabs(row));
    CHECK(row.find("demo") == 0);
    CHECK(row.find("T=5") != std::string::npos);
}

TEST_CASE("prefix and indexed event observers name the paper events") {
    Region ball = Region::ball({0.0, 0.0, 0.0}, 2.0);
    const int M = 4;
    Observer pre = prefix_event_observer(2, ball, M);
    std::vector<Point> good = {{0.5, 0, 0}, {0, 0.5, 0}, {3, 0, 0}, {0, 3, 0}};
    std::vector<Point> bad = {{0.5, 0, 0}, {3, 0, 0}, {0, 0.5, 0}, {0, 3, 0}};
    CHECK(event_holds(pre.events[0], good));
    CHECK(!event_holds(pre.events[0], bad));

    Observer idx = indexed_event_observer({1, 3}, ball, M);
    std::vector<Point> match = {{3, 0, 0}, {0.5, 0, 0}, {0, 3, 0}, {0, 0.5, 0}};
    CHECK(event_holds(idx.events[0], match));
    CHECK(!event_holds(idx.events[0], good));
}
