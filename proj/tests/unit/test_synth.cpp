#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <doctest.h>

#include "../support/generators.hpp"
#include "cesnet/error.hpp"
#include "cesnet/synth.hpp"

using namespace cesnet;

namespace {

SynthConfig base(const char* window = "2020-01-01:2021-05-14") {
    SynthConfig c;
    c.window = DayRange::parse(window);
    c.seed = 17;
    return c;
}

std::vector<double> cell_counts(const DailyCounts& counts, std::size_t f, std::size_t a) {
    std::vector<double> out;
    for (auto v : counts.cell_series(f, a)) out.push_back(static_cast<double>(v));
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("daily counts are Poisson at the baseline rate") {
    auto tax = gen::small_taxonomy();
    auto cfg = base();
    auto recs = generate(cfg, tax);
    auto counts = aggregate(recs, tax, Grouping::grouped, cfg.window);
    const double n = static_cast<double>(cfg.window.size());
    for (std::size_t f = 0; f < 2; ++f)
        for (std::size_t a = 0; a < 2; ++a) {
            auto x = cell_counts(counts, f, a);
            double m = mean_of(x);
            CHECK(std::abs(m - 4.0) <= 3.0 * std::sqrt(4.0 / n));
            // dispersion index: sum (x - m)^2 / m is chi-square with n - 1 dof
            double d = 0;
            for (double v : x) d += (v - m) * (v - m) / m;
            CHECK(std::abs(d - (n - 1)) <= 4.0 * std::sqrt(2.0 * (n - 1)));
        }
    for (const auto& r : recs) CHECK(r.count == 1);
    CHECK(std::is_sorted(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.date < b.date; }));
}

TEST_CASE("generation is deterministic in the seed") {
    auto tax = gen::small_taxonomy();
    auto cfg = base("2020-01-01:2020-03-31");
    auto a = generate(cfg, tax), b = generate(cfg, tax);
    CHECK(a == b);
    cfg.seed = 18;
    CHECK_FALSE(generate(cfg, tax) == a);
}

TEST_CASE("impulses scale one cell") {
    auto tax = gen::small_taxonomy();
    auto cfg = base("2020-01-01:2020-12-31");
    cfg.baseline_rate = 10;
    cfg.impulses.push_back({"urban greenspace", "self care", DayRange::parse("2020-04-01:2020-06-30"), 3.0, 0.9});
    auto recs = generate(cfg, tax);
    auto counts = aggregate(recs, tax, Grouping::grouped, cfg.window);
    auto x = cell_counts(counts, 0, 0);
    auto other = cell_counts(counts, 1, 1);
    auto in = cfg.impulses[0].range;
    double inside = 0, outside = 0, n_in = 0, n_out = 0, other_in = 0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (in.contains(cfg.window.at(d))) {
            inside += x[d];
            other_in += other[d];
            ++n_in;
        } else {
            outside += x[d];
            ++n_out;
        }
    }
    CHECK(inside / n_in / (outside / n_out) == doctest::Approx(3.0).epsilon(0.1));
    CHECK(other_in / n_in == doctest::Approx(10.0).epsilon(0.1));

    // most impulse events come from first-time users
    std::set<std::string> seen;
    std::size_t fresh = 0, total = 0;
    for (const auto& r : recs) {
        bool is_new = seen.insert(r.user).second;
        if (in.contains(r.date) && tax.class_of(NodeKind::feature, r.feature) == "urban greenspace" &&
            tax.class_of(NodeKind::activity, r.activity) == "self care") {
            ++total;
            fresh += is_new;
        }
    }
    CHECK(static_cast<double>(fresh) / static_cast<double>(total) > 0.8);
}

TEST_CASE("seasonality modulates the rate") {
    auto tax = gen::small_taxonomy();
    auto cfg = base("2020-01-01:2021-12-31");
    cfg.amplitude = 0.8;
    cfg.period = 100;
    auto counts = aggregate(generate(cfg, tax), tax, Grouping::grouped, cfg.window);
    auto x = cell_counts(counts, 0, 1);
    double hi = 0, lo = 0, nh = 0, nl = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        double s = std::sin(2 * std::numbers::pi * static_cast<double>(t) / 100);
        if (s > 0.5) hi += x[t], ++nh;
        if (s < -0.5) lo += x[t], ++nl;
    }
    CHECK(hi / nh > 2.0 * lo / nl);
}

TEST_CASE("config parsing and validation") {
    auto tax = gen::small_taxonomy();
    auto cfg = parse_synth_config(R"({"window": "2020-01-01:2020-01-31", "seed": 3, "baseline_rate": 2,
        "cells": [{"feature_class": "forest", "activity_class": "self care", "rate": 0.5}],
        "impulses": [{"feature_class": "forest", "activity_class": "self care", "window": "2020-01-05:2020-01-06",
                      "factor": 2}],
        "users": {"initial_pool": 10, "daily_activity": 0.5, "newcomer_fraction": 0.1}})");
    CHECK(cfg.seed == 3);
    CHECK(cfg.cells.size() == 1);
    CHECK(cfg.impulses[0].range.size() == 2);
    CHECK(cfg.users.initial_pool == 10);
    CHECK_NOTHROW(cfg.validate(tax));

    CHECK_THROWS_AS(parse_synth_config(R"({"window": "2020-01-01:2020-01-31", "bogus": 1})"), InputError);
    CHECK_THROWS_AS(parse_synth_config(R"({"window": "2020-01-01:2020-01-31", "seed": "x"})"), InputError);
    CHECK_THROWS_AS(parse_synth_config("{not json"), InputError);
    CHECK_THROWS_AS(parse_synth_config(R"({"window": "2020-01-31:2020-01-01"})"), InputError);

    auto bad = cfg;
    bad.baseline_rate = -1;
    CHECK_THROWS_AS(bad.validate(tax), InputError);
    bad = cfg;
    bad.cells[0].feature_class = "desert";
    CHECK_THROWS_AS(bad.validate(tax), InputError);
    bad = cfg;
    bad.impulses[0].range = DayRange::parse("2020-01-30:2020-02-02");
    CHECK_THROWS_AS(bad.validate(tax), InputError);
    bad = cfg;
    bad.users.daily_activity = 1.5;
    CHECK_THROWS_AS(bad.validate(tax), InputError);
}
