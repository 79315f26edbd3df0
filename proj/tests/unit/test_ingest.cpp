#include <algorithm>
#include <sstream>

#include <doctest.h>

#include "../support/generators.hpp"
#include "cesnet/error.hpp"
#include "cesnet/ingest.hpp"
#include "cesnet/network.hpp"

using namespace cesnet;

namespace {

const std::string data_dir = CESNET_TEST_DATA;

ParseResult parse_text(const std::string& text, RowPolicy policy = RowPolicy::skip) {
    std::istringstream in(text);
    return parse_events(in, EventFormat::csv, gen::small_taxonomy(), policy);
}

}  // namespace

TEST_CASE("taxonomy: sample classes load with their members") {
    auto tax = load_taxonomy(data_dir + "/taxonomy_small.csv");
    auto ug = tax.members(NodeKind::feature, "urban greenspace");
    CHECK(ug == std::vector<std::string>{"park", "garden", "pool"});
    CHECK(tax.cardinality(NodeKind::feature).at("urban greenspace") == 3);
    CHECK(tax.cardinality(NodeKind::activity).at("self care") == 3);
    CHECK(tax.members(NodeKind::activity, "self care") ==
          std::vector<std::string>{"relaxing", "meditating", "thinking"});
    CHECK(tax.classes(NodeKind::activity).size() == 2);
    CHECK_NOTHROW(tax.check_cardinality(NodeKind::feature, 5, 2));
    CHECK_THROWS_AS(tax.check_cardinality(NodeKind::feature, 39, 11), InputError);
}

TEST_CASE("taxonomy: conflicting class names the term") {
    std::istringstream in("kind,term,class\nfeature,park,urban greenspace\nfeature,Park,forest\n");
    try {
        read_taxonomy(in);
        FAIL("expected an error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("park") != std::string::npos);
    }
    std::istringstream empty_class("kind,term,class\nfeature,park,\n");
    CHECK_THROWS_AS(read_taxonomy(empty_class), InputError);
    std::istringstream same("kind,term,class\nfeature,park,urban greenspace\nfeature,PARK,Urban Greenspace\n");
    CHECK(read_taxonomy(same).terms(NodeKind::feature).size() == 1);
}

TEST_CASE("parse: a plain row maps field by field with count 1") {
    auto r = parse_text("date,feature,activity,user\n2020-03-15,park,relaxing,u42\n");
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0] == EventRecord{Date(2020, 3, 15), "park", "relaxing", "u42", 1});
}

TEST_CASE("parse: unknown term is skipped with its line number, or aborts when strict") {
    auto r = parse_events(data_dir + "/events_bad.csv", gen::small_taxonomy());
    CHECK(r.records.size() == 2);
    REQUIRE(r.skipped.size() == 4);
    CHECK(r.skipped[0].line == 3);
    CHECK(r.skipped[0].message.find("stadium") != std::string::npos);
    CHECK(r.skipped[1].line == 4);
    CHECK(r.skipped[2].line == 5);
    CHECK(r.skipped[3].line == 6);
    // case folding
    CHECK(r.records[1].feature == "garden");
    CHECK(r.records[1].count == 3);
    try {
        parse_events(data_dir + "/events_bad.csv", gen::small_taxonomy(), RowPolicy::strict);
        FAIL("expected an error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("parse: duplicates are preserved") {
    auto r = parse_events(data_dir + "/events_duplicates.csv", gen::small_taxonomy());
    CHECK(r.records.size() == 3);
    CHECK(r.records[0] == r.records[1]);
}

TEST_CASE("parse: JSON lines") {
    auto path = data_dir + "/events_fixture.jsonl";
    CHECK(detect_format(path) == EventFormat::jsonl);
    auto r = parse_events(path, gen::small_taxonomy());
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[1].count == 4);
    REQUIRE(r.skipped.size() == 1);
    CHECK(r.skipped[0].line == 4);
}

TEST_CASE("parse: header is required and missing files are input errors") {
    CHECK_THROWS_AS(parse_text(""), InputError);
    CHECK_THROWS_AS(parse_text("2020-03-15,park,relaxing,u42\n"), InputError);
    CHECK_THROWS_AS(parse_events(data_dir + "/does_not_exist.csv", gen::small_taxonomy()), InputError);
}

TEST_CASE("aggregate: grouped cells sum their terms") {
    auto tax = gen::small_taxonomy();
    Date d(2020, 3, 15);
    std::vector<EventRecord> recs{{d, "park", "relaxing", "u1"}, {d, "park", "relaxing", "u2"}, {d, "park", "hiking", "u1"}};
    auto c = aggregate(recs, tax, Grouping::grouped, {d, d});
    auto ug = tax.class_index(NodeKind::feature, "urban greenspace");
    CHECK(c.at(ug, tax.class_index(NodeKind::activity, "self care"), 0) == 2);
    CHECK(c.at(ug, tax.class_index(NodeKind::activity, "outdoor recreation"), 0) == 1);
    CHECK(c.total() == aggregate(recs, tax, Grouping::full, {d, d}).total());
    CHECK_THROWS_AS(aggregate(recs, tax, Grouping::full, {d, d - 1}), InputError);
}

TEST_CASE("aggregate: silent middle day is an explicit zero slice") {
    auto tax = gen::small_taxonomy();
    auto r = parse_events(data_dir + "/events_fixture.csv", tax);
    REQUIRE(r.records.size() == 10);
    auto c = aggregate(r.records, tax, Grouping::full, DayRange::parse("2020-03-15:2020-03-17"));
    CHECK(c.n_days() == 3);
    auto totals = c.daily_totals();
    CHECK(totals == std::vector<std::int64_t>{6, 0, 5});
    CHECK(c.total() == 11);
}

TEST_CASE("property: mass conservation, pooling commutes with day sums, aggregation is additive") {
    auto tax = gen::small_taxonomy();
    DayRange window = DayRange::parse("2020-01-01:2020-01-20");
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        auto a = gen::records(rng, tax, window, 1 + cesnet::uniform_index(rng, 200));
        auto b = gen::records(rng, tax, window, cesnet::uniform_index(rng, 50));
        std::int64_t mass = 0;
        for (const auto& r : a) mass += r.count;

        auto full = aggregate(a, tax, Grouping::full, window);
        auto grouped = aggregate(a, tax, Grouping::grouped, window);
        CHECK(full.total() == mass);
        CHECK(grouped.total() == mass);

        // group after summing over days
        auto net_full = build_network(full, window);
        Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(2, 2);
        for (std::size_t f = 0; f < net_full.n_features(); ++f)
            for (std::size_t x = 0; x < net_full.n_activities(); ++x)
                pooled(static_cast<Eigen::Index>(
                           tax.class_index(NodeKind::feature, tax.class_of(NodeKind::feature, net_full.features()[f]))),
                       static_cast<Eigen::Index>(tax.class_index(
                           NodeKind::activity, tax.class_of(NodeKind::activity, net_full.activities()[x])))) +=
                    net_full.weight(f, x);
        CHECK(build_network(grouped, window).weights() == pooled);

        auto ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        auto sum = aggregate(a, tax, Grouping::full, window);
        sum += aggregate(b, tax, Grouping::full, window);
        CHECK(aggregate(ab, tax, Grouping::full, window) == sum);
    }
}

TEST_CASE("events csv writer round-trips through the parser") {
    auto tax = gen::small_taxonomy();
    Rng rng(3);
    auto recs = gen::records(rng, tax, DayRange::parse("2020-01-01:2020-01-05"), 40);
    std::stringstream ss;
    write_events_csv(ss, recs);
    auto back = parse_events(ss, EventFormat::csv, tax, RowPolicy::strict);
    CHECK(back.records == recs);
}
