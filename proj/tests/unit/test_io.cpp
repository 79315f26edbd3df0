#include <sstream>

#include <doctest.h>

#include "cesnet/csv.hpp"
#include "cesnet/date.hpp"
#include "cesnet/error.hpp"
#include "cesnet/labeled_matrix.hpp"
#include "cesnet/series.hpp"

using namespace cesnet;

TEST_CASE("dates parse in both layouts and reject nonsense") {
    CHECK(Date::parse("2020-03-15") == Date(2020, 3, 15));
    CHECK(Date::parse("20200315", true) == Date(2020, 3, 15));
    CHECK_THROWS_AS(Date::parse("20200315"), InputError);
    CHECK_THROWS_AS(Date::parse("2020-02-30"), InputError);
    CHECK_THROWS_AS(Date::parse("2020-3-15"), InputError);
    CHECK(Date(2021, 1, 1) - Date(2020, 1, 1) == 366);
    CHECK(Date(2020, 12, 31).iso() == "2020-12-31");
    CHECK((Date(2020, 2, 28) + 1).iso() == "2020-02-29");
}

TEST_CASE("day ranges") {
    auto r = DayRange::parse("2020-01-30:2020-02-02");
    CHECK(r.size() == 4);
    CHECK(r.at(2) == Date(2020, 2, 1));
    CHECK(r.index(Date(2020, 2, 2)) == 3);
    CHECK(DayRange::year(2020).size() == 366);
    CHECK(r.intersect(DayRange::parse("2020-02-05:2020-02-09")).empty());
    CHECK_THROWS_AS(DayRange::parse("2020-01-01"), InputError);
}

TEST_CASE("csv split handles quotes and escapes round-trip") {
    auto f = csv::split(R"(a,"b,c","d ""q""",)");
    REQUIRE(f.size() == 4);
    CHECK(f[1] == "b,c");
    CHECK(f[2] == "d \"q\"");
    CHECK(f[3].empty());
    for (std::string s : {"plain", "with,comma", "with \"quote\"", ""}) CHECK(csv::split(csv::escape(s)).at(0) == s);
}

TEST_CASE("labeled matrix csv round-trip keeps every bit") {
    LabeledMatrix m{"feature", {"park", "forest"}, {"relaxing", "self care"}, Eigen::MatrixXd(2, 2)};
    m.values << 0.1, 1.0 / 3.0, -2.5e-300, 12345678901234.0;
    std::stringstream ss;
    write_matrix_csv(ss, m);
    auto back = read_matrix_csv(ss);
    CHECK(back.corner == "feature");
    CHECK(back.row_labels == m.row_labels);
    CHECK(back.col_labels == m.col_labels);
    CHECK(back.values == m.values);
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(0.5) == "0.5");
}

TEST_CASE("series csv requires consecutive days") {
    std::istringstream ok("date,value\n20200101,1\n2020-01-02,2.5\n");
    auto s = read_series_csv(ok);
    CHECK(s.size() == 2);
    CHECK(s.values[1] == 2.5);
    std::istringstream gap("date,value\n2020-01-01,1\n2020-01-03,2\n");
    CHECK_THROWS_AS(read_series_csv(gap), InputError);
    CHECK(s.slice({Date(2020, 1, 2), Date(2020, 1, 2)}).values.at(0) == 2.5);
}
