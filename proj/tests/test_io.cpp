#include <doctest.h>

#include <limits>

#include "qks/io.hpp"
#include "qks/random.hpp"
#include "support.hpp"

TEST_SUITE("io") {

TEST_CASE("format_double round-trips exactly") {
    std::mt19937_64 rng(91);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, (i % 40) - 20);
        CHECK(*qks::io::parse_double(qks::io::format_double(v)) == v);
    }
    CHECK(*qks::io::parse_double(qks::io::format_double(std::numeric_limits<double>::denorm_min())) ==
          std::numeric_limits<double>::denorm_min());
}

TEST_CASE("parse_double accepts and rejects") {
    CHECK(*qks::io::parse_double(" +1.5e3 ") == 1500.0);
    CHECK(*qks::io::parse_double("-2") == -2.0);
    CHECK_FALSE(qks::io::parse_double("1.5x"));
    CHECK_FALSE(qks::io::parse_double(""));
    CHECK_FALSE(qks::io::parse_double("abc"));
}

TEST_CASE("split_csv_line handles quotes") {
    CHECK(qks::io::split_csv_line("a,\"b,c\",d") == std::vector<std::string>{"a", "b,c", "d"});
    CHECK(qks::io::split_csv_line("\"x\"\"y\",") == std::vector<std::string>{"x\"y", ""});
}

TEST_CASE("grid round-trip") {
    const auto dir = qks_test::scratch_dir("grid");
    std::mt19937_64 rng(92);
    const Eigen::MatrixXd m = qks_test::random_matrix(rng, 4, 3);
    qks::io::write_grid(dir / "sub" / "g.csv", m, {"a", "b", "c"});
    const auto g = qks::io::read_grid(dir / "sub" / "g.csv", true);
    CHECK(g.values == m);
    CHECK(g.header == std::vector<std::string>{"a", "b", "c"});
    qks::io::write_text(dir / "ragged.csv", "1,2\n3\n");
    CHECK_THROWS_AS(qks::io::read_grid(dir / "ragged.csv", false), qks::io::FormatError);
}

TEST_CASE("rng is seed-deterministic and derive_seed separates streams") {
    qks::Rng a(5), b(5);
    for (int i = 0; i < 10; ++i) { CHECK(a.next() == b.next()); }
    CHECK(qks::derive_seed({1, 2}) != qks::derive_seed({2, 1}));
    CHECK(qks::derive_seed({1, 2}) == qks::derive_seed({1, 2}));
    qks::Rng c(9);
    for (int i = 0; i < 1000; ++i) {
        const auto v = c.below(7);
        CHECK(v < 7);
        const double u = c.uniform();
        CHECK((u >= 0.0 && u < 1.0));
    }
}

TEST_CASE("rng normal moments") {
    qks::Rng r(11);
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double v = r.normal();
        s += v;
        s2 += v * v;
    }
    CHECK(std::abs(s / n) <= 0.01);
    CHECK(std::abs(s2 / n - 1.0) <= 0.01);
}

}
