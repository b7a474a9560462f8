#include <doctest.h>

#include <set>

#include "qks/dataset.hpp"
#include "qks/io.hpp"
#include "support.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

qks::Schema toy_schema() {
    qks::Schema s;
    s.roles = {{"a", qks::ColumnRole::feature}, {"b", qks::ColumnRole::feature},
               {"label", qks::ColumnRole::label}};
    return s;
}

MatrixXd pairwise_sq(const MatrixXd &x) {
    MatrixXd d(x.rows(), x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.rows(); ++j) { d(i, j) = (x.row(i) - x.row(j)).squaredNorm(); }
    }
    return d;
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("load_csv reads a toy file") {
    const auto dir = qks_test::scratch_dir("csv_toy");
    qks::io::write_text(dir / "toy.csv", "a,b,label\n1,2,yes\n3,4,no\n5,6,yes\n");
    const auto d = qks::load_csv(dir / "toy.csv", toy_schema());
    CHECK(d.features == (MatrixXd(3, 2) << 1, 2, 3, 4, 5, 6).finished());
    CHECK(d.classes == std::vector<std::string>{"no", "yes"});
    CHECK(d.labels_encoded == (MatrixXd(3, 2) << 0, 1, 1, 0, 0, 1).finished());
    CHECK(d.labels_encoded.rowwise().sum() == VectorXd::Ones(3));
    CHECK(qks::decode_one_hot(d.labels_encoded, d.classes) == d.labels_raw);
    CHECK(d.dropped_rows == 0);
}

TEST_CASE("load_csv drops rows with missing cells") {
    const auto dir = qks_test::scratch_dir("csv_missing");
    qks::io::write_text(dir / "m.csv", "a,b,label,notes\n1,2,1,x\n3,?,0,\n5,6,0,\n");
    const auto d = qks::load_csv(dir / "m.csv", toy_schema());
    CHECK(d.rows() == 2);
    CHECK(d.dropped_rows == 1);
    CHECK(d.warnings.size() == 1);
}

TEST_CASE("load_csv reports row and column of bad cells") {
    const auto dir = qks_test::scratch_dir("csv_bad");
    qks::io::write_text(dir / "bad.csv", "a,b,label\n1,2,1\n3,abc,0\n");
    try {
        qks::load_csv(dir / "bad.csv", toy_schema());
        FAIL("expected an error");
    } catch (const qks::io::FormatError &e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 3") != std::string::npos);
        CHECK(msg.find("'b'") != std::string::npos);
    }
    qks::io::write_text(dir / "empty.csv", "a,b,label\n1,?,1\n");
    CHECK_THROWS_AS(qks::load_csv(dir / "empty.csv", toy_schema()), qks::io::FormatError);
    qks::io::write_text(dir / "nohdr.csv", "a,c,label\n1,2,1\n");
    CHECK_THROWS_AS(qks::load_csv(dir / "nohdr.csv", toy_schema()), qks::io::FormatError);
    CHECK_THROWS(qks::load_csv(dir / "absent.csv", toy_schema()));
}

TEST_CASE("numeric class labels sort numerically") {
    const auto dir = qks_test::scratch_dir("csv_numeric");
    qks::io::write_text(dir / "n.csv", "a,b,label\n1,2,10\n3,4,2\n5,6,1\n");
    CHECK(qks::load_csv(dir / "n.csv", toy_schema()).classes == std::vector<std::string>{"1", "2", "10"});
}

TEST_CASE("schema presets load") {
    for (const char *name : {"breast_cancer", "heart_failure", "bone_marrow"}) {
        const auto s = qks::Schema::preset(name);
        CHECK(s.name == name);
        int labels = 0;
        for (const auto &[col, role] : s.roles) { labels += role == qks::ColumnRole::label; }
        CHECK(labels == 1);
    }
    CHECK_THROWS_AS(qks::Schema::preset("iris"), std::invalid_argument);
}

TEST_CASE("preprocess standardizes components") {
    std::mt19937_64 rng(81);
    qks::Dataset d;
    d.features = qks_test::random_matrix(rng, 40, 6);
    d.features.col(1) *= 50.0;
    d.features.col(4).array() += 7.0;
    const auto p = qks::preprocess(d, 4);
    CHECK(p.features.cols() == 4);
    const MatrixXd centered = p.features.rowwise() - p.features.colwise().mean();
    for (Eigen::Index c = 0; c < 4; ++c) {
        CHECK(std::abs(p.features.col(c).mean()) <= 1e-10);
        CHECK(centered.col(c).squaredNorm() / 39.0 == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(p.feature_names.front() == "pc1");
}

TEST_CASE("preprocess of standardized 2-feature data keeps unit variances") {
    std::mt19937_64 rng(82);
    qks::Dataset d;
    MatrixXd x = qks_test::random_matrix(rng, 30, 2);
    x = x.rowwise() - x.colwise().mean();
    for (Eigen::Index c = 0; c < 2; ++c) { x.col(c) /= std::sqrt(x.col(c).squaredNorm() / 29.0); }
    d.features = x;
    const auto p = qks::preprocess(d, 2);
    const MatrixXd centered = p.features.rowwise() - p.features.colwise().mean();
    for (Eigen::Index c = 0; c < 2; ++c) {
        CHECK(centered.col(c).squaredNorm() / 29.0 == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("preprocess with k = D preserves distances up to per-axis scaling") {
    std::mt19937_64 rng(83);
    qks::Dataset d;
    d.features = qks_test::random_matrix(rng, 20, 3);
    const auto p = qks::preprocess(d, 3);
    // Undo the per-component rescaling with the PCA variances and compare to
    // distances in the standardized input space.
    MatrixXd z = d.features.rowwise() - d.features.colwise().mean();
    for (Eigen::Index c = 0; c < 3; ++c) { z.col(c) /= std::sqrt(z.col(c).squaredNorm() / 19.0); }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(z.transpose() * z / 19.0);
    const VectorXd sd = es.eigenvalues().reverse().cwiseSqrt();
    const MatrixXd restored = p.features * sd.asDiagonal();
    CHECK((pairwise_sq(restored) - pairwise_sq(z)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("preprocess drops zero-variance columns with a warning") {
    std::mt19937_64 rng(84);
    qks::Dataset d;
    d.features = qks_test::random_matrix(rng, 15, 4);
    d.features.col(2).setConstant(3.0);
    d.feature_names = {"a", "b", "const", "d"};
    const auto p = qks::preprocess(d, 3);
    CHECK(p.features.cols() == 3);
    REQUIRE(!p.warnings.empty());
    CHECK(p.warnings.front().find("const") != std::string::npos);
    CHECK_THROWS_AS(qks::preprocess(d, 4), std::invalid_argument);
}

TEST_CASE("preprocess is deterministic") {
    const auto d = qks::synthetic(50, 8, 3);
    CHECK(qks::preprocess(d, 8).features == qks::preprocess(d, 8).features);
}

TEST_CASE("synthetic examples") {
    const auto a = qks::synthetic(200, 8, 5);
    CHECK(a.features.rows() == 200);
    CHECK(a.features.cols() == 8);
    CHECK(a.features == qks::synthetic(200, 8, 5).features);
    CHECK(a.labels_raw == qks::synthetic(200, 8, 5).labels_raw);
    for (const auto &l : a.labels_raw) { CHECK((l == "0" || l == "1")); }
    CHECK_THROWS_AS(qks::synthetic(0, 8, 5), std::invalid_argument);
}

TEST_CASE("synthetic label balance") {
    int balanced = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto d = qks::synthetic(200, 8, seed);
        const double frac = d.labels_encoded.col(1).mean();
        balanced += frac >= 0.3 && frac <= 0.7;
    }
    CHECK(balanced >= 950);
}

TEST_CASE("subsample_indices examples") {
    const auto all = qks::subsample_indices(10, {10, 0, 1});
    CHECK(all == std::vector<Eigen::Index>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    CHECK(qks::subsample_indices(100, {20, 3, 9}) == qks::subsample_indices(100, {20, 3, 9}));
    CHECK(qks::subsample_indices(100, {20, 3, 9}) != qks::subsample_indices(100, {20, 4, 9}));
    CHECK_THROWS_AS(qks::subsample_indices(10, {11, 0, 0}), std::invalid_argument);
    for (int rep = 0; rep < 50; ++rep) {
        const auto idx = qks::subsample_indices(60, {25, rep, 2});
        CHECK(std::set<Eigen::Index>(idx.begin(), idx.end()).size() == 25);
        CHECK(std::is_sorted(idx.begin(), idx.end()));
    }
}

TEST_CASE("subsample_indices is uniform") {
    std::vector<int> counts(10, 0);
    const int draws = 10000;
    for (int rep = 0; rep < draws; ++rep) { ++counts[qks::subsample_indices(10, {1, rep, 7})[0]]; }
    for (int c : counts) { CHECK(std::abs(c / static_cast<double>(draws) - 0.1) <= 0.01); }
}

TEST_CASE("save_dataset writes features and labels") {
    const auto dir = qks_test::scratch_dir("save_dataset");
    const auto d = qks::synthetic(5, 2, 1);
    qks::save_dataset(dir / "d.csv", d);
    const auto grid = qks::io::read_grid(dir / "d.csv", true);
    CHECK(grid.header == std::vector<std::string>{"x1", "x2", "label"});
    CHECK(grid.values.leftCols(2) == d.features);
}

}
