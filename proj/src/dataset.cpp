#include "qks/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "qks/io.hpp"
#include "qks/numerics.hpp"
#include "qks/random.hpp"

#ifndef QKS_PRESET_DIR
#define QKS_PRESET_DIR "presets"
#endif

namespace qks {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) { s.remove_prefix(1); }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return std::string(s);
}

ColumnRole role_from_string(const std::string &name) {
    if (name == "feature") { return ColumnRole::feature; }
    if (name == "label") { return ColumnRole::label; }
    if (name == "ignore") { return ColumnRole::ignore; }
    throw std::invalid_argument("schema: unknown column role '" + name +
                                "' (expected feature, label or ignore)");
}

/// Numeric order when every class parses as a number, lexicographic otherwise.
std::vector<std::string> sorted_classes(const std::vector<std::string> &labels) {
    const std::set<std::string> unique(labels.begin(), labels.end());
    std::vector<std::string> classes(unique.begin(), unique.end());
    const bool numeric = std::all_of(classes.begin(), classes.end(), [](const std::string &c) {
        return io::parse_double(c).has_value();
    });
    if (numeric) {
        std::stable_sort(classes.begin(), classes.end(), [](const auto &l, const auto &r) {
            return *io::parse_double(l) < *io::parse_double(r);
        });
    }
    return classes;
}

MatrixXd one_hot(const std::vector<std::string> &labels, const std::vector<std::string> &classes) {
    MatrixXd encoded = MatrixXd::Zero(static_cast<Index>(labels.size()),
                                      static_cast<Index>(classes.size()));
    for (std::size_t r = 0; r < labels.size(); ++r) {
        const auto it = std::find(classes.begin(), classes.end(), labels[r]);
        encoded(static_cast<Index>(r), it - classes.begin()) = 1.0;
    }
    return encoded;
}

VectorXd column_std(const MatrixXd &x) {
    const MatrixXd centered = x.rowwise() - x.colwise().mean();
    return (centered.colwise().squaredNorm() / static_cast<double>(x.rows() - 1))
        .cwiseSqrt()
        .transpose();
}

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) { return s; }
    std::string quoted = "\"";
    for (char ch : s) {
        if (ch == '"') { quoted += '"'; }
        quoted += ch;
    }
    return quoted + "\"";
}

} // namespace

Schema Schema::from_json(const nlohmann::json &j) {
    Schema schema;
    try {
        schema.name = j.value("name", std::string{});
        schema.default_role = role_from_string(j.value("default_role", std::string{"ignore"}));
        const auto kind = j.value("label_kind", std::string{"categorical"});
        if (kind == "categorical") {
            schema.label_kind = LabelKind::categorical;
        } else if (kind == "real") {
            schema.label_kind = LabelKind::real;
        } else {
            throw std::invalid_argument("schema: label_kind must be categorical or real");
        }
        if (j.contains("missing")) {
            schema.missing_tokens = j.at("missing").get<std::vector<std::string>>();
        }
        for (const auto &[column, role] : j.at("columns").items()) {
            schema.roles[column] = role_from_string(role.get<std::string>());
        }
    } catch (const nlohmann::json::exception &e) {
        throw std::invalid_argument(std::string("schema: ") + e.what());
    }
    return schema;
}

Schema Schema::load(const std::filesystem::path &path) {
    try {
        return from_json(nlohmann::json::parse(io::read_text(path)));
    } catch (const nlohmann::json::exception &e) {
        throw io::FormatError(path.string() + ": " + e.what());
    }
}

Schema Schema::preset(const std::string &name) {
    const auto path = std::filesystem::path(QKS_PRESET_DIR) / (name + ".json");
    if (!std::filesystem::exists(path)) {
        throw std::invalid_argument("unknown schema preset '" + name + "' (looked for " +
                                    path.string() + ")");
    }
    return load(path);
}

Dataset load_csv(const std::filesystem::path &path, const Schema &schema) {
    std::istringstream in(io::read_text(path));
    std::string line;
    std::vector<std::string> header;
    std::size_t line_no = 0;
    while (header.empty() && std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            for (auto &h : io::split_csv_line(line)) { header.push_back(trim(h)); }
        }
    }
    if (header.empty()) { throw io::FormatError(path.string() + ": missing header row"); }

    for (const auto &[column, role] : schema.roles) {
        if (std::find(header.begin(), header.end(), column) == header.end()) {
            throw io::FormatError(fmt::format("{}: schema column '{}' is not in the header",
                                              path.string(), column));
        }
    }
    std::vector<ColumnRole> roles;
    Dataset d;
    std::size_t label_col = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto it = schema.roles.find(header[c]);
        roles.push_back(it == schema.roles.end() ? schema.default_role : it->second);
        if (roles.back() == ColumnRole::feature) { d.feature_names.push_back(header[c]); }
        if (roles.back() == ColumnRole::label) {
            if (label_col != header.size()) {
                throw io::FormatError(path.string() + ": schema assigns more than one label column");
            }
            label_col = c;
        }
    }
    if (label_col == header.size()) {
        throw io::FormatError(path.string() + ": schema assigns no label column");
    }
    if (d.feature_names.empty()) { throw io::FormatError(path.string() + ": no feature columns"); }

    auto is_missing = [&](const std::string &cell) {
        return std::find(schema.missing_tokens.begin(), schema.missing_tokens.end(), cell) !=
               schema.missing_tokens.end();
    };

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) { continue; }
        const auto fields = io::split_csv_line(line);
        if (fields.size() != header.size()) {
            throw io::FormatError(fmt::format("{}: row {}: expected {} fields, found {}",
                                              path.string(), line_no, header.size(),
                                              fields.size()));
        }
        std::vector<double> values;
        bool missing = false;
        std::string label;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (roles[c] == ColumnRole::ignore) { continue; }
            const auto cell = trim(fields[c]);
            if (is_missing(cell)) {
                missing = true;
                break;
            }
            if (roles[c] == ColumnRole::label) {
                if (schema.label_kind == LabelKind::real && !io::parse_double(cell)) {
                    throw io::FormatError(fmt::format("{}: row {}, column '{}': cannot parse '{}'",
                                                      path.string(), line_no, header[c], cell));
                }
                label = cell;
                continue;
            }
            const auto value = io::parse_double(cell);
            if (!value) {
                throw io::FormatError(fmt::format("{}: row {}, column '{}': cannot parse '{}'",
                                                  path.string(), line_no, header[c], cell));
            }
            values.push_back(*value);
        }
        if (missing) {
            ++d.dropped_rows;
            continue;
        }
        rows.push_back(std::move(values));
        d.labels_raw.push_back(std::move(label));
    }
    if (rows.empty()) {
        throw io::FormatError(path.string() + ": no complete rows after dropping missing values");
    }

    d.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(d.feature_names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            d.features(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
        }
    }
    if (!d.features.allFinite()) { throw io::FormatError(path.string() + ": non-finite feature"); }

    if (schema.label_kind == LabelKind::categorical) {
        d.classes = sorted_classes(d.labels_raw);
        d.labels_encoded = one_hot(d.labels_raw, d.classes);
    } else {
        d.labels_encoded.resize(static_cast<Index>(d.labels_raw.size()), 1);
        for (std::size_t r = 0; r < d.labels_raw.size(); ++r) {
            d.labels_encoded(static_cast<Index>(r), 0) = *io::parse_double(d.labels_raw[r]);
        }
    }
    d.name = schema.name.empty() ? path.stem().string() : schema.name;
    d.provenance = path.string();
    if (d.dropped_rows > 0) {
        d.warnings.push_back(
            fmt::format("dropped {} row(s) with missing values from {}", d.dropped_rows, path.string()));
    }
    return d;
}

std::vector<std::string> decode_one_hot(const MatrixXd &encoded,
                                        const std::vector<std::string> &classes) {
    if (encoded.cols() != static_cast<Index>(classes.size())) {
        throw std::invalid_argument("decode_one_hot: class count does not match encoding width");
    }
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(encoded.rows()));
    for (Index r = 0; r < encoded.rows(); ++r) {
        Index hot = 0;
        encoded.row(r).maxCoeff(&hot);
        labels.push_back(classes[static_cast<std::size_t>(hot)]);
    }
    return labels;
}

Dataset preprocess(const Dataset &dataset, Index k) {
    if (dataset.rows() < 2) { throw std::invalid_argument("preprocess: need at least 2 rows"); }
    Dataset out = dataset;
    out.warnings.clear();

    const VectorXd sd = column_std(dataset.features);
    std::vector<Index> keep;
    for (Index c = 0; c < sd.size(); ++c) {
        const double scale = std::max(1.0, dataset.features.col(c).cwiseAbs().maxCoeff());
        if (sd(c) > 1e-12 * scale) {
            keep.push_back(c);
        } else {
            out.warnings.push_back(fmt::format(
                "excluding zero-variance column '{}'",
                c < static_cast<Index>(dataset.feature_names.size())
                    ? dataset.feature_names[static_cast<std::size_t>(c)]
                    : std::to_string(c)));
        }
    }
    if (k < 1 || k > static_cast<Index>(keep.size())) {
        throw std::invalid_argument(fmt::format(
            "preprocess: k = {} but only {} usable feature column(s)", k, keep.size()));
    }

    MatrixXd x = dataset.features(Eigen::all, keep);
    x = x.rowwise() - x.colwise().mean();
    x = x.array().rowwise() / sd(keep).transpose().array();

    MatrixXd z = pca_reduce(x, k);
    z = z.rowwise() - z.colwise().mean();
    const VectorXd zsd = column_std(z);
    const double reference = zsd.size() > 0 ? zsd.maxCoeff() : 0.0;
    for (Index c = 0; c < z.cols(); ++c) {
        if (zsd(c) > 1e-10 * reference) {
            z.col(c) /= zsd(c);
        } else {
            z.col(c).setZero();
            out.warnings.push_back(fmt::format("principal component {} has no variance", c + 1));
        }
    }
    out.features = std::move(z);
    out.feature_names.clear();
    for (Index c = 0; c < k; ++c) { out.feature_names.push_back(fmt::format("pc{}", c + 1)); }
    return out;
}

Dataset synthetic(Index m, Index d, std::uint64_t seed) {
    if (m < 1 || d < 1) { throw std::invalid_argument("synthetic: M and D must be >= 1"); }
    Rng rng(seed);
    Dataset out;
    out.features.resize(m, d);
    for (Index r = 0; r < m; ++r) {
        for (Index c = 0; c < d; ++c) { out.features(r, c) = rng.normal(); }
    }
    VectorXd w(d);
    for (Index c = 0; c < d; ++c) { w(c) = rng.normal(); }
    const VectorXd score = out.features * w;
    for (Index r = 0; r < m; ++r) { out.labels_raw.push_back(score(r) > 0.0 ? "1" : "0"); }
    out.classes = {"0", "1"};
    out.labels_encoded = one_hot(out.labels_raw, out.classes);
    for (Index c = 0; c < d; ++c) { out.feature_names.push_back(fmt::format("x{}", c + 1)); }
    out.name = fmt::format("synthetic_{}x{}", m, d);
    out.provenance = fmt::format("synthetic(M={}, D={}, seed={})", m, d, seed);
    return out;
}

std::vector<Index> subsample_indices(Index m, const SubsampleSpec &spec) {
    if (spec.n < 0 || spec.n > m) {
        throw std::invalid_argument(
            fmt::format("subsample_indices: N = {} outside [0, M = {}]", spec.n, m));
    }
    Rng rng(derive_seed({spec.master_seed, static_cast<std::uint64_t>(spec.n),
                         static_cast<std::uint64_t>(spec.repetition)}));
    std::vector<Index> pool(static_cast<std::size_t>(m));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < spec.n; ++i) {
        const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(m - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(spec.n));
    std::sort(pool.begin(), pool.end());
    return pool;
}

void save_dataset(const std::filesystem::path &csv, const Dataset &dataset) {
    std::string text;
    for (const auto &name : dataset.feature_names) { text += csv_field(name) + ","; }
    text += "label\n";
    for (Index r = 0; r < dataset.rows(); ++r) {
        for (Index c = 0; c < dataset.features.cols(); ++c) {
            text += io::format_double(dataset.features(r, c)) + ",";
        }
        text += csv_field(r < static_cast<Index>(dataset.labels_raw.size())
                              ? dataset.labels_raw[static_cast<std::size_t>(r)]
                              : std::string{});
        text += '\n';
    }
    io::write_text(csv, text);
}

} // namespace qks
