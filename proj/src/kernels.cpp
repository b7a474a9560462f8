#include "qks/kernels.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "qks/io.hpp"
#include "qks/parallel.hpp"

namespace qks {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

void require_features(const MatrixXd &x, const char *what) {
    if (!x.allFinite()) { throw std::invalid_argument(std::string(what) + ": non-finite feature"); }
}

std::vector<Statevector<double>> embed_rows(const MatrixXd &x, const FeatureMapConfig &config) {
    if (x.cols() != config.feature_count) {
        throw std::invalid_argument(fmt::format(
            "quantum kernel: data has {} columns, feature map expects {}", x.cols(),
            config.feature_count));
    }
    const FeatureMap<double> map(config);
    std::vector<Statevector<double>> states(static_cast<std::size_t>(x.rows()),
                                            map.initial_state());
    parallel_for(states.size(), [&](std::size_t i) {
        states[i] = map.embed(x.row(static_cast<Index>(i)).transpose());
    });
    return states;
}

double rbf_value(const MatrixXd &a, Index i, const MatrixXd &b, Index j, double gamma) {
    return std::exp(-gamma * (a.row(i) - b.row(j)).squaredNorm());
}

} // namespace

std::string to_string(KernelKind kind) { return kind == KernelKind::quantum ? "quantum" : "rbf"; }

KernelKind kernel_kind_from_string(const std::string &name) {
    if (name == "quantum") { return KernelKind::quantum; }
    if (name == "rbf") { return KernelKind::rbf; }
    throw std::invalid_argument("unknown kernel kind '" + name + "' (expected quantum or rbf)");
}

void RbfParams::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("RbfParams: gamma must be finite and positive");
    }
}

KernelKind kind_of(const KernelParams &params) {
    return std::holds_alternative<FeatureMapConfig>(params) ? KernelKind::quantum : KernelKind::rbf;
}

std::string matrix_digest(const MatrixXd &x) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::uint64_t word) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (word >> (8 * byte)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    feed(static_cast<std::uint64_t>(x.rows()));
    feed(static_cast<std::uint64_t>(x.cols()));
    for (Index r = 0; r < x.rows(); ++r) {
        for (Index c = 0; c < x.cols(); ++c) { feed(std::bit_cast<std::uint64_t>(x(r, c))); }
    }
    return fmt::format("{:016x}", h);
}

double scale_gamma(const MatrixXd &x) {
    if (x.rows() < 2 || x.cols() < 1) {
        throw std::invalid_argument("scale_gamma: need at least 2 rows and 1 column");
    }
    const MatrixXd centered = x.rowwise() - x.colwise().mean();
    const double mean_var =
        centered.colwise().squaredNorm().mean() / static_cast<double>(x.rows() - 1);
    if (!(mean_var > 0.0)) { throw std::invalid_argument("scale_gamma: zero feature variance"); }
    return 1.0 / (static_cast<double>(x.cols()) * mean_var);
}

KernelMatrix quantum_gram(const MatrixXd &x, const FeatureMapConfig &config) {
    require_features(x, "quantum_gram");
    const auto states = embed_rows(x, config);
    const Index m = x.rows();
    MatrixXd k(m, m);
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t row) {
        const auto i = static_cast<Index>(row);
        for (Index j = i; j < m; ++j) {
            k(i, j) = fidelity(states[row], states[static_cast<std::size_t>(j)]);
        }
    });
    k.triangularView<Eigen::StrictlyLower>() = k.transpose();
    return KernelMatrix{std::move(k), config, matrix_digest(x)};
}

KernelMatrix rbf_gram(const MatrixXd &x, const RbfParams &params) {
    require_features(x, "rbf_gram");
    params.validate();
    const Index m = x.rows();
    MatrixXd k(m, m);
    parallel_for(static_cast<std::size_t>(m), [&](std::size_t row) {
        const auto i = static_cast<Index>(row);
        k(i, i) = 1.0;
        for (Index j = i + 1; j < m; ++j) { k(i, j) = rbf_value(x, i, x, j, params.gamma); }
    });
    k.triangularView<Eigen::StrictlyLower>() = k.transpose();
    return KernelMatrix{std::move(k), params, matrix_digest(x)};
}

KernelMatrix gram(const MatrixXd &x, const KernelParams &params) {
    return std::visit(
        [&](const auto &p) -> KernelMatrix {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, FeatureMapConfig>) {
                return quantum_gram(x, p);
            } else {
                return rbf_gram(x, p);
            }
        },
        params);
}

MatrixXd cross_gram(const MatrixXd &a, const MatrixXd &b, const KernelParams &params) {
    require_features(a, "cross_gram");
    require_features(b, "cross_gram");
    if (a.cols() != b.cols()) {
        throw std::invalid_argument(
            fmt::format("cross_gram: feature counts differ ({} vs {})", a.cols(), b.cols()));
    }
    MatrixXd k(a.rows(), b.rows());
    if (const auto *config = std::get_if<FeatureMapConfig>(&params)) {
        const auto sa = embed_rows(a, *config);
        const auto sb = embed_rows(b, *config);
        parallel_for(sa.size(), [&](std::size_t i) {
            for (std::size_t j = 0; j < sb.size(); ++j) {
                k(static_cast<Index>(i), static_cast<Index>(j)) = fidelity(sa[i], sb[j]);
            }
        });
    } else {
        const auto &rbf = std::get<RbfParams>(params);
        rbf.validate();
        parallel_for(static_cast<std::size_t>(a.rows()), [&](std::size_t row) {
            const auto i = static_cast<Index>(row);
            for (Index j = 0; j < b.rows(); ++j) { k(i, j) = rbf_value(a, i, b, j, rbf.gamma); }
        });
    }
    return k;
}

MatrixXd cross_gram(const KernelMatrix &trained, const MatrixXd &a, const MatrixXd &b,
                    const KernelParams &params) {
    if (!(trained.params == params)) {
        throw std::invalid_argument(
            "cross_gram: kernel parameters differ from the training kernel (feature map, "
            "Haar seed, t, T or gamma mismatch)");
    }
    return cross_gram(a, b, params);
}

std::filesystem::path sidecar_path(const std::filesystem::path &csv) {
    auto p = csv;
    p += ".json";
    return p;
}

void save_kernel(const std::filesystem::path &csv, const KernelMatrix &kernel) {
    io::write_grid(csv, kernel.entries);
    nlohmann::ordered_json meta;
    meta["kind"] = to_string(kernel.kind());
    if (const auto *config = std::get_if<FeatureMapConfig>(&kernel.params)) {
        meta["t"] = config->bandwidth;
        meta["T"] = config->trotter_steps;
        meta["haar_seed"] = config->haar_seed;
        meta["feature_count"] = config->feature_count;
        meta["gamma_rbf"] = nullptr;
    } else {
        meta["t"] = nullptr;
        meta["T"] = nullptr;
        meta["haar_seed"] = nullptr;
        meta["gamma_rbf"] = std::get<RbfParams>(kernel.params).gamma;
    }
    meta["source_hash"] = kernel.source_hash;
    meta["M"] = kernel.size();
    io::write_text(sidecar_path(csv), meta.dump(2) + "\n");
}

KernelMatrix load_kernel(const std::filesystem::path &csv) {
    const auto side = sidecar_path(csv);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(io::read_text(side));
    } catch (const nlohmann::json::exception &e) {
        throw io::FormatError(side.string() + ": " + e.what());
    }
    auto grid = io::read_grid(csv, false);
    KernelMatrix kernel;
    kernel.entries = std::move(grid.values);
    try {
        const auto kind = kernel_kind_from_string(meta.at("kind").get<std::string>());
        if (kind == KernelKind::quantum) {
            FeatureMapConfig config;
            config.bandwidth = meta.at("t").get<double>();
            config.trotter_steps = meta.at("T").get<int>();
            config.haar_seed = meta.at("haar_seed").get<std::uint64_t>();
            config.feature_count = meta.at("feature_count").get<int>();
            kernel.params = config;
        } else {
            kernel.params = RbfParams{meta.at("gamma_rbf").get<double>()};
        }
        kernel.source_hash = meta.at("source_hash").get<std::string>();
        const auto m = meta.at("M").get<Index>();
        if (kernel.entries.rows() != m || kernel.entries.cols() != m) {
            throw io::FormatError(fmt::format("{}: grid is {}x{}, sidecar says M={}", csv.string(),
                                              kernel.entries.rows(), kernel.entries.cols(), m));
        }
    } catch (const nlohmann::json::exception &e) {
        throw io::FormatError(side.string() + ": " + e.what());
    }
    return kernel;
}

} // namespace qks
