#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tulik/errors.hpp"
#include "tulik/presets.hpp"
#include "tulik/train.hpp"

namespace tulik {

// Binary dataset container: "TULK1" header with the grid shape, then M
// bit-packed trajectories, optionally preceded by the embedded truth
// parameters and network edge metadata. Bit order within a trajectory is
// step-major (t then u), LSB-first within each byte.
struct Dataset {
    TimeGrid grid;
    int V = 1;
    std::vector<Trajectory> trajectories;
    std::optional<ModelParams> truth;
    std::vector<NetworkEdge> edges;
};

namespace detail {

inline constexpr char kDatasetMagic[5] = {'T', 'U', 'L', 'K', '1'};
inline constexpr std::uint8_t kFlagNetwork = 1;
inline constexpr std::uint8_t kFlagTruth = 2;
inline constexpr std::uint8_t kFlagTruthTimeInvariant = 4;
inline constexpr std::uint8_t kFlagEdges = 8;

template <class T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is, const char* what) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw data_error(std::string("dataset: truncated while reading ") + what);
    return v;
}

inline std::size_t packed_bytes(const TimeGrid& grid, int V) {
    const std::size_t bits = static_cast<std::size_t>(grid.extended_steps()) * V;
    return (bits + 7) / 8;
}

} // namespace detail

inline void write_dataset(std::ostream& os, const Dataset& ds) {
    using namespace detail;
    os.write(kDatasetMagic, sizeof(kDatasetMagic));
    std::uint8_t flags = 0;
    if (ds.V > 1) flags |= kFlagNetwork;
    if (ds.truth) {
        flags |= kFlagTruth;
        if (ds.truth->kernel.variant() == KernelVariant::TimeInvariant)
            flags |= kFlagTruthTimeInvariant;
    }
    if (!ds.edges.empty()) flags |= kFlagEdges;
    write_pod<std::uint8_t>(os, flags);
    write_pod<std::uint16_t>(os, 0); // reserved
    write_pod<double>(os, ds.grid.h);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ds.grid.N));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ds.grid.Nprime));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ds.V));
    write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(ds.trajectories.size()));

    if (ds.truth) {
        for (double m : ds.truth->mu) write_pod<double>(os, m);
        for (double v : ds.truth->kernel.values()) write_pod<double>(os, v);
    }
    if (!ds.edges.empty()) {
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ds.edges.size()));
        for (const NetworkEdge& e : ds.edges) {
            write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(e.uprime));
            write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(e.u));
            write_pod<double>(os, e.omega);
            write_pod<double>(os, e.shift);
        }
    }

    std::vector<std::uint8_t> packed(packed_bytes(ds.grid, ds.V));
    for (const Trajectory& traj : ds.trajectories) {
        if (!(traj.grid() == ds.grid) || traj.num_nodes() != ds.V)
            throw data_error("dataset: trajectory shape does not match the header");
        std::fill(packed.begin(), packed.end(), 0);
        const auto& steps = traj.raw_steps();
        for (std::size_t s = 0; s < steps.size(); ++s) {
            if (steps[s] == Trajectory::kNoEvent) continue;
            const std::size_t bit = s * static_cast<std::size_t>(ds.V) + steps[s];
            packed[bit >> 3] |= static_cast<std::uint8_t>(1u << (bit & 7));
        }
        os.write(reinterpret_cast<const char*>(packed.data()),
                 static_cast<std::streamsize>(packed.size()));
    }
    if (!os) throw data_error("dataset: write failed");
}

inline void write_dataset(const std::string& path, const Dataset& ds) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw data_error("dataset: cannot open for writing: " + path);
    write_dataset(os, ds);
}

inline Dataset read_dataset(std::istream& is) {
    using namespace detail;
    char magic[sizeof(kDatasetMagic)];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kDatasetMagic, sizeof(magic)) != 0)
        throw data_error("dataset: bad magic");
    const auto flags = read_pod<std::uint8_t>(is, "flags");
    read_pod<std::uint16_t>(is, "reserved");
    const double h = read_pod<double>(is, "h");
    const auto N = read_pod<std::uint32_t>(is, "N");
    const auto Nprime = read_pod<std::uint32_t>(is, "Nprime");
    const auto V = read_pod<std::uint32_t>(is, "V");
    const auto M = read_pod<std::uint64_t>(is, "M");
    if (N == 0 || Nprime == 0 || V == 0) throw data_error("dataset: degenerate header shape");

    Dataset ds;
    ds.grid = TimeGrid(h, static_cast<int>(N), static_cast<int>(Nprime));
    ds.V = static_cast<int>(V);
    if ((flags & kFlagNetwork) != 0 && ds.V <= 1)
        throw data_error("dataset: network flag with a single node");

    if (flags & kFlagTruth) {
        std::vector<double> mu(ds.V);
        for (double& m : mu) m = read_pod<double>(is, "truth baseline");
        const KernelVariant variant = (flags & kFlagTruthTimeInvariant)
                                          ? KernelVariant::TimeInvariant
                                          : KernelVariant::TimeVarying;
        KernelParams kernel(variant, ds.grid, ds.V);
        for (double& v : kernel.values()) v = read_pod<double>(is, "truth kernel");
        ds.truth = ModelParams(std::move(mu), std::move(kernel));
    }
    if (flags & kFlagEdges) {
        const auto E = read_pod<std::uint32_t>(is, "edge count");
        for (std::uint32_t e = 0; e < E; ++e) {
            NetworkEdge edge;
            edge.uprime = static_cast<int>(read_pod<std::uint32_t>(is, "edge source"));
            edge.u = static_cast<int>(read_pod<std::uint32_t>(is, "edge target"));
            edge.omega = read_pod<double>(is, "edge omega");
            edge.shift = read_pod<double>(is, "edge shift");
            if (edge.uprime < 0 || edge.uprime >= ds.V || edge.u < 0 || edge.u >= ds.V)
                throw data_error("dataset: edge endpoint out of range");
            ds.edges.push_back(edge);
        }
    }

    const std::size_t bytes = packed_bytes(ds.grid, ds.V);
    std::vector<std::uint8_t> packed(bytes);
    ds.trajectories.reserve(M);
    for (std::uint64_t m = 0; m < M; ++m) {
        is.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(bytes));
        if (!is) throw data_error("dataset: truncated trajectory body");
        std::vector<std::int16_t> steps(static_cast<std::size_t>(ds.grid.extended_steps()),
                                        Trajectory::kNoEvent);
        for (std::size_t s = 0; s < steps.size(); ++s)
            for (int u = 0; u < ds.V; ++u) {
                const std::size_t bit = s * static_cast<std::size_t>(ds.V) + u;
                if ((packed[bit >> 3] >> (bit & 7)) & 1u) {
                    if (steps[s] != Trajectory::kNoEvent)
                        throw data_error("dataset: more than one event in a step");
                    steps[s] = static_cast<std::int16_t>(u);
                }
            }
        ds.trajectories.emplace_back(ds.grid, ds.V, std::move(steps));
    }
    return ds;
}

inline Dataset read_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw data_error("dataset: cannot open: " + path);
    return read_dataset(is);
}

// Textual parameter file: grid metadata, baseline vector, kernel variant and
// the dense kernel values in Psi layout. Doubles are printed with 17
// significant digits, so a save/load round trip is bit-exact for finite
// values.
struct StoredParams {
    ModelParams params;
    double h = 1.0;
};

namespace detail {
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
} // namespace detail

inline void write_params(std::ostream& os, const ModelParams& params, double h) {
    const KernelLayout& kl = params.kernel.layout();
    os << "tulik-params v1\n";
    os << "h = " << detail::format_double(h) << "\n";
    os << "N = " << kl.N << "\n";
    os << "Nprime = " << kl.Nprime << "\n";
    os << "V = " << kl.V << "\n";
    os << "mu =";
    for (double m : params.mu) os << ' ' << detail::format_double(m);
    os << "\n";
    os << "kernel = "
       << (params.kernel.variant() == KernelVariant::TimeVarying ? "time-varying"
                                                                 : "time-invariant")
       << "\n";
    // ordering: rows i = -Nprime+1..N (time-varying only), then lag l = 1..Nprime,
    // then uprime, then u; one row of the Psi view per line
    os << "layout = psi i l uprime u\n";
    os << "values:\n";
    const std::vector<double>& v = params.kernel.values();
    const std::size_t per_row = static_cast<std::size_t>(kl.Nprime) * kl.V * kl.V;
    const std::size_t rows = v.size() / per_row;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < per_row; ++c) {
            if (c) os << ' ';
            os << detail::format_double(v[r * per_row + c]);
        }
        os << "\n";
    }
    if (!os) throw data_error("params: write failed");
}

inline void write_params(const std::string& path, const ModelParams& params, double h) {
    std::ofstream os(path);
    if (!os) throw data_error("params: cannot open for writing: " + path);
    write_params(os, params, h);
}

namespace detail {
inline std::string expect_kv(std::istream& is, const std::string& key) {
    std::string line;
    if (!std::getline(is, line)) throw data_error("params: truncated before key " + key);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw data_error("params: expected 'key = value' line");
    std::string k = line.substr(0, eq);
    while (!k.empty() && (k.back() == ' ' || k.back() == '\t')) k.pop_back();
    if (k != key) throw data_error("params: expected key '" + key + "', found '" + k + "'");
    std::string val = line.substr(eq + 1);
    const auto first = val.find_first_not_of(" \t");
    return first == std::string::npos ? std::string() : val.substr(first);
}
} // namespace detail

inline StoredParams read_params(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "tulik-params v1")
        throw data_error("params: bad header line");
    const double h = std::stod(detail::expect_kv(is, "h"));
    const int N = std::stoi(detail::expect_kv(is, "N"));
    const int Nprime = std::stoi(detail::expect_kv(is, "Nprime"));
    const int V = std::stoi(detail::expect_kv(is, "V"));
    const TimeGrid grid(h, N, Nprime);

    std::istringstream mu_stream(detail::expect_kv(is, "mu"));
    std::vector<double> mu;
    double value;
    while (mu_stream >> value) mu.push_back(value);
    if (mu.size() != static_cast<std::size_t>(V))
        throw data_error("params: baseline length does not match V");

    const std::string variant_name = detail::expect_kv(is, "kernel");
    KernelVariant variant;
    if (variant_name == "time-varying")
        variant = KernelVariant::TimeVarying;
    else if (variant_name == "time-invariant")
        variant = KernelVariant::TimeInvariant;
    else
        throw data_error("params: unknown kernel variant '" + variant_name + "'");

    if (detail::expect_kv(is, "layout") != "psi i l uprime u")
        throw data_error("params: unsupported value layout");
    if (!std::getline(is, line) || line != "values:")
        throw data_error("params: expected values section");

    KernelParams kernel(variant, grid, V);
    std::vector<double>& v = kernel.values();
    std::size_t k = 0;
    while (k < v.size()) {
        if (!std::getline(is, line)) throw data_error("params: truncated kernel values");
        std::istringstream row(line);
        while (row >> value) {
            if (k >= v.size()) throw data_error("params: too many kernel values");
            v[k++] = value;
        }
    }
    return {ModelParams(std::move(mu), std::move(kernel)), h};
}

inline StoredParams read_params(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("params: cannot open: " + path);
    return read_params(is);
}

// Flat key=value training configuration. Unknown keys are rejected; '#'
// starts a comment. Defaults equal the small time-only benchmark settings.
inline TrainConfig parse_train_config(std::istream& is) {
    TrainConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw data_error("config line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "batch_size") cfg.batch_size = std::stoi(val);
            else if (key == "max_epochs") cfg.max_epochs = std::stoi(val);
            else if (key == "lr_schedule") {
                cfg.lr_schedule.breakpoints.clear();
                std::istringstream ss(val);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    const auto colon = item.find(':');
                    if (colon == std::string::npos)
                        throw data_error("config: lr_schedule items are epoch:rate");
                    cfg.lr_schedule.breakpoints.emplace_back(
                        std::stoi(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
                }
            } else if (key == "method") {
                if (val == "vi") cfg.method = Method::VI;
                else if (val == "gd") cfg.method = Method::GD;
                else throw data_error("config: method must be vi or gd");
            } else if (key == "intensity_floor") cfg.intensity_floor = std::stod(val);
            else if (key == "barrier_weight") cfg.barrier_weight = std::stod(val);
            else if (key == "barrier_kind") {
                if (val == "log") cfg.barrier_kind = BarrierKind::Log;
                else if (val == "quadratic") cfg.barrier_kind = BarrierKind::Quadratic;
                else throw data_error("config: barrier_kind must be log or quadratic");
            } else if (key == "smoothness_weight") cfg.smoothness_weight = std::stod(val);
            else if (key == "svd_threshold") {
                if (val.empty() || val == "none") cfg.svd_threshold.reset();
                else cfg.svd_threshold = std::stod(val);
            } else if (key == "mu_mix") cfg.mu_mix = std::stod(val);
            else if (key == "rng_seed") cfg.rng_seed = std::stoull(val);
            else if (key == "kernel_variant") {
                if (val == "time-varying") cfg.kernel_variant = KernelVariant::TimeVarying;
                else if (val == "time-invariant") cfg.kernel_variant = KernelVariant::TimeInvariant;
                else throw data_error("config: kernel_variant must be time-varying or time-invariant");
            } else if (key == "init_kernel_constant") cfg.init_kernel_constant = std::stod(val);
            else if (key == "init_zero_source_nodes") {
                cfg.init_zero_source_nodes.clear();
                std::istringstream ss(val);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (!trim(item).empty())
                        cfg.init_zero_source_nodes.push_back(std::stoi(trim(item)));
                }
            } else if (key == "deterministic_reduction") {
                cfg.deterministic_reduction = val == "true" || val == "1";
            } else {
                throw data_error("config line " + std::to_string(lineno) + ": unknown key '" +
                                 key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw data_error("config line " + std::to_string(lineno) + ": bad value for '" + key +
                             "'");
        } catch (const std::out_of_range&) {
            throw data_error("config line " + std::to_string(lineno) + ": value out of range for '" +
                             key + "'");
        }
    }
    return cfg;
}

inline TrainConfig parse_train_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw data_error("config: cannot open: " + path);
    return parse_train_config(is);
}

inline std::string serialize_train_config(const TrainConfig& cfg) {
    std::ostringstream os;
    os << "batch_size = " << cfg.batch_size << "\n";
    os << "max_epochs = " << cfg.max_epochs << "\n";
    os << "lr_schedule = ";
    for (std::size_t k = 0; k < cfg.lr_schedule.breakpoints.size(); ++k) {
        if (k) os << ',';
        os << cfg.lr_schedule.breakpoints[k].first << ':'
           << detail::format_double(cfg.lr_schedule.breakpoints[k].second);
    }
    os << "\n";
    os << "method = " << (cfg.method == Method::VI ? "vi" : "gd") << "\n";
    os << "intensity_floor = " << detail::format_double(cfg.intensity_floor) << "\n";
    os << "barrier_weight = " << detail::format_double(cfg.barrier_weight) << "\n";
    os << "barrier_kind = " << (cfg.barrier_kind == BarrierKind::Log ? "log" : "quadratic")
       << "\n";
    os << "smoothness_weight = " << detail::format_double(cfg.smoothness_weight) << "\n";
    os << "svd_threshold = "
       << (cfg.svd_threshold ? detail::format_double(*cfg.svd_threshold) : "none") << "\n";
    os << "mu_mix = " << detail::format_double(cfg.mu_mix) << "\n";
    os << "rng_seed = " << cfg.rng_seed << "\n";
    os << "kernel_variant = "
       << (cfg.kernel_variant == KernelVariant::TimeVarying ? "time-varying" : "time-invariant")
       << "\n";
    os << "init_kernel_constant = " << detail::format_double(cfg.init_kernel_constant) << "\n";
    os << "init_zero_source_nodes =";
    for (std::size_t k = 0; k < cfg.init_zero_source_nodes.size(); ++k)
        os << (k ? "," : " ") << cfg.init_zero_source_nodes[k];
    os << "\n";
    os << "deterministic_reduction = " << (cfg.deterministic_reduction ? "true" : "false") << "\n";
    return os.str();
}

} // namespace tulik
