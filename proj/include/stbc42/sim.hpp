#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "stbc42/analysis.hpp"
#include "stbc42/channel.hpp"
#include "stbc42/code.hpp"
#include "stbc42/constellation.hpp"
#include "stbc42/decoder.hpp"
#include "stbc42/errors.hpp"
#include "stbc42/rng.hpp"

namespace stbc42 {

enum class DecoderKind { exhaustive, conditional, sphere };

inline std::string decoder_name(DecoderKind k) {
    switch (k) {
        case DecoderKind::exhaustive: return "exhaustive";
        case DecoderKind::conditional: return "conditional";
        case DecoderKind::sphere: return "sphere";
    }
    return "?";
}

inline DecoderKind decoder_from_name(const std::string& s) {
    if (s == "exhaustive") return DecoderKind::exhaustive;
    if (s == "conditional") return DecoderKind::conditional;
    if (s == "sphere") return DecoderKind::sphere;
    throw ConfigError("unknown decoder '" + s + "'");
}

/// Monte Carlo run configuration.  The CER table is a pure function of
/// this struct (and independent of `workers`); wall-time recording is the
/// one exception and can be switched off via `timing` when bit-identical
/// outputs are required.
struct SimConfig {
    std::size_t m = 4;
    std::vector<double> snr_db;
    DecoderKind decoder = DecoderKind::sphere;
    std::uint64_t max_frames = 1'000'000;
    std::uint64_t target_errors = 100;
    std::uint64_t seed = 1;
    double theta_g = ciod_angle();
    double theta = kDefaultTheta;
    unsigned workers = 1;
    bool timing = true;
};

struct CerPoint {
    double snr_db = 0.0;
    std::uint64_t frames = 0;
    std::uint64_t errors = 0;
    double cer = 0.0;
    double mean_metric_evals = 0.0;
    double mean_nodes = 0.0;
    double seconds = 0.0;
};

struct CerTable {
    std::vector<CerPoint> points;
    SimConfig config;
};

inline void validate(const SimConfig& cfg) {
    if (cfg.m != 4 && cfg.m != 16)
        throw ConfigError("M must be 4 or 16, got " + std::to_string(cfg.m));
    if (cfg.snr_db.empty()) throw ConfigError("SNR list is empty");
    for (std::size_t i = 1; i < cfg.snr_db.size(); ++i)
        if (!(cfg.snr_db[i] > cfg.snr_db[i - 1]))
            throw ConfigError("SNR list must be strictly increasing");
    if (cfg.target_errors < 1) throw ConfigError("target_errors must be >= 1");
    if (cfg.max_frames < 1) throw ConfigError("max_frames must be >= 1");
    if (cfg.decoder == DecoderKind::exhaustive && cfg.m != 4)
        throw ConfigError("exhaustive decoder is only allowed at M = 4");
    if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
}

/// 95% Wilson score interval for an error proportion.
struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

inline WilsonInterval wilson95(std::uint64_t errors, std::uint64_t frames) {
    if (frames == 0) return {};
    const double z = 1.959963984540054;
    const double n = double(frames), p = double(errors) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    WilsonInterval w{std::max(0.0, center - half), std::min(1.0, center + half)};
    if (errors == 0) w.lo = 0.0;
    if (errors == frames) w.hi = 1.0;
    return w;
}

namespace detail {

// Stop decisions happen only at batch boundaries, so the set of simulated
// frames does not depend on the worker count.
inline constexpr std::uint64_t kFrameBatch = 256;

struct FrameOutcome {
    bool error = false;
    std::uint64_t metric_evals = 0;
    std::uint64_t nodes = 0;
};

inline FrameOutcome simulate_frame(const SimConfig& cfg, const LinearDispersionCode& code,
                                   const Constellation& aq, const NoiseParams& np,
                                   std::size_t snr_index, std::uint64_t frame_index) {
    Rng rng(derive_stream(cfg.seed, snr_index, frame_index));
    SymbolVector xv;
    for (std::size_t i = 0; i < 8; ++i) {
        xv.idx[i] = std::uint8_t(rng.uniform_int(std::uint32_t(cfg.m)));
        xv.x[i] = aq.points[xv.idx[i]];
    }
    const ChannelRealization ch = sample_channel(rng);
    const ComplexMat n = sample_noise(rng, np);
    const ComplexMat y = transmit(ch, encode(xv, cfg.theta_g, cfg.theta), n);

    DecodeResult res;
    switch (cfg.decoder) {
        case DecoderKind::exhaustive:
            res = ml_exhaustive(y, ch, code, aq);
            break;
        case DecoderKind::conditional:
            res = ml_conditional(y, ch, code, aq);
            break;
        case DecoderKind::sphere:
            try {
                res = sphere_decode(y, ch, code, aq);
            } catch (const RankDeficient&) {
                if (cfg.m != 4) throw;
                res = ml_exhaustive(y, ch, code, aq);
            }
            break;
    }

    FrameOutcome out;
    out.error = res.x_hat.idx != xv.idx;
    out.metric_evals = res.metric_evaluations;
    out.nodes = res.nodes_visited;
    return out;
}

} // namespace detail

/// Runs the Monte Carlo loop: per SNR point draw (x, H, N), decode, count
/// a codeword error whenever any symbol differs, stop at target_errors or
/// max_frames.  Per-frame RNG streams are derived from (seed, snr_index,
/// frame_index), so results are reproducible and identical across worker
/// counts, and different decoders see identical randomness.
inline CerTable run_cer(const SimConfig& cfg) {
    validate(cfg);
    const LinearDispersionCode code = weight_matrices(cfg.theta_g, cfg.theta);
    const Constellation aq = square_qam(cfg.m);

    CerTable table;
    table.config = cfg;
    for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
        const NoiseParams np = n0_for_snr(cfg.snr_db[si]);
        const auto t0 = std::chrono::steady_clock::now();

        CerPoint pt;
        pt.snr_db = cfg.snr_db[si];
        std::uint64_t evals_sum = 0, nodes_sum = 0;

        while (pt.frames < cfg.max_frames && pt.errors < cfg.target_errors) {
            const std::uint64_t batch =
                std::min<std::uint64_t>(detail::kFrameBatch, cfg.max_frames - pt.frames);
            std::vector<detail::FrameOutcome> slot(batch);
            if (cfg.workers <= 1) {
                for (std::uint64_t f = 0; f < batch; ++f)
                    slot[f] = detail::simulate_frame(cfg, code, aq, np, si, pt.frames + f);
            } else {
                std::vector<std::thread> pool;
                const unsigned w = std::min<unsigned>(cfg.workers, unsigned(batch));
                pool.reserve(w);
                for (unsigned t = 0; t < w; ++t)
                    pool.emplace_back([&, t] {
                        for (std::uint64_t f = t; f < batch; f += w)
                            slot[f] = detail::simulate_frame(cfg, code, aq, np, si, pt.frames + f);
                    });
                for (auto& th : pool) th.join();
            }
            for (const auto& o : slot) {
                pt.errors += o.error ? 1 : 0;
                evals_sum += o.metric_evals;
                nodes_sum += o.nodes;
            }
            pt.frames += batch;
        }

        pt.cer = pt.frames ? double(pt.errors) / double(pt.frames) : 0.0;
        pt.mean_metric_evals = pt.frames ? double(evals_sum) / double(pt.frames) : 0.0;
        pt.mean_nodes = pt.frames ? double(nodes_sum) / double(pt.frames) : 0.0;
        if (cfg.timing) {
            const auto t1 = std::chrono::steady_clock::now();
            pt.seconds = std::chrono::duration<double>(t1 - t0).count();
        }
        table.points.push_back(pt);
    }
    return table;
}

// ---------------------------------------------------------------------------
// Emission

inline void emit_csv(const CerTable& table, std::ostream& os) {
    os << "snr_db,frames,errors,cer,mean_metric_evals,mean_nodes,seconds\n";
    char buf[256];
    for (const auto& p : table.points) {
        std::snprintf(buf, sizeof(buf), "%.10g,%llu,%llu,%.10g,%.10g,%.10g,%.6f\n",
                      p.snr_db, static_cast<unsigned long long>(p.frames),
                      static_cast<unsigned long long>(p.errors), p.cer,
                      p.mean_metric_evals, p.mean_nodes, p.seconds);
        os << buf;
    }
}

inline nlohmann::json config_to_json(const SimConfig& cfg) {
    const double rad2deg = 180.0 / std::acos(-1.0);
    return nlohmann::json{{"M", cfg.m},
                          {"snr_db", cfg.snr_db},
                          {"decoder", decoder_name(cfg.decoder)},
                          {"max_frames", cfg.max_frames},
                          {"target_errors", cfg.target_errors},
                          {"seed", cfg.seed},
                          {"theta_deg", cfg.theta * rad2deg},
                          {"theta_g_deg", cfg.theta_g * rad2deg},
                          {"workers", cfg.workers},
                          {"timing", cfg.timing}};
}

inline SimConfig config_from_json(const nlohmann::json& j) {
    const double deg2rad = std::acos(-1.0) / 180.0;
    SimConfig cfg;
    if (j.contains("M")) cfg.m = j.at("M").get<std::size_t>();
    if (j.contains("snr_db")) cfg.snr_db = j.at("snr_db").get<std::vector<double>>();
    if (j.contains("decoder")) cfg.decoder = decoder_from_name(j.at("decoder").get<std::string>());
    if (j.contains("max_frames")) cfg.max_frames = j.at("max_frames").get<std::uint64_t>();
    if (j.contains("target_errors")) cfg.target_errors = j.at("target_errors").get<std::uint64_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("theta_deg")) cfg.theta = j.at("theta_deg").get<double>() * deg2rad;
    if (j.contains("theta_g_deg")) cfg.theta_g = j.at("theta_g_deg").get<double>() * deg2rad;
    if (j.contains("workers")) cfg.workers = j.at("workers").get<unsigned>();
    if (j.contains("timing")) cfg.timing = j.at("timing").get<bool>();
    return cfg;
}

inline nlohmann::json table_to_json(const CerTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : table.points)
        rows.push_back({{"snr_db", p.snr_db},
                        {"frames", p.frames},
                        {"errors", p.errors},
                        {"cer", p.cer},
                        {"mean_metric_evals", p.mean_metric_evals},
                        {"mean_nodes", p.mean_nodes},
                        {"seconds", p.seconds}});
    return nlohmann::json{{"config", config_to_json(table.config)}, {"points", rows}};
}

inline CerTable table_from_json(const nlohmann::json& j) {
    CerTable table;
    table.config = config_from_json(j.at("config"));
    for (const auto& r : j.at("points")) {
        CerPoint p;
        p.snr_db = r.at("snr_db").get<double>();
        p.frames = r.at("frames").get<std::uint64_t>();
        p.errors = r.at("errors").get<std::uint64_t>();
        p.cer = r.at("cer").get<double>();
        p.mean_metric_evals = r.at("mean_metric_evals").get<double>();
        p.mean_nodes = r.at("mean_nodes").get<double>();
        p.seconds = r.at("seconds").get<double>();
        table.points.push_back(p);
    }
    return table;
}

/// Writes the table as CSV or JSON; JSON carries the full config echo for
/// provenance.  Throws IoError when the path cannot be written.
inline void emit(const CerTable& table, const std::string& format, const std::string& path) {
    if (format != "csv" && format != "json")
        throw ConfigError("unknown output format '" + format + "'");
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    if (format == "csv")
        emit_csv(table, os);
    else
        os << table_to_json(table).dump(2) << "\n";
    os.flush();
    if (!os) throw IoError("write to '" + path + "' failed");
}

/// Report JSON per the analysis interface contract.
inline nlohmann::json report_to_json(const CodeAnalysisReport& rep) {
    nlohmann::json dx = nlohmann::json::array();
    for (const auto& d : rep.argmin_dx) dx.push_back({d.real(), d.imag()});
    return nlohmann::json{{"min_det", rep.min_det},
                          {"min_rank", rep.min_rank},
                          {"coding_gain", rep.coding_gain},
                          {"argmin_dx", dx},
                          {"pairs_evaluated", rep.pairs_evaluated},
                          {"mode", rep.mode}};
}

/// Weight matrices as an array of 16 4x4 matrices of [re, im] pairs.
inline nlohmann::json weights_to_json(const LinearDispersionCode& code) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& a : code.weights) {
        nlohmann::json mat = nlohmann::json::array();
        for (std::size_t r = 0; r < a.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t c = 0; c < a.cols(); ++c)
                row.push_back({a(r, c).real(), a(r, c).imag()});
            mat.push_back(row);
        }
        out.push_back(mat);
    }
    return out;
}

} // namespace stbc42
