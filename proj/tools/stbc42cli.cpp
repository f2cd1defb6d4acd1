// Command-line front end: Monte Carlo CER runs, code analysis, angle
// sweeps, and a structural self-test battery.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stbc42/stbc42.hpp"

using namespace stbc42;

namespace {

constexpr double kDeg = 0.017453292519943295;

std::vector<double> parse_snr(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double start = 0, stop = 0, step = 0;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0)
            throw ConfigError("bad SNR range '" + spec + "', want start:stop:step");
        for (double v = start; v <= stop + 1e-9; v += step) out.push_back(v);
        return out;
    }
    std::string item;
    std::istringstream is(spec);
    while (std::getline(is, item, ',')) out.push_back(std::stod(item));
    return out;
}

void print_table(const CerTable& table) {
    std::printf("%8s %10s %8s %12s %16s %12s %9s\n", "snr_db", "frames", "errors", "cer",
                "mean_metric_evals", "mean_nodes", "seconds");
    for (const auto& p : table.points)
        std::printf("%8.2f %10llu %8llu %12.5g %16.1f %12.2f %9.2f\n", p.snr_db,
                    (unsigned long long)p.frames, (unsigned long long)p.errors, p.cer,
                    p.mean_metric_evals, p.mean_nodes, p.seconds);
}

int run_simulate(const SimConfig& cfg, const std::string& out, const std::string& format) {
    const CerTable table = run_cer(cfg);
    print_table(table);
    if (!out.empty()) {
        emit(table, format, out);
        std::printf("wrote %s (%s)\n", out.c_str(), format.c_str());
    }
    return 0;
}

int run_analyze(std::size_t m, double theta_g, double theta, const std::string& mode,
                std::uint64_t samples, std::uint64_t seed, std::uint64_t budget,
                unsigned workers, const std::string& json_out, const std::string& weights_out) {
    const LinearDispersionCode code = weight_matrices(theta_g, theta);
    const Constellation aq = square_qam(m);

    CodeAnalysisReport rep;
    std::string chosen = mode;
    if (chosen == "auto") {
        const double planned = (std::pow(double(2 * std::sqrt(double(m)) - 1), 16.0) - 1) / 2;
        chosen = planned <= double(budget) ? "exhaustive" : "sampled";
    }
    if (chosen == "exhaustive")
        rep = min_determinant(code, aq, {.budget = budget, .workers = workers});
    else
        rep = min_determinant_sampled(code, aq, samples, seed);

    std::printf("mode            : %s%s\n", rep.mode.c_str(),
                rep.mode == "sampled" ? " (upper bound, not the exact minimum)" : "");
    std::printf("min_det         : %.6f\n", rep.min_det);
    std::printf("min_rank        : %d\n", rep.min_rank);
    std::printf("coding_gain     : %.6f\n", rep.coding_gain);
    std::printf("pairs_evaluated : %llu\n", (unsigned long long)rep.pairs_evaluated);
    std::printf("argmin_dx       :");
    for (const auto& d : rep.argmin_dx) std::printf(" (%.6g,%.6g)", d.real(), d.imag());
    std::printf("\n");

    if (!json_out.empty()) {
        std::ofstream os(json_out);
        if (!os) throw IoError("cannot open '" + json_out + "'");
        os << report_to_json(rep).dump(2) << "\n";
        std::printf("wrote %s\n", json_out.c_str());
    }
    if (!weights_out.empty()) {
        std::ofstream os(weights_out);
        if (!os) throw IoError("cannot open '" + weights_out + "'");
        os << weights_to_json(code).dump(2) << "\n";
        std::printf("wrote %s\n", weights_out.c_str());
    }
    return 0;
}

int run_sweep(const std::string& target, std::size_t m, double start_deg, double stop_deg,
              double step_deg, std::uint64_t samples, std::uint64_t seed) {
    const Constellation aq = square_qam(m);
    const auto grid = degree_grid(start_deg, stop_deg, step_deg);
    if (grid.empty()) throw ConfigError("empty sweep grid");

    std::function<double(double)> evaluator;
    if (target == "theta-g") {
        evaluator = [&](double tg) {
            return min_determinant(ciod4_code(tg), aq, {.workers = 2}).min_det;
        };
    } else if (target == "theta") {
        evaluator = [&](double th) {
            return min_determinant_sampled(weight_matrices(ciod_angle(), th), aq, samples, seed)
                .min_det;
        };
    } else {
        throw ConfigError("sweep target must be theta or theta-g");
    }

    for (double a : grid) std::printf("%8.3f deg  min_det %.8f\n", a / kDeg, evaluator(a));
    const double best = angle_sweep(grid, evaluator);
    std::printf("best angle: %.4f deg (%.6f rad)\n", best / kDeg, best);
    return 0;
}

int run_verify() {
    int passed = 0, failed = 0;
    auto check = [&](const char* name, bool ok) {
        std::printf("[%s] %s\n", ok ? "ok" : "FAIL", name);
        (ok ? passed : failed) += 1;
    };

    const double tg = ciod_angle();
    const LinearDispersionCode code = weight_matrices(tg);
    const Constellation aq = square_qam(4);
    Rng rng(2024);

    {
        bool ok = true;
        for (int t = 0; t < 1000 && ok; ++t) {
            std::array<cdouble, 8> x;
            for (auto& v : x) v = cdouble(rng.gaussian(), rng.gaussian());
            ok = (code.combine(interleave(x)) - encode(x, tg)).frobenius_norm() < 1e-12;
        }
        check("weight expansion matches encoder on 1000 random vectors", ok);
    }
    {
        bool ok = true;
        for (std::size_t mi = 0; mi < 8 && ok; ++mi)
            for (std::size_t l = 0; l < 8 && ok; ++l) {
                const std::size_t partner = (mi % 2 == 0) ? mi + 1 : mi - 1;
                if (l == mi || l == partner) continue;
                const ComplexMat s = code.weights[mi] * code.weights[l].adjoint() +
                                     code.weights[l] * code.weights[mi].adjoint();
                ok = s.frobenius_norm() == 0.0;
            }
        check("quasi-orthogonality of non-partner weight pairs", ok);
    }
    {
        const RealMat g = generator_matrix(code);
        bool ok = numerical_rank(g) == 16;
        for (int t = 0; t < 100 && ok; ++t) {
            std::array<cdouble, 8> x;
            for (auto& v : x) v = cdouble(rng.gaussian(), rng.gaussian());
            const RealVec lhs = vec_real(encode(x, tg));
            const RealVec rhs = matvec(g, interleave(x));
            double err = 0.0;
            for (std::size_t i = 0; i < lhs.size(); ++i)
                err += (lhs[i] - rhs[i]) * (lhs[i] - rhs[i]);
            ok = std::sqrt(err) < 1e-12;
        }
        check("generator matrix consistency and rank 16", ok);
    }
    {
        bool ok = true;
        for (int t = 0; t < 1000 && ok; ++t)
            ok = qr_structure_check(build_equivalent(sample_channel(rng), code));
        check("R-factor sparsity pattern on 1000 random channels", ok);
    }
    {
        bool ok = true;
        const NoiseParams np = n0_for_snr(10.0);
        for (int t = 0; t < 30 && ok; ++t) {
            SymbolVector xv;
            for (std::size_t i = 0; i < 8; ++i) {
                xv.idx[i] = std::uint8_t(rng.uniform_int(4));
                xv.x[i] = aq.points[xv.idx[i]];
            }
            const ChannelRealization ch = sample_channel(rng);
            const ComplexMat y = transmit(ch, encode(xv, tg), sample_noise(rng, np));
            const DecodeResult ex = ml_exhaustive(y, ch, code, aq);
            const DecodeResult co = ml_conditional(y, ch, code, aq);
            const DecodeResult sp = sphere_decode(y, ch, code, aq);
            ok = std::abs(co.metric - ex.metric) < 1e-9 && std::abs(sp.metric - ex.metric) < 1e-9 &&
                 co.x_hat.idx == ex.x_hat.idx && sp.x_hat.idx == ex.x_hat.idx &&
                 sp.metric_evaluations <= 256 && co.metric_evaluations <= 4096;
        }
        check("decoder equivalence on 30 noisy frames at 10 dB", ok);
    }
    {
        bool ok = true;
        for (int t = 0; t < 200 && ok; ++t) {
            const ChannelRealization ch = sample_channel(rng);
            ComplexMat y(2, 4);
            for (std::size_t r = 0; r < 2; ++r)
                for (std::size_t c = 0; c < 4; ++c) y(r, c) = cdouble(rng.gaussian(), rng.gaussian());
            std::array<cdouble, 8> x;
            for (auto& v : x) v = cdouble(rng.gaussian(), rng.gaussian());
            const MetricDecomposition dec = conditional_metric_terms(y, ch, x, code);
            ok = std::abs(dec.total() - residual_metric(y, ch, x, tg)) < 1e-9;
        }
        check("conditional metric decomposition identity", ok);
    }

    std::printf("%d/%d checks passed\n", passed, passed + failed);
    return failed == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"4x2 space-time block code toolkit: construction, analysis, decoding, simulation"};
    app.require_subcommand(1);

    // --- simulate ---
    auto* sim = app.add_subcommand("simulate", "Monte Carlo codeword error rate run");
    std::string snr_spec = "4:24:4", decoder = "sphere", out, format = "csv", config_path;
    std::size_t sim_m = 4;
    std::uint64_t sim_frames = 1'000'000, sim_errors = 100, sim_seed = 1;
    unsigned sim_workers = 1;
    double theta_deg = 45.0, theta_g_deg = ciod_angle() / kDeg;
    bool no_timing = false;
    sim->add_option("--config", config_path, "JSON config file (flags override)");
    sim->add_option("--M", sim_m, "constellation size (4 or 16)");
    sim->add_option("--snr", snr_spec, "SNR grid in dB: start:stop:step or comma list");
    sim->add_option("--decoder", decoder, "exhaustive | conditional | sphere");
    sim->add_option("--frames", sim_frames, "max frames per SNR point");
    sim->add_option("--errors", sim_errors, "stop after this many codeword errors");
    sim->add_option("--seed", sim_seed, "master seed");
    sim->add_option("--theta-deg", theta_deg, "superposition angle in degrees");
    sim->add_option("--theta-g-deg", theta_g_deg, "constellation rotation in degrees");
    sim->add_option("--workers", sim_workers, "worker threads (results are identical)");
    sim->add_option("--out", out, "output file path");
    sim->add_option("--format", format, "csv | json");
    sim->add_flag("--no-timing", no_timing, "zero the seconds column for bit-identical output");

    // --- analyze ---
    auto* ana = app.add_subcommand("analyze", "minimum determinant / diversity rank report");
    std::size_t ana_m = 4;
    std::string ana_mode = "auto", ana_json, ana_weights;
    std::uint64_t ana_samples = 200'000, ana_seed = 1, ana_budget = 100'000'000;
    unsigned ana_workers = 0;
    double ana_theta_deg = 45.0, ana_theta_g_deg = ciod_angle() / kDeg;
    ana->add_option("--M", ana_m, "constellation size");
    ana->add_option("--mode", ana_mode, "auto | exhaustive | sampled");
    ana->add_option("--samples", ana_samples, "random samples in sampled mode");
    ana->add_option("--seed", ana_seed, "seed for sampled mode");
    ana->add_option("--budget", ana_budget, "exhaustive evaluation budget");
    ana->add_option("--workers", ana_workers, "worker threads (0 = auto)");
    ana->add_option("--theta-deg", ana_theta_deg, "superposition angle in degrees");
    ana->add_option("--theta-g-deg", ana_theta_g_deg, "constellation rotation in degrees");
    ana->add_option("--json", ana_json, "write the report as JSON");
    ana->add_option("--weights-out", ana_weights, "export the 16 weight matrices as JSON");

    // --- sweep ---
    auto* swp = app.add_subcommand("sweep", "grid search over a construction angle");
    std::string swp_target = "theta";
    std::size_t swp_m = 4;
    double swp_start = 0.0, swp_stop = 45.0, swp_step = 1.0;
    std::uint64_t swp_samples = 50'000, swp_seed = 1;
    swp->add_option("--target", swp_target, "theta | theta-g");
    swp->add_option("--M", swp_m, "constellation size");
    swp->add_option("--start", swp_start, "grid start, degrees");
    swp->add_option("--stop", swp_stop, "grid stop, degrees");
    swp->add_option("--step", swp_step, "grid step, degrees");
    swp->add_option("--samples", swp_samples, "samples per angle (theta sweep)");
    swp->add_option("--seed", swp_seed, "seed for the sampled evaluator");

    // --- verify ---
    auto* ver = app.add_subcommand("verify", "structural self-test battery");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (sim->parsed()) {
            SimConfig cfg;
            const bool have_file = !config_path.empty();
            if (have_file) {
                std::ifstream is(config_path);
                if (!is) throw IoError("cannot read config '" + config_path + "'");
                nlohmann::json j;
                is >> j;
                cfg = config_from_json(j);
            }
            // Flags override file values; without a file the flag defaults apply.
            auto given = [&](const char* name) { return !have_file || sim->count(name) > 0; };
            if (given("--M")) cfg.m = sim_m;
            if (given("--snr") || cfg.snr_db.empty()) cfg.snr_db = parse_snr(snr_spec);
            if (given("--decoder")) cfg.decoder = decoder_from_name(decoder);
            if (given("--frames")) cfg.max_frames = sim_frames;
            if (given("--errors")) cfg.target_errors = sim_errors;
            if (given("--seed")) cfg.seed = sim_seed;
            if (given("--theta-deg")) cfg.theta = theta_deg * kDeg;
            if (given("--theta-g-deg")) cfg.theta_g = theta_g_deg * kDeg;
            if (given("--workers")) cfg.workers = sim_workers;
            if (no_timing) cfg.timing = false;
            return run_simulate(cfg, out, format);
        }
        if (ana->parsed())
            return run_analyze(ana_m, ana_theta_g_deg * kDeg, ana_theta_deg * kDeg, ana_mode,
                               ana_samples, ana_seed, ana_budget, ana_workers, ana_json,
                               ana_weights);
        if (swp->parsed())
            return run_sweep(swp_target, swp_m, swp_start, swp_stop, swp_step, swp_samples,
                             swp_seed);
        if (ver->parsed()) return run_verify();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
