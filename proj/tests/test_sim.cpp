#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "stbc42/sim.hpp"

using namespace stbc42;

namespace {

SimConfig small_config() {
    SimConfig cfg;
    cfg.m = 4;
    cfg.snr_db = {4.0, 8.0};
    cfg.decoder = DecoderKind::sphere;
    cfg.max_frames = 1500;
    cfg.target_errors = 40;
    cfg.seed = 123;
    cfg.timing = false;
    return cfg;
}

bool same_counts(const CerTable& a, const CerTable& b) {
    if (a.points.size() != b.points.size()) return false;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        if (a.points[i].frames != b.points[i].frames) return false;
        if (a.points[i].errors != b.points[i].errors) return false;
    }
    return true;
}

} // namespace

TEST_CASE("config validation") {
    SimConfig cfg = small_config();
    cfg.m = 8;
    REQUIRE_THROWS_AS(validate(cfg), ConfigError);

    cfg = small_config();
    cfg.snr_db = {};
    REQUIRE_THROWS_AS(validate(cfg), ConfigError);

    cfg = small_config();
    cfg.snr_db = {4.0, 4.0};
    REQUIRE_THROWS_AS(validate(cfg), ConfigError);

    cfg = small_config();
    cfg.target_errors = 0;
    REQUIRE_THROWS_AS(validate(cfg), ConfigError);

    cfg = small_config();
    cfg.m = 16;
    cfg.decoder = DecoderKind::exhaustive;
    REQUIRE_THROWS_AS(validate(cfg), ConfigError);

    REQUIRE_NOTHROW(validate(small_config()));
}

TEST_CASE("same seed gives a bit-identical table") {
    const SimConfig cfg = small_config();
    const CerTable a = run_cer(cfg);
    const CerTable b = run_cer(cfg);
    std::ostringstream csv_a, csv_b;
    emit_csv(a, csv_a);
    emit_csv(b, csv_b);
    REQUIRE(csv_a.str() == csv_b.str());
}

TEST_CASE("worker count does not change results") {
    SimConfig cfg = small_config();
    const CerTable serial = run_cer(cfg);
    cfg.workers = 3;
    const CerTable parallel = run_cer(cfg);
    std::ostringstream csv_a, csv_b;
    emit_csv(serial, csv_a);
    emit_csv(parallel, csv_b);
    REQUIRE(csv_a.str() == csv_b.str());
}

TEST_CASE("noiseless limit decodes cleanly") {
    SimConfig cfg = small_config();
    cfg.snr_db = {60.0};
    cfg.max_frames = 200;
    cfg.target_errors = 1;
    const CerTable t = run_cer(cfg);
    REQUIRE(t.points.size() == 1);
    REQUIRE(t.points[0].errors == 0);
    REQUIRE(t.points[0].frames == 200);
}

TEST_CASE("decoders see identical randomness") {
    SimConfig cfg = small_config();
    const CerTable sphere = run_cer(cfg);
    cfg.decoder = DecoderKind::conditional;
    const CerTable cond = run_cer(cfg);
    REQUIRE(same_counts(sphere, cond));

    // Counter sanity at M = 4.
    for (const auto& p : cond.points) REQUIRE(p.mean_metric_evals <= 4096.0);
    for (const auto& p : sphere.points) {
        REQUIRE(p.mean_metric_evals <= 256.0);
        REQUIRE(p.mean_nodes > 0.0);
    }
    // Pruning bites harder as SNR grows (10% statistical slack).
    for (std::size_t i = 1; i < sphere.points.size(); ++i)
        REQUIRE(sphere.points[i].mean_metric_evals <=
                1.1 * sphere.points[i - 1].mean_metric_evals);
}

TEST_CASE("exhaustive decoder matches sphere decisions on a small run") {
    SimConfig cfg = small_config();
    cfg.snr_db = {8.0};
    cfg.max_frames = 256;
    cfg.target_errors = 1000; // never triggers, frames capped
    const CerTable sphere = run_cer(cfg);
    cfg.decoder = DecoderKind::exhaustive;
    const CerTable ex = run_cer(cfg);
    REQUIRE(same_counts(sphere, ex));
    REQUIRE(ex.points[0].mean_metric_evals == 65536.0);
}

TEST_CASE("csv schema") {
    CerTable empty;
    std::ostringstream os;
    emit_csv(empty, os);
    REQUIRE(os.str() == "snr_db,frames,errors,cer,mean_metric_evals,mean_nodes,seconds\n");

    const CerTable t = run_cer(small_config());
    std::ostringstream os2;
    emit_csv(t, os2);
    std::size_t lines = 0;
    for (char ch : os2.str()) lines += ch == '\n' ? 1 : 0;
    REQUIRE(lines == t.config.snr_db.size() + 1);
}

TEST_CASE("emit writes files and flags bad paths") {
    const CerTable t = run_cer(small_config());
    const std::string path = "emit_test_out.csv";
    emit(t, "csv", path);
    std::ifstream is(path);
    REQUIRE(is.good());
    std::string header;
    std::getline(is, header);
    REQUIRE(header == "snr_db,frames,errors,cer,mean_metric_evals,mean_nodes,seconds");
    is.close();
    std::remove(path.c_str());

    REQUIRE_THROWS_AS(emit(t, "csv", "/nonexistent-dir/x.csv"), IoError);
    std::remove("emit_test_bad.xml");
    REQUIRE_THROWS_AS(emit(t, "xml", "emit_test_bad.xml"), ConfigError);
    std::ifstream leftover("emit_test_bad.xml");
    REQUIRE_FALSE(leftover.good()); // format rejected before the file is created
}

TEST_CASE("json round trip preserves the table") {
    const CerTable t = run_cer(small_config());
    const nlohmann::json j = table_to_json(t);
    const CerTable back = table_from_json(j);
    REQUIRE(back.points.size() == t.points.size());
    for (std::size_t i = 0; i < t.points.size(); ++i) {
        REQUIRE(back.points[i].snr_db == t.points[i].snr_db);
        REQUIRE(back.points[i].frames == t.points[i].frames);
        REQUIRE(back.points[i].errors == t.points[i].errors);
        REQUIRE(back.points[i].cer == t.points[i].cer);
        REQUIRE(back.points[i].mean_metric_evals == t.points[i].mean_metric_evals);
        REQUIRE(back.points[i].mean_nodes == t.points[i].mean_nodes);
        REQUIRE(back.points[i].seconds == t.points[i].seconds);
    }
    REQUIRE(back.config.m == t.config.m);
    REQUIRE(back.config.seed == t.config.seed);
    REQUIRE(back.config.snr_db == t.config.snr_db);
    REQUIRE(decoder_name(back.config.decoder) == decoder_name(t.config.decoder));
}

TEST_CASE("config json round trip and defaults") {
    const SimConfig cfg = config_from_json(nlohmann::json::parse(R"({"M":16,"decoder":"conditional"})"));
    REQUIRE(cfg.m == 16);
    REQUIRE(cfg.decoder == DecoderKind::conditional);
    REQUIRE(cfg.target_errors == 100); // default preserved

    const SimConfig full = config_from_json(config_to_json(small_config()));
    REQUIRE(full.m == small_config().m);
    REQUIRE(full.seed == small_config().seed);
    REQUIRE_THAT(full.theta_g, Catch::Matchers::WithinAbs(small_config().theta_g, 1e-12));
}

TEST_CASE("weights export schema") {
    const nlohmann::json j = weights_to_json(weight_matrices(ciod_angle()));
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 16);
    for (const auto& mat : j) {
        REQUIRE(mat.size() == 4);
        for (const auto& row : mat) {
            REQUIRE(row.size() == 4);
            for (const auto& entry : row) REQUIRE(entry.size() == 2);
        }
    }
}

TEST_CASE("analysis report serialization") {
    CodeAnalysisReport rep;
    rep.min_det = 0.64;
    rep.min_rank = 4;
    rep.coding_gain = 0.8944;
    rep.argmin_dx = {cdouble(1.0, -1.0)};
    rep.pairs_evaluated = 42;
    rep.mode = "exhaustive";
    const nlohmann::json j = report_to_json(rep);
    REQUIRE(j.at("min_det").get<double>() == 0.64);
    REQUIRE(j.at("min_rank").get<int>() == 4);
    REQUIRE(j.at("pairs_evaluated").get<std::uint64_t>() == 42);
    REQUIRE(j.at("mode").get<std::string>() == "exhaustive");
    REQUIRE(j.at("argmin_dx")[0][0].get<double>() == 1.0);
    REQUIRE(j.at("argmin_dx")[0][1].get<double>() == -1.0);
}

TEST_CASE("wilson interval sanity") {
    const WilsonInterval zero = wilson95(0, 1000);
    REQUIRE(zero.lo == 0.0);
    REQUIRE(zero.hi < 0.005);

    const WilsonInterval half = wilson95(500, 1000);
    REQUIRE(half.lo < 0.5);
    REQUIRE(half.hi > 0.5);
    REQUIRE(half.hi - half.lo < 0.07);

    const WilsonInterval all = wilson95(10, 10);
    REQUIRE(all.hi == 1.0);
    REQUIRE(all.lo < 1.0);
}
