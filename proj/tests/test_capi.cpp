#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "twophase/twophase.h"

namespace fs = std::filesystem;

namespace {

const char* kConfig = R"({"schema_version": 1, "grid": {"dim": 1, "N": 32},
  "step": {"t_end": 0.1, "sample_every": 0.05},
  "initial": {"generator": "sine-perturbation", "amplitude": 0.1}})";

tp_config* make_config(std::vector<const char*> overrides = {}) {
    tp_config* cfg = nullptr;
    REQUIRE(tp_config_from_string(kConfig, overrides.data(), overrides.size(), &cfg) == TP_OK);
    return cfg;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "twophase_test_capi" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(tp_version()) == "1.0.0");
    CHECK(std::string(tp_status_name(TP_OK)) == "ok");
    CHECK(std::string(tp_status_name(TP_ERR_CONFIG)) == "config");
    CHECK(std::string(tp_status_name(static_cast<tp_status>(99))) == "unknown");
}

TEST_CASE("configuration errors carry a message") {
    tp_config* cfg = reinterpret_cast<tp_config*>(0x1);
    const char* bad = R"({"schema_version": 1, "params": {"kappa": -1}})";
    CHECK(tp_config_from_string(bad, nullptr, 0, &cfg) == TP_ERR_CONFIG);
    CHECK(cfg == nullptr);
    CHECK(std::string(tp_last_error_message()).find("kappa>0") != std::string::npos);
    CHECK(tp_config_from_string(nullptr, nullptr, 0, &cfg) == TP_ERR_INVALID_ARGUMENT);
    CHECK(tp_config_from_file("/nonexistent/config.json", nullptr, 0, &cfg) == TP_ERR_CONFIG);
    const char* ov[] = {nullptr};
    CHECK(tp_config_from_string(kConfig, ov, 1, &cfg) == TP_ERR_INVALID_ARGUMENT);
    tp_config_destroy(nullptr);
    tp_state_destroy(nullptr);
}

TEST_CASE("string outputs follow the size query convention") {
    tp_config* cfg = make_config({"outputs.directory=results"});
    size_t len = 0;
    CHECK(tp_config_output_dir(cfg, nullptr, 0, &len) == TP_ERR_BUFFER_TOO_SMALL);
    CHECK(len == 7);
    char small[7];
    CHECK(tp_config_output_dir(cfg, small, sizeof small, &len) == TP_ERR_BUFFER_TOO_SMALL);
    char buf[8];
    CHECK(tp_config_output_dir(cfg, buf, sizeof buf, &len) == TP_OK);
    CHECK(std::string(buf) == "results");

    CHECK(tp_config_resolved_json(cfg, nullptr, 0, &len) == TP_ERR_BUFFER_TOO_SMALL);
    std::string json(len + 1, '\0');
    CHECK(tp_config_resolved_json(cfg, json.data(), json.size(), &len) == TP_OK);
    CHECK(json.find("\"schema_version\"") != std::string::npos);
    CHECK(tp_config_has_sweep(cfg) == 0);
    tp_config_destroy(cfg);
}

TEST_CASE("state stepping through the C interface") {
    tp_config* cfg = make_config();
    tp_state* s = nullptr;
    REQUIRE(tp_state_from_config(cfg, &s) == TP_OK);
    CHECK(tp_state_dim(s) == 1);
    CHECK(tp_state_points_per_axis(s) == 32);
    CHECK(tp_state_time(s) == 0.0);

    size_t len = 0;
    std::vector<double> n(32);
    CHECK(tp_state_field(s, "n", n.data(), n.size(), &len) == TP_OK);
    CHECK(len == 32);
    CHECK(tp_state_field(s, "n", n.data(), 4, &len) == TP_ERR_BUFFER_TOO_SMALL);
    CHECK(tp_state_field(s, "w.0", n.data(), n.size(), &len) == TP_ERR_INVALID_ARGUMENT);
    CHECK(tp_state_field(s, "v.1", n.data(), n.size(), &len) == TP_ERR_INVALID_ARGUMENT);

    tp_diagnostics d0{}, d1{};
    CHECK(tp_state_diagnostics(s, cfg, &d0) == TP_OK);
    double dt = 0.0;
    CHECK(tp_state_stable_dt(s, cfg, &dt) == TP_OK);
    CHECK(dt > 0.0);
    for (int k = 0; k < 10; ++k) CHECK(tp_state_step(s, cfg, dt) == TP_OK);
    CHECK(tp_state_time(s) == doctest::Approx(10 * dt));
    CHECK(tp_state_diagnostics(s, cfg, &d1) == TP_OK);
    CHECK(std::abs(d1.mass_n - d0.mass_n) <= 1e-13);
    CHECK(std::abs(d1.momentum[0] - d0.momentum[0]) <= 1e-13);
    CHECK(d1.momentum[1] == 0.0);
    CHECK(d1.E < d0.E);

    CHECK(tp_state_step(s, cfg, -1.0) == TP_ERR_INVALID_ARGUMENT);
    CHECK(tp_state_step(s, cfg, 10.0) != TP_OK);
    tp_state_destroy(s);
    tp_config_destroy(cfg);
}

TEST_CASE("snapshots through the C interface") {
    const fs::path dir = scratch("snap");
    tp_config* cfg = make_config();
    tp_state* s = nullptr;
    REQUIRE(tp_state_from_config(cfg, &s) == TP_OK);
    const std::string path = (dir / "a.snap").string();
    CHECK(tp_state_write_snapshot(s, path.c_str()) == TP_OK);
    tp_state* r = nullptr;
    REQUIRE(tp_state_read_snapshot(path.c_str(), &r) == TP_OK);
    std::vector<double> a(32), b(32);
    size_t len = 0;
    tp_state_field(s, "u.0", a.data(), a.size(), &len);
    tp_state_field(r, "u.0", b.data(), b.size(), &len);
    CHECK(std::memcmp(a.data(), b.data(), 32 * sizeof(double)) == 0);
    CHECK(tp_state_read_snapshot((dir / "missing.snap").string().c_str(), &r) == TP_ERR_IO);
    CHECK(r == nullptr);
    tp_state_destroy(s);
    tp_config_destroy(cfg);
}

TEST_CASE("experiments and report") {
    const fs::path dir = scratch("run");
    tp_config* cfg = make_config();
    int code = -1;
    CHECK(tp_run_single(cfg, dir.string().c_str(), 1, &code) == TP_OK);
    CHECK(code == 0);
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(tp_run_single(cfg, nullptr, 1, &code) == TP_OK);
    CHECK(code == 0);
    CHECK(tp_run_single(cfg, nullptr, 1, nullptr) == TP_ERR_INVALID_ARGUMENT);

    CHECK(tp_run_sweep(cfg, nullptr, 1, &code) == TP_ERR_CONFIG);
    CHECK(code == 2);

    const std::string summary = (dir / "summary.json").string();
    const char* paths[] = {summary.c_str()};
    size_t len = 0;
    CHECK(tp_report(paths, 1, nullptr, 0, &len, &code) == TP_ERR_BUFFER_TOO_SMALL);
    std::string text(len + 1, '\0');
    CHECK(tp_report(paths, 1, text.data(), text.size(), &len, &code) == TP_OK);
    CHECK(code == 0);
    CHECK(text.find("PASS") != std::string::npos);
    tp_config_destroy(cfg);
}
