#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "serla/serla.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("serla_capi_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

struct Config {
    serla_config* cfg = serla_config_create();
    ~Config() { serla_config_free(cfg); }
};

void set_tiny_budgets(serla_config* cfg) {
    REQUIRE(serla_config_set(cfg, "skill_dim", "3") == SERLA_OK);
    REQUIRE(serla_config_set(cfg, "n_expert", "2") == SERLA_OK);
    REQUIRE(serla_config_set(cfg, "prior_steps", "3") == SERLA_OK);
    REQUIRE(serla_config_set(cfg, "prior_batch", "8") == SERLA_OK);
    REQUIRE(serla_config_set(cfg, "rl_env_steps", "150") == SERLA_OK);
    REQUIRE(serla_config_set(cfg, "rl_eval_every", "100") == SERLA_OK);
    REQUIRE(serla_config_set(cfg, "rl_eval_episodes", "1") == SERLA_OK);
    REQUIRE(serla_config_set(cfg, "rl_batch", "4") == SERLA_OK);
    REQUIRE(serla_config_set(cfg, "rl_warmup_skill_steps", "2") == SERLA_OK);
}

}  // namespace

TEST_CASE("status names are stable strings") {
    CHECK(std::strcmp(serla_status_name(SERLA_OK), "SERLA_OK") == 0);
    CHECK(std::strcmp(serla_status_name(SERLA_ERR_IO), "SERLA_ERR_IO") == 0);
    CHECK(serla_status_name(static_cast<serla_status>(999)) != nullptr);
}

TEST_CASE("config handle lifecycle, sets, and hashing") {
    Config c;
    REQUIRE(c.cfg != nullptr);

    unsigned long long h0 = 0, h1 = 0;
    CHECK(serla_config_hash(c.cfg, &h0) == SERLA_OK);
    CHECK(serla_config_set(c.cfg, "rho", "0.25") == SERLA_OK);
    CHECK(serla_config_hash(c.cfg, &h1) == SERLA_OK);
    CHECK(h0 != h1);

    CHECK(serla_config_set(c.cfg, "no_such_key", "1") == SERLA_ERR_CONTRACT);
    CHECK(std::string(serla_last_error()).find("no_such_key") != std::string::npos);
    CHECK(serla_config_set(c.cfg, "rho", "banana") == SERLA_ERR_CONFIGURATION);

    CHECK(serla_config_set(nullptr, "rho", "0.1") == SERLA_ERR_INVALID_ARG);
    CHECK(serla_config_set(c.cfg, nullptr, "0.1") == SERLA_ERR_INVALID_ARG);
    CHECK(serla_config_hash(c.cfg, nullptr) == SERLA_ERR_INVALID_ARG);
    serla_config_free(nullptr);  // must be a safe no-op
}

TEST_CASE("config files load through the handle") {
    TempDir tmp;
    Config c;
    fs::path p = tmp.path / "run.cfg";
    std::ofstream(p) << "env = chained_targets\nseed = 9\n";
    CHECK(serla_config_load_file(c.cfg, p.string().c_str()) == SERLA_OK);

    CHECK(serla_config_load_file(c.cfg, (tmp.path / "missing.cfg").string().c_str()) ==
          SERLA_ERR_IO);
    fs::path bad = tmp.path / "bad.cfg";
    std::ofstream(bad) << "rho = banana\n";
    CHECK(serla_config_load_file(c.cfg, bad.string().c_str()) == SERLA_ERR_CONFIGURATION);
    CHECK(serla_config_load_file(c.cfg, nullptr) == SERLA_ERR_INVALID_ARG);
}

TEST_CASE("pipeline stages run end to end through the C surface") {
    TempDir tmp;
    Config c;
    set_tiny_budgets(c.cfg);
    std::string dir = tmp.path.string();

    REQUIRE(serla_gen_data(c.cfg, dir.c_str()) == SERLA_OK);
    CHECK(fs::exists(tmp.path / "expert.jsonl"));
    CHECK(fs::exists(tmp.path / "general.jsonl"));

    REQUIRE(serla_train_prior(c.cfg, dir.c_str(), dir.c_str()) == SERLA_OK);
    CHECK(fs::exists(tmp.path / "prior.ckpt"));

    std::string prior = (tmp.path / "prior.ckpt").string();
    REQUIRE(serla_train_rl(c.cfg, prior.c_str(), dir.c_str()) == SERLA_OK);
    CHECK(fs::exists(tmp.path / "policy.ckpt"));
    CHECK(fs::exists(tmp.path / "rl_log.csv"));

    double ret = -1.0;
    std::string policy = (tmp.path / "policy.ckpt").string();
    CHECK(serla_eval(c.cfg, prior.c_str(), policy.c_str(), 1, &ret) == SERLA_OK);
    CHECK(ret >= 0.0);
    ret = -1.0;
    CHECK(serla_eval(c.cfg, prior.c_str(), nullptr, 1, &ret) == SERLA_OK);  // untrained
    CHECK(ret >= 0.0);

    std::string log = (tmp.path / "rl_log.csv").string();
    const char* logs[] = {log.c_str()};
    std::string svg = (tmp.path / "o.svg").string(), csv = (tmp.path / "o.csv").string();
    CHECK(serla_plot(logs, 1, svg.c_str(), csv.c_str()) == SERLA_OK);
    CHECK(fs::exists(tmp.path / "o.svg"));
}

TEST_CASE("stage errors map to distinct status codes") {
    TempDir tmp;
    Config c;
    set_tiny_budgets(c.cfg);
    std::string dir = tmp.path.string();

    // datasets missing
    CHECK(serla_train_prior(c.cfg, dir.c_str(), dir.c_str()) == SERLA_ERR_IO);
    // prior checkpoint missing
    std::string prior = (tmp.path / "prior.ckpt").string();
    CHECK(serla_train_rl(c.cfg, prior.c_str(), dir.c_str()) == SERLA_ERR_IO);

    // garbage checkpoint
    std::ofstream(tmp.path / "prior.ckpt") << "garbage bytes here, not a model";
    CHECK(serla_train_rl(c.cfg, prior.c_str(), dir.c_str()) == SERLA_ERR_MALFORMED_FILE);

    // null arguments
    CHECK(serla_gen_data(nullptr, dir.c_str()) == SERLA_ERR_INVALID_ARG);
    CHECK(serla_gen_data(c.cfg, nullptr) == SERLA_ERR_INVALID_ARG);
    CHECK(serla_train_prior(c.cfg, nullptr, dir.c_str()) == SERLA_ERR_INVALID_ARG);
    CHECK(serla_eval(c.cfg, prior.c_str(), nullptr, 1, nullptr) == SERLA_ERR_INVALID_ARG);
    CHECK(serla_plot(nullptr, 1, "a.svg", "a.csv") == SERLA_ERR_INVALID_ARG);
}

TEST_CASE("mismatched artifacts are reported as spec mismatches") {
    TempDir tmp;
    Config c;
    set_tiny_budgets(c.cfg);
    std::string dir = tmp.path.string();
    REQUIRE(serla_gen_data(c.cfg, dir.c_str()) == SERLA_OK);
    REQUIRE(serla_train_prior(c.cfg, dir.c_str(), dir.c_str()) == SERLA_OK);

    // same checkpoint used against the other environment
    Config other;
    set_tiny_budgets(other.cfg);
    REQUIRE(serla_config_set(other.cfg, "env", "chained_targets") == SERLA_OK);
    std::string prior = (tmp.path / "prior.ckpt").string();
    CHECK(serla_train_rl(other.cfg, prior.c_str(), dir.c_str()) == SERLA_ERR_SPEC_MISMATCH);
    // and the datasets likewise
    CHECK(serla_train_prior(other.cfg, dir.c_str(), dir.c_str()) == SERLA_ERR_SPEC_MISMATCH);
}
