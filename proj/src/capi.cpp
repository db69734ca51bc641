#include "serla/serla.h"

#include <cstring>
#include <string>

#include "serla/harness.hpp"

using serla::TrainConfig;

struct serla_config {
    TrainConfig cfg;
};

namespace {

thread_local std::string g_last_error;

serla_status set_error(serla_status status, const char* what) {
    g_last_error = what ? what : "";
    return status;
}

template <typename Fn>
serla_status guarded(Fn&& fn) {
    try {
        fn();
        return SERLA_OK;
    } catch (const serla::VersionMismatchError& e) {
        return set_error(SERLA_ERR_VERSION_MISMATCH, e.what());
    } catch (const serla::SpecMismatchError& e) {
        return set_error(SERLA_ERR_SPEC_MISMATCH, e.what());
    } catch (const serla::MalformedFileError& e) {
        return set_error(SERLA_ERR_MALFORMED_FILE, e.what());
    } catch (const serla::IoError& e) {
        return set_error(SERLA_ERR_IO, e.what());
    } catch (const serla::NumericError& e) {
        return set_error(SERLA_ERR_NUMERIC, e.what());
    } catch (const serla::ConfigurationError& e) {
        return set_error(SERLA_ERR_CONFIGURATION, e.what());
    } catch (const serla::ContractError& e) {
        return set_error(SERLA_ERR_CONTRACT, e.what());
    } catch (const std::exception& e) {
        return set_error(SERLA_ERR_INTERNAL, e.what());
    }
}

bool null_arg(const void* p) { return p == nullptr; }

}  // namespace

extern "C" {

const char* serla_status_name(serla_status status) {
    switch (status) {
        case SERLA_OK: return "SERLA_OK";
        case SERLA_ERR_INVALID_ARG: return "SERLA_ERR_INVALID_ARG";
        case SERLA_ERR_CONTRACT: return "SERLA_ERR_CONTRACT";
        case SERLA_ERR_IO: return "SERLA_ERR_IO";
        case SERLA_ERR_MALFORMED_FILE: return "SERLA_ERR_MALFORMED_FILE";
        case SERLA_ERR_VERSION_MISMATCH: return "SERLA_ERR_VERSION_MISMATCH";
        case SERLA_ERR_SPEC_MISMATCH: return "SERLA_ERR_SPEC_MISMATCH";
        case SERLA_ERR_NUMERIC: return "SERLA_ERR_NUMERIC";
        case SERLA_ERR_CONFIGURATION: return "SERLA_ERR_CONFIGURATION";
        case SERLA_ERR_INTERNAL: return "SERLA_ERR_INTERNAL";
    }
    return "SERLA_ERR_UNKNOWN";
}

const char* serla_last_error(void) { return g_last_error.c_str(); }

serla_config* serla_config_create(void) { return new serla_config{}; }

void serla_config_free(serla_config* cfg) { delete cfg; }

serla_status serla_config_load_file(serla_config* cfg, const char* path) {
    if (null_arg(cfg) || null_arg(path))
        return set_error(SERLA_ERR_INVALID_ARG, "null argument");
    return guarded([&] { cfg->cfg = TrainConfig::from_file(path); });
}

serla_status serla_config_set(serla_config* cfg, const char* key, const char* value) {
    if (null_arg(cfg) || null_arg(key) || null_arg(value))
        return set_error(SERLA_ERR_INVALID_ARG, "null argument");
    return guarded([&] {
        cfg->cfg.set(key, value);
        cfg->cfg.validate();
    });
}

serla_status serla_config_hash(const serla_config* cfg, unsigned long long* out_hash) {
    if (null_arg(cfg) || null_arg(out_hash))
        return set_error(SERLA_ERR_INVALID_ARG, "null argument");
    *out_hash = cfg->cfg.hash();
    return SERLA_OK;
}

serla_status serla_gen_data(const serla_config* cfg, const char* out_dir) {
    if (null_arg(cfg) || null_arg(out_dir))
        return set_error(SERLA_ERR_INVALID_ARG, "null argument");
    return guarded([&] { serla::cmd_gen_data(cfg->cfg, out_dir); });
}

serla_status serla_train_prior(const serla_config* cfg, const char* data_dir,
                               const char* out_dir) {
    if (null_arg(cfg) || null_arg(data_dir) || null_arg(out_dir))
        return set_error(SERLA_ERR_INVALID_ARG, "null argument");
    return guarded([&] { serla::cmd_train_prior(cfg->cfg, data_dir, out_dir); });
}

serla_status serla_train_rl(const serla_config* cfg, const char* prior_ckpt,
                            const char* out_dir) {
    if (null_arg(cfg) || null_arg(prior_ckpt) || null_arg(out_dir))
        return set_error(SERLA_ERR_INVALID_ARG, "null argument");
    return guarded([&] { serla::cmd_train_rl(cfg->cfg, prior_ckpt, out_dir); });
}

serla_status serla_eval(const serla_config* cfg, const char* prior_ckpt,
                        const char* policy_ckpt, int episodes, double* mean_return_out) {
    if (null_arg(cfg) || null_arg(prior_ckpt) || null_arg(mean_return_out))
        return set_error(SERLA_ERR_INVALID_ARG, "null argument");
    if (episodes < 1) return set_error(SERLA_ERR_INVALID_ARG, "episodes must be >= 1");
    return guarded([&] {
        *mean_return_out = serla::cmd_eval(cfg->cfg, prior_ckpt,
                                           policy_ckpt ? policy_ckpt : "", episodes);
    });
}

serla_status serla_ablate(const serla_config* cfg, const unsigned long long* seeds,
                          int n_seeds, const char* const* envs, int n_envs,
                          const char* work_dir, const char* out_csv) {
    if (null_arg(cfg) || null_arg(seeds) || null_arg(envs) || null_arg(work_dir) ||
        null_arg(out_csv))
        return set_error(SERLA_ERR_INVALID_ARG, "null argument");
    if (n_seeds < 2) return set_error(SERLA_ERR_INVALID_ARG, "need at least 2 seeds");
    if (n_envs < 1) return set_error(SERLA_ERR_INVALID_ARG, "need at least 1 env");
    return guarded([&] {
        std::vector<std::uint64_t> seed_list(seeds, seeds + n_seeds);
        std::vector<std::string> env_list(envs, envs + n_envs);
        serla::AblationTable table =
            serla::run_ablation(cfg->cfg, seed_list, env_list, work_dir);
        serla::write_ablation_csv(table, out_csv);
    });
}

serla_status serla_plot(const char* const* log_paths, int n_logs, const char* out_svg,
                        const char* out_csv) {
    if (null_arg(log_paths) || null_arg(out_svg) || null_arg(out_csv))
        return set_error(SERLA_ERR_INVALID_ARG, "null argument");
    if (n_logs < 1) return set_error(SERLA_ERR_INVALID_ARG, "need at least 1 log");
    return guarded([&] {
        std::vector<std::filesystem::path> logs(log_paths, log_paths + n_logs);
        serla::cmd_plot(logs, out_svg, out_csv);
    });
}

}  // extern "C"
