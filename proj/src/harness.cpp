#include "serla/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "serla/checkpoint.hpp"

namespace serla {

namespace fs = std::filesystem;

// ---- config --------------------------------------------------------------

namespace {

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigurationError("config: value '" + v + "' for key '" + key +
                                 "' is not a number");
    }
}

long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigurationError("config: value '" + v + "' for key '" + key +
                                 "' is not an integer");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigurationError("config: value '" + v + "' for key '" + key + "' is not a boolean");
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

}  // namespace

void TrainConfig::set(const std::string& key, const std::string& value) {
    if (key == "env") env = value;
    else if (key == "horizon") horizon = static_cast<int>(parse_long(key, value));
    else if (key == "skill_dim") skill_dim = static_cast<int>(parse_long(key, value));
    else if (key == "lambda") lambda = parse_double(key, value);
    else if (key == "xi") xi = parse_double(key, value);
    else if (key == "rho") rho = parse_double(key, value);
    else if (key == "beta") beta = parse_double(key, value);
    else if (key == "alpha") alpha = parse_double(key, value);
    else if (key == "eta") eta = parse_double(key, value);
    else if (key == "tau") tau = parse_double(key, value);
    else if (key == "gamma") gamma = parse_double(key, value);
    else if (key == "kappa_init") kappa_init = parse_double(key, value);
    else if (key == "kappa_target") kappa_target = parse_double(key, value);
    else if (key == "lr_kappa") lr_kappa = parse_double(key, value);
    else if (key == "prior_lr") prior_lr = parse_double(key, value);
    else if (key == "disc_lr") disc_lr = parse_double(key, value);
    else if (key == "disc_weight_decay") disc_weight_decay = parse_double(key, value);
    else if (key == "prior_batch") prior_batch = static_cast<int>(parse_long(key, value));
    else if (key == "prior_steps") prior_steps = static_cast<int>(parse_long(key, value));
    else if (key == "prior_log_every") prior_log_every = static_cast<int>(parse_long(key, value));
    else if (key == "rl_lr_policy") rl_lr_policy = parse_double(key, value);
    else if (key == "rl_lr_critic") rl_lr_critic = parse_double(key, value);
    else if (key == "rl_batch") rl_batch = static_cast<int>(parse_long(key, value));
    else if (key == "rl_warmup_skill_steps") rl_warmup_skill_steps = static_cast<int>(parse_long(key, value));
    else if (key == "rl_buffer_capacity") rl_buffer_capacity = parse_long(key, value);
    else if (key == "rl_env_steps") rl_env_steps = parse_long(key, value);
    else if (key == "rl_eval_every") rl_eval_every = parse_long(key, value);
    else if (key == "rl_eval_episodes") rl_eval_episodes = static_cast<int>(parse_long(key, value));
    else if (key == "n_expert") n_expert = static_cast<int>(parse_long(key, value));
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_long(key, value));
    else if (key == "sde_skill") sde_skill = parse_bool(key, value);
    else if (key == "sde_downstream") sde_downstream = parse_bool(key, value);
    else if (key == "pu_enabled") pu_enabled = parse_bool(key, value);
    else if (key == "prior_mode") prior_mode = value;
    else throw ContractError("config: unknown key '" + key + "'");
}

TrainConfig TrainConfig::from_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path.string());
    TrainConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigurationError("config: line " + std::to_string(lineno) +
                                     " is not 'key = value'");
        cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    cfg.validate();
    return cfg;
}

void TrainConfig::validate() const {
    auto check = [](bool ok, const char* msg) {
        if (!ok) throw ConfigurationError(msg);
    };
    check(horizon >= 1, "config: horizon must be >= 1");
    check(skill_dim >= 1, "config: skill_dim must be >= 1");
    check(lambda > 0.0 && lambda < 1.0, "config: lambda must be in (0, 1)");
    check(xi >= 0.0, "config: xi must be >= 0");
    check(rho >= 0.0, "config: rho must be >= 0");
    check(eta >= 0.0 && eta < 1.0, "config: eta must be in [0, 1)");
    check(tau > 0.0 && tau <= 1.0, "config: tau must be in (0, 1]");
    check(gamma > 0.0 && gamma < 1.0, "config: gamma must be in (0, 1)");
    check(kappa_init > 0.0, "config: kappa_init must be positive");
    check(n_expert >= 1, "config: n_expert must be >= 1");
    check(prior_mode == "learned" || prior_mode == "uniform",
          "config: prior_mode must be 'learned' or 'uniform'");
    env_spec();  // validates the env name
}

std::string TrainConfig::canonical_string() const {
    std::ostringstream os;
    os.precision(17);
    os << "env=" << env << "\nhorizon=" << horizon << "\nskill_dim=" << skill_dim
       << "\nlambda=" << lambda << "\nxi=" << xi << "\nrho=" << rho << "\nbeta=" << beta
       << "\nalpha=" << alpha << "\neta=" << eta << "\ntau=" << tau << "\ngamma=" << gamma
       << "\nkappa_init=" << kappa_init << "\nkappa_target=" << kappa_target
       << "\nlr_kappa=" << lr_kappa << "\nprior_lr=" << prior_lr << "\ndisc_lr=" << disc_lr
       << "\ndisc_weight_decay=" << disc_weight_decay
       << "\nprior_batch=" << prior_batch << "\nprior_steps=" << prior_steps
       << "\nprior_log_every=" << prior_log_every << "\nrl_lr_policy=" << rl_lr_policy
       << "\nrl_lr_critic=" << rl_lr_critic << "\nrl_batch=" << rl_batch
       << "\nrl_warmup_skill_steps=" << rl_warmup_skill_steps
       << "\nrl_buffer_capacity=" << rl_buffer_capacity << "\nrl_env_steps=" << rl_env_steps
       << "\nrl_eval_every=" << rl_eval_every << "\nrl_eval_episodes=" << rl_eval_episodes
       << "\nn_expert=" << n_expert << "\nseed=" << seed << "\nsde_skill=" << sde_skill
       << "\nsde_downstream=" << sde_downstream << "\npu_enabled=" << pu_enabled
       << "\nprior_mode=" << prior_mode << "\n";
    return os.str();
}

std::uint64_t TrainConfig::hash() const { return hash_string(canonical_string()); }

EnvSpec TrainConfig::env_spec() const { return EnvSpec::make(env_name_from_string(env)); }

PriorTrainConfig TrainConfig::prior_config() const {
    PriorTrainConfig pc;
    EnvSpec spec = env_spec();
    pc.model.horizon = horizon;
    pc.model.skill_dim = skill_dim;
    pc.model.state_dim = spec.state_dim;
    pc.model.action_dim = spec.action_dim;
    pc.pu = {lambda, xi, rho};
    pc.beta = beta;
    pc.alpha = alpha;
    pc.eta = eta;
    pc.lr = prior_lr;
    pc.disc_lr = disc_lr;
    pc.disc_weight_decay = disc_weight_decay;
    pc.batch = prior_batch;
    pc.steps = prior_steps;
    pc.log_every = prior_log_every;
    pc.sde_enabled = sde_skill;
    pc.pu_enabled = pu_enabled;
    return pc;
}

SsacConfig TrainConfig::ssac_config() const {
    SsacConfig sc;
    sc.gamma = gamma;
    sc.tau = tau;
    sc.kappa_init = kappa_init;
    sc.kappa_target = kappa_target;
    sc.lr_kappa = lr_kappa;
    sc.lr_policy = rl_lr_policy;
    sc.lr_critic = rl_lr_critic;
    sc.eta = eta;
    sc.sde_enabled = sde_downstream;
    sc.prior_mode = prior_mode == "uniform" ? PriorMode::kUniform : PriorMode::kLearned;
    sc.batch = rl_batch;
    sc.warmup_skill_steps = rl_warmup_skill_steps;
    sc.buffer_capacity = static_cast<std::size_t>(rl_buffer_capacity);
    sc.total_env_steps = rl_env_steps;
    sc.eval_every_env_steps = rl_eval_every;
    sc.eval_episodes = rl_eval_episodes;
    return sc;
}

// ---- metrics -------------------------------------------------------------

double normalized_return(double ret, const EnvSpec& spec) {
    require(ret >= 0.0 && ret <= spec.max_return,
            "normalized_return: return outside [0, max_return]");
    return ret / spec.max_return;
}

double Curve::interpolate(double step) const {
    require(!steps.empty(), "Curve::interpolate: empty curve");
    if (step <= steps.front()) return values.front();
    if (step >= steps.back()) return values.back();
    auto it = std::upper_bound(steps.begin(), steps.end(), step);
    std::size_t hi = static_cast<std::size_t>(it - steps.begin());
    std::size_t lo = hi - 1;
    double t = (step - steps[lo]) / (steps[hi] - steps[lo]);
    return values[lo] + t * (values[hi] - values[lo]);
}

double Curve::average_value() const {
    require(!values.empty(), "Curve::average_value: empty curve");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

Curve mean_normalized_return(const std::vector<Curve>& curves) {
    require(!curves.empty(), "mean_normalized_return: empty curve set");
    std::set<double> grid;
    for (const auto& c : curves) grid.insert(c.steps.begin(), c.steps.end());
    Curve out;
    for (double s : grid) {
        double sum = 0.0;
        for (const auto& c : curves) sum += c.interpolate(s);
        out.steps.push_back(s);
        out.values.push_back(sum / static_cast<double>(curves.size()));
    }
    return out;
}

// ---- checkpoints ---------------------------------------------------------

namespace {

Mat meta_vector(const std::vector<int>& xs) {
    Mat m(static_cast<int>(xs.size()), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<int>(i), 0) = xs[i];
    return m;
}

std::vector<int> meta_to_ints(const Mat& m) {
    std::vector<int> out;
    for (int i = 0; i < m.rows(); ++i) out.push_back(static_cast<int>(m(i, 0)));
    return out;
}

}  // namespace

void save_prior_checkpoint(const fs::path& path, const SkillModel& model,
                           const Discriminator& disc, std::uint64_t config_hash) {
    NamedArrays arrays;
    const auto& c = model.config();
    std::vector<int> meta = {c.horizon, c.skill_dim, c.state_dim, c.action_dim,
                             static_cast<int>(c.hidden.size())};
    meta.insert(meta.end(), c.hidden.begin(), c.hidden.end());
    arrays.add("meta", meta_vector(meta));
    std::vector<int> disc_meta;
    for (std::size_t i = 0; i + 1 < disc.net().layers().size(); ++i)
        disc_meta.push_back(static_cast<int>(disc.net().layers()[i].w.rows()));
    arrays.add("disc_meta", meta_vector(disc_meta));
    pack_mlp(arrays, "encoder", model.encoder());
    pack_mlp(arrays, "decoder", model.decoder());
    pack_mlp(arrays, "prior", model.prior_net());
    pack_mlp(arrays, "disc", disc.net());
    write_checkpoint(path, config_hash, arrays);
}

void load_prior_checkpoint(const fs::path& path, SkillModel* model, Discriminator* disc,
                           std::uint64_t* config_hash) {
    NamedArrays arrays = read_checkpoint(path, config_hash);
    std::vector<int> meta = meta_to_ints(arrays.get("meta"));
    if (meta.size() < 5) throw MalformedFileError("prior checkpoint: bad meta array");
    SkillModelConfig cfg;
    cfg.horizon = meta[0];
    cfg.skill_dim = meta[1];
    cfg.state_dim = meta[2];
    cfg.action_dim = meta[3];
    cfg.hidden.assign(meta.begin() + 5, meta.begin() + 5 + meta[4]);
    Rng dummy(0);
    *model = SkillModel(cfg, dummy);
    unpack_mlp(arrays, "encoder", model->encoder());
    unpack_mlp(arrays, "decoder", model->decoder());
    unpack_mlp(arrays, "prior", model->prior_net());
    if (disc) {
        std::vector<int> disc_hidden = meta_to_ints(arrays.get("disc_meta"));
        Rng d2(0);
        *disc = Discriminator(cfg.skill_dim, disc_hidden, d2);
        unpack_mlp(arrays, "disc", disc->net());
    }
}

void save_policy_checkpoint(const fs::path& path, const Ssac& agent,
                            std::uint64_t config_hash) {
    NamedArrays arrays;
    pack_mlp(arrays, "policy", agent.policy_net());
    pack_mlp(arrays, "critic", agent.critic_net());
    pack_mlp(arrays, "target_critic", agent.target_critic_net());
    Mat kappa(1, 1);
    kappa(0, 0) = agent.kappa();
    arrays.add("kappa", kappa);
    write_checkpoint(path, config_hash, arrays);
}

void load_policy_checkpoint(const fs::path& path, Ssac* agent, std::uint64_t* config_hash) {
    NamedArrays arrays = read_checkpoint(path, config_hash);
    unpack_mlp(arrays, "policy", agent->policy_net());
    unpack_mlp(arrays, "critic", agent->critic_net());
    unpack_mlp(arrays, "target_critic", agent->target_critic_net());
    agent->set_kappa(arrays.get("kappa")(0, 0));
}

// ---- commands ------------------------------------------------------------

void write_run_record(const RunRecord& rec, const fs::path& path) {
    nlohmann::json j{{"config_hash", rec.config_hash},
                     {"seed", rec.seed},
                     {"artifacts", rec.artifacts},
                     {"wall_clock_seconds", rec.wall_clock_seconds}};
    std::ofstream out(path);
    if (!out) throw IoError("write_run_record: cannot open " + path.string());
    out << j.dump(2) << '\n';
}

void cmd_gen_data(const TrainConfig& cfg, const fs::path& out_dir) {
    auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    EnvSpec spec = cfg.env_spec();
    Rng rng(cfg.seed);
    Rng expert_rng = rng.child("expert_data");
    Rng general_rng = rng.child("general_data");
    DemoDataset expert = generate_expert(spec, cfg.n_expert, expert_rng);
    DemoDataset general = generate_general(spec, cfg.n_expert, general_rng);
    save_dataset(expert, out_dir / kExpertFile);
    save_dataset(general, out_dir / kGeneralFile);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_run_record({cfg.hash(), cfg.seed, {kExpertFile, kGeneralFile}, secs},
                     out_dir / "run_record.json");
}

namespace {

DemoDataset load_required_dataset(const fs::path& path, const EnvSpec& expected,
                                  DemoKind kind) {
    if (!fs::exists(path))
        throw IoError("missing dataset " + path.string() + "; produce it with `gen-data`");
    DemoDataset ds = load_dataset(path);
    if (!(ds.spec == expected))
        throw SpecMismatchError("dataset " + path.string() +
                                " was generated for a different env spec; re-run `gen-data`");
    if (ds.kind != kind)
        throw SpecMismatchError("dataset " + path.string() + " has kind '" +
                                to_string(ds.kind) + "', expected '" + to_string(kind) + "'");
    return ds;
}

}  // namespace

void cmd_train_prior(const TrainConfig& cfg, const fs::path& data_dir,
                     const fs::path& out_dir) {
    auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    EnvSpec spec = cfg.env_spec();
    DemoDataset expert = load_required_dataset(data_dir / kExpertFile, spec, DemoKind::kExpert);
    DemoDataset general =
        load_required_dataset(data_dir / kGeneralFile, spec, DemoKind::kGeneral);
    Rng rng = Rng(cfg.seed).child("train_prior");
    PriorTrainResult result = train_prior(expert, general, cfg.prior_config(), rng);
    save_prior_checkpoint(out_dir / kPriorCkptFile, result.model, result.disc, cfg.hash());
    write_prior_log_csv(result.log, out_dir / kPriorLogFile);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_run_record({cfg.hash(), cfg.seed, {kPriorCkptFile, kPriorLogFile}, secs},
                     out_dir / "run_record.json");
}

void cmd_train_rl(const TrainConfig& cfg, const fs::path& prior_ckpt, const fs::path& out_dir) {
    auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);
    EnvSpec spec = cfg.env_spec();
    if (!fs::exists(prior_ckpt))
        throw IoError("missing prior checkpoint " + prior_ckpt.string() +
                      "; produce it with `train-prior`");
    SkillModel model;
    load_prior_checkpoint(prior_ckpt, &model, nullptr, nullptr);
    if (model.config().state_dim != spec.state_dim ||
        model.config().action_dim != spec.action_dim)
        throw SpecMismatchError("prior checkpoint dims do not match env '" + cfg.env +
                                "'; re-run `train-prior` for this env");
    Rng rng = Rng(cfg.seed).child("train_rl");
    Rng init_rng = rng.child("init");
    Ssac agent(model, cfg.ssac_config(), spec, init_rng);
    DownstreamResult result = train_downstream(agent, spec, rng);
    save_policy_checkpoint(out_dir / kPolicyCkptFile, agent, cfg.hash());
    write_eval_log_csv(result.log, out_dir / kRlLogFile);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_run_record({cfg.hash(), cfg.seed, {kPolicyCkptFile, kRlLogFile}, secs},
                     out_dir / "run_record.json");
}

double cmd_eval(const TrainConfig& cfg, const fs::path& prior_ckpt,
                const fs::path& policy_ckpt, int episodes) {
    EnvSpec spec = cfg.env_spec();
    if (!fs::exists(prior_ckpt))
        throw IoError("missing prior checkpoint " + prior_ckpt.string() +
                      "; produce it with `train-prior`");
    SkillModel model;
    load_prior_checkpoint(prior_ckpt, &model, nullptr, nullptr);
    Rng rng = Rng(cfg.seed).child("eval_cmd");
    Rng init_rng = rng.child("init");
    Ssac agent(model, cfg.ssac_config(), spec, init_rng);
    if (!policy_ckpt.empty()) {
        if (!fs::exists(policy_ckpt))
            throw IoError("missing policy checkpoint " + policy_ckpt.string() +
                          "; produce it with `train-rl`");
        load_policy_checkpoint(policy_ckpt, &agent, nullptr);
    }
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
        Rng er = rng.child("episode").child(static_cast<std::uint64_t>(e));
        total += agent.eval_episode(er);
    }
    return total / episodes;
}

// ---- ablation ------------------------------------------------------------

namespace {

struct Variant {
    std::string label;
    bool sde_skill;
    bool sde_downstream;
};

const std::vector<Variant> kVariants = {
    {"SeRLA-w/o-SDE", false, false},
    {"SeRLA_SDE (skill)", true, false},
    {"SeRLA_SDE (downstream)", false, true},
    {"SeRLA (full)", true, true},
};

}  // namespace

AblationTable run_ablation(const TrainConfig& base, const std::vector<std::uint64_t>& seeds,
                           const std::vector<std::string>& envs, const fs::path& work_dir) {
    require(seeds.size() >= 2, "run_ablation: need at least 2 seeds");
    fs::create_directories(work_dir);
    AblationTable table;
    for (const auto& v : kVariants) table.variants.push_back(v.label);
    table.envs = envs;
    table.cells.assign(kVariants.size(), std::vector<AblationCell>(envs.size()));

    for (std::size_t ei = 0; ei < envs.size(); ++ei) {
        TrainConfig env_cfg = base;
        env_cfg.env = envs[ei];
        EnvSpec spec = env_cfg.env_spec();

        // Datasets are shared across seeds and variants.
        Rng data_rng(env_cfg.seed);
        Rng expert_rng = data_rng.child("expert_data");
        Rng general_rng = data_rng.child("general_data");
        DemoDataset expert = generate_expert(spec, env_cfg.n_expert, expert_rng);
        DemoDataset general = generate_general(spec, env_cfg.n_expert, general_rng);

        // avg_return[variant][seed]; NaN marks a failed sub-run.
        std::vector<std::vector<double>> avg(kVariants.size(),
                                             std::vector<double>(seeds.size()));
        for (std::size_t si = 0; si < seeds.size(); ++si) {
            // Two prior checkpoints per seed: with and without skill-stage SDE.
            SkillModel priors[2];
            bool prior_ok[2] = {false, false};
            for (int sde = 0; sde < 2; ++sde) {
                TrainConfig pc = env_cfg;
                pc.seed = seeds[si];
                pc.sde_skill = (sde == 1);
                try {
                    Rng rng = Rng(pc.seed).child("train_prior");
                    PriorTrainResult r = train_prior(expert, general, pc.prior_config(), rng);
                    priors[sde] = std::move(r.model);
                    prior_ok[sde] = true;
                } catch (const std::exception&) {
                    prior_ok[sde] = false;
                }
            }
            for (std::size_t vi = 0; vi < kVariants.size(); ++vi) {
                const Variant& var = kVariants[vi];
                const int prior_idx = var.sde_skill ? 1 : 0;
                if (!prior_ok[prior_idx]) {
                    avg[vi][si] = std::nan("");
                    continue;
                }
                TrainConfig rc = env_cfg;
                rc.seed = seeds[si];
                rc.sde_skill = var.sde_skill;
                rc.sde_downstream = var.sde_downstream;
                try {
                    Rng rng = Rng(rc.seed).child("train_rl");
                    Rng init_rng = rng.child("init");
                    Ssac agent(priors[prior_idx], rc.ssac_config(), spec, init_rng);
                    DownstreamResult dr = train_downstream(agent, spec, rng);
                    Curve c;
                    for (const auto& rec : dr.log) {
                        c.steps.push_back(static_cast<double>(rec.env_step));
                        c.values.push_back(rec.mean_return);
                    }
                    avg[vi][si] = c.average_value();
                } catch (const std::exception&) {
                    avg[vi][si] = std::nan("");
                }
            }
        }

        for (std::size_t vi = 0; vi < kVariants.size(); ++vi) {
            std::vector<double> increases;
            bool failed = false;
            for (std::size_t si = 0; si < seeds.size(); ++si) {
                double baseline = avg[0][si];
                double value = avg[vi][si];
                if (!std::isfinite(baseline) || !std::isfinite(value) || baseline == 0.0) {
                    failed = true;
                    continue;
                }
                increases.push_back((value - baseline) / baseline);
            }
            AblationCell& cell = table.cells[vi][ei];
            if (increases.empty()) {
                cell.failed = true;
                continue;
            }
            cell.failed = failed;
            double mean = 0.0;
            for (double x : increases) mean += x;
            mean /= static_cast<double>(increases.size());
            double var = 0.0;
            for (double x : increases) var += (x - mean) * (x - mean);
            var /= static_cast<double>(increases.size());
            cell.mean_increase = mean;
            cell.std_increase = std::sqrt(var);
        }
    }
    return table;
}

void write_ablation_csv(const AblationTable& table, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_ablation_csv: cannot open " + path.string());
    out << "variant";
    for (const auto& e : table.envs) out << ',' << e << "_mean," << e << "_std," << e << "_status";
    out << '\n';
    out.precision(17);
    for (std::size_t vi = 0; vi < table.variants.size(); ++vi) {
        out << '"' << table.variants[vi] << '"';
        for (std::size_t ei = 0; ei < table.envs.size(); ++ei) {
            const auto& c = table.cells[vi][ei];
            out << ',' << c.mean_increase << ',' << c.std_increase << ','
                << (c.failed ? "failed" : "ok");
        }
        out << '\n';
    }
}

// ---- plotting ------------------------------------------------------------

Curve read_eval_log_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("read_eval_log_csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw MalformedFileError("read_eval_log_csv: empty file " + path.string());
    Curve c;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::istringstream ls(line);
        std::string step_s, ret_s;
        if (!std::getline(ls, step_s, ',') || !std::getline(ls, ret_s, ','))
            throw MalformedFileError("read_eval_log_csv: bad row in " + path.string());
        c.steps.push_back(parse_double("env_step", trim(step_s)));
        c.values.push_back(parse_double("mean_return", trim(ret_s)));
    }
    if (c.steps.empty())
        throw MalformedFileError("read_eval_log_csv: no data rows in " + path.string());
    return c;
}

namespace {

// Minimal SVG line plot: per-log curves, min-max band, mean curve.
void write_svg_plot(const std::vector<Curve>& curves, const Curve& mean_curve,
                    const fs::path& out_svg) {
    const double width = 720, height = 480, ml = 60, mr = 20, mt = 20, mb = 50;
    double xmin = mean_curve.steps.front(), xmax = mean_curve.steps.back();
    double ymin = 0.0, ymax = 0.0;
    for (const auto& c : curves)
        for (double v : c.values) ymax = std::max(ymax, v);
    ymax = std::max(ymax * 1.05, 1e-9);
    auto sx = [&](double x) { return ml + (x - xmin) / std::max(xmax - xmin, 1e-12) * (width - ml - mr); };
    auto sy = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

    std::ofstream out(out_svg);
    if (!out) throw IoError("cmd_plot: cannot open " + out_svg.string());
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";

    // band: max over logs down, min back
    out << "<polygon fill='#4c72b0' fill-opacity='0.2' stroke='none' points='";
    for (std::size_t i = 0; i < mean_curve.steps.size(); ++i) {
        double s = mean_curve.steps[i], hi = -1e300;
        for (const auto& c : curves) hi = std::max(hi, c.interpolate(s));
        out << sx(s) << ',' << sy(hi) << ' ';
    }
    for (std::size_t i = mean_curve.steps.size(); i-- > 0;) {
        double s = mean_curve.steps[i], lo = 1e300;
        for (const auto& c : curves) lo = std::min(lo, c.interpolate(s));
        out << sx(s) << ',' << sy(lo) << ' ';
    }
    out << "'/>\n";

    for (const auto& c : curves) {
        out << "<polyline fill='none' stroke='#999999' stroke-width='1' points='";
        for (std::size_t i = 0; i < c.steps.size(); ++i)
            out << sx(c.steps[i]) << ',' << sy(c.values[i]) << ' ';
        out << "'/>\n";
    }
    out << "<polyline fill='none' stroke='#4c72b0' stroke-width='2.5' points='";
    for (std::size_t i = 0; i < mean_curve.steps.size(); ++i)
        out << sx(mean_curve.steps[i]) << ',' << sy(mean_curve.values[i]) << ' ';
    out << "'/>\n";

    // axes
    out << "<line x1='" << ml << "' y1='" << height - mb << "' x2='" << width - mr << "' y2='"
        << height - mb << "' stroke='black'/>\n";
    out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << height - mb
        << "' stroke='black'/>\n";
    for (int i = 0; i <= 5; ++i) {
        double x = xmin + (xmax - xmin) * i / 5.0;
        double y = ymin + (ymax - ymin) * i / 5.0;
        out << "<text x='" << sx(x) << "' y='" << height - mb + 18
            << "' font-size='11' text-anchor='middle'>" << static_cast<long>(x) << "</text>\n";
        out << "<text x='" << ml - 6 << "' y='" << sy(y) + 4
            << "' font-size='11' text-anchor='end'>" << y << "</text>\n";
    }
    out << "<text x='" << (ml + width - mr) / 2 << "' y='" << height - 10
        << "' font-size='13' text-anchor='middle'>environment steps</text>\n";
    out << "<text x='16' y='" << (mt + height - mb) / 2
        << "' font-size='13' text-anchor='middle' transform='rotate(-90 16 "
        << (mt + height - mb) / 2 << ")'>mean return</text>\n";
    out << "</svg>\n";
}

}  // namespace

void cmd_plot(const std::vector<fs::path>& logs, const fs::path& out_svg,
              const fs::path& out_csv) {
    require(!logs.empty(), "cmd_plot: no input logs");
    std::vector<Curve> curves;
    curves.reserve(logs.size());
    for (const auto& p : logs) curves.push_back(read_eval_log_csv(p));
    Curve mean = mean_normalized_return(curves);  // shared-grid pointwise mean

    std::ofstream out(out_csv);
    if (!out) throw IoError("cmd_plot: cannot open " + out_csv.string());
    out << "env_step";
    for (const auto& p : logs) out << ',' << p.stem().string();
    out << ",mean\n";
    out.precision(17);
    for (std::size_t i = 0; i < mean.steps.size(); ++i) {
        out << mean.steps[i];
        for (const auto& c : curves) out << ',' << c.interpolate(mean.steps[i]);
        out << ',' << mean.values[i] << '\n';
    }

    write_svg_plot(curves, mean, out_svg);
}

}  // namespace serla
