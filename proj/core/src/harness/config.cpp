#include "calql/harness/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "calql/rng.hpp"

namespace calql::harness {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    std::size_t e = s.find_last_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        require(used == v.size(), ErrorKind::ParseError, "trailing junk in value for " + key);
        return x;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        fail(ErrorKind::ParseError, "bad numeric value for " + key + ": " + v);
    }
}

long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        require(used == v.size(), ErrorKind::ParseError, "trailing junk in value for " + key);
        return x;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        fail(ErrorKind::ParseError, "bad integer value for " + key + ": " + v);
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "on") return true;
    if (v == "false" || v == "0" || v == "off") return false;
    fail(ErrorKind::ParseError, "bad boolean value for " + key + ": " + v);
}

std::vector<std::size_t> to_size_list(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    if (trim(v).empty()) return out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const long x = to_long(key, trim(item));
        require(x > 0, ErrorKind::ParseError, "widths must be positive in " + key);
        out.push_back(static_cast<std::size_t>(x));
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const std::size_t dots = item.find("..");
        if (dots == std::string::npos) {
            seeds.push_back(static_cast<std::uint64_t>(to_long("seeds", item)));
        } else {
            const long a = to_long("seeds", item.substr(0, dots));
            const long b = to_long("seeds", item.substr(dots + 2));
            require(a <= b, ErrorKind::ParseError, "seed range must be ascending: " + item);
            for (long s = a; s <= b; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }
    require(!seeds.empty(), ErrorKind::ParseError, "empty seed list");
    return seeds;
}

const char* agent_kind_name(AgentKind kind) {
    switch (kind) {
        case AgentKind::Sac: return "sac";
        case AgentKind::SacOffline: return "sac+offline";
        case AgentKind::Cql: return "cql";
        case AgentKind::CalQl: return "calql";
    }
    return "?";
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        require(eq != std::string::npos, ErrorKind::ParseError,
                "line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        require(!key.empty(), ErrorKind::ParseError, "line " + std::to_string(lineno) + ": empty key");
        require(!kv.count(key), ErrorKind::ParseError, "duplicate key: " + key);
        kv[key] = value;
    }

    double alpha_offline = 0.0;
    bool have_alpha = false;
    double alpha_online = 0.0;
    bool have_alpha_online = false;

    for (const auto& [key, value] : kv) {
        if (key == "env.kind") {
            require(value == "maze", ErrorKind::ParseError, "unknown env.kind: " + value);
            cfg.env_kind = value;
        } else if (key == "env.file") {
            cfg.env_file = value;
        } else if (key == "env.slip_prob") {
            cfg.slip_prob = to_double(key, value);
        } else if (key == "env.max_episode_len") {
            cfg.max_episode_len = static_cast<int>(to_long(key, value));
        } else if (key == "env.goal_radius") {
            cfg.goal_radius = static_cast<int>(to_long(key, value));
        } else if (key == "data.path") {
            cfg.data_path = value;
        } else if (key == "data.generate") {
            require(value == "scripted" || value == "random", ErrorKind::ParseError,
                    "data.generate must be scripted or random");
            cfg.data_generate = value;
        } else if (key == "data.n_trajectories") {
            cfg.data_n_trajectories = static_cast<int>(to_long(key, value));
        } else if (key == "data.seed") {
            cfg.data_seed = static_cast<std::uint64_t>(to_long(key, value));
        } else if (key == "data.slip_prob") {
            cfg.data_slip_prob = to_double(key, value);
        } else if (key == "data.composition") {
            cfg.data_composition = value;
        } else if (key == "agent.kind") {
            if (value == "sac") cfg.agent_kind = AgentKind::Sac;
            else if (value == "sac+offline") cfg.agent_kind = AgentKind::SacOffline;
            else if (value == "cql") cfg.agent_kind = AgentKind::Cql;
            else if (value == "calql") cfg.agent_kind = AgentKind::CalQl;
            else fail(ErrorKind::ParseError, "unknown agent.kind: " + value);
        } else if (key == "agent.q_model") {
            if (value == "table") cfg.q_model = QModel::Table;
            else if (value == "mlp") cfg.q_model = QModel::Mlp;
            else if (value == "exact") cfg.q_model = QModel::Exact;
            else fail(ErrorKind::ParseError, "unknown agent.q_model: " + value);
        } else if (key == "agent.hidden") {
            cfg.hidden = to_size_list(key, value);
        } else if (key == "agent.n_critics") {
            cfg.n_critics = static_cast<int>(to_long(key, value));
        } else if (key == "agent.alpha") {
            alpha_offline = to_double(key, value);
            have_alpha = true;
        } else if (key == "agent.alpha_online") {
            alpha_online = to_double(key, value);
            have_alpha_online = true;
        } else if (key == "agent.dual_alpha") {
            cfg.dual_alpha = to_bool(key, value);
        } else if (key == "agent.target_action_gap") {
            cfg.target_action_gap = to_double(key, value);
        } else if (key == "agent.dual_alpha_lr") {
            cfg.dual_alpha_lr = to_double(key, value);
        } else if (key == "agent.k") {
            cfg.k = static_cast<int>(to_long(key, value));
        } else if (key == "agent.max_backup") {
            cfg.max_backup = to_bool(key, value);
        } else if (key == "agent.backup_entropy") {
            cfg.backup_entropy = to_bool(key, value);
        } else if (key == "agent.gamma") {
            cfg.gamma = to_double(key, value);
        } else if (key == "agent.tau") {
            cfg.tau = to_double(key, value);
        } else if (key == "agent.eta") {
            cfg.exact_eta = to_double(key, value);
        } else if (key == "agent.q_lr") {
            cfg.q_lr = to_double(key, value);
        } else if (key == "agent.pi_lr") {
            cfg.pi_lr = to_double(key, value);
        } else if (key == "agent.temperature_lr") {
            cfg.temperature_lr = to_double(key, value);
        } else if (key == "agent.init_temperature") {
            cfg.init_temperature = to_double(key, value);
        } else if (key == "agent.target_entropy") {
            cfg.target_entropy = to_double(key, value);
        } else if (key == "reference.mode") {
            if (value == "disabled") cfg.reference_mode = ReferenceMode::Disabled;
            else if (value == "mc") cfg.reference_mode = ReferenceMode::Mc;
            else if (value == "fitted") cfg.reference_mode = ReferenceMode::Fitted;
            else fail(ErrorKind::ParseError, "unknown reference.mode: " + value);
        } else if (key == "reference.family") {
            require(value == "tabular" || value == "network", ErrorKind::ParseError,
                    "reference.family must be tabular or network");
            cfg.reference_family = value;
        } else if (key == "reference.fit") {
            require(value == "regression" || value == "sarsa", ErrorKind::ParseError,
                    "reference.fit must be regression or sarsa");
            cfg.reference_fit = value;
        } else if (key == "run.offline_steps") {
            cfg.offline_steps = to_long(key, value);
        } else if (key == "run.online_env_steps") {
            cfg.online_env_steps = to_long(key, value);
        } else if (key == "run.utd") {
            cfg.utd = static_cast<int>(to_long(key, value));
        } else if (key == "run.mixing_ratio") {
            cfg.mixing_ratio = to_double(key, value);
        } else if (key == "run.batch_size") {
            cfg.batch_size = static_cast<std::size_t>(to_long(key, value));
        } else if (key == "run.online_capacity") {
            cfg.online_capacity = static_cast<std::size_t>(to_long(key, value));
        } else if (key == "run.eval_every") {
            cfg.eval_every = to_long(key, value);
        } else if (key == "run.eval_episodes") {
            cfg.eval_episodes = static_cast<int>(to_long(key, value));
        } else if (key == "run.eval_greedy") {
            cfg.eval_greedy = to_bool(key, value);
        } else if (key == "run.train_log_every") {
            cfg.train_log_every = to_long(key, value);
        } else if (key == "run.online_mc") {
            require(value == "episode" || value == "none", ErrorKind::ParseError,
                    "run.online_mc must be episode or none");
            cfg.online_mc = value;
        } else if (key == "run.avg_q_sample") {
            cfg.avg_q_sample = static_cast<std::size_t>(to_long(key, value));
        } else if (key == "run.seeds") {
            cfg.seeds = parse_seed_list(value);
        } else {
            fail(ErrorKind::ParseError, "unknown config key: " + key);
        }
    }

    if (have_alpha_online) {
        cfg.alpha = agents::AlphaConfig::phased(alpha_offline, alpha_online);
        cfg.alpha_is_phased = true;
    } else if (have_alpha) {
        cfg.alpha = agents::AlphaConfig::single(alpha_offline);
    }

    // Validation beyond per-key syntax.
    require(!cfg.env_file.empty(), ErrorKind::ParseError, "env.file is required");
    require(cfg.data_path.empty() || cfg.data_generate.empty(), ErrorKind::ParseError,
            "data.path and data.generate are mutually exclusive");
    require(!cfg.data_path.empty() || !cfg.data_generate.empty(), ErrorKind::ParseError,
            "one of data.path / data.generate is required");
    require(cfg.utd >= 1, ErrorKind::ParseError, "run.utd must be >= 1");
    require(cfg.offline_steps >= 0, ErrorKind::ParseError, "run.offline_steps must be >= 0");
    require(cfg.online_env_steps >= 0, ErrorKind::ParseError, "run.online_env_steps must be >= 0");
    require(cfg.eval_every >= 1, ErrorKind::ParseError, "run.eval_every must be >= 1");
    require(cfg.eval_episodes >= 1, ErrorKind::ParseError, "run.eval_episodes must be >= 1");
    require(cfg.gamma > 0.0 && cfg.gamma < 1.0, ErrorKind::ParseError, "agent.gamma must be in (0,1)");
    require((cfg.mixing_ratio >= 0.0 && cfg.mixing_ratio <= 1.0) || cfg.mixing_ratio == -1.0,
            ErrorKind::ParseError, "run.mixing_ratio must be in [0,1] or -1");
    require(cfg.k >= 1, ErrorKind::ParseError, "agent.k must be >= 1");
    if (cfg.agent_kind == AgentKind::CalQl)
        require(cfg.reference_mode != ReferenceMode::Disabled, ErrorKind::ParseError,
                "agent.kind=calql requires reference.mode mc or fitted");
    if (cfg.agent_kind == AgentKind::Sac || cfg.agent_kind == AgentKind::SacOffline)
        require(!have_alpha || (alpha_offline == 0.0 && (!have_alpha_online || alpha_online == 0.0)),
                ErrorKind::ParseError, "sac agents run without a conservative term; set agent.alpha=0");
    if (cfg.q_model == QModel::Exact)
        require(cfg.online_env_steps == 0, ErrorKind::ParseError,
                "agent.q_model=exact is an offline oracle; run.online_env_steps must be 0");
    if (cfg.dual_alpha)
        require(cfg.agent_kind == AgentKind::Cql || cfg.agent_kind == AgentKind::CalQl,
                ErrorKind::ParseError, "agent.dual_alpha needs a conservative agent");
    if (cfg.data_composition.empty())
        cfg.data_composition = cfg.data_generate == "random" ? "diverse"
                               : cfg.data_generate.empty()   ? "mixed"
                                                             : "narrow";
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), ErrorKind::IoError, "cannot open config: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    ExperimentConfig cfg = parse_config_text(ss.str());
    // Relative file references resolve against the config's own directory.
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve = [&](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
    };
    resolve(cfg.env_file);
    resolve(cfg.data_path);
    return cfg;
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    os << "agent.alpha=" << fmt_double(alpha.offline) << "\n";
    if (alpha_is_phased) os << "agent.alpha_online=" << fmt_double(alpha.online) << "\n";
    os << "agent.backup_entropy=" << (backup_entropy ? 1 : 0) << "\n";
    os << "agent.dual_alpha=" << (dual_alpha ? 1 : 0) << "\n";
    os << "agent.dual_alpha_lr=" << fmt_double(dual_alpha_lr) << "\n";
    os << "agent.gamma=" << fmt_double(gamma) << "\n";
    os << "agent.hidden=";
    for (std::size_t i = 0; i < hidden.size(); ++i) os << (i ? "," : "") << hidden[i];
    os << "\n";
    os << "agent.init_temperature=" << fmt_double(init_temperature) << "\n";
    os << "agent.k=" << k << "\n";
    os << "agent.kind=" << agent_kind_name(agent_kind) << "\n";
    os << "agent.max_backup=" << (max_backup ? 1 : 0) << "\n";
    os << "agent.n_critics=" << n_critics << "\n";
    os << "agent.pi_lr=" << fmt_double(pi_lr) << "\n";
    os << "agent.q_lr=" << fmt_double(q_lr) << "\n";
    os << "agent.eta=" << fmt_double(exact_eta) << "\n";
    os << "agent.q_model="
       << (q_model == QModel::Table ? "table" : q_model == QModel::Mlp ? "mlp" : "exact") << "\n";
    os << "agent.target_action_gap=" << fmt_double(target_action_gap) << "\n";
    os << "agent.target_entropy=" << fmt_double(target_entropy) << "\n";
    os << "agent.tau=" << fmt_double(tau) << "\n";
    os << "agent.temperature_lr=" << fmt_double(temperature_lr) << "\n";
    os << "data.composition=" << data_composition << "\n";
    os << "data.generate=" << data_generate << "\n";
    os << "data.n_trajectories=" << data_n_trajectories << "\n";
    os << "data.path=" << data_path << "\n";
    os << "data.seed=" << data_seed << "\n";
    os << "data.slip_prob=" << fmt_double(data_slip_prob) << "\n";
    os << "env.file=" << env_file << "\n";
    os << "env.goal_radius=" << goal_radius << "\n";
    os << "env.kind=" << env_kind << "\n";
    os << "env.max_episode_len=" << max_episode_len << "\n";
    os << "env.slip_prob=" << fmt_double(slip_prob) << "\n";
    os << "reference.family=" << reference_family << "\n";
    os << "reference.fit=" << reference_fit << "\n";
    os << "reference.mode="
       << (reference_mode == ReferenceMode::Disabled ? "disabled"
           : reference_mode == ReferenceMode::Mc     ? "mc"
                                                     : "fitted")
       << "\n";
    os << "run.avg_q_sample=" << avg_q_sample << "\n";
    os << "run.batch_size=" << batch_size << "\n";
    os << "run.eval_episodes=" << eval_episodes << "\n";
    os << "run.eval_every=" << eval_every << "\n";
    os << "run.eval_greedy=" << (eval_greedy ? 1 : 0) << "\n";
    os << "run.mixing_ratio=" << fmt_double(mixing_ratio) << "\n";
    os << "run.offline_steps=" << offline_steps << "\n";
    os << "run.online_capacity=" << online_capacity << "\n";
    os << "run.online_env_steps=" << online_env_steps << "\n";
    os << "run.online_mc=" << online_mc << "\n";
    os << "run.train_log_every=" << train_log_every << "\n";
    os << "run.utd=" << utd << "\n";
    return os.str();
}

std::string ExperimentConfig::hash() const {
    const std::uint64_t h = detail::fnv1a64(canonical());
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace calql::harness
