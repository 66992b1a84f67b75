#include "calql/agents/discrete_sac.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "calql/nn/checkpoint.hpp"

namespace calql::agents {

double resolve_target_entropy(double configured, std::size_t n_actions) {
    if (configured >= 0.0) return configured;
    return 0.5 * std::log(static_cast<double>(n_actions));
}

namespace {

std::vector<std::size_t> net_widths(std::size_t in, const std::vector<std::size_t>& hidden,
                                    std::size_t out) {
    std::vector<std::size_t> w{in};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(out);
    return w;
}

std::vector<int> batch_states(const replay::Batch& b) {
    std::vector<int> v(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) v[i] = b.transitions[i].state;
    return v;
}

std::vector<int> batch_next_states(const replay::Batch& b) {
    std::vector<int> v(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) v[i] = b.transitions[i].next_state;
    return v;
}

std::vector<int> batch_actions(const replay::Batch& b) {
    std::vector<int> v(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) v[i] = b.transitions[i].action;
    return v;
}

}  // namespace

DiscreteSacAgent::DiscreteSacAgent(DiscreteSacConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    require(cfg_.n_states > 0 && cfg_.n_actions > 0, ErrorKind::InvalidArgument,
            "agent needs state and action counts");
    require(cfg_.n_critics >= 1 && cfg_.n_critics <= 4, ErrorKind::InvalidArgument,
            "n_critics out of range");
    require(cfg_.k >= 1, ErrorKind::InvalidArgument, "k must be >= 1");
    Rng init = named_stream(seed, "agent-init");
    for (int j = 0; j < cfg_.n_critics; ++j) {
        critics_.push_back(
            nn::Mlp::create(net_widths(cfg_.n_states, cfg_.q_hidden, cfg_.n_actions), cfg_.activation, init));
        targets_.push_back(critics_.back());
        critic_opt_.emplace_back();
    }
    policy_ = nn::Mlp::create(net_widths(cfg_.n_states, cfg_.pi_hidden, cfg_.n_actions), cfg_.activation,
                              init);
    log_temperature_ = std::log(cfg_.init_temperature);
    target_entropy_ = resolve_target_entropy(cfg_.target_entropy, cfg_.n_actions);
    dual_.log_alpha = std::log(std::max(cfg_.alpha.offline, 1e-6));
}

double DiscreteSacAgent::alpha_for(Phase phase) const {
    return cfg_.dual_alpha ? dual_.alpha() : phase_alpha(cfg_.alpha, phase);
}

std::vector<double> DiscreteSacAgent::action_log_probs(int state) const {
    nn::Tensor x = nn::one_hot({state}, cfg_.n_states);
    nn::Tensor logits = policy_.forward(x);
    const double lse = nn::logsumexp(logits.data.data(), logits.size());
    std::vector<double> lp(logits.size());
    for (std::size_t a = 0; a < lp.size(); ++a) lp[a] = logits.data[a] - lse;
    return lp;
}

int DiscreteSacAgent::sample_action(int state, Rng& rng) const {
    std::vector<double> lp = action_log_probs(state);
    std::vector<double> p(lp.size());
    for (std::size_t a = 0; a < p.size(); ++a) p[a] = std::exp(lp[a]);
    return rng.categorical(p);
}

int DiscreteSacAgent::greedy_action(int state) const {
    std::vector<double> lp = action_log_probs(state);
    return static_cast<int>(std::max_element(lp.begin(), lp.end()) - lp.begin());
}

std::vector<double> DiscreteSacAgent::q_row(int state) const {
    nn::Tensor x = nn::one_hot({state}, cfg_.n_states);
    nn::Tensor q = critics_[0].forward(x);
    std::vector<double> row(q.data.begin(), q.data.end());
    for (std::size_t j = 1; j < critics_.size(); ++j) {
        nn::Tensor qj = critics_[j].forward(x);
        for (std::size_t a = 0; a < row.size(); ++a) row[a] = std::min(row[a], qj.data[a]);
    }
    return row;
}

std::vector<double> DiscreteSacAgent::q_values(const std::vector<int>& states,
                                               const std::vector<int>& actions) const {
    nn::Tensor x = nn::one_hot(states, cfg_.n_states);
    std::vector<double> out(states.size());
    for (std::size_t j = 0; j < critics_.size(); ++j) {
        nn::Tensor q = critics_[j].forward(x);
        for (std::size_t i = 0; i < states.size(); ++i) {
            const double v = q.at(i, static_cast<std::size_t>(actions[i]));
            out[i] = j == 0 ? v : std::min(out[i], v);
        }
    }
    return out;
}

CriticDiagnostics DiscreteSacAgent::critic_update(const replay::Batch& batch,
                                                  const data::ReferenceValues& ref, Phase phase,
                                                  Rng& rng) {
    const std::size_t B = batch.size();
    require(B > 0, ErrorKind::InvalidArgument, "empty batch");
    const std::size_t A = cfg_.n_actions;
    const double alpha = alpha_for(phase);
    const double temp = temperature();

    const std::vector<int> states = batch_states(batch);
    const std::vector<int> actions = batch_actions(batch);
    const std::vector<int> next_states = batch_next_states(batch);
    nn::Tensor x = nn::one_hot(states, cfg_.n_states);
    nn::Tensor x_next = nn::one_hot(next_states, cfg_.n_states);

    // --- TD targets (constants for the tape) ------------------------------
    nn::Tensor next_logits = policy_.forward(x_next);
    nn::Tensor next_logp(B, A);
    for (std::size_t i = 0; i < B; ++i) {
        const double lse = nn::logsumexp(next_logits.data.data() + i * A, A);
        for (std::size_t a = 0; a < A; ++a) next_logp.at(i, a) = next_logits.at(i, a) - lse;
    }
    std::vector<nn::Tensor> target_q(targets_.size());
    for (std::size_t j = 0; j < targets_.size(); ++j) target_q[j] = targets_[j].forward(x_next);
    auto min_target = [&](std::size_t row, int a) {
        double v = target_q[0].at(row, static_cast<std::size_t>(a));
        for (std::size_t j = 1; j < target_q.size(); ++j)
            v = std::min(v, target_q[j].at(row, static_cast<std::size_t>(a)));
        return v;
    };

    nn::Tensor y(B, 1);
    double mean_target = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
        double backed;
        if (cfg_.use_max_backup) {
            // Max over k policy-sampled actions' target values.
            backed = -std::numeric_limits<double>::infinity();
            for (int s = 0; s < cfg_.k; ++s) {
                std::vector<double> p(A);
                for (std::size_t a = 0; a < A; ++a) p[a] = std::exp(next_logp.at(i, a));
                const int a = rng.categorical(p);
                backed = std::max(backed, min_target(i, a));
            }
        } else {
            std::vector<double> p(A);
            for (std::size_t a = 0; a < A; ++a) p[a] = std::exp(next_logp.at(i, a));
            const int a = rng.categorical(p);
            backed = min_target(i, a);
            if (cfg_.backup_entropy) backed -= temp * next_logp.at(i, static_cast<std::size_t>(a));
        }
        const auto& t = batch.transitions[i];
        y.data[i] = t.reward + cfg_.gamma * (t.done ? 0.0 : 1.0) * backed;
        mean_target += y.data[i] / static_cast<double>(B);
    }

    // --- shared action samples for the conservative estimator -------------
    const double log_uniform = -std::log(static_cast<double>(A));
    std::vector<std::vector<int>> rand_actions(cfg_.k, std::vector<int>(B));
    std::vector<std::vector<int>> pi_actions(cfg_.k, std::vector<int>(B));
    std::vector<nn::Tensor> pi_logp(cfg_.k, nn::Tensor(B, 1));
    nn::Tensor cur_logits = policy_.forward(x);
    nn::Tensor cur_logp(B, A);
    for (std::size_t i = 0; i < B; ++i) {
        const double lse = nn::logsumexp(cur_logits.data.data() + i * A, A);
        for (std::size_t a = 0; a < A; ++a) cur_logp.at(i, a) = cur_logits.at(i, a) - lse;
    }
    for (int s = 0; s < cfg_.k; ++s)
        for (std::size_t i = 0; i < B; ++i) {
            rand_actions[s][i] = rng.uniform_int(static_cast<int>(A));
            std::vector<double> p(A);
            for (std::size_t a = 0; a < A; ++a) p[a] = std::exp(cur_logp.at(i, a));
            const int a = rng.categorical(p);
            pi_actions[s][i] = a;
            pi_logp[s].data[i] = cur_logp.at(i, static_cast<std::size_t>(a));
        }

    // Calibration bounds per policy-sample column.
    std::vector<nn::Tensor> bound_cols(cfg_.k, nn::Tensor(B, 1));
    for (int s = 0; s < cfg_.k; ++s) {
        const std::vector<double> b =
            ref.bounds(states, pi_actions[s], batch.mc_return, batch.mc_unreliable);
        for (std::size_t i = 0; i < B; ++i) bound_cols[s].data[i] = b[i];
    }

    // --- losses -------------------------------------------------------------
    nn::GradTape tape;
    auto x_in = tape.input(x);
    auto y_in = tape.input(y);
    std::vector<nn::Mlp::Recorded> recs;
    nn::GradTape::ValueRef total_loss;
    double td_loss_sum = 0.0, reg_sum = 0.0, q_data_sum = 0.0;
    long bound_hits = 0;

    for (std::size_t j = 0; j < critics_.size(); ++j) {
        auto rec = critics_[j].forward(tape, x_in);
        recs.push_back(rec);
        auto q_data = tape.gather_cols(rec.output, actions);
        auto td = tape.scale(tape.mean_all(tape.square(tape.sub(q_data, y_in))), 0.5);

        nn::GradTape::ValueRef cat;
        for (int s = 0; s < cfg_.k; ++s) {
            auto col = tape.add_const(tape.gather_cols(rec.output, rand_actions[s]), -log_uniform);
            cat = s == 0 ? col : tape.concat_cols(cat, col);
        }
        for (int s = 0; s < cfg_.k; ++s) {
            auto col = tape.sub(tape.gather_cols(rec.output, pi_actions[s]), tape.input(pi_logp[s]));
            // Bounding diagnostic compares the importance-corrected value
            // against the reference, mirroring the masking itself.
            const nn::Tensor& raw = tape.value(col);
            for (std::size_t i = 0; i < B; ++i)
                if (bound_cols[s].data[i] >= raw.data[i]) ++bound_hits;
            col = tape.max_with(col, bound_cols[s]);
            cat = tape.concat_cols(cat, col);
        }
        auto lse = tape.logsumexp_rows(cat);
        auto reg = tape.sub(tape.mean_all(lse), tape.mean_all(q_data));
        auto loss_j = tape.add(td, tape.scale(reg, alpha));
        total_loss = j == 0 ? loss_j : tape.add(total_loss, loss_j);

        td_loss_sum += tape.value(td).item();
        reg_sum += tape.value(reg).item();
        q_data_sum += tape.value(tape.mean_all(q_data)).item();
    }

    tape.backward(total_loss);
    nn::AdamConfig qcfg;
    qcfg.lr = cfg_.q_lr;
    for (std::size_t j = 0; j < critics_.size(); ++j) {
        std::vector<nn::Tensor> grads = nn::zero_grads(critics_[j]);
        nn::accumulate_grads(tape, recs[j], grads);
        nn::adam_step(critics_[j].parameters(), grads, critic_opt_[j], qcfg);
        targets_[j].polyak_from(critics_[j], cfg_.tau);
    }

    const double n_critics = static_cast<double>(critics_.size());
    CriticDiagnostics diag;
    diag.td_loss = td_loss_sum / n_critics;
    diag.reg_value = reg_sum / n_critics;
    diag.alpha_used = alpha;
    diag.mean_q_data = q_data_sum / n_critics;
    diag.mean_target = mean_target;
    diag.bounding_rate = static_cast<double>(bound_hits) /
                         (n_critics * static_cast<double>(cfg_.k) * static_cast<double>(B));
    if (cfg_.dual_alpha) dual_alpha_update(dual_, diag.reg_value, cfg_.target_action_gap, cfg_.dual_alpha_lr);
    ++updates_;
    return diag;
}

double DiscreteSacAgent::actor_update(const replay::Batch& batch) {
    const std::size_t B = batch.size();
    require(B > 0, ErrorKind::InvalidArgument, "empty batch");
    const std::size_t A = cfg_.n_actions;
    const double temp = temperature();

    const std::vector<int> states = batch_states(batch);
    nn::Tensor x = nn::one_hot(states, cfg_.n_states);

    // Q under the pessimistic head, constant for the policy step.
    nn::Tensor q_min = critics_[0].forward(x);
    for (std::size_t j = 1; j < critics_.size(); ++j) {
        nn::Tensor qj = critics_[j].forward(x);
        for (std::size_t i = 0; i < q_min.size(); ++i) q_min.data[i] = std::min(q_min.data[i], qj.data[i]);
    }

    nn::GradTape tape;
    auto x_in = tape.input(x);
    auto rec = policy_.forward(tape, x_in);
    auto logp = tape.log_softmax_rows(rec.output);
    auto probs = tape.exp(logp);
    // loss = E_s sum_a pi(a|s) (temp * log pi - Q), minimized.
    auto inner = tape.sub(tape.scale(logp, temp), tape.input(q_min));
    auto loss = tape.mean_all(tape.sum_rows(tape.mul(probs, inner)));
    tape.backward(loss);

    std::vector<nn::Tensor> grads = nn::zero_grads(policy_);
    nn::accumulate_grads(tape, rec, grads);
    nn::AdamConfig pcfg;
    pcfg.lr = cfg_.pi_lr;
    nn::adam_step(policy_.parameters(), grads, policy_opt_, pcfg);

    // Exact batch entropy, then the dual temperature step.
    const nn::Tensor& lp = tape.value(logp);
    double entropy = 0.0;
    for (std::size_t i = 0; i < B; ++i)
        for (std::size_t a = 0; a < A; ++a) entropy -= std::exp(lp.at(i, a)) * lp.at(i, a);
    entropy /= static_cast<double>(B);
    last_entropy_ = entropy;
    log_temperature_ -= cfg_.temperature_lr * (entropy - target_entropy_);
    log_temperature_ = std::clamp(log_temperature_, std::log(1e-8), std::log(1e6));
    return tape.value(loss).item();
}

double DiscreteSacAgent::bounding_rate_diagnostic(const data::OfflineDataset& ds,
                                                  const data::ReferenceValues& ref,
                                                  std::size_t sample_size, std::uint64_t seed) const {
    if (!ref.enabled() || ds.empty()) return 0.0;
    Rng rng(seed);
    const std::size_t n = std::min(sample_size, ds.size());
    long hits = 0;
    long total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t row =
            sample_size >= ds.size() ? i : rng.uniform_index(ds.size());
        const auto& t = ds.transitions[row];
        const std::vector<double> lp = action_log_probs(t.state);
        std::vector<double> p(lp.size());
        for (std::size_t a = 0; a < p.size(); ++a) p[a] = std::exp(lp[a]);
        const std::vector<double> q = q_row(t.state);
        for (int s = 0; s < cfg_.k; ++s) {
            const int a = rng.categorical(p);
            const double corrected = q[static_cast<std::size_t>(a)] - lp[static_cast<std::size_t>(a)];
            const double b = ref.bound(t.state, a, ds.mc_return[row], ds.mc_unreliable[row] != 0);
            if (b >= corrected) ++hits;
            ++total;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

void DiscreteSacAgent::save(const std::string& prefix) const {
    for (std::size_t j = 0; j < critics_.size(); ++j) {
        nn::save_mlp(critics_[j], prefix + ".q" + std::to_string(j));
        nn::save_mlp(targets_[j], prefix + ".q" + std::to_string(j) + ".target");
    }
    nn::save_mlp(policy_, prefix + ".pi");
    std::ofstream os(prefix + ".agent");
    require(os.good(), ErrorKind::IoError, "cannot open for writing: " + prefix + ".agent");
    char buf[64];
    os << "format discrete-sac-v1\n";
    os << "n_critics " << critics_.size() << "\n";
    os << "k " << cfg_.k << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", std::exp(log_temperature_));
    os << "temperature " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", dual_.log_alpha);
    os << "dual_log_alpha " << buf << "\n";
    os << "updates " << updates_ << "\n";
    os << "alpha_offline " << cfg_.alpha.offline << " alpha_online " << cfg_.alpha.online << "\n";
    os << "max_backup " << (cfg_.use_max_backup ? 1 : 0) << " dual_alpha " << (cfg_.dual_alpha ? 1 : 0)
       << "\n";
}

void DiscreteSacAgent::load(const std::string& prefix) {
    for (std::size_t j = 0; j < critics_.size(); ++j) {
        critics_[j] = nn::load_mlp(prefix + ".q" + std::to_string(j));
        targets_[j] = nn::load_mlp(prefix + ".q" + std::to_string(j) + ".target");
        critic_opt_[j] = nn::AdamState();
    }
    policy_ = nn::load_mlp(prefix + ".pi");
    policy_opt_ = nn::AdamState();
    std::ifstream is(prefix + ".agent");
    require(is.good(), ErrorKind::IoError, "cannot open for reading: " + prefix + ".agent");
    std::string key;
    while (is >> key) {
        if (key == "temperature") {
            double t;
            is >> t;
            log_temperature_ = std::log(t);
        } else if (key == "dual_log_alpha") {
            is >> dual_.log_alpha;
        } else if (key == "updates") {
            is >> updates_;
        } else {
            std::string rest;
            std::getline(is, rest);
        }
    }
}

}  // namespace calql::agents
