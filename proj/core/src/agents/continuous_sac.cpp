#include "calql/agents/continuous_sac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace calql::agents {

namespace {

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;
constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
constexpr double kTanhEps = 1e-6;

std::vector<std::size_t> net_widths(std::size_t in, const std::vector<std::size_t>& hidden,
                                    std::size_t out) {
    std::vector<std::size_t> w{in};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(out);
    return w;
}

double soft_bound(double raw) {
    return kLogStdMin + 0.5 * (kLogStdMax - kLogStdMin) * (std::tanh(raw) + 1.0);
}

nn::Tensor concat_tensors(const nn::Tensor& a, const nn::Tensor& b) {
    nn::Tensor out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(r, c);
        for (std::size_t c = 0; c < b.cols(); ++c) out.at(r, a.cols() + c) = b.at(r, c);
    }
    return out;
}

// Mask bound per batch row; continuous mode supports the return-to-go
// reference (and disabled). Fitted tabular estimators do not apply here.
double row_bound(const data::ReferenceValues& ref, double mc, bool unreliable) {
    switch (ref.kind) {
        case data::ReferenceValues::Kind::Disabled:
            return -std::numeric_limits<double>::infinity();
        case data::ReferenceValues::Kind::McReturn:
            return unreliable ? -std::numeric_limits<double>::infinity() : mc;
        default:
            fail(ErrorKind::InvalidArgument,
                 "continuous agents support mc_return or disabled references");
    }
}

}  // namespace

ContinuousSacAgent::ContinuousSacAgent(ContinuousSacConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)) {
    require(cfg_.obs_dim > 0 && cfg_.action_dim > 0, ErrorKind::InvalidArgument,
            "agent needs observation and action dimensions");
    require(cfg_.n_critics >= 1 && cfg_.n_critics <= 4, ErrorKind::InvalidArgument,
            "n_critics out of range");
    require(cfg_.k >= 1, ErrorKind::InvalidArgument, "k must be >= 1");
    Rng init = named_stream(seed, "agent-init");
    for (int j = 0; j < cfg_.n_critics; ++j) {
        critics_.push_back(nn::Mlp::create(net_widths(cfg_.obs_dim + cfg_.action_dim, cfg_.q_hidden, 1),
                                           cfg_.activation, init));
        targets_.push_back(critics_.back());
        critic_opt_.emplace_back();
    }
    policy_ = nn::Mlp::create(net_widths(cfg_.obs_dim, cfg_.pi_hidden, 2 * cfg_.action_dim),
                              cfg_.activation, init);
    log_temperature_ = std::log(cfg_.init_temperature);
    target_entropy_ = -static_cast<double>(cfg_.action_dim);
}

ContinuousSacAgent::PolicyHead ContinuousSacAgent::head(const nn::Tensor& obs) const {
    nn::Tensor raw = policy_.forward(obs);
    const std::size_t d = cfg_.action_dim;
    PolicyHead h{nn::Tensor(obs.rows(), d), nn::Tensor(obs.rows(), d)};
    for (std::size_t r = 0; r < obs.rows(); ++r)
        for (std::size_t c = 0; c < d; ++c) {
            h.mean.at(r, c) = raw.at(r, c);
            h.log_std.at(r, c) = soft_bound(raw.at(r, d + c));
        }
    return h;
}

ActionSample ContinuousSacAgent::sample_action(const std::vector<double>& obs, Rng& rng) const {
    require(obs.size() == cfg_.obs_dim, ErrorKind::ShapeMismatch, "observation width mismatch");
    nn::Tensor x(1, cfg_.obs_dim);
    x.data = obs;
    PolicyHead h = head(x);
    ActionSample out;
    out.action.resize(cfg_.action_dim);
    for (std::size_t c = 0; c < cfg_.action_dim; ++c) {
        const double eps = rng.normal();
        const double pre = h.mean.at(0, c) + eps * std::exp(h.log_std.at(0, c));
        const double a = std::tanh(pre);
        out.action[c] = a;
        out.log_prob += -0.5 * (eps * eps + kLogTwoPi) - h.log_std.at(0, c);
        out.log_prob -= std::log(1.0 - a * a + kTanhEps);
    }
    return out;
}

std::vector<double> ContinuousSacAgent::q_values(const nn::Tensor& obs, const nn::Tensor& actions) const {
    nn::Tensor x = concat_tensors(obs, actions);
    std::vector<double> out(obs.rows());
    for (std::size_t j = 0; j < critics_.size(); ++j) {
        nn::Tensor q = critics_[j].forward(x);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = j == 0 ? q.data[i] : std::min(out[i], q.data[i]);
    }
    return out;
}

CriticDiagnostics ContinuousSacAgent::critic_update(const ContinuousBatch& batch,
                                                    const data::ReferenceValues& ref, Phase phase,
                                                    Rng& rng) {
    const std::size_t B = batch.size();
    require(B > 0, ErrorKind::InvalidArgument, "empty batch");
    const std::size_t d = cfg_.action_dim;
    const double alpha = phase_alpha(cfg_.alpha, phase);
    const double temp = temperature();

    // --- TD targets ---------------------------------------------------------
    PolicyHead next_head = head(batch.next_obs);
    auto sample_next = [&](std::size_t row, double& logp) {
        std::vector<double> a(d);
        logp = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double eps = rng.normal();
            const double ls = next_head.log_std.at(row, c);
            const double pre = next_head.mean.at(row, c) + eps * std::exp(ls);
            a[c] = std::tanh(pre);
            logp += -0.5 * (eps * eps + kLogTwoPi) - ls - std::log(1.0 - a[c] * a[c] + kTanhEps);
        }
        return a;
    };
    auto target_min = [&](std::size_t row, const std::vector<double>& a) {
        nn::Tensor x(1, cfg_.obs_dim + d);
        for (std::size_t c = 0; c < cfg_.obs_dim; ++c) x.data[c] = batch.next_obs.at(row, c);
        for (std::size_t c = 0; c < d; ++c) x.data[cfg_.obs_dim + c] = a[c];
        double v = std::numeric_limits<double>::infinity();
        for (const nn::Mlp& t : targets_) v = std::min(v, t.forward(x).data[0]);
        return v;
    };

    nn::Tensor y(B, 1);
    double mean_target = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
        double backed;
        double logp = 0.0;
        if (cfg_.use_max_backup) {
            backed = -std::numeric_limits<double>::infinity();
            for (int s = 0; s < cfg_.k; ++s) backed = std::max(backed, target_min(i, sample_next(i, logp)));
        } else {
            const std::vector<double> a = sample_next(i, logp);
            backed = target_min(i, a);
            if (cfg_.backup_entropy) backed -= temp * logp;
        }
        y.data[i] = batch.rewards[i] + cfg_.gamma * (batch.done[i] ? 0.0 : 1.0) * backed;
        mean_target += y.data[i] / static_cast<double>(B);
    }

    // --- shared action samples ----------------------------------------------
    PolicyHead cur_head = head(batch.obs);
    std::vector<nn::Tensor> rand_actions(cfg_.k, nn::Tensor(B, d));
    std::vector<nn::Tensor> pi_actions(cfg_.k, nn::Tensor(B, d));
    std::vector<nn::Tensor> pi_logp(cfg_.k, nn::Tensor(B, 1));
    for (int s = 0; s < cfg_.k; ++s)
        for (std::size_t i = 0; i < B; ++i) {
            double lp = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                rand_actions[s].at(i, c) = rng.uniform(-1.0, 1.0);
                const double eps = rng.normal();
                const double ls = cur_head.log_std.at(i, c);
                const double pre = cur_head.mean.at(i, c) + eps * std::exp(ls);
                const double a = std::tanh(pre);
                pi_actions[s].at(i, c) = a;
                lp += -0.5 * (eps * eps + kLogTwoPi) - ls - std::log(1.0 - a * a + kTanhEps);
            }
            pi_logp[s].data[i] = lp;
        }

    nn::Tensor bound(B, 1);
    for (std::size_t i = 0; i < B; ++i)
        bound.data[i] = row_bound(ref, batch.mc_return[i], batch.mc_unreliable[i] != 0);

    // --- losses ----------------------------------------------------------------
    const double log_uniform = static_cast<double>(d) * std::log(0.5);
    nn::GradTape tape;
    std::vector<nn::Mlp::Recorded> recs;
    nn::GradTape::ValueRef total_loss;
    auto y_in = tape.input(y);
    auto data_in = tape.input(concat_tensors(batch.obs, batch.actions));
    std::vector<nn::GradTape::ValueRef> rand_in, pi_in;
    for (int s = 0; s < cfg_.k; ++s) {
        rand_in.push_back(tape.input(concat_tensors(batch.obs, rand_actions[s])));
        pi_in.push_back(tape.input(concat_tensors(batch.obs, pi_actions[s])));
    }

    double td_loss_sum = 0.0, reg_sum = 0.0, q_data_sum = 0.0;
    long bound_hits = 0;
    for (std::size_t j = 0; j < critics_.size(); ++j) {
        auto rec = critics_[j].forward(tape, data_in);
        auto q_data = rec.output;
        auto td = tape.scale(tape.mean_all(tape.square(tape.sub(q_data, y_in))), 0.5);

        nn::GradTape::ValueRef cat;
        std::vector<nn::Mlp::Recorded> extra;
        for (int s = 0; s < cfg_.k; ++s) {
            auto rrec = critics_[j].forward(tape, rand_in[s]);
            extra.push_back(rrec);
            auto col = tape.add_const(rrec.output, -log_uniform);
            cat = s == 0 ? col : tape.concat_cols(cat, col);
        }
        for (int s = 0; s < cfg_.k; ++s) {
            auto prec = critics_[j].forward(tape, pi_in[s]);
            extra.push_back(prec);
            auto col = tape.sub(prec.output, tape.input(pi_logp[s]));
            const nn::Tensor& raw = tape.value(col);
            for (std::size_t i = 0; i < B; ++i)
                if (bound.data[i] >= raw.data[i]) ++bound_hits;
            col = tape.max_with(col, bound);
            cat = tape.concat_cols(cat, col);
        }
        auto lse = tape.logsumexp_rows(cat);
        auto reg = tape.sub(tape.mean_all(lse), tape.mean_all(q_data));
        auto loss_j = tape.add(td, tape.scale(reg, alpha));
        total_loss = j == 0 ? loss_j : tape.add(total_loss, loss_j);

        // Fold the extra forward passes' parameter leaves into one record so
        // all gradient contributions for critic j are gathered together.
        for (const auto& e : extra)
            for (std::size_t p = 0; p < e.params.size(); ++p) rec.params.push_back(e.params[p]);
        recs.push_back(rec);

        td_loss_sum += tape.value(td).item();
        reg_sum += tape.value(reg).item();
        q_data_sum += tape.value(tape.mean_all(q_data)).item();
    }

    tape.backward(total_loss);
    nn::AdamConfig qcfg;
    qcfg.lr = cfg_.q_lr;
    for (std::size_t j = 0; j < critics_.size(); ++j) {
        std::vector<nn::Tensor> grads = nn::zero_grads(critics_[j]);
        const std::size_t per_pass = critics_[j].parameters().size();
        for (std::size_t base = 0; base < recs[j].params.size(); base += per_pass)
            for (std::size_t p = 0; p < per_pass; ++p) {
                const nn::Tensor& g = tape.grad(recs[j].params[base + p]);
                for (std::size_t t = 0; t < g.size(); ++t) grads[p].data[t] += g.data[t];
            }
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
    return diag;
}

double ContinuousSacAgent::actor_update(const ContinuousBatch& batch, Rng& rng) {
    const std::size_t B = batch.size();
    require(B > 0, ErrorKind::InvalidArgument, "empty batch");
    const std::size_t d = cfg_.action_dim;
    const double temp = temperature();

    nn::Tensor eps(B, d);
    for (double& v : eps.data) v = rng.normal();
    // Constant part of the Gaussian log-density: -0.5 (eps^2 + log 2pi) per dim.
    nn::Tensor gauss_const(B, 1);
    for (std::size_t i = 0; i < B; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += -0.5 * (eps.at(i, c) * eps.at(i, c) + kLogTwoPi);
        gauss_const.data[i] = s;
    }

    nn::GradTape tape;
    auto obs_in = tape.input(batch.obs);
    auto rec = policy_.forward(tape, obs_in);
    auto mean = tape.slice_cols(rec.output, 0, d);
    auto raw_ls = tape.slice_cols(rec.output, d, 2 * d);
    // log_std soft-bounded into [kLogStdMin, kLogStdMax].
    auto ls = tape.add_const(
        tape.scale(tape.add_const(tape.tanh(raw_ls), 1.0), 0.5 * (kLogStdMax - kLogStdMin)), kLogStdMin);
    auto pre = tape.add(mean, tape.mul(tape.input(eps), tape.exp(ls)));
    auto act = tape.tanh(pre);
    // log pi = gauss_const - sum log_std - sum log(1 - tanh^2 + eps)
    auto corr = tape.sum_rows(tape.log(tape.add_const(tape.scale(tape.square(act), -1.0), 1.0 + kTanhEps)));
    auto logp = tape.sub(tape.sub(tape.input(gauss_const), tape.sum_rows(ls)), corr);

    // Q(s, a(phi)) under the pessimistic head; critic parameters are recorded
    // on the tape but their gradients are simply not applied.
    nn::GradTape::ValueRef q_min;
    for (std::size_t j = 0; j < critics_.size(); ++j) {
        auto qrec = critics_[j].forward(tape, tape.concat_cols(obs_in, act));
        q_min = j == 0 ? qrec.output : tape.min2(q_min, qrec.output);
    }

    auto loss = tape.mean_all(tape.sub(tape.scale(logp, temp), q_min));
    tape.backward(loss);

    std::vector<nn::Tensor> grads = nn::zero_grads(policy_);
    nn::accumulate_grads(tape, rec, grads);
    nn::AdamConfig pcfg;
    pcfg.lr = cfg_.pi_lr;
    nn::adam_step(policy_.parameters(), grads, policy_opt_, pcfg);

    const nn::Tensor& lp = tape.value(logp);
    double entropy = 0.0;
    for (std::size_t i = 0; i < B; ++i) entropy -= lp.data[i];
    entropy /= static_cast<double>(B);
    log_temperature_ -= cfg_.temperature_lr * (entropy - target_entropy_);
    log_temperature_ = std::clamp(log_temperature_, std::log(1e-8), std::log(1e6));
    return tape.value(loss).item();
}

}  // namespace calql::agents
