#include "calql/env/exact_values.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace calql::env {

namespace {

// Q from a state-value vector: Q(s,a) = r + gamma * (non-terminal) * sum P V.
std::vector<double> q_from_v(const TabularMdp& mdp, const std::vector<double>& v, double gamma) {
    std::vector<double> q(mdp.n_states * mdp.n_actions);
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            double x = mdp.r(s, a);
            if (!mdp.is_terminal(s)) {
                double exp_v = 0.0;
                for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) exp_v += mdp.p(s, a, s2) * v[s2];
                x += gamma * exp_v;
            }
            q[s * mdp.n_actions + a] = x;
        }
    return q;
}

}  // namespace

PolicyValues exact_policy_values(const TabularMdp& mdp, const DiscretePolicy& policy) {
    mdp.validate();
    policy.validate();
    require(policy.n_states == mdp.n_states && policy.n_actions == mdp.n_actions, ErrorKind::ShapeMismatch,
            "policy does not match mdp dimensions");

    const std::size_t S = mdp.n_states;
    const std::size_t A = mdp.n_actions;

    if (mdp.horizon) {
        // Discounted backward induction; the step-0 tables are returned.
        std::vector<DiscretePolicy> stationary(static_cast<std::size_t>(*mdp.horizon), policy);
        FiniteValues fin = finite_policy_values(mdp, stationary);
        PolicyValues out{fin.v[0], fin.q[0]};
        return out;
    }

    // r_pi(s) and P_pi(s,s') under the policy; rows of terminal states do not
    // bootstrap, which encodes "reward once, then the episode is over".
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
    Eigen::VectorXd r_pi(static_cast<Eigen::Index>(S));
    for (std::size_t s = 0; s < S; ++s) {
        double rs = 0.0;
        for (std::size_t a = 0; a < A; ++a) rs += policy.prob(s, a) * mdp.r(s, a);
        r_pi(static_cast<Eigen::Index>(s)) = rs;
        if (mdp.is_terminal(s)) continue;
        for (std::size_t s2 = 0; s2 < S; ++s2) {
            double pp = 0.0;
            for (std::size_t a = 0; a < A; ++a) pp += policy.prob(s, a) * mdp.p(s, a, s2);
            m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s2)) -= mdp.gamma * pp;
        }
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    Eigen::VectorXd v = lu.solve(r_pi);
    const double resid = (m * v - r_pi).cwiseAbs().maxCoeff();
    require(std::isfinite(resid) && resid <= 1e-8, ErrorKind::SingularSystem,
            "policy evaluation system is numerically singular");

    PolicyValues out;
    out.v.assign(v.data(), v.data() + S);
    out.q = q_from_v(mdp, out.v, mdp.gamma);
    return out;
}

FiniteValues finite_policy_values(const TabularMdp& mdp, const std::vector<DiscretePolicy>& policy) {
    mdp.validate();
    require(mdp.horizon.has_value(), ErrorKind::InvalidArgument, "finite_policy_values needs horizon mode");
    const std::size_t H = static_cast<std::size_t>(*mdp.horizon);
    require(policy.size() == H, ErrorKind::ShapeMismatch, "need one policy per time step");

    const std::size_t S = mdp.n_states;
    const std::size_t A = mdp.n_actions;
    FiniteValues fin;
    fin.v.assign(H + 1, std::vector<double>(S, 0.0));
    fin.q.assign(H, std::vector<double>(S * A, 0.0));

    for (std::size_t h = H; h-- > 0;) {
        policy[h].validate();
        require(policy[h].n_states == S && policy[h].n_actions == A, ErrorKind::ShapeMismatch,
                "policy does not match mdp dimensions");
        fin.q[h] = q_from_v(mdp, fin.v[h + 1], mdp.gamma);
        for (std::size_t s = 0; s < S; ++s) {
            double vs = 0.0;
            for (std::size_t a = 0; a < A; ++a) vs += policy[h].prob(s, a) * fin.q[h][s * A + a];
            fin.v[h][s] = vs;
        }
    }
    return fin;
}

FiniteValues finite_optimal_values(const TabularMdp& mdp) {
    mdp.validate();
    require(mdp.horizon.has_value(), ErrorKind::InvalidArgument, "finite_optimal_values needs horizon mode");
    const std::size_t H = static_cast<std::size_t>(*mdp.horizon);
    const std::size_t S = mdp.n_states;
    const std::size_t A = mdp.n_actions;
    FiniteValues fin;
    fin.v.assign(H + 1, std::vector<double>(S, 0.0));
    fin.q.assign(H, std::vector<double>(S * A, 0.0));
    for (std::size_t h = H; h-- > 0;) {
        fin.q[h] = q_from_v(mdp, fin.v[h + 1], mdp.gamma);
        for (std::size_t s = 0; s < S; ++s) {
            double best = fin.q[h][s * A];
            for (std::size_t a = 1; a < A; ++a) best = std::max(best, fin.q[h][s * A + a]);
            fin.v[h][s] = best;
        }
    }
    return fin;
}

double bellman_residual(const TabularMdp& mdp, const DiscretePolicy& policy, const PolicyValues& values) {
    require(!mdp.horizon.has_value(), ErrorKind::InvalidArgument,
            "bellman_residual checks the stationary (infinite-horizon) equations");
    const std::size_t S = mdp.n_states;
    const std::size_t A = mdp.n_actions;
    double worst = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            double rhs = mdp.r(s, a);
            if (!mdp.is_terminal(s)) {
                double ev = 0.0;
                for (std::size_t s2 = 0; s2 < S; ++s2) ev += mdp.p(s, a, s2) * values.v[s2];
                rhs += mdp.gamma * ev;
            }
            worst = std::max(worst, std::abs(values.q[s * A + a] - rhs));
        }
        double v_s = 0.0;
        for (std::size_t a = 0; a < A; ++a) v_s += policy.prob(s, a) * values.q[s * A + a];
        worst = std::max(worst, std::abs(values.v[s] - v_s));
    }
    return worst;
}

}  // namespace calql::env
