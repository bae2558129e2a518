#pragma once

#include <gambel/distributions.hpp>
#include <gambel/errors.hpp>
#include <gambel/parallel.hpp>
#include <gambel/prior.hpp>
#include <gambel/random.hpp>
#include <gambel/samplers/diagnostics.hpp>
#include <gambel/samplers/variates.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gambel {

struct RegressionData {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::optional<Eigen::VectorXd> theta_true;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols(); }

    void validate() const
    {
        if (X.cols() < 1) throw domain_error("data: X needs at least one column");
        if (X.rows() != y.size()) throw domain_error("data: X and y disagree in length");
        if (!X.allFinite() || !y.allFinite()) throw domain_error("data: non-finite entries");
        if (theta_true && theta_true->size() != X.cols()) throw domain_error("data: theta_true has the wrong length");
    }
};

enum class Algorithm { automatic, low_dim, high_dim, spike_slab };

inline std::string to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::automatic: return "auto";
    case Algorithm::low_dim: return "low_dim";
    case Algorithm::high_dim: return "high_dim";
    case Algorithm::spike_slab: return "spike_slab";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& s)
{
    if (s == "auto") return Algorithm::automatic;
    if (s == "low_dim") return Algorithm::low_dim;
    if (s == "high_dim") return Algorithm::high_dim;
    if (s == "spike_slab") return Algorithm::spike_slab;
    throw domain_error("unknown algorithm '" + s + "'");
}

struct McmcConfig {
    std::size_t n_iter = 5000;
    std::size_t burn_in = 1500;
    std::size_t thin = 1;
    std::size_t n_chains = 3;
    std::uint64_t seed = 20240611;
    // IG(shape, rate) prior on sigma^2
    double sigma2_shape = 0.01;
    double sigma2_rate = 0.01;
    Algorithm algorithm = Algorithm::automatic;
    int tmvn_sweeps = 1;
    // known noise variance; skips the sigma^2 update
    std::optional<double> sigma2_fixed;
    bool store_draws = true;
    bool keep_latents = false;
    unsigned threads = 0;

    std::size_t draws_per_chain() const { return (n_iter - burn_in) / thin; }

    void validate() const
    {
        if (!(burn_in < n_iter)) throw domain_error("mcmc: burn_in must be below n_iter");
        if (thin < 1) throw domain_error("mcmc: thin must be >= 1");
        if (n_chains < 1) throw domain_error("mcmc: need at least one chain");
        if (draws_per_chain() < 1) throw domain_error("mcmc: no draws retained");
        if (!(sigma2_shape > 0.0) || !(sigma2_rate > 0.0)) throw domain_error("mcmc: sigma2 prior must be positive");
        if (tmvn_sweeps < 1) throw domain_error("mcmc: tmvn_sweeps must be >= 1");
        if (sigma2_fixed && !(*sigma2_fixed > 0.0)) throw domain_error("mcmc: fixed sigma2 must be positive");
    }
};

struct ChainState {
    Eigen::VectorXd theta, gamma, lambda, u, tau;
    double sigma2 = 1.0;
};

struct ChainDraws {
    std::string algorithm;
    std::string prior_label;
    McmcConfig config;
    std::size_t p = 0;
    std::size_t draws_per_chain = 0;
    // one matrix (draws x p) per chain; empty when config.store_draws is false
    std::vector<Eigen::MatrixXd> theta;
    std::vector<std::vector<double>> sigma2;
    std::vector<Eigen::MatrixXd> gamma;     // keep_latents, Gambel samplers
    std::vector<Eigen::MatrixXd> u;         // keep_latents, low_dim only
    std::vector<Eigen::MatrixXd> inclusion; // spike and slab
    std::vector<std::vector<double>> pi;    // spike and slab
    std::vector<Eigen::VectorXd> theta_sum; // per chain, over retained draws

    std::size_t n_chains() const { return theta_sum.size(); }

    Eigen::VectorXd posterior_mean() const
    {
        Eigen::VectorXd m = Eigen::VectorXd::Zero(p);
        for (const auto& s : theta_sum) m += s;
        return m / static_cast<double>(draws_per_chain * n_chains());
    }

    std::vector<std::vector<double>> theta_chains(std::size_t j) const
    {
        if (theta.empty()) throw domain_error("draws were not stored");
        std::vector<std::vector<double>> out;
        for (const auto& m : theta) out.emplace_back(m.col(j).data(), m.col(j).data() + m.rows());
        return out;
    }
};

namespace detail {

struct Gram {
    Eigen::Index n = 0, p = 0;
    bool use_gram = false;  // keep X'X (p <= n)
    bool diagonal = false;  // X'X diagonal
    bool zero_info = false; // X = 0 or n = 0
    Eigen::MatrixXd XtX;
    Eigen::VectorXd Xty;
    double yty = 0.0;

    explicit Gram(const RegressionData& d) : n(d.n()), p(d.p())
    {
        zero_info = n == 0 || d.X.isZero(0.0);
        use_gram = p <= n || zero_info;
        Xty = d.X.transpose() * d.y;
        yty = d.y.squaredNorm();
        if (use_gram) {
            XtX = d.X.transpose() * d.X;
            const Eigen::MatrixXd off = XtX - Eigen::MatrixXd(XtX.diagonal().asDiagonal());
            diagonal = off.isZero(0.0);
        }
    }

    double rss(const RegressionData& d, const Eigen::VectorXd& theta) const
    {
        if (!use_gram) return (d.y - d.X * theta).squaredNorm();
        const double quad = diagonal ? (XtX.diagonal().array() * theta.array().square()).sum() : theta.dot(XtX * theta);
        return std::max(0.0, yty - 2.0 * theta.dot(Xty) + quad);
    }
};

inline double initial_sigma2(const RegressionData& d, const McmcConfig& c)
{
    if (c.sigma2_fixed) return *c.sigma2_fixed;
    if (d.n() < 2) return 1.0;
    const double m = d.y.mean();
    const double v = (d.y.array() - m).square().sum() / (d.n() - 1.0);
    return v > 0.0 ? v : 1.0;
}

inline double update_sigma2(const RegressionData& d, const Gram& g, const McmcConfig& c, const Eigen::VectorXd& theta,
                            Rng& rng, double current)
{
    if (c.sigma2_fixed) return *c.sigma2_fixed;
    if (g.n == 0) return current;
    return rng.inv_gamma(c.sigma2_shape + 0.5 * g.n, c.sigma2_rate + 0.5 * g.rss(d, theta));
}

struct Recorder {
    const McmcConfig& c;
    std::size_t row = 0;
    Eigen::MatrixXd theta, gamma, u, inclusion;
    std::vector<double> sigma2, pi;
    Eigen::VectorXd theta_sum;

    Recorder(const McmcConfig& cfg, Eigen::Index p, bool latents, bool indicators) : c(cfg)
    {
        const auto m = static_cast<Eigen::Index>(c.draws_per_chain());
        if (c.store_draws) theta.resize(m, p);
        if (latents && c.keep_latents) gamma.resize(m, p);
        if (latents && c.keep_latents) u.resize(m, p);
        if (indicators && c.store_draws) inclusion.resize(m, p);
        theta_sum = Eigen::VectorXd::Zero(p);
    }

    bool keep(std::size_t iter) const
    {
        return iter >= c.burn_in && (iter - c.burn_in + 1) % c.thin == 0 && row < c.draws_per_chain();
    }

    void push(const Eigen::VectorXd& th, double s2, const Eigen::VectorXd* gam = nullptr,
              const Eigen::VectorXd* z = nullptr, double pi_v = 0.0, const Eigen::VectorXd* uu = nullptr)
    {
        const auto r = static_cast<Eigen::Index>(row);
        if (theta.size()) theta.row(r) = th.transpose();
        if (gam && gamma.size()) gamma.row(r) = gam->transpose();
        if (uu && u.size()) u.row(r) = uu->transpose();
        if (z && inclusion.size()) inclusion.row(r) = z->transpose();
        if (z) pi.push_back(pi_v);
        sigma2.push_back(s2);
        theta_sum += th;
        ++row;
    }
};

// Gambel prior, or a fixed gamma (Laplace as a q = 1 exponential power)
struct GambelLayer {
    double q, a, b, xi;
    std::optional<double> fixed_gamma;
};

inline GambelLayer layer_for(const PriorSpec& prior)
{
    if (prior.is_gambel()) {
        const auto& g = prior.gambel_params();
        return {g.q, g.a, g.b, g.xi, std::nullopt};
    }
    if (const auto* l = std::get_if<LaplacePrior>(&prior.kind)) {
        // EP(q=1) with scale gamma has rate phi(1)/gamma = sqrt(2)/gamma
        return {1.0, 1.0, 1.0, 1.0, std::sqrt(2.0) / l->rate};
    }
    throw domain_error("Gibbs sampler needs a Gambel or Laplace prior");
}

inline void check_low_dim(const RegressionData& d, const Gram& g)
{
    if (g.zero_info) return;
    if (d.p() > d.n()) throw rank_error("low_dim sampler needs p <= n; use high_dim");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
    if (qr.rank() < d.p()) throw rank_error("X is rank deficient; use high_dim");
}

struct ChainResult {
    Eigen::MatrixXd theta, gamma, u, inclusion;
    std::vector<double> sigma2, pi;
    Eigen::VectorXd theta_sum;

    static ChainResult from(Recorder&& r)
    {
        return {std::move(r.theta), std::move(r.gamma), std::move(r.u), std::move(r.inclusion), std::move(r.sigma2),
                std::move(r.pi), std::move(r.theta_sum)};
    }
};

inline ChainResult low_dim_chain(const RegressionData& d, const Gram& g, const GambelLayer& L, const McmcConfig& c, Rng& rng)
{
    const Eigen::Index p = d.p();
    const double q = L.q, ph = phi(q), phq = std::pow(ph, q);
    ChainState s;
    s.theta = Eigen::VectorXd::Zero(p);
    s.gamma = Eigen::VectorXd::Constant(p, L.fixed_gamma.value_or(1.0));
    s.lambda = Eigen::VectorXd::Ones(p);
    s.u.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) s.u[j] = rng.gamma(1.0 + 1.0 / q, phq);
    s.sigma2 = initial_sigma2(d, c);

    Recorder rec(c, p, true, false);
    Eigen::VectorXd bound(p);
    for (std::size_t it = 0; it < c.n_iter; ++it) {
        for (Eigen::Index j = 0; j < p; ++j) bound[j] = s.gamma[j] * std::pow(s.u[j], 1.0 / q);
        s.theta = rand_box_truncated_normal(g.XtX, g.Xty, bound, s.theta, c.tmvn_sweeps, rng, g.diagonal, 1.0 / s.sigma2);

        for (Eigen::Index j = 0; j < p; ++j) {
            const double at = std::fabs(s.theta[j]);
            // u | theta, gamma: exponential above (|theta|/gamma)^q
            const double lo_u = std::pow(at / s.gamma[j], q);
            s.u[j] = rand_truncated_exp(phq, lo_u, rng);
            if (!(s.u[j] > lo_u)) s.u[j] = std::nextafter(lo_u, INFINITY);
            if (L.fixed_gamma) continue;
            // gamma^q | theta, u, lambda: Gamma(b - 1/q, lambda) above |theta|^q / u
            const double w0 = std::max(std::pow(at, q) / s.u[j], std::numeric_limits<double>::min());
            double w = rand_truncated_gamma(L.b - 1.0 / q, s.lambda[j], w0, rng);
            double gm = std::max(std::pow(w, 1.0 / q), 1e-100);
            for (int k = 0; gm * std::pow(s.u[j], 1.0 / q) <= at; ++k) {
                if (k > 8) throw infeasible_error("low_dim: cannot restore feasibility", it);
                gm = std::nextafter(gm, INFINITY);
            }
            s.gamma[j] = gm;
            s.lambda[j] = rng.gamma(L.a + L.b, std::pow(gm, q) + L.xi);
        }
        s.sigma2 = update_sigma2(d, g, c, s.theta, rng, s.sigma2);
        if (!std::isfinite(s.sigma2) || !s.theta.allFinite()) throw sampler_error("low_dim: non-finite state", it);
        if (rec.keep(it)) rec.push(s.theta, s.sigma2, &s.gamma, nullptr, 0.0, &s.u);
    }
    return ChainResult::from(std::move(rec));
}

inline ChainResult high_dim_chain(const RegressionData& d, const Gram& g, const GambelLayer& L, const McmcConfig& c,
                                  Rng& rng)
{
    const Eigen::Index p = d.p(), n = d.n();
    const double q = L.q, ph = phi(q), ph2 = ph * ph;
    if (q > 2.0) throw domain_error("high_dim sampler needs q <= 2");
    ChainState s;
    s.theta = Eigen::VectorXd::Zero(p);
    s.gamma = Eigen::VectorXd::Constant(p, L.fixed_gamma.value_or(1.0));
    s.lambda = Eigen::VectorXd::Ones(p);
    s.tau = Eigen::VectorXd::Constant(p, q == 2.0 ? 2.0 : 1.0);
    s.sigma2 = initial_sigma2(d, c);

    Recorder rec(c, p, true, false);
    Eigen::VectorXd inv_s(p), z(p);
    Eigen::MatrixXd A;
    for (std::size_t it = 0; it < c.n_iter; ++it) {
        // theta | gamma, tau, sigma2 ~ N(A^{-1} X'y / sigma2, A^{-1}), A = X'X / sigma2 + S^{-1}
        for (Eigen::Index j = 0; j < p; ++j) inv_s[j] = ph2 * s.tau[j] / (s.gamma[j] * s.gamma[j]);
        if (g.use_gram && g.diagonal) {
            for (Eigen::Index j = 0; j < p; ++j) {
                const double aj = g.XtX(j, j) / s.sigma2 + inv_s[j];
                s.theta[j] = g.Xty[j] / s.sigma2 / aj + rng.normal() / std::sqrt(aj);
            }
        } else if (g.use_gram) {
            A = g.XtX / s.sigma2;
            A.diagonal() += inv_s;
            Eigen::LLT<Eigen::MatrixXd> llt(A);
            if (llt.info() != Eigen::Success) throw sampler_error("high_dim: Cholesky of the precision failed", it);
            for (Eigen::Index j = 0; j < p; ++j) z[j] = rng.normal();
            s.theta = llt.solve(g.Xty / s.sigma2) + llt.matrixU().solve(z);
        } else {
            // p > n: u ~ N(0, S), v = Phi u + delta, (Phi S Phi' + I) w = alpha - v, theta = u + S Phi' w
            const double sd = std::sqrt(s.sigma2);
            Eigen::VectorXd sv = inv_s.cwiseInverse();
            for (Eigen::Index j = 0; j < p; ++j) z[j] = std::sqrt(sv[j]) * rng.normal();
            Eigen::VectorXd delta(n);
            for (Eigen::Index i = 0; i < n; ++i) delta[i] = rng.normal();
            const Eigen::MatrixXd phi_x = d.X / sd;
            const Eigen::VectorXd v = phi_x * z + delta;
            Eigen::MatrixXd M = phi_x * sv.asDiagonal() * phi_x.transpose();
            M.diagonal().array() += 1.0;
            Eigen::LLT<Eigen::MatrixXd> llt(M);
            if (llt.info() != Eigen::Success) throw sampler_error("high_dim: Cholesky of the n x n system failed", it);
            const Eigen::VectorXd w = llt.solve(d.y / sd - v);
            s.theta = z + sv.asDiagonal() * (phi_x.transpose() * w);
        }

        for (Eigen::Index j = 0; j < p; ++j) {
            const double at = std::fabs(s.theta[j]);
            if (!L.fixed_gamma) {
                // gamma^q | theta, lambda ~ GIG(b - 1/q, 2 (phi |theta|)^q, 2 lambda), tau integrated out
                const double order = L.b - 1.0 / q;
                double chi = 2.0 * std::pow(ph * at, q);
                if (order <= 0.0) chi = std::max(chi, 1e-300);
                const double w = rand_gig(order, chi, 2.0 * s.lambda[j], rng);
                s.gamma[j] = std::max(std::pow(w, 1.0 / q), 1e-100);
                s.lambda[j] = rng.gamma(L.a + L.b, std::pow(s.gamma[j], q) + L.xi);
            }
            if (q < 2.0) {
                const double r = ph * at / s.gamma[j];
                s.tau[j] = 2.0 * rand_tilted_stable(0.5 * q, r * r, rng);
            }
        }
        s.sigma2 = update_sigma2(d, g, c, s.theta, rng, s.sigma2);
        if (!std::isfinite(s.sigma2) || !s.theta.allFinite()) throw sampler_error("high_dim: non-finite state", it);
        if (rec.keep(it)) rec.push(s.theta, s.sigma2, &s.gamma);
    }
    return ChainResult::from(std::move(rec));
}

inline ChainResult spike_slab_chain(const RegressionData& d, const Gram& g, const SpikeSlabPrior& pr,
                                    const McmcConfig& c, Rng& rng)
{
    const Eigen::Index p = d.p();
    const double v = pr.slab_variance;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p), z = Eigen::VectorXd::Zero(p);
    double pi = pr.alpha / (pr.alpha + pr.beta);
    double sigma2 = initial_sigma2(d, c);
    // running X'X theta (gram) or residual y - X theta
    Eigen::VectorXd gt = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd r = g.use_gram ? Eigen::VectorXd() : Eigen::VectorXd(d.y);
    Eigen::VectorXd col_sq(p);
    for (Eigen::Index j = 0; j < p; ++j) col_sq[j] = g.use_gram ? g.XtX(j, j) : d.X.col(j).squaredNorm();

    Recorder rec(c, p, false, true);
    for (std::size_t it = 0; it < c.n_iter; ++it) {
        const double prior_lo = std::log(pi) - std::log1p(-pi);
        for (Eigen::Index j = 0; j < p; ++j) {
            const double dj = col_sq[j], old = theta[j];
            const double e = g.use_gram ? g.Xty[j] - (gt[j] - dj * old) : d.X.col(j).dot(r) + dj * old;
            const double P = dj / sigma2 + 1.0 / v;
            const double M = e / sigma2 / P;
            const double lo = prior_lo - 0.5 * std::log(v * P) + 0.5 * M * M * P;
            const double incl = lo > 0 ? 1.0 / (1.0 + std::exp(-lo)) : std::exp(lo) / (1.0 + std::exp(lo));
            double nw = 0.0;
            if (rng.uniform() < incl) {
                nw = M + rng.normal() / std::sqrt(P);
                z[j] = 1.0;
            } else {
                z[j] = 0.0;
            }
            theta[j] = nw;
            if (nw != old) {
                if (!g.use_gram)
                    r -= d.X.col(j) * (nw - old);
                else if (g.diagonal)
                    gt[j] += dj * (nw - old);
                else
                    gt += g.XtX.col(j) * (nw - old);
            }
        }
        const double k = z.sum();
        pi = rng.beta(pr.alpha + k, pr.beta + static_cast<double>(p) - k);
        sigma2 = update_sigma2(d, g, c, theta, rng, sigma2);
        if (!std::isfinite(sigma2) || !theta.allFinite()) throw sampler_error("spike_slab: non-finite state", it);
        if (rec.keep(it)) rec.push(theta, sigma2, nullptr, &z, pi);
    }
    return ChainResult::from(std::move(rec));
}

template <class Chain>
ChainDraws run_chains(const RegressionData& d, const McmcConfig& c, const std::string& algorithm,
                      const std::string& label, Chain chain)
{
    std::vector<ChainResult> res(c.n_chains);
    parallel_for(c.n_chains, thread_count(c.threads), [&](std::size_t k) {
        Rng rng(derive_seed(c.seed, k));
        res[k] = chain(rng);
    });
    ChainDraws out;
    out.algorithm = algorithm;
    out.prior_label = label;
    out.config = c;
    out.p = static_cast<std::size_t>(d.p());
    out.draws_per_chain = c.draws_per_chain();
    for (auto& r : res) {
        if (r.theta.size()) out.theta.push_back(std::move(r.theta));
        if (r.gamma.size()) out.gamma.push_back(std::move(r.gamma));
        if (r.u.size()) out.u.push_back(std::move(r.u));
        if (r.inclusion.size()) out.inclusion.push_back(std::move(r.inclusion));
        if (!r.pi.empty()) out.pi.push_back(std::move(r.pi));
        out.sigma2.push_back(std::move(r.sigma2));
        out.theta_sum.push_back(std::move(r.theta_sum));
    }
    return out;
}

} // namespace detail

// Uniform-mixture sampler (p <= n, full column rank, or no data at all)
inline ChainDraws gibbs_low_dim(const RegressionData& data, const PriorSpec& prior, const McmcConfig& config)
{
    data.validate();
    config.validate();
    const auto layer = detail::layer_for(prior);
    const detail::Gram g(data);
    detail::check_low_dim(data, g);
    return detail::run_chains(data, config, "low_dim", prior.label,
                              [&](Rng& rng) { return detail::low_dim_chain(data, g, layer, config, rng); });
}

// Normal scale-mixture sampler, any p and n, q <= 2
inline ChainDraws gibbs_high_dim(const RegressionData& data, const PriorSpec& prior, const McmcConfig& config)
{
    data.validate();
    config.validate();
    const auto layer = detail::layer_for(prior);
    if (layer.q > 2.0) throw domain_error("high_dim sampler needs q <= 2");
    const detail::Gram g(data);
    return detail::run_chains(data, config, "high_dim", prior.label,
                              [&](Rng& rng) { return detail::high_dim_chain(data, g, layer, config, rng); });
}

inline ChainDraws spike_slab_gibbs(const RegressionData& data, const PriorSpec& prior, const McmcConfig& config)
{
    data.validate();
    config.validate();
    const auto* pr = std::get_if<SpikeSlabPrior>(&prior.kind);
    if (!pr) throw domain_error("spike_slab_gibbs needs a spike-and-slab prior");
    const detail::Gram g(data);
    return detail::run_chains(data, config, "spike_slab", prior.label,
                              [&](Rng& rng) { return detail::spike_slab_chain(data, g, *pr, config, rng); });
}

// low_dim when p < n, high_dim otherwise; spike-and-slab has its own sampler
inline Algorithm select_algorithm(const RegressionData& data, const PriorSpec& prior, Algorithm requested)
{
    if (std::holds_alternative<SpikeSlabPrior>(prior.kind)) {
        if (requested != Algorithm::automatic && requested != Algorithm::spike_slab)
            throw domain_error("spike-and-slab prior only runs with the spike_slab sampler");
        return Algorithm::spike_slab;
    }
    if (requested == Algorithm::spike_slab) throw domain_error("spike_slab sampler needs a spike-and-slab prior");
    if (requested != Algorithm::automatic) return requested;
    return data.p() < data.n() ? Algorithm::low_dim : Algorithm::high_dim;
}

inline ChainDraws run_gibbs(const RegressionData& data, const PriorSpec& prior, const McmcConfig& config)
{
    switch (select_algorithm(data, prior, config.algorithm)) {
    case Algorithm::low_dim: return gibbs_low_dim(data, prior, config);
    case Algorithm::high_dim: return gibbs_high_dim(data, prior, config);
    default: return spike_slab_gibbs(data, prior, config);
    }
}

// per-parameter diagnostics: theta_1..theta_p then sigma2
inline std::vector<Diagnostic> chain_diagnostics(const ChainDraws& d)
{
    std::vector<Diagnostic> out;
    for (std::size_t j = 0; j < d.p; ++j) out.push_back(chain_diagnostics(d.theta_chains(j)));
    out.push_back(chain_diagnostics(d.sigma2));
    return out;
}

} // namespace gambel
