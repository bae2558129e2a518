#pragma once

#include <gambel/errors.hpp>
#include <gambel/parallel.hpp>
#include <gambel/prior.hpp>
#include <gambel/random.hpp>
#include <gambel/samplers.hpp>

#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace gambel {

// ---- data generation ----

namespace detail {

inline Eigen::MatrixXd normal_matrix(Eigen::Index n, Eigen::Index p, Rng& rng)
{
    Eigen::MatrixXd Z(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) Z(i, j) = rng.normal();
    return Z;
}

// rows iid N(0, R) with R_jk = rho for j != k
inline Eigen::MatrixXd equicorrelated_design(Eigen::Index n, Eigen::Index p, double rho, Rng& rng)
{
    Eigen::MatrixXd R = Eigen::MatrixXd::Constant(p, p, rho);
    R.diagonal().setOnes();
    const Eigen::LLT<Eigen::MatrixXd> llt(R);
    return normal_matrix(n, p, rng) * llt.matrixU();
}

// three latent factors shared by blocks of five columns, the rest independent
inline Eigen::MatrixXd factor_design(Eigen::Index n, Eigen::Index p, Rng& rng)
{
    Eigen::MatrixXd X(n, p);
    const double sd_w = 0.1; // w_j ~ N(0, 0.01)
    for (Eigen::Index i = 0; i < n; ++i) {
        const double z[3] = {rng.normal(), rng.normal(), rng.normal()};
        for (Eigen::Index j = 0; j < p; ++j) X(i, j) = j < 15 ? z[j / 5] + sd_w * rng.normal() : rng.normal();
    }
    return X;
}

inline Eigen::VectorXd blocks(std::initializer_list<std::pair<int, double>> parts)
{
    std::vector<double> v;
    for (auto [count, value] : parts) v.insert(v.end(), count, value);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace detail

struct Study1Setup {
    Eigen::VectorXd theta;
    double sigma;
    Eigen::Index n;
    bool factor_design;
};

inline Study1Setup study1_setup(int config_id)
{
    using detail::blocks;
    switch (config_id) {
    case 1: return {blocks({{2, 20}, {2, 40}, {4, 0}}), 3, 50, false};
    case 2: return {blocks({{2, 1}, {2, 20}, {4, 0}}), 3, 50, false};
    case 3: return {blocks({{7, 20}, {8, 5}, {15, 0}}), 15, 300, false};
    case 4: return {blocks({{7, 20}, {8, 5}, {15, 0}}), 15, 300, true};
    case 5: return {blocks({{7, 1}, {8, 50}, {15, 0}}), 15, 500, true};
    case 6: return {blocks({{5, 0.5}, {5, 5}, {7, 40}, {15, 0}}), 15, 300, false};
    default: throw domain_error("study 1: config_id must be in 1..6");
    }
}

inline RegressionData gen_study1(int config_id, std::uint64_t seed)
{
    const auto s = study1_setup(config_id);
    Rng rng(seed);
    RegressionData d;
    const Eigen::Index p = s.theta.size();
    d.X = s.factor_design ? detail::factor_design(s.n, p, rng) : detail::equicorrelated_design(s.n, p, 0.5, rng);
    d.y = d.X * s.theta;
    for (Eigen::Index i = 0; i < s.n; ++i) d.y[i] += s.sigma * rng.normal();
    d.theta_true = s.theta;
    return d;
}

// y_i ~ N(theta_i, 1), theta_i ~ w t_nu(0, 3) + (1 - w) delta_0, N = 1000
inline RegressionData gen_study2(double w, double nu, std::uint64_t seed, Eigen::Index N = 1000)
{
    if (!(w > 0.0 && w < 1.0)) throw domain_error("study 2: w must lie in (0,1)");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw domain_error("study 2: nu must be positive");
    Rng rng(seed);
    RegressionData d;
    d.X = Eigen::MatrixXd::Identity(N, N);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(N);
    d.y.resize(N);
    for (Eigen::Index i = 0; i < N; ++i) {
        if (rng.uniform() < w) theta[i] = 3.0 * rng.normal() / std::sqrt(2.0 * rng.gamma(0.5 * nu) / nu);
        d.y[i] = theta[i] + rng.normal();
    }
    d.theta_true = std::move(theta);
    return d;
}

// mean squared coordinate error
inline double sq_error_loss(const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& theta_true)
{
    if (theta_hat.size() != theta_true.size()) throw domain_error("loss: length mismatch");
    if (theta_hat.size() == 0) throw domain_error("loss: empty vectors");
    return (theta_hat - theta_true).squaredNorm() / static_cast<double>(theta_hat.size());
}

// ---- study orchestration ----

inline std::vector<PriorSpec> default_study_priors()
{
    return {PriorSpec::gambel(GambelParams::horseshoe(), "Horseshoe"),
            PriorSpec::gambel(GambelParams(2, 0.5, 0.52, 1), "Gambel 1"),
            PriorSpec::gambel(GambelParams(2, 0.3, 1.6, 1), "Gambel 2"),
            PriorSpec{LaplacePrior{1.0}, "Laplace"},
            PriorSpec{SpikeSlabPrior{1000.0, 2.85, 1.0}, "Spike and slab"}};
}

struct StudyConfig {
    int study = 1;
    int config_id = 1;
    double w = 0.5;
    double nu = 2.0;
    std::size_t replicates = 20;
    McmcConfig mcmc;
    std::vector<PriorSpec> priors = default_study_priors();
    std::uint64_t seed = 20240611;
    unsigned threads = 0;
    // hold sigma^2 at its generating value instead of sampling it
    bool known_noise = true;

    void validate() const
    {
        if (study != 1 && study != 2) throw domain_error("study must be 1 or 2");
        if (study == 1 && (config_id < 1 || config_id > 6)) throw domain_error("study 1: config_id must be in 1..6");
        if (study == 2 && !(w > 0.0 && w < 1.0)) throw domain_error("study 2: w must lie in (0,1)");
        if (study == 2 && !(nu > 0.0 && std::isfinite(nu))) throw domain_error("study 2: nu must be positive");
        if (replicates < 1) throw domain_error("study: need at least one replicate");
        if (priors.empty()) throw domain_error("study: no priors");
        mcmc.validate();
    }

    std::string label() const
    {
        std::ostringstream os;
        if (study == 1) os << "conf" << config_id;
        else os << "nu" << nu << "_w" << w;
        return os.str();
    }

    std::uint64_t replicate_seed(std::size_t r) const { return derive_seed(seed, r); }

    RegressionData generate(std::size_t r) const
    {
        return study == 1 ? gen_study1(config_id, replicate_seed(r)) : gen_study2(w, nu, replicate_seed(r));
    }
};

struct PriorOutcome {
    std::string prior;
    std::vector<double> losses; // NaN where the fit failed
    std::vector<std::string> errors;
    double median = std::numeric_limits<double>::quiet_NaN();
    std::size_t failures = 0;
};

struct StudyResult {
    StudyConfig config;
    std::vector<PriorOutcome> priors;
    double seconds = 0.0;

    const PriorOutcome& outcome(const std::string& label) const
    {
        for (const auto& o : priors)
            if (o.prior == label) return o;
        throw domain_error("study result has no prior '" + label + "'");
    }
};

// median over the finite entries
inline double median_of(std::vector<double> v)
{
    std::erase_if(v, [](double x) { return !std::isfinite(x); });
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline StudyResult run_study(const StudyConfig& cfg)
{
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t R = cfg.replicates, P = cfg.priors.size();
    std::vector<double> loss(R * P, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> err(R * P);
    std::vector<RegressionData> data(R);

    parallel_for(R, cfg.threads, [&](std::size_t r) { data[r] = cfg.generate(r); });
    parallel_for(R * P, cfg.threads, [&](std::size_t k) {
        const std::size_t r = k / P, j = k % P;
        McmcConfig mc = cfg.mcmc;
        mc.seed = derive_seed(cfg.replicate_seed(r), j + 1);
        mc.store_draws = false;
        mc.keep_latents = false;
        mc.threads = 1;
        if (cfg.known_noise) mc.sigma2_fixed = cfg.study == 1 ? std::pow(study1_setup(cfg.config_id).sigma, 2) : 1.0;
        try {
            const auto dr = run_gibbs(data[r], cfg.priors[j], mc);
            loss[k] = sq_error_loss(dr.posterior_mean(), *data[r].theta_true);
        } catch (const error& e) {
            err[k] = e.what();
        }
    });

    StudyResult res;
    res.config = cfg;
    for (std::size_t j = 0; j < P; ++j) {
        PriorOutcome o;
        o.prior = cfg.priors[j].label;
        for (std::size_t r = 0; r < R; ++r) {
            o.losses.push_back(loss[r * P + j]);
            o.errors.push_back(err[r * P + j]);
            if (!err[r * P + j].empty()) ++o.failures;
        }
        o.median = median_of(o.losses);
        res.priors.push_back(std::move(o));
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// ---- output ----

inline nlohmann::json to_json(const StudyResult& r)
{
    using nlohmann::json;
    const auto& c = r.config;
    json cfg = {{"study", c.study},
                {"label", c.label()},
                {"replicates", c.replicates},
                {"seed", c.seed},
                {"n_iter", c.mcmc.n_iter},
                {"burn_in", c.mcmc.burn_in},
                {"thin", c.mcmc.thin},
                {"n_chains", c.mcmc.n_chains},
                {"algorithm", to_string(c.mcmc.algorithm)},
                {"known_noise", c.known_noise}};
    if (c.study == 1) {
        cfg["config_id"] = c.config_id;
    } else {
        cfg["w"] = c.w;
        cfg["nu"] = c.nu;
    }
    json priors = json::array();
    for (const auto& o : r.priors) {
        json losses = json::array();
        for (double x : o.losses) losses.push_back(std::isfinite(x) ? json(x) : json(nullptr));
        json e = {{"prior", o.prior}, {"losses", losses}, {"failures", o.failures}, {"errors", o.errors}};
        e["median"] = std::isfinite(o.median) ? json(o.median) : json(nullptr);
        priors.push_back(std::move(e));
    }
    return {{"config", cfg}, {"priors", priors}, {"seconds", r.seconds}};
}

// rows: priors, columns: one per study result (medians)
inline void write_table_csv(std::ostream& os, const std::vector<StudyResult>& results)
{
    if (results.empty()) throw domain_error("table: no results");
    os << "prior";
    for (const auto& r : results) os << ',' << r.config.label();
    os << '\n';
    os.precision(10);
    for (const auto& o : results.front().priors) {
        os << '"' << o.prior << '"';
        for (const auto& r : results) {
            const double m = r.outcome(o.prior).median;
            os << ',';
            if (std::isfinite(m)) os << m;
            else os << "NA";
        }
        os << '\n';
    }
}

} // namespace gambel
