// gambel: command-line front end for the distribution, analysis, sampler and study code

#include <gambel/analysis.hpp>
#include <gambel/distributions.hpp>
#include <gambel/harness.hpp>
#include <gambel/samplers.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

using namespace gambel;
using nlohmann::json;

namespace {

constexpr std::uint64_t default_seed = 20240611;

enum Exit { ok = 0, usage = 2, numerical = 3, sampler = 4 };

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- small IO helpers ----

class Output {
public:
    explicit Output(const std::string& path)
    {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw io_error("cannot open '" + path + "' for writing");
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void write_json(const std::string& path, const json& j)
{
    Output out(path);
    out.os() << j.dump(2) << '\n';
}

std::ostream& precise(std::ostream& os)
{
    os.precision(17);
    return os;
}

// lo:hi:step, inclusive of hi up to rounding
std::vector<double> parse_grid(const std::string& s)
{
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ':')) {
        std::size_t used = 0;
        double x;
        try {
            x = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw domain_error("bad grid '" + s + "'");
        }
        if (used != tok.size()) throw domain_error("bad grid '" + s + "'");
        v.push_back(x);
    }
    if (v.size() != 3 || !(v[2] > 0.0) || !(v[1] >= v[0])) throw domain_error("grid must be lo:hi:step with step > 0");
    const auto n = static_cast<std::size_t>(std::floor((v[1] - v[0]) / v[2] + 1e-9)) + 1;
    if (n > 10000000) throw domain_error("grid has too many points");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = v[0] + v[2] * static_cast<double>(i);
    return g;
}

// numeric CSV, optional header row (detected by a non-numeric first cell)
Eigen::MatrixXd read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
                if (used != cell.size()) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw io_error(path + ": non-numeric cell in '" + line + "'");
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size()) throw io_error(path + ": ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw io_error(path + ": no data rows");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    return m;
}

// ---- shared option groups ----

struct ParamOpts {
    double q = 2, a = 0.5, b = 0.5, xi = 1;
    void add(CLI::App* app)
    {
        app->add_option("--q", q, "shape q")->capture_default_str();
        app->add_option("--a", a, "tail parameter a")->capture_default_str();
        app->add_option("--b", b, "origin parameter b")->capture_default_str();
        app->add_option("--xi", xi, "scale xi")->capture_default_str();
    }
    GambelParams get() const { return {q, a, b, xi}; }
};

struct McmcOpts {
    std::size_t iters = 5000, burn = 1500, thin = 1, chains = 3;
    std::string algorithm = "auto";
    std::optional<double> sigma2;
    void add(CLI::App* app)
    {
        app->add_option("--iters", iters, "iterations per chain")->capture_default_str();
        app->add_option("--burn", burn, "burn-in iterations")->capture_default_str();
        app->add_option("--thin", thin, "thinning interval")->capture_default_str();
        app->add_option("--chains", chains, "number of chains")->capture_default_str();
        app->add_option("--algorithm", algorithm, "auto|low_dim|high_dim|spike_slab")->capture_default_str();
        app->add_option("--sigma2", sigma2, "hold the noise variance fixed at this value");
    }
    McmcConfig get(std::uint64_t seed, unsigned threads) const
    {
        McmcConfig c;
        c.n_iter = iters;
        c.burn_in = burn;
        c.thin = thin;
        c.n_chains = chains;
        c.algorithm = parse_algorithm(algorithm);
        c.sigma2_fixed = sigma2;
        c.seed = seed;
        c.threads = threads;
        return c;
    }
};

struct Globals {
    std::uint64_t seed = default_seed;
    unsigned threads = 0;
    std::string out = "-";
};

// ---- dist ----

double unfolded_cdf(const GambelParams& p, double x)
{
    if (x == 0.0) return 0.5;
    const double half = 0.5 * gambel_survival(p, std::fabs(x));
    return x > 0 ? 1.0 - half : half;
}

double unfolded_quantile(const GambelParams& p, double u)
{
    if (!(u > 0.0 && u < 1.0)) throw domain_error("quantile: p must lie in (0,1)");
    if (u == 0.5) return 0.0;
    return u > 0.5 ? gambel_quantile(p, 2.0 * u - 1.0) : -gambel_quantile(p, 1.0 - 2.0 * u);
}

void setup_dist(CLI::App& root, Globals& g)
{
    auto* dist = root.add_subcommand("dist", "density, cdf, quantiles, moments and draws");
    dist->require_subcommand(1);
    struct Opts {
        ParamOpts par;
        bool folded = false;
        std::string grid = "-5:5:0.01", pgrid = "0.01:0.99:0.01";
        int k = 2;
        std::size_t n = 1000;
    };
    auto o = std::make_shared<Opts>();
    auto common = [&, o](CLI::App* s) {
        o->par.add(s);
        s->add_flag("--folded", o->folded, "use the folded law on [0, inf)");
        s->add_option("-o,--out", g.out, "output file, - for stdout");
    };

    auto* pdf = dist->add_subcommand("pdf", "density on a grid");
    common(pdf);
    pdf->add_option("--grid", o->grid, "lo:hi:step")->capture_default_str();
    pdf->callback([o, &g] {
        const auto p = o->par.get();
        Output out(g.out);
        precise(out.os()) << "x,pdf\n";
        for (double x : parse_grid(o->grid)) {
            if (o->folded && x < 0) continue;
            out.os() << x << ',' << gambel_pdf(p, x, o->folded ? Fold::folded : Fold::unfolded) << '\n';
        }
    });

    auto* cdf = dist->add_subcommand("cdf", "cdf on a grid");
    common(cdf);
    cdf->add_option("--grid", o->grid, "lo:hi:step")->capture_default_str();
    cdf->callback([o, &g] {
        const auto p = o->par.get();
        Output out(g.out);
        precise(out.os()) << "x,cdf\n";
        for (double x : parse_grid(o->grid)) {
            if (o->folded && x < 0) continue;
            out.os() << x << ',' << (o->folded ? gambel_cdf(p, x) : unfolded_cdf(p, x)) << '\n';
        }
    });

    auto* qf = dist->add_subcommand("quantile", "quantiles on a probability grid");
    common(qf);
    qf->add_option("--pgrid", o->pgrid, "lo:hi:step inside (0,1)")->capture_default_str();
    qf->callback([o, &g] {
        const auto p = o->par.get();
        Output out(g.out);
        precise(out.os()) << "p,quantile\n";
        for (double u : parse_grid(o->pgrid))
            out.os() << u << ',' << (o->folded ? gambel_quantile(p, u) : unfolded_quantile(p, u)) << '\n';
    });

    auto* mom = dist->add_subcommand("moments", "E|theta|^k");
    common(mom);
    mom->add_option("--k", o->k, "order")->capture_default_str();
    mom->callback([o, &g] {
        const auto p = o->par.get();
        json j = {{"k", o->k}};
        try {
            j["value"] = gambel_moment(p, o->k);
        } catch (const moment_error&) {
            j["value"] = "nonexistent";
        }
        write_json(g.out, j);
    });

    auto* smp = dist->add_subcommand("sample", "random draws");
    common(smp);
    smp->add_option("--n", o->n, "number of draws")->capture_default_str();
    smp->add_option("--seed", g.seed, "random seed")->capture_default_str();
    smp->callback([o, &g] {
        const auto p = o->par.get();
        Rng rng(g.seed);
        Output out(g.out);
        precise(out.os()) << "index,draw\n";
        for (std::size_t i = 0; i < o->n; ++i)
            out.os() << i << ',' << gambel_draw(p, rng, o->folded ? Fold::folded : Fold::unfolded) << '\n';
    });
}

// ---- analyze ----

json curvature_json(const PriorSpec& pr)
{
    CurvatureReport r;
    if (pr.is_gambel()) r = gambel_pm_curvature(pr.gambel_params());
    else if (const auto* l = std::get_if<LaplacePrior>(&pr.kind)) r = laplace_pm_curvature(l->rate);
    else throw domain_error("pmcurv is not defined for a spike-and-slab prior");
    return {{"prior", pr.label}, {"pmcurv", r.pm_curv}, {"modal_mass", r.modal_mass}};
}

void setup_analyze(CLI::App& root, Globals& g)
{
    auto* an = root.add_subcommand("analyze", "hazard, Lorenz/Gini, curvature, shrinkage and tails");
    an->require_subcommand(1);
    struct Opts {
        ParamOpts par;
        std::string grid = "0.01:10:0.01", pgrid = "0.01:0.99:0.01", ygrid = "-10:10:0.1", prior;
        std::string method = "auto";
        double truncation = 1e6;
    };
    auto o = std::make_shared<Opts>();
    auto common = [&, o](CLI::App* s) {
        o->par.add(s);
        s->add_option("-o,--out", g.out, "output file, - for stdout");
    };
    auto prior_or_params = [o] { return o->prior.empty() ? PriorSpec::gambel(o->par.get()) : parse_prior(o->prior); };

    auto* hz = an->add_subcommand("hazard", "hazard rate of |theta|");
    common(hz);
    hz->add_option("--grid", o->grid, "lo:hi:step, positive")->capture_default_str();
    hz->callback([o, &g] {
        const auto p = o->par.get();
        const auto r = hazard_profile(p, parse_grid(o->grid));
        Output out(g.out);
        precise(out.os()) << "x,hazard,x_times_hazard\n";
        for (std::size_t i = 0; i < r.grid.size(); ++i)
            out.os() << r.grid[i] << ',' << r.rates[i] << ',' << r.grid[i] * r.rates[i] << '\n';
    });

    auto* lz = an->add_subcommand("lorenz", "Lorenz curve of |theta|");
    common(lz);
    lz->add_option("--pgrid", o->pgrid, "lo:hi:step inside (0,1)")->capture_default_str();
    lz->add_option("--method", o->method, "auto|closed|numeric")->capture_default_str();
    lz->add_option("--truncation", o->truncation, "upper bound for numeric integration")->capture_default_str();
    lz->callback([o, &g] {
        const auto p = o->par.get();
        const auto grid = parse_grid(o->pgrid);
        const std::string& m = o->method;
        std::vector<double> L;
        if (m == "auto" && p.a * p.q > 1.0) {
            // closed form where the series converges, quadrature elsewhere
            for (double u : grid) {
                try {
                    L.push_back(lorenz_closed_form(p, u));
                } catch (const convergence_error&) {
                    L.push_back(lorenz_numeric(p, {u}, o->truncation).L_values.front());
                }
            }
        } else if (m == "closed") {
            for (double u : grid) L.push_back(lorenz_closed_form(p, u));
        } else if (m == "numeric" || m == "auto") {
            L = lorenz_numeric(p, grid, o->truncation).L_values;
        } else {
            throw domain_error("method must be auto, closed or numeric");
        }
        Output out(g.out);
        precise(out.os()) << "p,lorenz\n";
        for (std::size_t i = 0; i < grid.size(); ++i) out.os() << grid[i] << ',' << L[i] << '\n';
    });

    auto* gi = an->add_subcommand("gini", "Gini index of |theta|");
    common(gi);
    gi->add_option("--truncation", o->truncation, "upper integration bound")->capture_default_str();
    gi->callback([o, &g] {
        const auto r = gambel_gini(o->par.get(), o->truncation);
        write_json(g.out, {{"gini", r.gini}, {"mean_finite", r.mean_finite}, {"truncation", r.truncation}});
    });

    auto* pm = an->add_subcommand("pmcurv", "point of maximum curvature and modal mass");
    common(pm);
    pm->add_option("--prior", o->prior, "horseshoe | gambel:q,a,b,xi | laplace:rate");
    pm->callback([o, prior_or_params, &g] { write_json(g.out, curvature_json(prior_or_params())); });

    auto* pf = an->add_subcommand("profile", "E[theta | y] for y ~ N(theta, 1)");
    common(pf);
    pf->add_option("--prior", o->prior, "horseshoe | gambel:q,a,b,xi | laplace:rate | sns:var,alpha,beta");
    pf->add_option("--grid", o->ygrid, "lo:hi:step")->capture_default_str();
    pf->callback([o, prior_or_params, &g] {
        const auto grid = parse_grid(o->ygrid);
        const auto m = shrinkage_profile(prior_or_params(), grid);
        Output out(g.out);
        precise(out.os()) << "y,posterior_mean\n";
        for (std::size_t i = 0; i < grid.size(); ++i) out.os() << grid[i] << ',' << m[i] << '\n';
    });

    auto* tl = an->add_subcommand("tail", "fitted log-log tail slope");
    common(tl);
    tl->callback([o, &g] {
        const auto p = o->par.get();
        write_json(g.out, {{"tail_index_fit", tail_index_fit(p)},
                           {"expected", -p.tail_exponent()},
                           {"singular_at_zero", p.singular_at_zero()}});
    });
}

// ---- fit ----

void write_draws(std::ostream& os, const ChainDraws& d)
{
    precise(os) << "chain,draw";
    for (std::size_t j = 0; j < d.p; ++j) os << ",theta_" << j + 1;
    os << ",sigma2\n";
    for (std::size_t c = 0; c < d.theta.size(); ++c)
        for (Eigen::Index r = 0; r < d.theta[c].rows(); ++r) {
            os << c << ',' << r;
            for (Eigen::Index j = 0; j < d.theta[c].cols(); ++j) os << ',' << d.theta[c](r, j);
            os << ',' << d.sigma2[c][r] << '\n';
        }
}

void setup_fit(CLI::App& root, Globals& g)
{
    auto* fit = root.add_subcommand("fit", "posterior sampling for y = X theta + noise");
    struct Opts {
        std::string x, y, prior = "horseshoe", draws = "draws.csv", summary = "summary.json";
        McmcOpts mcmc;
    };
    auto o = std::make_shared<Opts>();
    fit->add_option("--x", o->x, "design matrix CSV (n rows, p columns)")->required();
    fit->add_option("--y", o->y, "response CSV, one column")->required();
    fit->add_option("--prior", o->prior, "horseshoe | gambel:q,a,b,xi | laplace:rate | sns:var,alpha,beta")
        ->capture_default_str();
    fit->add_option("--draws", o->draws, "draws CSV path")->capture_default_str();
    fit->add_option("--summary", o->summary, "summary JSON path")->capture_default_str();
    fit->add_option("--seed", g.seed, "random seed")->capture_default_str();
    fit->add_option("--threads", g.threads, "worker threads, 0 for automatic");
    o->mcmc.add(fit);
    fit->callback([o, &g] {
        RegressionData d;
        d.X = read_csv(o->x);
        const Eigen::MatrixXd y = read_csv(o->y);
        if (y.cols() != 1) throw io_error("y file must have exactly one column");
        if (y.rows() != d.X.rows()) throw io_error("X and y have different numbers of rows");
        d.y = y.col(0);
        const auto prior = parse_prior(o->prior);
        auto mc = o->mcmc.get(g.seed, g.threads);
        const auto alg = select_algorithm(d, prior, mc.algorithm);
        mc.algorithm = alg;
        const auto dr = run_gibbs(d, prior, mc);
        {
            Output out(o->draws);
            write_draws(out.os(), dr);
        }
        const auto diag = chain_diagnostics(dr);
        json params = json::array();
        const auto mean = dr.posterior_mean();
        for (std::size_t j = 0; j <= dr.p; ++j) {
            const bool s2 = j == dr.p;
            auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
            double m = 0;
            if (s2) {
                for (const auto& c : dr.sigma2)
                    for (double v : c) m += v;
                m /= static_cast<double>(dr.draws_per_chain * dr.n_chains());
            } else {
                m = mean[j];
            }
            params.push_back({{"name", s2 ? std::string("sigma2") : "theta_" + std::to_string(j + 1)},
                              {"mean", m},
                              {"ess", num(diag[j].ess)},
                              {"rhat", num(diag[j].rhat)}});
        }
        json sm = {{"algorithm", dr.algorithm},
                   {"prior", dr.prior_label},
                   {"n", d.n()},
                   {"p", d.p()},
                   {"seed", g.seed},
                   {"n_iter", mc.n_iter},
                   {"burn_in", mc.burn_in},
                   {"thin", mc.thin},
                   {"n_chains", mc.n_chains},
                   {"draws_per_chain", dr.draws_per_chain},
                   {"parameters", params}};
        write_json(o->summary, sm);
    });
}

// ---- simulate ----

void setup_simulate(CLI::App& root, Globals& g)
{
    auto* sim = root.add_subcommand("simulate", "simulation studies");
    sim->require_subcommand(1);
    struct Opts {
        std::vector<int> configs{1};
        std::vector<double> w{0.5}, nu{2};
        std::size_t replicates = 20;
        std::vector<std::string> priors;
        std::string csv = "study.csv", json_path = "study.json";
        bool estimate_noise = false;
        McmcOpts mcmc;
    };
    auto o = std::make_shared<Opts>();
    auto common = [&, o](CLI::App* s) {
        s->add_option("--replicates", o->replicates, "replicates per configuration")->capture_default_str();
        s->add_option("--prior", o->priors, "prior spec, repeatable (default: the five study priors)");
        s->add_option("--csv", o->csv, "table of medians")->capture_default_str();
        s->add_option("--json", o->json_path, "per-replicate detail")->capture_default_str();
        s->add_flag("--estimate-noise", o->estimate_noise, "sample sigma^2 instead of fixing it at the truth");
        s->add_option("--seed", g.seed, "random seed")->capture_default_str();
        s->add_option("--threads", g.threads, "worker threads, 0 for automatic");
        o->mcmc.add(s);
    };
    auto run = [o, &g](int study) {
        std::vector<StudyResult> results;
        auto base = [&] {
            StudyConfig c;
            c.study = study;
            c.replicates = o->replicates;
            c.mcmc = o->mcmc.get(g.seed, 1);
            c.seed = g.seed;
            c.threads = g.threads;
            c.known_noise = !o->estimate_noise;
            if (!o->priors.empty()) {
                c.priors.clear();
                for (const auto& s : o->priors) c.priors.push_back(parse_prior(s));
            }
            return c;
        };
        if (study == 1) {
            for (int id : o->configs) {
                auto c = base();
                c.config_id = id;
                results.push_back(run_study(c));
            }
        } else {
            for (double nu : o->nu)
                for (double w : o->w) {
                    auto c = base();
                    c.w = w;
                    c.nu = nu;
                    results.push_back(run_study(c));
                }
        }
        {
            Output out(o->csv);
            write_table_csv(out.os(), results);
        }
        json all = json::array();
        for (const auto& r : results) all.push_back(to_json(r));
        write_json(o->json_path, {{"studies", all}});
    };

    auto* s1 = sim->add_subcommand("study1", "linear regression, p < n");
    common(s1);
    s1->add_option("--config", o->configs, "configuration id(s) 1..6")->capture_default_str();
    s1->callback([run] { run(1); });

    auto* s2 = sim->add_subcommand("study2", "normal means, N = 1000");
    common(s2);
    s2->add_option("--w", o->w, "nonzero fraction(s)")->capture_default_str();
    s2->add_option("--nu", o->nu, "t degrees of freedom")->capture_default_str();
    s2->callback([run] { run(2); });
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Gambel shrinkage priors: distributions, diagnostics, samplers and studies"};
    app.require_subcommand(1);
    Globals g;
    setup_dist(app, g);
    setup_analyze(app, g);
    setup_fit(app, g);
    setup_simulate(app, g);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const sampler_error& e) {
        std::cerr << "sampler error: " << e.what() << '\n';
        return sampler;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return numerical;
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return numerical;
    }
    return ok;
}
