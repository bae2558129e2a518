#pragma once

#include <gambel/distributions.hpp>
#include <gambel/errors.hpp>

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gambel {

struct GambelPrior {
    GambelParams params;
};

// density (rate/2) exp(-rate |theta|)
struct LaplacePrior {
    double rate;
};

// theta ~ pi N(0, slab_variance) + (1 - pi) delta_0, pi ~ Beta(alpha, beta)
struct SpikeSlabPrior {
    double slab_variance;
    double alpha;
    double beta;
};

struct PriorSpec {
    std::variant<GambelPrior, LaplacePrior, SpikeSlabPrior> kind;
    std::string label;

    static PriorSpec gambel(const GambelParams& p, std::string label = "")
    {
        if (label.empty()) {
            std::ostringstream os;
            os << "gambel:" << p.q << ',' << p.a << ',' << p.b << ',' << p.xi;
            label = os.str();
        }
        return {GambelPrior{p}, std::move(label)};
    }
    static PriorSpec horseshoe() { return gambel(GambelParams::horseshoe(), "horseshoe"); }
    static PriorSpec laplace(double rate)
    {
        detail::require_positive(rate, "laplace rate");
        std::ostringstream os;
        os << "laplace:" << rate;
        return {LaplacePrior{rate}, os.str()};
    }
    static PriorSpec spike_slab(double var, double alpha, double beta)
    {
        detail::require_positive(var, "slab variance");
        detail::require_positive(alpha, "slab weight alpha");
        detail::require_positive(beta, "slab weight beta");
        std::ostringstream os;
        os << "sns:" << var << ',' << alpha << ',' << beta;
        return {SpikeSlabPrior{var, alpha, beta}, os.str()};
    }

    bool is_gambel() const { return std::holds_alternative<GambelPrior>(kind); }
    const GambelParams& gambel_params() const { return std::get<GambelPrior>(kind).params; }
};

namespace detail {

inline std::vector<double> parse_numbers(std::string_view s, std::size_t count, std::string_view what)
{
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const auto tok = s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        double v = 0.0;
        const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || r.ec != std::errc() || r.ptr != tok.data() + tok.size())
            throw domain_error("prior '" + std::string(what) + "': bad number '" + std::string(tok) + "'");
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (out.size() != count)
        throw domain_error("prior '" + std::string(what) + "': expected " + std::to_string(count) + " numbers");
    return out;
}

} // namespace detail

// horseshoe | gambel:q,a,b,xi | laplace:rate | sns:var,alpha,beta
inline PriorSpec parse_prior(std::string_view s)
{
    const auto colon = s.find(':');
    const auto head = s.substr(0, colon);
    const auto rest = colon == std::string_view::npos ? std::string_view{} : s.substr(colon + 1);
    if (head == "horseshoe") {
        if (colon != std::string_view::npos) throw domain_error("prior 'horseshoe' takes no parameters");
        return PriorSpec::horseshoe();
    }
    if (colon == std::string_view::npos) throw domain_error("unknown prior '" + std::string(s) + "'");
    if (head == "gambel") {
        const auto v = detail::parse_numbers(rest, 4, head);
        return PriorSpec::gambel(GambelParams(v[0], v[1], v[2], v[3]));
    }
    if (head == "laplace") return PriorSpec::laplace(detail::parse_numbers(rest, 1, head)[0]);
    if (head == "sns") {
        const auto v = detail::parse_numbers(rest, 3, head);
        return PriorSpec::spike_slab(v[0], v[1], v[2]);
    }
    throw domain_error("unknown prior '" + std::string(s) + "'");
}

} // namespace gambel
