#include "ppto/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "ppto/errors.hpp"
#include "ppto/format.hpp"

#ifndef PPTO_VERSION
#define PPTO_VERSION "unknown"
#endif

namespace ppto {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent seed per (series, grid point) so overlay points do not share draws.
std::uint64_t point_seed(std::uint64_t seed, std::size_t series, std::size_t point) {
    return splitmix64(splitmix64(splitmix64(seed) ^ series) ^ point);
}

bool mc_point(const SweepSpec& spec, std::size_t i) {
    return spec.mc_overlay && i % spec.mc_stride == 0;
}

std::string join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out += ' ';
        out += format_number(values[i]);
    }
    return out;
}

std::vector<double> split_numbers(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string token;
    while (in >> token)
        out.push_back(parse_number(token, what));
    return out;
}

const char* to_string(SweepVariable v) {
    switch (v) {
    case SweepVariable::beta: return "beta";
    case SweepVariable::m: return "m";
    case SweepVariable::lambda: return "lambda";
    }
    return "?";
}

std::vector<std::pair<std::string, std::string>> make_metadata(const std::string& figure_id, const SweepSpec& spec) {
    std::vector<std::pair<std::string, std::string>> md;
    auto add = [&](std::string key, std::string value) { md.emplace_back(std::move(key), std::move(value)); };
    add("figure_id", figure_id);
    add("sweep_variable", to_string(spec.variable));
    add("grid", join(spec.grid.values));
    add("alpha", format_number(spec.fixed_params.alpha));
    add("r0", format_number(spec.fixed_params.r0));
    add("lambda", format_number(spec.fixed_params.lambda));
    add("log_base", to_string(spec.fixed_params.log_base));
    add("lambdas", join(spec.lambdas));
    add("epsilons", join(spec.epsilons));
    add("m_cap", spec.m_cap ? std::to_string(*spec.m_cap) : "none");
    add("cap_policy", spec.cap_policy == CapPolicy::fixed ? "fixed" : "smallest_feasible");
    add("fixed_m", std::to_string(spec.fixed_m));
    add("approximate_attempts", spec.approximate_attempts ? "1" : "0");
    add("search.m_max", std::to_string(spec.search.m_max));
    add("search.bracket_hi_init", format_number(spec.search.bracket_hi_init));
    add("search.root_tol", format_number(spec.search.root_tol));
    add("search.max_bracket_expansions", std::to_string(spec.search.max_bracket_expansions));
    add("mc_overlay", spec.mc_overlay ? "1" : "0");
    add("sim.window_radius_factor", format_number(spec.sim.window_radius_factor));
    add("sim.n_messages", std::to_string(spec.sim.n_messages));
    add("sim.seed", std::to_string(spec.sim.seed));
    add("sim.power_ratio", format_number(spec.sim.power_ratio));
    add("mc_stride", std::to_string(spec.mc_stride));
    add("code_version", PPTO_VERSION);
    return md;
}

FigureDataset start_dataset(const std::string& figure_id, const SweepSpec& spec, std::string x_label,
                            std::string y_label, bool log_x) {
    FigureDataset ds;
    ds.figure_id = figure_id;
    ds.x_label = std::move(x_label);
    ds.y_label = std::move(y_label);
    ds.log_x = log_x;
    ds.x = spec.grid.values;
    ds.metadata = make_metadata(figure_id, spec);
    return ds;
}

Series make_series(std::string label, std::size_t n, bool plotted = true) {
    Series s;
    s.label = std::move(label);
    s.y.assign(n, kNaN);
    s.plotted = plotted;
    return s;
}

std::string lambda_tag(double lambda) { return "[lambda=" + format_label_number(lambda) + "]"; }
std::string eps_tag(double eps) { return "[eps=" + format_label_number(eps) + "]"; }

void require_variable(const SweepSpec& spec, SweepVariable v) {
    spec.validate();
    if (spec.variable != v)
        throw ConfigError(std::string("sweep expects sweep_variable = ") + to_string(v));
}

SimConfig overlay_sim(const SweepSpec& spec, std::size_t series, std::size_t point) {
    SimConfig sim = spec.sim;
    sim.seed = point_seed(spec.sim.seed, series, point);
    return sim;
}

}  // namespace

Grid Grid::explicit_values(std::vector<double> values) {
    Grid g{std::move(values)};
    g.validate();
    return g;
}

Grid Grid::range(double min, double max, std::size_t count, Spacing spacing) {
    if (count == 0)
        throw ConfigError("grid count must be positive");
    if (!(max > min) && count > 1)
        throw ConfigError("grid max must exceed min");
    if (spacing == Spacing::log && !(min > 0.0))
        throw ConfigError("log-spaced grid needs min > 0");
    Grid g;
    g.values.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        g.values.push_back(spacing == Spacing::log ? min * std::pow(max / min, t) : min + (max - min) * t);
    }
    g.values.back() = count == 1 ? min : max;
    g.validate();
    return g;
}

void Grid::validate() const {
    if (values.empty())
        throw ConfigError("grid must not be empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw ConfigError("grid values must be finite");
        if (i && !(values[i] > values[i - 1]))
            throw ConfigError("grid must be strictly increasing");
    }
}

void SweepSpec::validate() const {
    grid.validate();
    fixed_params.validate();
    search.validate();
    if (epsilons.empty())
        throw ConfigError("sweep needs at least one epsilon");
    for (double e : epsilons)
        QosConstraint{e}.validate();
    if (variable != SweepVariable::lambda && lambdas.empty())
        throw ConfigError("beta and m sweeps need at least one lambda series");
    for (double l : lambdas)
        if (!(l >= 0.0) || !std::isfinite(l))
            throw ConfigError("series lambdas must be finite and >= 0");
    if (m_cap && *m_cap < 0)
        throw ConfigError("m_cap must be >= 0");
    if (fixed_m < 0)
        throw ConfigError("fixed_m must be >= 0");
    if (mc_stride == 0)
        throw ConfigError("mc_stride must be positive");
}

const Series* FigureDataset::find(const std::string& label) const {
    for (const Series& s : series)
        if (s.label == label)
            return &s;
    return nullptr;
}

std::optional<int> smallest_feasible_cap(double p_out, double epsilon, int m_hi) {
    if (p_out == 0.0)
        return 0;
    if (!(p_out < 1.0))
        return std::nullopt;
    const double log_p = std::log(p_out);
    auto feasible = [&](int m) { return std::exp((m + 1.0) * log_p) <= epsilon; };
    const double guess = std::ceil(std::log(epsilon) / log_p) - 1.0;
    if (guess > m_hi + 1.0)
        return std::nullopt;
    int m = std::max(0, static_cast<int>(guess));
    while (m > 0 && feasible(m - 1))
        --m;
    while (m <= m_hi && !feasible(m))
        ++m;
    if (m > m_hi)
        return std::nullopt;
    return m;
}

SweepSpec default_spec(const std::string& figure_id) {
    SweepSpec spec;
    spec.fixed_params = ChannelParams{4.0, 1.0, 0.0, LogBase::natural};
    spec.sim.n_messages = 20000;
    spec.sim.seed = 1;
    if (figure_id == "fig2") {
        spec.variable = SweepVariable::beta;
        spec.grid = Grid::range(0.1, 30.0, 200, Spacing::log);
        spec.lambdas = {0.05, 0.1, 0.15, 0.2};
        spec.epsilons = {0.02};
        spec.mc_stride = 20;
    } else if (figure_id == "fig3") {
        spec.variable = SweepVariable::m;
        spec.grid = Grid::range(1.0, 30.0, 30, Spacing::linear);
        spec.lambdas = {0.02, 0.05, 0.1, 0.2};
        spec.epsilons = {0.02};
        spec.mc_stride = 3;
    } else if (figure_id == "fig4" || figure_id == "fig5" || figure_id == "fig6") {
        spec.variable = SweepVariable::lambda;
        spec.grid = Grid::range(0.01, 0.3, 50, Spacing::log);
        spec.epsilons = {0.1, 0.01, 0.001};
        spec.mc_stride = 7;
        if (figure_id == "fig5")
            spec.m_cap = 5;
    } else {
        throw ConfigError("unknown figure id '" + figure_id + "' (expected fig2..fig6)");
    }
    return spec;
}

FigureDataset sweep_beta(const SweepSpec& spec) {
    require_variable(spec, SweepVariable::beta);
    FigureDataset ds = start_dataset("fig2", spec, "beta", "T", true);
    const double eps = spec.epsilons.front();
    const std::size_t n = ds.x.size();
    const int m_hi = spec.m_cap.value_or(spec.search.m_max);

    for (std::size_t li = 0; li < spec.lambdas.size(); ++li) {
        ChannelParams params = spec.fixed_params;
        params.lambda = spec.lambdas[li];
        const std::string tag = lambda_tag(params.lambda);
        Series t = make_series("T" + tag, n);
        Series approx = make_series("T_approx" + tag, n);
        Series cap = make_series("m" + tag, n, false);
        Series feasible = make_series("feasible" + tag, n, false);
        Series mc = make_series("T_mc" + tag, n);
        mc.se.assign(n, kNaN);

        for (std::size_t i = 0; i < n; ++i) {
            const double beta = ds.x[i];
            const double p = outage_probability(params, beta);
            std::optional<int> m;
            if (spec.cap_policy == CapPolicy::fixed)
                m = spec.fixed_m;
            else
                m = smallest_feasible_cap(p, eps, m_hi);
            if (!m) {
                feasible.y[i] = 0.0;
                continue;
            }
            const LinkPolicy policy{beta, *m};
            const bool ok = drop_rate(params, policy) <= eps;
            feasible.y[i] = ok ? 1.0 : 0.0;
            cap.y[i] = *m;
            t.y[i] = throughput(params, policy);
            approx.y[i] = spectral_efficiency(params, beta) * (1.0 - eps) / mean_attempts_approx(eps, *m);
            if (mc_point(spec, i)) {
                const ProtocolReport r = simulate_protocol(params, policy, overlay_sim(spec, li, i));
                mc.y[i] = r.throughput.mean;
                mc.se[i] = r.throughput.std_error;
            }
        }
        ds.series.push_back(std::move(t));
        if (spec.approximate_attempts)
            ds.series.push_back(std::move(approx));
        if (spec.mc_overlay)
            ds.series.push_back(std::move(mc));
        ds.series.push_back(std::move(cap));
        ds.series.push_back(std::move(feasible));
    }
    return ds;
}

FigureDataset sweep_m(const SweepSpec& spec) {
    require_variable(spec, SweepVariable::m);
    for (double a : spec.grid.values)
        if (a < 1.0 || a != std::floor(a))
            throw ConfigError("m sweep grid holds attempt counts 1 + m: positive integers");
    for (double l : spec.lambdas)
        if (!(l > 0.0))
            throw ConfigError("m sweep needs lambda > 0 for every series");
    FigureDataset ds = start_dataset("fig3", spec, "attempts (1+m)", "T", false);
    const QosConstraint qos{spec.epsilons.front()};
    const std::size_t n = ds.x.size();

    for (std::size_t li = 0; li < spec.lambdas.size(); ++li) {
        ChannelParams params = spec.fixed_params;
        params.lambda = spec.lambdas[li];
        const std::string tag = lambda_tag(params.lambda);
        Series t = make_series("T" + tag, n);
        Series beta = make_series("beta" + tag, n, false);
        Series mc = make_series("T_mc" + tag, n);
        mc.se.assign(n, kNaN);
        for (std::size_t i = 0; i < n; ++i) {
            const int m = static_cast<int>(ds.x[i]) - 1;
            beta.y[i] = beta_star(params, qos, m);
            t.y[i] = constrained_throughput(params, qos, m);
            if (mc_point(spec, i)) {
                const ProtocolReport r =
                    simulate_protocol(params, LinkPolicy{beta.y[i], m}, overlay_sim(spec, li, i));
                mc.y[i] = r.throughput.mean;
                mc.se[i] = r.throughput.std_error;
            }
        }
        ds.series.push_back(std::move(t));
        if (spec.mc_overlay)
            ds.series.push_back(std::move(mc));
        ds.series.push_back(std::move(beta));
    }
    return ds;
}

FigureDataset sweep_lambda_optimal(const SweepSpec& spec) {
    require_variable(spec, SweepVariable::lambda);
    if (!(spec.grid.values.front() > 0.0))
        throw ConfigError("lambda sweep needs lambda > 0");
    FigureDataset ds = start_dataset(spec.m_cap ? "fig5" : "fig4", spec, "lambda", "T*", true);
    const std::size_t n = ds.x.size();

    Series un = make_series("T_un", n);
    std::vector<Series> con, caps, mcs;
    for (double eps : spec.epsilons) {
        con.push_back(make_series("T" + eps_tag(eps), n));
        caps.push_back(make_series("m" + eps_tag(eps), n, false));
        Series mc = make_series("T_mc" + eps_tag(eps), n);
        mc.se.assign(n, kNaN);
        mcs.push_back(std::move(mc));
    }
    for (std::size_t i = 0; i < n; ++i) {
        ChannelParams params = spec.fixed_params;
        params.lambda = ds.x[i];
        un.y[i] = optimum_unconstrained(params, spec.search).throughput_star;
        for (std::size_t e = 0; e < spec.epsilons.size(); ++e) {
            const OptimumReport r = m_star(params, QosConstraint{spec.epsilons[e]}, spec.search, spec.m_cap);
            con[e].y[i] = r.throughput_star;
            caps[e].y[i] = *r.m_star;
            if (mc_point(spec, i)) {
                const ProtocolReport p =
                    simulate_protocol(params, LinkPolicy{r.beta_star, *r.m_star}, overlay_sim(spec, e, i));
                mcs[e].y[i] = p.throughput.mean;
                mcs[e].se[i] = p.throughput.std_error;
            }
        }
    }
    ds.series.push_back(std::move(un));
    for (std::size_t e = 0; e < spec.epsilons.size(); ++e) {
        ds.series.push_back(std::move(con[e]));
        if (spec.mc_overlay)
            ds.series.push_back(std::move(mcs[e]));
    }
    for (Series& s : caps)
        ds.series.push_back(std::move(s));
    return ds;
}

FigureDataset sweep_lambda_mstar(const SweepSpec& spec) {
    require_variable(spec, SweepVariable::lambda);
    if (!(spec.grid.values.front() > 0.0))
        throw ConfigError("lambda sweep needs lambda > 0");
    FigureDataset ds = start_dataset("fig6", spec, "lambda", "m*", true);
    for (double eps : spec.epsilons) {
        Series s = make_series("m" + eps_tag(eps), ds.x.size());
        for (std::size_t i = 0; i < ds.x.size(); ++i) {
            ChannelParams params = spec.fixed_params;
            params.lambda = ds.x[i];
            s.y[i] = *m_star(params, QosConstraint{eps}, spec.search, spec.m_cap).m_star;
        }
        ds.series.push_back(std::move(s));
    }
    return ds;
}

FigureDataset run_figure(const std::string& figure_id, const SweepSpec& spec) {
    if (figure_id == "fig2")
        return sweep_beta(spec);
    if (figure_id == "fig3")
        return sweep_m(spec);
    if (figure_id == "fig4" || figure_id == "fig5") {
        if ((figure_id == "fig5") != spec.m_cap.has_value())
            throw ConfigError(figure_id + (spec.m_cap ? " is the uncapped sweep; drop m_cap" : " needs m_cap"));
        return sweep_lambda_optimal(spec);
    }
    if (figure_id == "fig6")
        return sweep_lambda_mstar(spec);
    throw ConfigError("unknown figure id '" + figure_id + "' (expected fig2..fig6)");
}

std::pair<std::string, SweepSpec> spec_from_metadata(const std::vector<std::pair<std::string, std::string>>& metadata) {
    std::map<std::string, std::string> md(metadata.begin(), metadata.end());
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = md.find(key);
        if (it == md.end())
            throw ConfigError("metadata lacks key '" + key + "'");
        return it->second;
    };
    auto integer = [&](const std::string& key) { return std::stoll(get(key)); };

    SweepSpec spec;
    const std::string& var = get("sweep_variable");
    if (var == "beta")
        spec.variable = SweepVariable::beta;
    else if (var == "m")
        spec.variable = SweepVariable::m;
    else if (var == "lambda")
        spec.variable = SweepVariable::lambda;
    else
        throw ConfigError("bad sweep_variable '" + var + "'");
    spec.grid.values = split_numbers(get("grid"), "grid");
    spec.fixed_params.alpha = parse_number(get("alpha"), "alpha");
    spec.fixed_params.r0 = parse_number(get("r0"), "r0");
    spec.fixed_params.lambda = parse_number(get("lambda"), "lambda");
    spec.fixed_params.log_base = get("log_base") == "2" ? LogBase::two : LogBase::natural;
    spec.lambdas = split_numbers(get("lambdas"), "lambdas");
    spec.epsilons = split_numbers(get("epsilons"), "epsilons");
    if (get("m_cap") != "none")
        spec.m_cap = static_cast<int>(integer("m_cap"));
    spec.cap_policy = get("cap_policy") == "fixed" ? CapPolicy::fixed : CapPolicy::smallest_feasible;
    spec.fixed_m = static_cast<int>(integer("fixed_m"));
    spec.approximate_attempts = get("approximate_attempts") == "1";
    spec.search.m_max = static_cast<int>(integer("search.m_max"));
    spec.search.bracket_hi_init = parse_number(get("search.bracket_hi_init"), "search.bracket_hi_init");
    spec.search.root_tol = parse_number(get("search.root_tol"), "search.root_tol");
    spec.search.max_bracket_expansions = static_cast<int>(integer("search.max_bracket_expansions"));
    spec.mc_overlay = get("mc_overlay") == "1";
    spec.sim.window_radius_factor = parse_number(get("sim.window_radius_factor"), "sim.window_radius_factor");
    spec.sim.n_messages = static_cast<std::uint64_t>(integer("sim.n_messages"));
    spec.sim.seed = std::stoull(get("sim.seed"));
    spec.sim.power_ratio = parse_number(get("sim.power_ratio"), "sim.power_ratio");
    spec.mc_stride = static_cast<std::size_t>(integer("mc_stride"));
    return {get("figure_id"), spec};
}

}  // namespace ppto
