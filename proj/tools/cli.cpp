#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <thread>

#include "ppto/analytic.hpp"
#include "ppto/errors.hpp"
#include "ppto/experiments.hpp"
#include "ppto/figure_io.hpp"
#include "ppto/format.hpp"
#include "ppto/montecarlo.hpp"
#include "ppto/optimize.hpp"

namespace ppto::cli {

namespace {

// Everything the subcommands read; CLI11 fills it from flags, the config file and the environment.
struct CliConfig {
    ChannelParams channel;
    std::string log_base = "e";
    double epsilon = 0.0;
    double beta = 0.0;
    int m = 0;
    int m_cap = -1;
    bool unconstrained = false;
    SearchConfig search;
    SimConfig sim;
    std::string output_dir = "figures";
    std::string figure;
    std::string csv_path;
    bool mc_overlay = false;
    bool approximate = false;
    int verbosity = 0;
};

class Record {
  public:
    explicit Record(std::ostream& out) : out_(out) {}

    Record& num(const char* key, double v) {
        out_ << key << '=' << format_number(v) << '\n';
        return *this;
    }
    Record& integer(const char* key, long long v) {
        out_ << key << '=' << v << '\n';
        return *this;
    }
    Record& text(const char* key, const std::string& v) {
        out_ << key << '=' << v << '\n';
        return *this;
    }

  private:
    std::ostream& out_;
};

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec)
            throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file)
        throw IoError("cannot open " + path.string() + " for writing");
    file << content;
    file.flush();
    if (!file)
        throw IoError("write failed for " + path.string());
}

int cmd_eval(const CliConfig& cfg, const CLI::App& app, std::ostream& out) {
    if (app.count("--beta") == 0)
        throw ConfigError("eval requires --beta");
    const ChannelParams& p = cfg.channel;
    const LinkPolicy policy{cfg.beta, cfg.m};
    p.validate();
    policy.validate();
    const double p_out = outage_probability(p, policy.beta);
    Record rec(out);
    rec.num("alpha", p.alpha).num("r0", p.r0).num("lambda", p.lambda).num("beta", policy.beta);
    rec.integer("m", policy.m).text("log_base", to_string(p.log_base));
    rec.num("k", geometry_constant(p));
    rec.num("p_out", p_out);
    rec.num("mean_attempts", mean_attempts(p_out, policy.m));
    rec.num("throughput", throughput(p, policy));
    const double drop = drop_rate(p, policy);
    rec.num("drop_rate", drop);
    if (app.count("--epsilon") > 0) {
        QosConstraint{cfg.epsilon}.validate();
        rec.num("epsilon", cfg.epsilon);
        rec.integer("feasible", drop <= cfg.epsilon ? 1 : 0);
    }
    return kOk;
}

void print_report(Record& rec, const OptimumReport& r) {
    rec.num("beta_star", r.beta_star);
    if (r.m_star) {
        rec.integer("m_star", *r.m_star);
        rec.integer("attempts_star", *r.m_star + 1);
    }
    rec.num("throughput_star", r.throughput_star);
    rec.num("p_out", r.p_out_at_opt);
    rec.num("mean_attempts", r.mean_attempts_at_opt);
    rec.num("drop_rate", r.drop_rate);
    rec.integer("interference_free", r.interference_free ? 1 : 0);
}

int cmd_optimize(const CliConfig& cfg, const CLI::App& app, std::ostream& out, std::ostream& err) {
    const ChannelParams& p = cfg.channel;
    p.validate();
    Record rec(out);
    if (cfg.unconstrained) {
        const OptimumReport r = optimum_unconstrained(p, cfg.search);
        rec.text("mode", "unconstrained").num("lambda", p.lambda).text("log_base", to_string(p.log_base));
        print_report(rec, r);
        return kOk;
    }
    if (app.count("--epsilon") == 0)
        throw ConfigError("optimize requires --epsilon (or --unconstrained)");
    const QosConstraint qos{cfg.epsilon};
    qos.validate();
    std::optional<int> cap;
    if (app.count("--m-cap") > 0) {
        if (cfg.m_cap < 0)
            throw ConfigError("--m-cap must be >= 0");
        cap = cfg.m_cap;
    }
    const OptimumReport r = m_star(p, qos, cfg.search, cap);
    rec.text("mode", "constrained").num("lambda", p.lambda).num("epsilon", qos.epsilon);
    rec.text("log_base", to_string(p.log_base));
    rec.text("m_cap", cap ? std::to_string(*cap) : "none");
    print_report(rec, r);
    rec.integer("constraint_satisfied", r.drop_rate <= qos.epsilon * (1.0 + 1e-9) ? 1 : 0);
    rec.integer("ceiling_binding", r.ceiling_binding ? 1 : 0);
    if (r.ceiling_binding)
        err << "warning: m* sits on the search ceiling m_max=" << cfg.search.m_max << "; raise --m-max\n";
    return kOk;
}

int cmd_simulate(const CliConfig& cfg, const CLI::App& app, std::ostream& out) {
    if (app.count("--seed") == 0)
        throw ConfigError("simulate requires --seed (no implicit randomness)");
    if (app.count("--beta") == 0)
        throw ConfigError("simulate requires --beta");
    const ChannelParams& p = cfg.channel;
    const LinkPolicy policy{cfg.beta, cfg.m};
    policy.validate();
    cfg.sim.validate(p);

    const McEstimate outage = estimate_outage(p, policy.beta, cfg.sim);
    const ProtocolReport proto = simulate_protocol(p, policy, cfg.sim);
    const double p_out = outage_probability(p, policy.beta);

    struct Row {
        const char* name;
        McEstimate est;
        double analytic;
    };
    const Row rows[] = {
        {"p_out", outage, p_out},
        {"throughput", proto.throughput, throughput(p, policy)},
        {"drop_rate", proto.drop_rate, drop_rate(p, policy)},
        {"mean_attempts", proto.mean_attempts, mean_attempts(p_out, policy.m)},
    };

    Record rec(out);
    rec.num("alpha", p.alpha).num("r0", p.r0).num("lambda", p.lambda).num("beta", policy.beta);
    rec.integer("m", policy.m).text("log_base", to_string(p.log_base));
    rec.integer("seed", static_cast<long long>(cfg.sim.seed));
    rec.integer("n", static_cast<long long>(cfg.sim.n_messages));
    rec.num("window_factor", cfg.sim.window_radius_factor).num("power_ratio", cfg.sim.power_ratio);
    std::string csv = "quantity,estimate,std_error,n,analytic\r\n";
    for (const Row& r : rows) {
        const std::string name = r.name;
        out << name << "_mc=" << format_number(r.est.mean) << '\n';
        out << name << "_se=" << format_number(r.est.std_error) << '\n';
        out << name << "_analytic=" << format_number(r.analytic) << '\n';
        csv += name + ',' + format_number(r.est.mean) + ',' + format_number(r.est.std_error) + ',' +
               std::to_string(r.est.n) + ',' + format_number(r.analytic) + "\r\n";
    }
    if (!cfg.csv_path.empty()) {
        write_text_file(cfg.csv_path, csv);
        rec.text("csv", cfg.csv_path);
    }
    return kOk;
}

void print_headlines(std::ostream& out, const CliConfig& cfg) {
    out << "# headline optima (alpha=" << format_label_number(cfg.channel.alpha)
        << ", r0=" << format_label_number(cfg.channel.r0) << ", log base " << to_string(cfg.channel.log_base)
        << ")\n";
    out << "lambda,epsilon,beta_star,m_star,T_star,T_un,beta_un,p_out_un\r\n";
    for (double lambda : {0.05, 0.1, 0.2}) {
        ChannelParams p = cfg.channel;
        p.lambda = lambda;
        const OptimumReport un = optimum_unconstrained(p, cfg.search);
        for (double eps : {0.02, 0.01}) {
            const OptimumReport con = m_star(p, QosConstraint{eps}, cfg.search);
            out << format_label_number(lambda) << ',' << format_label_number(eps) << ','
                << format_number(con.beta_star) << ',' << *con.m_star << ',' << format_number(con.throughput_star)
                << ',' << format_number(un.throughput_star) << ',' << format_number(un.beta_star) << ','
                << format_number(un.p_out_at_opt) << "\r\n";
        }
    }
}

int cmd_reproduce(const CliConfig& cfg, const CLI::App& app, std::ostream& out, std::ostream& err) {
    if (cfg.mc_overlay && app.count("--seed") == 0)
        throw ConfigError("reproduce --mc-overlay requires --seed");
    cfg.channel.validate();
    std::vector<std::string> figures = {"fig2", "fig3", "fig4", "fig5", "fig6"};
    if (!cfg.figure.empty())
        figures = {cfg.figure};

    for (const std::string& id : figures) {
        SweepSpec spec = default_spec(id);
        spec.fixed_params.alpha = cfg.channel.alpha;
        spec.fixed_params.r0 = cfg.channel.r0;
        spec.fixed_params.log_base = cfg.channel.log_base;
        spec.search = cfg.search;
        spec.approximate_attempts = cfg.approximate;
        spec.mc_overlay = cfg.mc_overlay && id != "fig6";
        if (app.count("--n") > 0)
            spec.sim.n_messages = cfg.sim.n_messages;
        if (app.count("--seed") > 0)
            spec.sim.seed = cfg.sim.seed;
        spec.sim.window_radius_factor = cfg.sim.window_radius_factor;
        spec.sim.power_ratio = cfg.sim.power_ratio;
        spec.sim.streams = cfg.sim.streams;
        if (cfg.verbosity > 0)
            err << "running " << id << '\n';
        const FigureDataset ds = run_figure(id, spec);
        const WrittenFigure files = write_figure(ds, cfg.output_dir);
        out << id << ".csv=" << files.csv_path.string() << '\n';
        out << id << ".svg=" << files.svg_path.string() << '\n';
    }
    print_headlines(out, cfg);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CliConfig cfg;
    CLI::App app{"Throughput of a retransmitting link under Poisson-field interference", "ppto"};
    app.set_config("--config", "", "flat key=value configuration file (flags override it)");
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--alpha", cfg.channel.alpha, "path-loss exponent (> 2)")->capture_default_str();
    app.add_option("--r0", cfg.channel.r0, "reference link distance")->capture_default_str();
    app.add_option("--lambda", cfg.channel.lambda, "interferer density")->capture_default_str();
    app.add_option("--log-base", cfg.log_base, "throughput log base")
        ->check(CLI::IsMember({"2", "e"}))
        ->capture_default_str();
    app.add_option("--epsilon", cfg.epsilon, "maximum drop rate after all attempts, in (0, 1)");
    app.add_option("--beta", cfg.beta, "SIR threshold (> 0)");
    app.add_option("--m", cfg.m, "retransmission cap (1 + m attempts)")->capture_default_str();
    app.add_option("--m-cap", cfg.m_cap, "upper limit on m for the optimizer");
    app.add_flag("--unconstrained", cfg.unconstrained, "solve the unconstrained problem");
    app.add_option("--m-max", cfg.search.m_max, "integer search ceiling")->capture_default_str();
    app.add_option("--bracket-hi", cfg.search.bracket_hi_init, "initial root bracket")->capture_default_str();
    app.add_option("--root-tol", cfg.search.root_tol, "relative root tolerance")->capture_default_str();
    app.add_option("--max-expansions", cfg.search.max_bracket_expansions, "bracket expansions")
        ->capture_default_str();
    app.add_option("--n", cfg.sim.n_messages, "messages per Monte Carlo estimate")->capture_default_str();
    app.add_option("--seed", cfg.sim.seed, "RNG seed");
    app.add_option("--window-factor", cfg.sim.window_radius_factor, "simulation disk radius / r0")
        ->capture_default_str();
    app.add_option("--power-ratio", cfg.sim.power_ratio, "interferer / reference transmit power")
        ->capture_default_str();
    cfg.sim.streams = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--streams", cfg.sim.streams, "worker threads for sampling")->capture_default_str();
    app.add_option("--output-dir", cfg.output_dir, "figure output directory")
        ->envname("PPTO_OUTPUT_DIR")
        ->capture_default_str();
    app.add_option("--figure", cfg.figure, "reproduce a single figure")
        ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "fig6"}));
    app.add_flag("--mc-overlay", cfg.mc_overlay, "add Monte Carlo points with error bars");
    app.add_flag("--approx", cfg.approximate, "also emit the approximate attempt-count chain");
    app.add_option("--csv", cfg.csv_path, "simulate: write the estimates as CSV");
    app.add_flag("-v,--verbose", cfg.verbosity, "progress on stderr");

    CLI::App* eval = app.add_subcommand("eval", "evaluate the closed-form link model");
    CLI::App* optimize = app.add_subcommand("optimize", "optimal SIR threshold and retransmission cap");
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimates with standard errors");
    CLI::App* reproduce = app.add_subcommand("reproduce", "write figure datasets (CSV + SVG)");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const std::string& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    cfg.channel.log_base = cfg.log_base == "2" ? LogBase::two : LogBase::natural;
    try {
        if (eval->parsed())
            return cmd_eval(cfg, app, out);
        if (optimize->parsed())
            return cmd_optimize(cfg, app, out, err);
        if (simulate->parsed())
            return cmd_simulate(cfg, app, out);
        if (reproduce->parsed())
            return cmd_reproduce(cfg, app, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return kSolver;
    } catch (const IoError& e) {
        err << "I/O failure: " << e.what() << '\n';
        return kIo;
    }
    return kUsage;
}

}  // namespace ppto::cli
