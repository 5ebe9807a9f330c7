#include "cfgrid/cli/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>
#include <sstream>

#include "cfgrid/analysis.hpp"
#include "cfgrid/case_io.hpp"
#include "cfgrid/cli/plot.hpp"
#include "cfgrid/error.hpp"
#include "cfgrid/powerflow.hpp"
#include "cfgrid/simulation.hpp"

namespace cfgrid::cli {

namespace {

using cfgrid::format_number;

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::IoError:
        case ErrorKind::EmptyData: return kIo;
        case ErrorKind::InvalidArgument:
        case ErrorKind::SchemaError:
        case ErrorKind::TopologyError:
        case ErrorKind::UnitError:
        case ErrorKind::DimensionMismatch:
        case ErrorKind::EventTargetMissing:
        case ErrorKind::ColumnNotFound: return kUsage;
        default: return kSolver;
    }
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message, int code) {
    nlohmann::json j{{"error", kind}, {"message", message}, {"exit_code", code}};
    err << j.dump() << '\n';
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto log = std::make_shared<spdlog::logger>("cfgrid", sink);
    log->set_pattern("[%l] %v");
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("CFGRID_LOG")) {
        const auto parsed = spdlog::level::from_str(env);
        // from_str maps unknown names to off; only accept "off" when asked for
        if (parsed != spdlog::level::off || std::string(env) == "off") level = parsed;
    }
    log->set_level(level);
    return log;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::IoError, "cannot write " + path);
    return f;
}

struct Globals {
    double tol = 1e-8;
    int max_iter = 50;
    double eps_sing = kDefaultEpsSing;

    PowerFlowOptions powerflow() const {
        PowerFlowOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        o.eps_sing = eps_sing;
        return o;
    }
    AnalysisOptions analysis() const {
        AnalysisOptions o;
        o.eps_sing = eps_sing;
        return o;
    }
};

// ---------------------------------------------------------------- writers

void write_bus_table(std::ostream& out, const NetworkCase& c, const PowerFlowSolution& pf) {
    std::vector<Complex> s(c.buses.size(), 0.0);
    for (std::size_t d = 0; d < c.devices.size(); ++d) s[c.devices[d].bus_idx] += pf.device_injection[d];
    out << "bus,kind,v_mag,v_ang,p_inj,q_inj\n";
    for (std::size_t b = 0; b < c.buses.size(); ++b) {
        out << c.buses[b].id << ',' << (c.is_ac(b) ? "AC" : "DC") << ',' << format_number(std::abs(pf.v[b])) << ','
            << format_number(std::arg(pf.v[b])) << ',' << format_number(s[b].real()) << ','
            << format_number(s[b].imag()) << '\n';
    }
}

void write_coefficients(std::ostream& out, const std::vector<CfDecomposition>& ds) {
    out << "bus,kind,counterpart,element,entry,coef_re,coef_im\n";
    auto row = [&](const std::string& bus, const char* kind, const std::string& cp, const std::string& el,
                   const std::string& entry, Complex v) {
        out << bus << ',' << kind << ',' << cp << ',' << el << ',' << entry << ',' << format_number(v.real()) << ','
            << format_number(v.imag()) << '\n';
    };
    for (const auto& d : ds) {
        for (const auto& [nb, v] : d.c_eta_by_neighbor()) row(d.bus, "c_eta", nb, "", "", v);
        row(d.bus, "c_xi", d.bus, "", "", d.c_xi);
        for (const auto& [el, v] : d.c_chi_branch) row(d.bus, "c_chi", "", el, "branch_flow", v);
        for (const auto& t : d.c_chi) row(d.bus, "c_chi", t.counterpart, t.element, to_string(t.entry), t.coefficient);
    }
}

class DecompositionWriter {
public:
    explicit DecompositionWriter(std::ostream& out) : out_(out) {
        out_ << "time,bus,kind,counterpart,element,entry,coef_re,coef_im,cf_re,cf_im\n";
    }

    void operator()(const CfDecomposition& d) {
        const std::string t = format_number(d.time);
        if (d.flagged) {
            out_ << t << ',' << d.bus << ",flagged," << d.flag_reason << ",,,,,,\n";
            return;
        }
        for (const auto& e : d.c_eta) row(t, d.bus, "c_eta", e.neighbor, e.element, "", e.coefficient, e.eta);
        for (const auto& c : d.c_chi)
            row(t, d.bus, "c_chi", c.counterpart, c.element, to_string(c.entry), c.coefficient, c.chi);
        row(t, d.bus, "c_xi", d.bus, "", "", d.c_xi, d.xi);
        row(t, d.bus, "eta_reconstructed", d.bus, "", "", Complex(1.0, 0.0), d.eta_reconstructed);
        row(t, d.bus, "eta_direct", d.bus, "", "", Complex(1.0, 0.0), d.eta_direct);
    }

private:
    void row(const std::string& t, const std::string& bus, const char* kind, const std::string& cp,
             const std::string& el, const std::string& entry, Complex coef, const ComplexFrequency& cf) {
        out_ << t << ',' << bus << ',' << kind << ',' << cp << ',' << el << ',' << entry << ','
             << format_number(coef.real()) << ',' << format_number(coef.imag()) << ',' << format_number(cf.rho)
             << ',' << format_number(cf.omega) << '\n';
    }

    std::ostream& out_;
};

// ---------------------------------------------------------------- commands

int cmd_powerflow(const Globals& g, const std::string& case_path, const std::string& out_path,
                  const std::string& coeffs_path, std::ostream& out, spdlog::logger& log) {
    const NetworkCase c = parse_case(case_path);
    const PowerFlowSolution pf = solve_powerflow(c, g.powerflow());
    log.info("power flow converged in {} iterations, max mismatch {:.3e}", pf.iterations, pf.max_mismatch);
    if (out_path.empty()) {
        write_bus_table(out, c, pf);
    } else {
        auto f = open_out(out_path);
        write_bus_table(f, c, pf);
    }
    if (!coeffs_path.empty()) {
        auto f = open_out(coeffs_path);
        write_coefficients(f, steady_state_coefficients(c, pf, g.analysis()));
    }
    return kOk;
}

int cmd_simulate(const Globals& g, const std::string& case_path, double tstop, double dt, const std::string& out_path,
                 std::ostream& out, spdlog::logger& log) {
    const NetworkCase c = parse_case(case_path);
    SimOptions opt;
    opt.powerflow = g.powerflow();
    const Trajectory tr = simulate(c, tstop, dt, opt);
    for (const auto& e : tr.events)
        log.info("event '{}' at t={} (sample {}), algebraic jump {:.3e}", e.target, format_number(e.t), e.sample,
                 e.discontinuity);
    if (out_path.empty()) {
        tr.write_csv(out);
    } else {
        auto f = open_out(out_path);
        tr.write_csv(f);
    }
    log.info("{} samples written", tr.rows());
    return kOk;
}

int cmd_analyze(const Globals& g, const std::string& case_path, const std::string& traj_path,
                const std::vector<std::string>& buses, std::size_t stride, const std::string& out_path,
                const std::string& report_path, std::ostream& out, spdlog::logger& log) {
    const NetworkCase c = parse_case(case_path);
    for (const auto& b : buses) c.bus_index(b);
    const Trajectory tr = Trajectory::read_csv(std::filesystem::path(traj_path));
    const AnalysisOptions opt = g.analysis();
    if (!out_path.empty()) {
        auto f = open_out(out_path);
        DecompositionWriter w(f);
        for_each_decomposition(tr, c, buses, stride, std::ref(w), opt);
    }
    const AuditReport rep = audit_trajectory(tr, c, opt);
    log.info("{} of {} bus-samples reconstructed within {}", rep.total_within_tol(), rep.total_checked(),
             format_number(opt.recon_tol));
    if (report_path.empty()) {
        out << rep.to_text();
    } else {
        auto f = open_out(report_path);
        f << rep.to_text();
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    auto log = make_logger(err);

    CLI::App app{"Complex-frequency analysis of AC/DC power systems", "cfgrid"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--tol", g.tol, "power-flow mismatch tolerance")->check(CLI::PositiveNumber);
    app.add_option("--max-iter", g.max_iter, "power-flow iteration limit")->check(CLI::PositiveNumber);
    app.add_option("--eps-sing", g.eps_sing, "singularity threshold for admittances and Y_hh")
        ->check(CLI::PositiveNumber);

    std::string case_path, out_path, coeffs_path, traj_path, report_path;
    double tstop = 0.0, dt = 1e-4;
    std::vector<std::string> buses;
    std::size_t stride = 1;
    PlotSpec plot;
    std::vector<std::string> where;

    auto* pf = app.add_subcommand("powerflow", "solve the power flow; optional steady-state CF coefficients");
    pf->add_option("case", case_path, "case file")->required();
    pf->add_option("--out", out_path, "bus table csv (stdout when omitted)");
    pf->add_option("--coeffs", coeffs_path, "coefficient csv");

    auto* sim = app.add_subcommand("simulate", "time-domain simulation");
    sim->add_option("case", case_path, "case file")->required();
    sim->add_option("--tstop", tstop, "end time in s")->required()->check(CLI::NonNegativeNumber);
    sim->add_option("--dt", dt, "time step in s")->required()->check(CLI::PositiveNumber);
    sim->add_option("--out", out_path, "trajectory csv (stdout when omitted)");

    auto* an = app.add_subcommand("analyze", "CF decomposition and audit of a trajectory");
    an->add_option("case", case_path, "case file")->required();
    an->add_option("--traj", traj_path, "trajectory csv")->required();
    an->add_option("--bus", buses, "bus ids to decompose (all when omitted)");
    an->add_option("--stride", stride, "write every n-th sample")->check(CLI::PositiveNumber);
    an->add_option("--out", out_path, "decomposition csv");
    an->add_option("--report", report_path, "audit report (stdout when omitted)");

    auto* pl = app.add_subcommand("plot", "svg line chart of csv columns");
    pl->add_option("csv", plot.input, "input csv")->required();
    pl->add_option("--columns", plot.columns, "y columns")->delimiter(',');
    pl->add_option("--x", plot.x, "x column");
    pl->add_option("--out", plot.output, "svg file")->required();
    pl->add_option("--title", plot.title);
    pl->add_option("--xlabel", plot.xlabel);
    pl->add_option("--ylabel", plot.ylabel);
    pl->add_option("--where", where, "column=value row filter (repeatable)");
    pl->add_option("--series-by", plot.series_by, "split series by the values of a column");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        report_error(err, "UsageError", e.what(), kUsage);
        return kUsage;
    }

    try {
        if (*pf) return cmd_powerflow(g, case_path, out_path, coeffs_path, out, *log);
        if (*sim) return cmd_simulate(g, case_path, tstop, dt, out_path, out, *log);
        if (*an) return cmd_analyze(g, case_path, traj_path, buses, stride, out_path, report_path, out, *log);
        if (*pl) {
            for (const auto& w : where) {
                const auto eq = w.find('=');
                if (eq == std::string::npos) {
                    report_error(err, "UsageError", "--where expects column=value, got '" + w + "'", kUsage);
                    return kUsage;
                }
                plot.where.emplace_back(w.substr(0, eq), w.substr(eq + 1));
            }
            render_plot(plot);
            return kOk;
        }
    } catch (const Error& e) {
        const int code = exit_code(e.kind());
        report_error(err, std::string(to_string(e.kind())), e.what(), code);
        return code;
    } catch (const std::exception& e) {
        report_error(err, "InternalError", e.what(), kSolver);
        return kSolver;
    }
    return kUsage;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace cfgrid::cli
