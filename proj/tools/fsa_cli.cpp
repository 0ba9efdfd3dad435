// fsa: reliability, dimensioning, throughput, capacity and simulation of
// framed slotted ALOHA with K-multipacket reception.
//
// Exit codes: 0 ok, 1 usage or input error, 2 every result infeasible.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "fsa/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

struct Common {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> iterations;
    std::string out;
    bool full = false;
    std::int64_t min_superslots = -1;  // -1: command default
};

struct PointOptions {
    std::vector<std::int64_t> g;
    std::vector<std::int64_t> latency{5};
    std::vector<std::int64_t> k{1};
    double target = 0.99;
    std::int64_t g_max = fsa::kDefaultMaxChannels;
    std::vector<double> epsilon{0.0};
    std::optional<std::int64_t> n;
    std::optional<double> lambda;
    std::optional<std::int64_t> n_tot;
    double alpha = 3.0;
    double beta = 4.0;
    double activation_s = 10.0;
    double interval_ms = 10.0;
    bool at_g_star = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Master seed for simulations");
    cmd->add_option("--iterations", c.iterations, "Simulation iterations")->check(CLI::PositiveNumber);
    cmd->add_option("--out", c.out, "Write the CSV here instead of stdout");
    cmd->add_flag("--full", c.full, "Use 10^6 simulation iterations");
    cmd->add_option("--min-superslots", c.min_superslots, "Smallest admissible superslot count per frame")
        ->check(CLI::PositiveNumber);
}

void add_point(CLI::App* cmd, PointOptions& p, bool needs_g) {
    auto* g = cmd->add_option("-g,--channels", p.g, "Channel counts g");
    if (needs_g) g->required();
    cmd->add_option("-L,--latency", p.latency, "Latency budgets L in slots")->capture_default_str();
    cmd->add_option("-K,--mpr", p.k, "MPR orders K")->capture_default_str();
    cmd->add_option("-R,--target", p.target, "Target reliability")->capture_default_str();
    cmd->add_option("--g-max", p.g_max, "Largest channel count considered")->capture_default_str();
    cmd->add_option("--epsilon", p.epsilon, "Estimation-error bounds epsilon_max")->capture_default_str();
    auto* n = cmd->add_option("--n", p.n, "Known batch size");
    auto* lambda = cmd->add_option("--lambda", p.lambda, "Poisson mean batch size");
    auto* n_tot = cmd->add_option("--n-tot", p.n_tot, "Beta population");
    n->excludes(lambda)->excludes(n_tot);
    lambda->excludes(n_tot);
    cmd->add_option("--alpha", p.alpha, "Beta shape alpha")->capture_default_str();
    cmd->add_option("--beta", p.beta, "Beta shape beta")->capture_default_str();
    cmd->add_option("--activation-s", p.activation_s, "Beta activation time in seconds")->capture_default_str();
    cmd->add_option("--interval-ms", p.interval_ms, "Beta gating interval in ms")->capture_default_str();
}

fsa::ArrivalModel arrival_of(const PointOptions& p) {
    if (p.n) return fsa::KnownModel{*p.n};
    if (p.lambda) return fsa::PoissonModel{*p.lambda};
    if (p.n_tot) {
        fsa::BetaBatchModel m;
        m.n_tot = *p.n_tot;
        m.alpha = p.alpha;
        m.beta = p.beta;
        m.activation_time_s = p.activation_s;
        m.interval_s = p.interval_ms / 1000.0;
        m.validate();
        (void)m.interval_count();
        return m;
    }
    throw fsa::ScenarioError("one of --n, --lambda or --n-tot is required");
}

fsa::Scenario scenario_of(const std::string& name, fsa::Computation comp, const PointOptions& p, const Common& c) {
    fsa::Scenario s;
    s.name = name;
    s.channels = p.g;
    s.latencies = p.latency;
    s.mpr_orders = p.k;
    s.target_reliability = p.target;
    s.g_max = p.g_max;
    s.min_superslots = c.min_superslots > 0 ? c.min_superslots : 1;
    s.epsilon_max = p.epsilon;
    s.computations = {comp};
    if (comp != fsa::Computation::capacity) {
        const fsa::ArrivalModel a = arrival_of(p);
        std::visit([](const auto& m) { m.validate(); }, a);
        s.arrivals = {a};
    }
    if (c.seed) s.simulation.seed = *c.seed;
    s.simulation.iterations = c.iterations ? *c.iterations : (c.full ? fsa::kPaperIterations : fsa::kDeskIterations);
    s.simulation.channels = p.at_g_star ? fsa::SimChannels::g_star : fsa::SimChannels::sweep;
    return s;
}

void emit(const fsa::ResultTable& table, const std::string& out) {
    if (out.empty()) {
        table.write_csv(std::cout);
        return;
    }
    std::ofstream f(out);
    if (!f) throw std::runtime_error(fmt::format("cannot write {}", out));
    table.write_csv(f);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Framed slotted ALOHA with K-multipacket reception: analysis and simulation"};
    app.set_version_flag("--version", std::string("fsa ") + FSA_VERSION);
    app.require_subcommand(1);

    Common common;
    PointOptions point;

    struct Sub {
        CLI::App* cmd;
        fsa::Computation comp;
    };
    std::vector<Sub> subs;
    auto point_cmd = [&](const char* name, const char* help, fsa::Computation comp, bool needs_g) {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_point(cmd, point, needs_g);
        add_common(cmd, common);
        subs.push_back({cmd, comp});
        return cmd;
    };
    point_cmd("reliability", "Reliability for a batch-size model", fsa::Computation::reliability, true);
    point_cmd("dimension", "Smallest g meeting the target reliability", fsa::Computation::dimension, false);
    point_cmd("throughput", "Throughput with and without batch-size knowledge, and the gain",
              fsa::Computation::throughput, false);
    point_cmd("capacity", "Largest load served by g channels", fsa::Computation::capacity, true);
    CLI::App* simulate = point_cmd("simulate", "Monte Carlo estimate of reliability and throughput",
                                   fsa::Computation::simulate, false);
    simulate->add_flag("--at-g-star", point.at_g_star, "Simulate at the dimensioned g* instead of --channels");

    std::string target;
    CLI::App* repro = app.add_subcommand("reproduce", "Emit the CSV behind a figure or table");
    repro->add_option("target", target, "fig2..fig7 or table1")
        ->required()
        ->check(CLI::IsMember(fsa::reproduce_targets()));
    add_common(repro, common);

    std::string scenario_path;
    CLI::App* run = app.add_subcommand("run", "Run a JSON scenario file");
    run->add_option("scenario", scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
    add_common(run, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*repro) {
            fsa::ReproduceOptions opt;
            opt.full = common.full;
            opt.iterations = common.iterations;
            if (common.seed) opt.seed = *common.seed;
            if (common.min_superslots > 0) opt.min_superslots = common.min_superslots;
            emit(fsa::reproduce(target, opt), common.out);
            return kExitOk;
        }

        fsa::Scenario scenario;
        if (*run) {
            scenario = fsa::load_scenario(scenario_path);
            if (common.seed) scenario.simulation.seed = *common.seed;
            if (common.iterations) {
                scenario.simulation.iterations = *common.iterations;
            } else if (common.full) {
                scenario.simulation.iterations = fsa::kPaperIterations;
            }
            if (common.min_superslots > 0) scenario.min_superslots = common.min_superslots;
        } else {
            for (const Sub& s : subs) {
                if (*s.cmd) scenario = scenario_of(s.cmd->get_name(), s.comp, point, common);
            }
        }
        scenario.validate();
        const fsa::RunOutcome outcome = fsa::run_scenario(scenario);
        emit(outcome.table, common.out);
        return outcome.all_infeasible ? kExitInfeasible : kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}
