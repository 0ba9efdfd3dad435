#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include <fmt/core.h>

#include "fsa/experiment.hpp"
#include "fsa/throughput.hpp"
#include "fsa/workers.hpp"

namespace fsa {

namespace {

constexpr std::int64_t kLatency = 5;

RequirementSpec requirement(double target, std::int64_t k, const ReproduceOptions& opt) {
    RequirementSpec req;
    req.target_reliability = target;
    req.latency = kLatency;
    req.mpr_order = k;
    req.g_max = kDefaultMaxChannels;
    req.min_superslots = opt.min_superslots;
    return req;
}

void stamp(ResultTable& t, const std::string& target, const ReproduceOptions& opt, bool simulated) {
    t.add_metadata("tool", fmt::format("fsa {}", FSA_VERSION));
    t.add_metadata("target", target);
    t.add_metadata("latency", fmt::format("{}", kLatency));
    t.add_metadata("g_max", fmt::format("{}", kDefaultMaxChannels));
    t.add_metadata("min_superslots", fmt::format("{}", opt.min_superslots));
    if (simulated) {
        t.add_metadata("seed", fmt::format("{}", opt.seed));
        t.add_metadata("iterations", fmt::format("{}", opt.simulation_iterations()));
    }
}

Cell load_of(const ArrivalModel& m) {
    if (const auto* p = std::get_if<PoissonModel>(&m)) return Cell::number(p->lambda);
    if (const auto* b = std::get_if<BetaBatchModel>(&m)) return Cell::integer(b->n_tot);
    return Cell::integer(std::get<KnownModel>(m).n);
}

Cell opt_number(bool ok, double v) { return ok ? Cell::number(v) : Cell::infeasible(); }

ResultTable fig2() {
    const std::vector<std::int64_t> ks{1, 2, 5, 10, 25, 50};
    std::vector<std::string> cols{"n"};
    for (std::int64_t k : ks) cols.push_back(fmt::format("K{}", k));
    ResultTable t(cols);
    for (std::int64_t n = 1; n <= 100; ++n) {
        std::vector<Cell> row{Cell::integer(n)};
        for (std::int64_t k : ks) row.push_back(Cell::number(reliability_known_n({10, kLatency, k}, n).value()));
        t.add_row(std::move(row));
    }
    t.add_metadata("tool", fmt::format("fsa {}", FSA_VERSION));
    t.add_metadata("target", "fig2");
    t.add_metadata("g", "10");
    t.add_metadata("latency", fmt::format("{}", kLatency));
    return t;
}

// Shared grid of the reliability and throughput figures: analytic values at
// g* and, where g* exists, a simulation at g*.
ResultTable star_with_simulation(const std::string& target, const ReproduceOptions& opt, bool throughput) {
    const std::vector<ArrivalModel> arrivals{PoissonModel{3.0},           PoissonModel{9.0},
                                             PoissonModel{15.0},          default_beta_model(3000),
                                             default_beta_model(9000),    default_beta_model(15000)};
    struct Point {
        std::size_t arrival;
        std::int64_t k;
        MixtureThroughput star;
        double r_star = 0.0;
        double r_active = 0.0;
        SimResult sim;
    };
    std::vector<ArrivalPmf> pmfs;
    for (const auto& a : arrivals) pmfs.push_back(arrival_pmf(a));

    std::vector<Point> points;
    for (std::size_t a = 0; a < arrivals.size(); ++a)
        for (std::int64_t k = 1; k <= 10; ++k) points.push_back({a, k, {}, 0.0, 0.0, {}});

    const std::uint64_t iterations = opt.simulation_iterations();
    parallel_for(points.size(), opt.workers == 0 ? worker_count() : opt.workers, [&](std::size_t i) {
        Point& p = points[i];
        const RequirementSpec req = requirement(0.99, p.k, opt);
        p.star = throughput_mixture(pmfs[p.arrival], req);
        if (!p.star.feasible) return;
        const ProtocolConfig cfg = req.protocol(p.star.dimension.g_min);
        p.r_star = p.star.dimension.achieved_reliability;
        p.r_active = reliability_mixture_active(cfg, pmfs[p.arrival]).value();
        SimConfig sc;
        sc.iterations = iterations;
        sc.master_seed = point_seed(opt.seed, i);
        sc.protocol = cfg;
        sc.arrivals = arrivals[p.arrival];
        sc.workers = 1;
        p.sim = simulate_scenario(sc);
    });

    std::vector<std::string> cols{"arrival", "load", "K", "g_star"};
    if (throughput) {
        for (const char* c : {"t_star", "t_star_target", "t_star_exact", "sim_throughput", "sim_throughput_stderr"})
            cols.emplace_back(c);
    } else {
        for (const char* c : {"r_star", "one_minus_r_star", "r_star_active", "sim_reliability", "sim_reliability_stderr"})
            cols.emplace_back(c);
    }
    ResultTable t(cols);
    for (const Point& p : points) {
        const bool ok = p.star.feasible;
        std::vector<Cell> row{Cell::text(describe(arrivals[p.arrival])), load_of(arrivals[p.arrival]),
                              Cell::integer(p.k), ok ? Cell::integer(p.star.dimension.g_min) : Cell::infeasible()};
        if (throughput) {
            row.push_back(opt_number(ok, p.star.throughput));
            row.push_back(opt_number(ok, p.star.throughput_target));
            row.push_back(opt_number(ok, p.star.throughput_exact));
            row.push_back(opt_number(ok, p.sim.empirical_throughput));
            row.push_back(opt_number(ok, p.sim.throughput_stderr));
        } else {
            row.push_back(opt_number(ok, p.r_star));
            row.push_back(opt_number(ok, 1.0 - p.r_star));
            row.push_back(opt_number(ok, p.r_active));
            row.push_back(opt_number(ok, p.sim.empirical_reliability));
            row.push_back(opt_number(ok, p.sim.reliability_stderr));
        }
        t.add_row(std::move(row));
    }
    stamp(t, target, opt, true);
    t.add_metadata("target_reliability", "0.99");
    return t;
}

ResultTable known_vs_star(const std::string& target, const ReproduceOptions& opt,
                          const std::vector<ArrivalModel>& arrivals) {
    ResultTable t({"target_reliability", "arrival", "load", "K", "epsilon_max", "t_known", "t_known_infeasible_mass",
                   "g_star", "t_star"});
    for (double r : {0.99, 0.99999})
        for (const ArrivalModel& a : arrivals) {
            const ArrivalPmf pmf = arrival_pmf(a);
            for (std::int64_t k = 1; k <= 10; ++k) {
                const RequirementSpec req = requirement(r, k, opt);
                const MixtureThroughput star = throughput_mixture(pmf, req);
                for (double eps : {0.0, 0.2, 0.4}) {
                    const KnownThroughput known = throughput_known(pmf, req, {eps});
                    t.add_row({Cell::number(r), Cell::text(describe(a)), load_of(a), Cell::integer(k),
                               Cell::number(eps), opt_number(known.feasible, known.throughput),
                               Cell::number(known.infeasible_mass),
                               star.feasible ? Cell::integer(star.dimension.g_min) : Cell::infeasible(),
                               opt_number(star.feasible, star.throughput)});
                }
            }
        }
    stamp(t, target, opt, false);
    return t;
}

ResultTable fig7(const ReproduceOptions& opt) {
    constexpr std::int64_t g = 40;
    ResultTable t({"target_reliability", "K", "max_users", "poisson_lambda", "beta_n_tot", "beta_per_interval"});
    const auto intervals = static_cast<double>(default_beta_model(1).interval_count());
    struct Point {
        double r;
        std::int64_t k;
        std::int64_t users = 0;
        double lambda = 0.0;
        std::int64_t n_tot = 0;
    };
    std::vector<Point> points;
    for (double r : {0.99, 0.99999})
        for (std::int64_t k = 1; k <= 10; ++k) points.push_back({r, k});
    parallel_for(points.size(), opt.workers == 0 ? worker_count() : opt.workers, [&](std::size_t i) {
        Point& p = points[i];
        const RequirementSpec req = requirement(p.r, p.k, opt);
        p.users = capacity_known_n(g, req);
        p.lambda = capacity_poisson(g, req);
        p.n_tot = capacity_beta(g, req);
    });
    for (const Point& p : points) {
        t.add_row({Cell::number(p.r), Cell::integer(p.k), Cell::integer(p.users), Cell::number(p.lambda),
                   Cell::integer(p.n_tot), Cell::number(static_cast<double>(p.n_tot) / intervals)});
    }
    stamp(t, "fig7", opt, false);
    t.add_metadata("g", fmt::format("{}", g));
    return t;
}

ResultTable table1(const ReproduceOptions& opt) {
    const std::vector<ArrivalModel> arrivals{PoissonModel{3.0}, PoissonModel{15.0}, default_beta_model(3000),
                                             default_beta_model(15000)};
    ResultTable t({"target_reliability", "arrival", "load", "K", "g_star", "t_known", "t_star", "infeasible_mass_known",
                   "gain", "gain_renormalized"});
    for (double r : {0.99, 0.99999})
        for (const ArrivalModel& a : arrivals) {
            const ArrivalPmf pmf = arrival_pmf(a);
            for (std::int64_t k : {1, 3, 5, 10}) {
                const ThroughputReport rep = throughput_report(pmf, requirement(r, k, opt), {0.0});
                const bool defined = rep.known_feasible || rep.star_feasible;
                t.add_row({Cell::number(r), Cell::text(describe(a)), load_of(a), Cell::integer(k),
                           rep.star_feasible ? Cell::integer(rep.g_star) : Cell::infeasible(),
                           opt_number(rep.known_feasible, rep.t_known), opt_number(rep.star_feasible, rep.t_star),
                           Cell::number(rep.infeasible_mass_known),
                           defined ? Cell::number(rep.gain, 4) : Cell::infeasible(),
                           defined ? Cell::number(rep.gain_renormalized, 4) : Cell::infeasible()});
            }
        }
    stamp(t, "table1", opt, false);
    return t;
}

}  // namespace

std::uint64_t ReproduceOptions::simulation_iterations() const {
    if (iterations) return *iterations;
    return full ? kPaperIterations : kDeskIterations;
}

const std::vector<std::string>& reproduce_targets() {
    static const std::vector<std::string> targets{"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "table1"};
    return targets;
}

ResultTable reproduce(const std::string& target, const ReproduceOptions& options) {
    if (options.min_superslots < 1) throw std::invalid_argument("min_superslots must be >= 1");
    if (target == "fig2") return fig2();
    if (target == "fig3") return star_with_simulation(target, options, false);
    if (target == "fig4") return star_with_simulation(target, options, true);
    if (target == "fig5") return known_vs_star(target, options, {PoissonModel{3.0}, PoissonModel{15.0}});
    if (target == "fig6") {
        return known_vs_star(target, options, {default_beta_model(3000), default_beta_model(15000)});
    }
    if (target == "fig7") return fig7(options);
    if (target == "table1") return table1(options);
    throw std::invalid_argument(fmt::format("unknown reproduce target \"{}\"", target));
}

}  // namespace fsa
