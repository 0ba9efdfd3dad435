#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include <fmt/core.h>
#include <json.hpp>

#include "fsa/experiment.hpp"
#include "fsa/throughput.hpp"

namespace fsa {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ScenarioError(fmt::format("scenario field '{}': {}", field, what));
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) fail(where.empty() ? key : where + "." + key, "unknown field");
    }
}

const json* child(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& node, const std::string& field) {
    if (!node.is_number()) fail(field, "expected a number");
    return node.get<double>();
}

std::int64_t get_integer(const json& node, const std::string& field) {
    if (node.is_number_integer()) return node.get<std::int64_t>();
    if (node.is_number_float()) {
        const double v = node.get<double>();
        if (std::floor(v) == v && std::abs(v) < 9e15) return static_cast<std::int64_t>(v);
    }
    fail(field, "expected an integer");
}

std::uint64_t get_unsigned(const json& node, const std::string& field) {
    const std::int64_t v = get_integer(node, field);
    if (v < 0) fail(field, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

// A scalar or a non-empty array of integers.
std::vector<std::int64_t> get_integer_list(const json& node, const std::string& field) {
    std::vector<std::int64_t> out;
    if (node.is_array()) {
        if (node.empty()) fail(field, "expected a non-empty array");
        for (std::size_t i = 0; i < node.size(); ++i) out.push_back(get_integer(node[i], fmt::format("{}[{}]", field, i)));
    } else {
        out.push_back(get_integer(node, field));
    }
    return out;
}

std::vector<double> get_number_list(const json& node, const std::string& field) {
    std::vector<double> out;
    if (node.is_array()) {
        if (node.empty()) fail(field, "expected a non-empty array");
        for (std::size_t i = 0; i < node.size(); ++i) out.push_back(get_number(node[i], fmt::format("{}[{}]", field, i)));
    } else {
        out.push_back(get_number(node, field));
    }
    return out;
}

const std::map<std::string, Computation>& computation_names() {
    static const std::map<std::string, Computation> names{
        {"reliability", Computation::reliability},
        {"dimension", Computation::dimension},
        {"throughput", Computation::throughput},
        {"throughput_known", Computation::throughput_known},
        {"throughput_star", Computation::throughput_star},
        {"capacity", Computation::capacity},
        {"simulate", Computation::simulate},
    };
    return names;
}

std::string computation_name(Computation c) {
    for (const auto& [name, value] : computation_names()) {
        if (value == c) return name;
    }
    return "?";
}

ArrivalModel parse_arrival(const json& node, const std::string& where) {
    if (!node.is_object()) fail(where, "expected an object");
    const json* type = child(node, "type");
    if (!type || !type->is_string()) fail(where + ".type", "expected \"known\", \"poisson\" or \"beta\"");
    const std::string kind = type->get<std::string>();
    auto required = [&](const char* key) -> const json& {
        const json* v = child(node, key);
        if (!v) fail(where + "." + key, "missing");
        return *v;
    };

    if (kind == "known") {
        reject_unknown(node, where, {"type", "n"});
        KnownModel m{get_integer(required("n"), where + ".n")};
        if (m.n < 0) fail(where + ".n", "must be >= 0");
        return m;
    }
    if (kind == "poisson") {
        reject_unknown(node, where, {"type", "lambda", "tail_tolerance"});
        PoissonModel m;
        m.lambda = get_number(required("lambda"), where + ".lambda");
        if (!(m.lambda > 0.0)) fail(where + ".lambda", "must be > 0");
        if (const json* t = child(node, "tail_tolerance")) m.tail_tolerance = get_number(*t, where + ".tail_tolerance");
        if (!(m.tail_tolerance > 0.0 && m.tail_tolerance < 1.0)) fail(where + ".tail_tolerance", "must lie in (0,1)");
        return m;
    }
    if (kind == "beta") {
        reject_unknown(node, where, {"type", "n_tot", "alpha", "beta", "activation_time_s", "interval_ms", "tail_tolerance"});
        BetaBatchModel m;
        m.n_tot = get_integer(required("n_tot"), where + ".n_tot");
        if (m.n_tot < 1) fail(where + ".n_tot", "must be >= 1");
        if (const json* v = child(node, "alpha")) m.alpha = get_number(*v, where + ".alpha");
        if (const json* v = child(node, "beta")) m.beta = get_number(*v, where + ".beta");
        if (const json* v = child(node, "activation_time_s")) m.activation_time_s = get_number(*v, where + ".activation_time_s");
        if (const json* v = child(node, "interval_ms")) m.interval_s = get_number(*v, where + ".interval_ms") / 1000.0;
        if (const json* v = child(node, "tail_tolerance")) m.tail_tolerance = get_number(*v, where + ".tail_tolerance");
        if (!(m.alpha > 0.0)) fail(where + ".alpha", "must be > 0");
        if (!(m.beta > 0.0)) fail(where + ".beta", "must be > 0");
        if (!(m.activation_time_s > 0.0)) fail(where + ".activation_time_s", "must be > 0");
        if (!(m.interval_s > 0.0)) fail(where + ".interval_ms", "must be > 0");
        if (!(m.tail_tolerance > 0.0 && m.tail_tolerance < 1.0)) fail(where + ".tail_tolerance", "must lie in (0,1)");
        try {
            (void)m.interval_count();
        } catch (const std::exception& e) {
            fail(where + ".interval_ms", e.what());
        }
        return m;
    }
    fail(where + ".type", fmt::format("unknown arrival type \"{}\"", kind));
}

Scenario parse_scenario(const json& doc) {
    if (!doc.is_object()) fail("<root>", "expected a JSON object");
    reject_unknown(doc, "", {"name", "protocol", "requirement", "arrivals", "epsilon_max", "computations", "simulation"});
    Scenario s;

    if (const json* v = child(doc, "name")) {
        if (!v->is_string()) fail("name", "expected a string");
        s.name = v->get<std::string>();
    }

    const json* protocol = child(doc, "protocol");
    if (!protocol || !protocol->is_object()) fail("protocol", "expected an object with L, K and optionally g");
    reject_unknown(*protocol, "protocol", {"g", "L", "K"});
    if (const json* v = child(*protocol, "g")) s.channels = get_integer_list(*v, "protocol.g");
    if (const json* v = child(*protocol, "L")) {
        s.latencies = get_integer_list(*v, "protocol.L");
    } else {
        fail("protocol.L", "missing");
    }
    if (const json* v = child(*protocol, "K")) {
        s.mpr_orders = get_integer_list(*v, "protocol.K");
    } else {
        fail("protocol.K", "missing");
    }

    if (const json* req = child(doc, "requirement")) {
        if (!req->is_object()) fail("requirement", "expected an object");
        reject_unknown(*req, "requirement", {"target_reliability", "g_max", "min_superslots"});
        if (const json* v = child(*req, "target_reliability")) s.target_reliability = get_number(*v, "requirement.target_reliability");
        if (const json* v = child(*req, "g_max")) s.g_max = get_integer(*v, "requirement.g_max");
        if (const json* v = child(*req, "min_superslots")) s.min_superslots = get_integer(*v, "requirement.min_superslots");
    }

    if (const json* arr = child(doc, "arrivals")) {
        if (arr->is_array()) {
            if (arr->empty()) fail("arrivals", "expected a non-empty array");
            for (std::size_t i = 0; i < arr->size(); ++i) s.arrivals.push_back(parse_arrival((*arr)[i], fmt::format("arrivals[{}]", i)));
        } else {
            s.arrivals.push_back(parse_arrival(*arr, "arrivals"));
        }
    }

    if (const json* v = child(doc, "epsilon_max")) s.epsilon_max = get_number_list(*v, "epsilon_max");

    const json* comps = child(doc, "computations");
    if (!comps || !comps->is_array() || comps->empty()) fail("computations", "expected a non-empty array of names");
    for (std::size_t i = 0; i < comps->size(); ++i) {
        const std::string field = fmt::format("computations[{}]", i);
        if (!(*comps)[i].is_string()) fail(field, "expected a string");
        const auto name = (*comps)[i].get<std::string>();
        auto it = computation_names().find(name);
        if (it == computation_names().end()) fail(field, fmt::format("unknown computation \"{}\"", name));
        s.computations.push_back(it->second);
    }

    if (const json* sim = child(doc, "simulation")) {
        if (!sim->is_object()) fail("simulation", "expected an object");
        reject_unknown(*sim, "simulation", {"iterations", "seed", "channels"});
        if (const json* v = child(*sim, "iterations")) s.simulation.iterations = get_unsigned(*v, "simulation.iterations");
        if (const json* v = child(*sim, "seed")) s.simulation.seed = get_unsigned(*v, "simulation.seed");
        if (const json* v = child(*sim, "channels")) {
            const std::string mode = v->is_string() ? v->get<std::string>() : "";
            if (mode == "sweep") {
                s.simulation.channels = SimChannels::sweep;
            } else if (mode == "g_star") {
                s.simulation.channels = SimChannels::g_star;
            } else {
                fail("simulation.channels", "expected \"sweep\" or \"g_star\"");
            }
        }
    }

    s.validate();
    return s;
}

bool needs(const Scenario& s, Computation c) {
    for (Computation x : s.computations) {
        if (x == c) return true;
    }
    return false;
}

// Long-format row builder shared by all computations.
struct RowWriter {
    ResultTable& table;
    bool feasibility_seen = false;
    bool any_feasible = false;

    void add(Computation comp, const Cell& arrival, const Cell& g, std::int64_t latency, std::int64_t k,
             const Cell& epsilon, const std::string& metric, const Cell& value) {
        table.add_row({Cell::text(computation_name(comp)), arrival, g, Cell::integer(latency), Cell::integer(k), epsilon,
                       Cell::text(metric), value});
    }
    void feasibility(bool feasible) {
        feasibility_seen = true;
        any_feasible = any_feasible || feasible;
    }
};

Cell na() { return Cell::text("na"); }

Cell value_or_infeasible(bool feasible, double value) {
    return feasible ? Cell::number(value) : Cell::infeasible();
}

}  // namespace

void Scenario::validate() const {
    if (computations.empty()) fail("computations", "expected at least one computation");
    for (std::size_t i = 0; i < latencies.size(); ++i) {
        if (latencies[i] < 1) fail(fmt::format("protocol.L[{}]", i), "must be >= 1");
    }
    for (std::size_t i = 0; i < mpr_orders.size(); ++i) {
        if (mpr_orders[i] < 1) fail(fmt::format("protocol.K[{}]", i), "must be >= 1");
    }
    for (std::size_t i = 0; i < channels.size(); ++i) {
        if (channels[i] < 1) fail(fmt::format("protocol.g[{}]", i), "must be >= 1");
    }
    if (latencies.empty()) fail("protocol.L", "missing");
    if (mpr_orders.empty()) fail("protocol.K", "missing");
    if (!(target_reliability > 0.0 && target_reliability < 1.0)) {
        fail("requirement.target_reliability", "must lie strictly between 0 and 1");
    }
    if (g_max < 1) fail("requirement.g_max", "must be >= 1");
    if (min_superslots < 1) fail("requirement.min_superslots", "must be >= 1");
    for (std::size_t i = 0; i < epsilon_max.size(); ++i) {
        if (!(epsilon_max[i] >= 0.0) || !std::isfinite(epsilon_max[i])) fail(fmt::format("epsilon_max[{}]", i), "must be >= 0");
    }
    if (epsilon_max.empty()) fail("epsilon_max", "expected at least one value");
    if (simulation.iterations < 1) fail("simulation.iterations", "must be >= 1");

    const bool sweep_g = needs(*this, Computation::reliability) || needs(*this, Computation::capacity) ||
                         (needs(*this, Computation::simulate) && simulation.channels == SimChannels::sweep);
    if (sweep_g && channels.empty()) fail("protocol.g", "required by the requested computations");
    bool uses_arrivals = false;
    for (Computation c : computations) uses_arrivals = uses_arrivals || c != Computation::capacity;
    if (uses_arrivals && arrivals.empty()) fail("arrivals", "required by the requested computations");
}

Scenario parse_scenario_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(fmt::format("scenario is not valid JSON: {}", e.what()));
    }
    Scenario s = parse_scenario(doc);
    s.source_hash = fmt::format("{:016x}", std::hash<std::string>{}(text));
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError(fmt::format("cannot open scenario file {}", path.string()));
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario_text(text.str());
}

std::uint64_t point_seed(std::uint64_t master_seed, std::uint64_t index) {
    // splitmix64 finalizer over (seed, index)
    std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RunOutcome run_scenario(const Scenario& scenario, unsigned workers) {
    scenario.validate();
    ResultTable table({"computation", "arrival", "g", "L", "K", "epsilon_max", "metric", "value"});
    table.add_metadata("tool", fmt::format("fsa {}", FSA_VERSION));
    table.add_metadata("scenario", scenario.name);
    if (!scenario.source_hash.empty()) table.add_metadata("scenario_hash", scenario.source_hash);
    table.add_metadata("target_reliability", fmt::format("{}", scenario.target_reliability));
    table.add_metadata("g_max", fmt::format("{}", scenario.g_max));
    table.add_metadata("min_superslots", fmt::format("{}", scenario.min_superslots));
    if (needs(scenario, Computation::simulate)) {
        table.add_metadata("seed", fmt::format("{}", scenario.simulation.seed));
        table.add_metadata("iterations", fmt::format("{}", scenario.simulation.iterations));
    }

    std::vector<ArrivalPmf> pmfs;
    pmfs.reserve(scenario.arrivals.size());
    for (const ArrivalModel& a : scenario.arrivals) pmfs.push_back(arrival_pmf(a));

    auto requirement = [&](std::int64_t latency, std::int64_t k) {
        RequirementSpec req;
        req.target_reliability = scenario.target_reliability;
        req.latency = latency;
        req.mpr_order = k;
        req.g_max = scenario.g_max;
        req.min_superslots = scenario.min_superslots;
        return req;
    };

    RowWriter out{table};
    std::uint64_t sim_point = 0;

    for (Computation comp : scenario.computations) {
        if (comp == Computation::capacity) {
            for (std::int64_t g : scenario.channels)
                for (std::int64_t latency : scenario.latencies)
                    for (std::int64_t k : scenario.mpr_orders) {
                        const RequirementSpec req = requirement(latency, k);
                        const std::int64_t users = capacity_known_n(g, req);
                        out.feasibility(users > 0);
                        auto emit = [&](const std::string& metric, const Cell& v) {
                            out.add(comp, na(), Cell::integer(g), latency, k, na(), metric, v);
                        };
                        emit("max_users", users > 0 ? Cell::integer(users) : Cell::infeasible());
                        if (users == 0) {
                            emit("poisson_lambda", Cell::infeasible());
                            emit("beta_n_tot", Cell::infeasible());
                            continue;
                        }
                        try {
                            emit("poisson_lambda", Cell::number(capacity_poisson(g, req)));
                        } catch (const std::runtime_error&) {
                            emit("poisson_lambda", Cell::infeasible());
                        }
                        try {
                            emit("beta_n_tot", Cell::integer(capacity_beta(g, req)));
                        } catch (const std::runtime_error&) {
                            emit("beta_n_tot", Cell::infeasible());
                        }
                    }
            continue;
        }

        for (std::size_t a = 0; a < scenario.arrivals.size(); ++a) {
            const ArrivalModel& model = scenario.arrivals[a];
            const ArrivalPmf& pmf = pmfs[a];
            const Cell arrival = Cell::text(describe(model));
            const auto* known = std::get_if<KnownModel>(&model);

            for (std::int64_t latency : scenario.latencies)
                for (std::int64_t k : scenario.mpr_orders) {
                    const RequirementSpec req = requirement(latency, k);
                    switch (comp) {
                        case Computation::reliability:
                            for (std::int64_t g : scenario.channels) {
                                const ProtocolConfig cfg = req.protocol(g);
                                const bool framed = cfg.slots() / k >= 1;
                                out.add(comp, arrival, Cell::integer(g), latency, k, na(), "reliability",
                                        framed ? Cell::number(reliability_mixture(cfg, pmf).value()) : Cell::infeasible());
                                if (!known) {
                                    out.add(comp, arrival, Cell::integer(g), latency, k, na(), "reliability_active",
                                            framed ? Cell::number(reliability_mixture_active(cfg, pmf).value())
                                                   : Cell::infeasible());
                                }
                            }
                            break;

                        case Computation::dimension:
                            if (known && known->n >= 1) {
                                for (double eps : scenario.epsilon_max) {
                                    const DimensionResult d = overprovisioned_dimension(known->n, {eps}, req);
                                    out.feasibility(d.feasible);
                                    const Cell e = Cell::number(eps);
                                    out.add(comp, arrival, na(), latency, k, e, "g_min",
                                            d.feasible ? Cell::integer(d.g_min) : Cell::infeasible());
                                    out.add(comp, arrival, na(), latency, k, e, "achieved_reliability",
                                            Cell::number(d.achieved_reliability));
                                }
                            } else {
                                const DimensionResult d = dimension_mixture(pmf, req);
                                out.feasibility(d.feasible);
                                out.add(comp, arrival, na(), latency, k, na(), "g_min",
                                        d.feasible ? Cell::integer(d.g_min) : Cell::infeasible());
                                out.add(comp, arrival, na(), latency, k, na(), "achieved_reliability",
                                        Cell::number(d.achieved_reliability));
                            }
                            break;

                        case Computation::throughput:
                            for (double eps : scenario.epsilon_max) {
                                const KnownThroughput kt = throughput_known(pmf, req, {eps});
                                const MixtureThroughput mt = throughput_mixture(pmf, req);
                                const bool defined = kt.feasible || mt.feasible;
                                out.feasibility(defined);
                                const Cell e = Cell::number(eps);
                                auto emit = [&](const std::string& metric, const Cell& v) {
                                    out.add(comp, arrival, na(), latency, k, e, metric, v);
                                };
                                emit("t_known", value_or_infeasible(kt.feasible, kt.throughput));
                                emit("t_known_target", value_or_infeasible(kt.feasible, kt.throughput_target));
                                emit("t_known_infeasible_mass", Cell::number(kt.infeasible_mass));
                                emit("t_star", value_or_infeasible(mt.feasible, mt.throughput));
                                emit("t_star_target", value_or_infeasible(mt.feasible, mt.throughput_target));
                                emit("t_star_exact", value_or_infeasible(mt.feasible, mt.throughput_exact));
                                emit("g_star", mt.feasible ? Cell::integer(mt.dimension.g_min) : Cell::infeasible());
                                if (defined) {
                                    emit("gain", Cell::number(normalized_gain(kt.throughput, mt.throughput, mt.feasible)));
                                    emit("gain_renormalized", Cell::number(normalized_gain(
                                                                  kt.throughput_renormalized, mt.throughput, mt.feasible)));
                                } else {
                                    emit("gain", Cell::infeasible());
                                    emit("gain_renormalized", Cell::infeasible());
                                }
                            }
                            break;

                        case Computation::throughput_known:
                            for (double eps : scenario.epsilon_max) {
                                const KnownThroughput kt = throughput_known(pmf, req, {eps});
                                out.feasibility(kt.feasible);
                                const Cell e = Cell::number(eps);
                                out.add(comp, arrival, na(), latency, k, e, "t_known",
                                        value_or_infeasible(kt.feasible, kt.throughput));
                                out.add(comp, arrival, na(), latency, k, e, "t_known_infeasible_mass",
                                        Cell::number(kt.infeasible_mass));
                            }
                            break;

                        case Computation::throughput_star: {
                            const MixtureThroughput mt = throughput_mixture(pmf, req);
                            out.feasibility(mt.feasible);
                            auto emit = [&](const std::string& metric, const Cell& v) {
                                out.add(comp, arrival, na(), latency, k, na(), metric, v);
                            };
                            emit("t_star", value_or_infeasible(mt.feasible, mt.throughput));
                            emit("t_star_target", value_or_infeasible(mt.feasible, mt.throughput_target));
                            emit("t_star_exact", value_or_infeasible(mt.feasible, mt.throughput_exact));
                            emit("g_star", mt.feasible ? Cell::integer(mt.dimension.g_min) : Cell::infeasible());
                            break;
                        }

                        case Computation::simulate: {
                            std::vector<std::int64_t> gs = scenario.channels;
                            if (scenario.simulation.channels == SimChannels::g_star) {
                                const DimensionResult d = dimension_mixture(pmf, req);
                                out.feasibility(d.feasible);
                                if (!d.feasible) {
                                    out.add(comp, arrival, Cell::infeasible(), latency, k, na(), "sim_reliability",
                                            Cell::infeasible());
                                    ++sim_point;
                                    break;
                                }
                                gs = {d.g_min};
                            }
                            for (std::int64_t g : gs) {
                                const ProtocolConfig cfg = req.protocol(g);
                                const std::uint64_t seed = point_seed(scenario.simulation.seed, sim_point++);
                                const Cell gc = Cell::integer(g);
                                if (cfg.slots() / k < 1) {
                                    out.add(comp, arrival, gc, latency, k, na(), "sim_reliability", Cell::infeasible());
                                    continue;
                                }
                                SimConfig sc;
                                sc.iterations = scenario.simulation.iterations;
                                sc.master_seed = seed;
                                sc.protocol = cfg;
                                sc.arrivals = model;
                                sc.workers = workers;
                                const SimResult r = simulate_scenario(sc);
                                const double resources = static_cast<double>(cfg.slots());
                                auto emit = [&](const std::string& metric, const Cell& v) {
                                    out.add(comp, arrival, gc, latency, k, na(), metric, v);
                                };
                                emit("sim_reliability", Cell::number(r.empirical_reliability));
                                emit("sim_reliability_stderr", Cell::number(r.reliability_stderr));
                                emit("sim_throughput", Cell::number(r.empirical_throughput));
                                emit("sim_throughput_stderr", Cell::number(r.throughput_stderr));
                                emit("analytic_reliability_active", Cell::number(reliability_mixture_active(cfg, pmf).value()));
                                emit("analytic_throughput", Cell::number(expected_resolved(cfg, pmf) / resources));
                            }
                            break;
                        }

                        case Computation::capacity:
                            break;
                    }
                }
        }
    }

    RunOutcome outcome{std::move(table), out.feasibility_seen && !out.any_feasible};
    return outcome;
}

}  // namespace fsa
