#pragma once

// Scenario files, result tables and the figure/table reproduction targets
// behind the `fsa` command-line tool.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fsa/arrivals.hpp"
#include "fsa/dimensioning.hpp"
#include "fsa/mc_sim.hpp"

namespace fsa {

// ---------------------------------------------------------------------------
// Result tables

class Cell {
public:
    enum class Kind { number, integer, text, inf, infeasible };

    // Throws std::domain_error on NaN; +/-infinity becomes an "inf" cell.
    static Cell number(double value, int decimals = -1);
    static Cell integer(std::int64_t value);
    static Cell text(std::string value);
    static Cell inf() { return Cell(Kind::inf); }
    static Cell infeasible() { return Cell(Kind::infeasible); }

    Kind kind() const { return kind_; }
    double as_double() const;
    const std::string& as_text() const { return text_; }
    std::string render() const;

private:
    explicit Cell(Kind kind) : kind_(kind) {}

    Kind kind_;
    double number_ = 0.0;
    std::int64_t integer_ = 0;
    int decimals_ = -1;
    std::string text_;
};

class ResultTable {
public:
    explicit ResultTable(std::vector<std::string> columns);

    void add_row(std::vector<Cell> row);
    void add_metadata(std::string key, std::string value);

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }
    const std::vector<std::pair<std::string, std::string>>& metadata() const { return metadata_; }
    std::size_t column_index(const std::string& name) const;

    // '#'-prefixed metadata lines, a header row, then comma-separated rows.
    void write_csv(std::ostream& out) const;
    std::string to_csv() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
    std::vector<std::pair<std::string, std::string>> metadata_;
};

// ---------------------------------------------------------------------------
// Scenarios

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Computation { reliability, dimension, throughput, throughput_known, throughput_star, capacity, simulate };

enum class SimChannels { sweep, g_star };

struct SimSettings {
    std::uint64_t iterations = kDeskIterations;
    std::uint64_t seed = 1;
    SimChannels channels = SimChannels::sweep;
};

struct Scenario {
    std::string name = "scenario";
    std::vector<std::int64_t> channels;
    std::vector<std::int64_t> latencies;
    std::vector<std::int64_t> mpr_orders;
    double target_reliability = 0.99;
    std::int64_t g_max = kDefaultMaxChannels;
    std::int64_t min_superslots = 1;
    std::vector<ArrivalModel> arrivals;
    std::vector<double> epsilon_max{0.0};
    std::vector<Computation> computations;
    SimSettings simulation;
    std::string source_hash;  // hash of the file text, when loaded from a file

    void validate() const;
};

// Throws ScenarioError naming the offending field.
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

struct RunOutcome {
    ResultTable table;
    // Every feasibility-bearing result came out infeasible.
    bool all_infeasible = false;
};

// Long-format results: computation, arrival, g, L, K, epsilon_max, metric, value.
RunOutcome run_scenario(const Scenario& scenario, unsigned workers = 0);

// ---------------------------------------------------------------------------
// Reproduction targets

struct ReproduceOptions {
    bool full = false;                        // 10^6 simulation iterations instead of 10^5
    std::optional<std::uint64_t> iterations;  // explicit override
    std::uint64_t seed = 1;
    std::int64_t min_superslots = 2;
    unsigned workers = 0;

    std::uint64_t simulation_iterations() const;
};

const std::vector<std::string>& reproduce_targets();
ResultTable reproduce(const std::string& target, const ReproduceOptions& options = {});

// Seed of grid point `index` derived from a master seed.
std::uint64_t point_seed(std::uint64_t master_seed, std::uint64_t index);

}  // namespace fsa
