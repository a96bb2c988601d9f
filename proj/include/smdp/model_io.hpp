#pragma once

#include "smdp/bellman.hpp"
#include "smdp/exponential.hpp"
#include "smdp/model.hpp"
#include "smdp/simulate.hpp"
#include "smdp/solver_infinite.hpp"
#include "smdp/utility.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace smdp {

/// Raised on malformed model/policy documents; the message carries the
/// JSON path (and parse position for syntax errors).
class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ModelFile {
    SmdpModel model;
    std::optional<Utility> utility;
};

ModelFile parse_model_json(const std::string& text, const std::string& origin = "<string>");
ModelFile load_model_file(const std::string& path);

/// Canonical serialization (fixed key order, full precision); the model
/// hash is FNV-1a over this string, so equal models hash equally however
/// they were produced.
std::string model_to_json(const SmdpModel& model, const std::optional<Utility>& utility);
std::uint64_t model_hash(const SmdpModel& model, const std::optional<Utility>& utility);

Utility parse_utility_json(const std::string& text);
/// CLI shorthand: "linear", "log1p", "exp:G", "power:P[:ETA]".
Utility parse_utility_spec(const std::string& spec);

/// Header block stamped on every output artifact.
struct OutputMeta {
    std::uint64_t model_hash = 0;
    int grid_w = 0, grid_l = 0;
    double w_min = 0;
    int quad_m = 0;
    double tol = 0;
    std::uint64_t seed = 0;
};

void write_value_csv(const std::string& path, const ValueTable& table,
                     const std::vector<std::string>& states, const OutputMeta& meta);
void write_htable_csv(const std::string& path, const HTable& h,
                      const std::vector<std::string>& states, const OutputMeta& meta);
void write_convergence_csv(const std::string& path, const std::vector<IterationRecord>& history,
                           const OutputMeta& meta);

/// Policy files hold the grid, the per-node action indices, and the meta
/// block; `kind` is "stationary" (one table) or "markov" (one table per
/// jump, decision order).
void write_policy_json(const std::string& path, const std::vector<PolicyTable>& tables,
                       bool stationary, const OutputMeta& meta);

struct PolicyFile {
    std::vector<PolicyTable> tables;
    bool stationary = false;
    std::uint64_t model_hash = 0;
};

PolicyFile read_policy_json(const std::string& path, const SmdpModel& model);

void write_simulation_csv(const std::string& path, const std::vector<double>& u_values,
                          const std::vector<double>& u_bracket_hi, const OutputMeta& meta);

} // namespace smdp
