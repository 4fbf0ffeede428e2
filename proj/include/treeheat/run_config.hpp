#pragma once

#include <map>
#include <string>
#include <vector>

#include "treeheat/bounds.hpp"
#include "treeheat/schrodinger.hpp"

namespace treeheat {

/// Parse error with the offending line and column.
class config_error : public std::runtime_error {
public:
  config_error(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ", column " +
                           std::to_string(col) + ")"),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int column() const { return col_; }

private:
  int line_, col_;
};

/// Line-oriented `key = value` sections; `#` starts a comment; lists are
/// whitespace-separated numbers.
struct RunConfig {
  std::map<std::string, std::map<std::string, std::string>> sections;
  std::string raw;  // original text, digested into output headers

  bool has(const std::string& sec, const std::string& key) const;
  std::string get(const std::string& sec, const std::string& key) const;
  std::string get_or(const std::string& sec, const std::string& key,
                     const std::string& fallback) const;
  double number(const std::string& sec, const std::string& key) const;
  double number_or(const std::string& sec, const std::string& key, double fallback) const;
  std::vector<double> list(const std::string& sec, const std::string& key) const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

TreeSpec tree_from_config(const RunConfig& cfg);
/// Inverse of tree_from_config: a [tree] section reproducing the spec.
std::string tree_to_config(const TreeSpec& spec);
SolverConfig solver_from_config(const RunConfig& cfg, double refine = 1.0);
PotentialSpec potential_from_config(const RunConfig& cfg, const std::string& base_dir);
SweepSpec sweep_from_config(const RunConfig& cfg, const TreeSpec& spec);

/// Read a per-edge potential table: CSV rows edge_id,offset,value with
/// edge_id "o" for the root edge or dotted branch choices like "1.2".
PotentialSpec load_per_edge_potential(const TreeSpec& spec, const std::string& path);

/// Execute one CLI command; returns the process exit status. Output files
/// land in out_dir with a config-digest header comment.
int run_command(const std::string& command, const std::string& config_path,
                const std::string& out_dir, double refine = 1.0);

}  // namespace treeheat
