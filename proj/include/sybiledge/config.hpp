#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sybiledge/experiment.hpp"
#include "sybiledge/synth.hpp"

namespace sybiledge {

/**
 * Flat `key = value` text. '#' starts a comment, blank lines are skipped,
 * a repeated key is an error. Getters mark keys as used so that
 * `reject_unused()` can report typos with their line number.
 */
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, std::string origin);
  static KeyValueConfig load(const std::string& path);

  /// Inserts or replaces a value (command-line overrides).
  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::optional<std::string> get(const std::string& key) const;
  std::string require(const std::string& key) const;  // throws Error{MissingKey}

  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::uint64_t> get_uint(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<double>> get_doubles(const std::string& key) const;
  std::optional<std::vector<std::uint64_t>> get_uints(const std::string& key) const;
  std::optional<std::vector<std::string>> get_strings(const std::string& key) const;

  /// Throws Error{ParseError} naming the first key nobody asked for.
  void reject_unused() const;

  const std::string& origin() const { return origin_; }
  /// Every entry in key order, as given.
  std::vector<std::pair<std::string, std::string>> items() const;

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;  // 0 for overrides
    mutable bool used = false;
  };
  const Entry* find(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const;

  std::string origin_;
  std::map<std::string, Entry> entries_;
};

/// Scenario keys (see README). `generator` is required unless `require_generator` is false.
SynthConfig synth_config_from(const KeyValueConfig& kv, bool require_generator = true);

enum class ExperimentKind { Grid, Noise, Prevalence };

std::string_view to_string(ExperimentKind k);

struct SweepConfig {
  ExperimentKind kind = ExperimentKind::Grid;
  SynthConfig base;
  GeneratorGrid grid;               // grid and prevalence
  std::vector<double> flip_probs;   // noise
  SweepOptions options;
};

SweepConfig sweep_config_from(const KeyValueConfig& kv);

/// Runs the sweep the config describes.
ExperimentReport run_experiment(const SweepConfig& config);

}  // namespace sybiledge
