#include "sybiledge/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include "sybiledge/error.hpp"
#include "sybiledge/io.hpp"

namespace sybiledge {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> items;
  while (true) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (!item.empty()) items.emplace_back(item);
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  return items;
}

std::optional<std::uint64_t> to_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, std::string origin) {
  KeyValueConfig kv;
  kv.origin_ = std::move(origin);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string_view line(raw);
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = kv.origin_ + ":" + std::to_string(number);
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, where + ": expected key = value");
    }
    const auto key = std::string(trim(line.substr(0, eq)));
    if (key.empty()) throw Error(ErrorCode::ParseError, where + ": empty key");
    if (kv.entries_.count(key)) {
      throw Error(ErrorCode::ParseError, where + ": key '" + key + "' repeats line " +
                                             std::to_string(kv.entries_[key].line));
    }
    kv.entries_[key] = Entry{std::string(trim(line.substr(eq + 1))), number, false};
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open config '" + path + "'");
  return parse(in, path);
}

void KeyValueConfig::set(const std::string& key, std::string value) {
  entries_[key] = Entry{std::move(value), 0, false};
}

const KeyValueConfig::Entry* KeyValueConfig::find(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

void KeyValueConfig::fail(const std::string& key, const std::string& msg) const {
  const auto it = entries_.find(key);
  std::string where = origin_;
  if (it != entries_.end() && it->second.line > 0) where += ":" + std::to_string(it->second.line);
  throw Error(ErrorCode::ParseError, where + ": " + key + ": " + msg);
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto* e = find(key);
  if (!e) return std::nullopt;
  return e->value;
}

std::string KeyValueConfig::require(const std::string& key) const {
  const auto* e = find(key);
  if (!e) throw Error(ErrorCode::MissingKey, origin_ + ": missing required key '" + key + "'");
  return e->value;
}

std::optional<double> KeyValueConfig::get_double(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  try {
    return io::parse_double(*v);
  } catch (const Error&) {
    fail(key, "'" + *v + "' is not a number");
  }
}

std::optional<std::uint64_t> KeyValueConfig::get_uint(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  const auto u = to_uint(*v);
  if (!u) fail(key, "'" + *v + "' is not a non-negative integer");
  return u;
}

std::optional<bool> KeyValueConfig::get_bool(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  fail(key, "'" + *v + "' is not a boolean");
}

std::optional<std::vector<double>> KeyValueConfig::get_doubles(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  std::vector<double> out;
  for (const auto& item : split_list(*v)) {
    try {
      out.push_back(io::parse_double(item));
    } catch (const Error&) {
      fail(key, "'" + item + "' is not a number");
    }
  }
  if (out.empty()) fail(key, "empty list");
  return out;
}

std::optional<std::vector<std::uint64_t>> KeyValueConfig::get_uints(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(*v)) {
    const auto u = to_uint(item);
    if (!u) fail(key, "'" + item + "' is not a non-negative integer");
    out.push_back(*u);
  }
  if (out.empty()) fail(key, "empty list");
  return out;
}

std::optional<std::vector<std::string>> KeyValueConfig::get_strings(const std::string& key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  auto out = split_list(*v);
  if (out.empty()) fail(key, "empty list");
  return out;
}

void KeyValueConfig::reject_unused() const {
  for (const auto& [key, e] : entries_) {
    if (!e.used) fail(key, "unknown key");
  }
}

std::vector<std::pair<std::string, std::string>> KeyValueConfig::items() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, e] : entries_) out.emplace_back(key, e.value);
  return out;
}

SynthConfig synth_config_from(const KeyValueConfig& kv, bool require_generator) {
  SynthConfig c;
  // Wraps parse helpers so failures carry the key.
  auto with_key = [&](const std::string& key, auto&& fn) {
    const auto v = kv.get(key);
    if (!v) return;
    try {
      fn(*v);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, kv.origin() + ": " + key + ": " + e.detail());
    }
  };

  if (require_generator) {
    const auto g = kv.require("generator");
    with_key("generator", [&](const std::string&) { c.generator = parse_generator(g); });
  } else {
    with_key("generator", [&](const std::string& v) { c.generator = parse_generator(v); });
  }
  if (auto v = kv.get_uint("n")) c.n = *v;
  if (auto v = kv.get_double("fraction_fake")) c.fraction_fake = *v;
  if (auto v = kv.get_double("fraction_known")) c.fraction_known = *v;
  if (auto v = kv.get_bool("stratified_split")) c.stratified_split = *v;
  if (auto v = kv.get_double("mean_degree")) c.mean_degree = *v;
  if (auto v = kv.get_double("er_edge_prob")) c.er_edge_prob = *v;
  if (auto v = kv.get_double("degree_exponent")) c.degree_exponent = *v;
  if (auto v = kv.get_uint("degree_cap")) c.degree_cap = static_cast<std::uint32_t>(*v);
  if (auto v = kv.get_bool("degree_rescale")) c.degree_rescale = *v;
  if (auto v = kv.get_doubles("degree_histogram")) c.degree_histogram = *v;
  if (auto v = kv.get_doubles("sbm_block")) {
    if (v->size() != 4) {
      throw Error(ErrorCode::ParseError,
                  kv.origin() + ": sbm_block needs 4 values (real->real, real->fake, fake->real, fake->fake)");
    }
    c.sbm_block = BlockMatrix{{{(*v)[0], (*v)[1]}, {(*v)[2], (*v)[3]}}};
  }
  if (auto v = kv.get_double("sbm_real_ratio")) c.sbm_real_ratio = *v;
  if (auto v = kv.get_double("sbm_fake_ratio")) c.sbm_fake_ratio = *v;
  with_key("pa_mode", [&](const std::string& v) { c.pa_mode = parse_attraction_mode(v); });
  if (auto v = kv.get_double("pa_shape_real")) c.pa_shape_real = *v;
  if (auto v = kv.get_double("pa_shape_fake")) c.pa_shape_fake = *v;
  with_key("profile_real_accepts_real",
           [&](const std::string& v) { c.profiles.real_accepts_real = RateDistribution::parse(v); });
  with_key("profile_real_accepts_fake",
           [&](const std::string& v) { c.profiles.real_accepts_fake = RateDistribution::parse(v); });
  with_key("profile_fake_accepts_real",
           [&](const std::string& v) { c.profiles.fake_accepts_real = RateDistribution::parse(v); });
  with_key("profile_fake_accepts_fake",
           [&](const std::string& v) { c.profiles.fake_accepts_fake = RateDistribution::parse(v); });
  if (auto v = kv.get_double("profile_real_indifferent")) c.profiles.real_indifferent_fraction = *v;
  if (auto v = kv.get_uint("seed")) c.seed = *v;
  return c;
}

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Grid: return "grid";
    case ExperimentKind::Noise: return "noise";
    case ExperimentKind::Prevalence: return "prevalence";
  }
  return "grid";
}

SweepConfig sweep_config_from(const KeyValueConfig& kv) {
  SweepConfig s;
  const auto kind = kv.require("experiment");
  if (kind == "grid") {
    s.kind = ExperimentKind::Grid;
  } else if (kind == "noise") {
    s.kind = ExperimentKind::Noise;
  } else if (kind == "prevalence") {
    s.kind = ExperimentKind::Prevalence;
  } else {
    throw Error(ErrorCode::ParseError, kv.origin() + ": experiment must be grid, noise or prevalence");
  }

  s.base = synth_config_from(kv, s.kind != ExperimentKind::Grid);

  auto parse_each = [&](const std::string& key, const std::vector<std::string>& items, auto&& fn) {
    for (const auto& item : items) {
      try {
        fn(item);
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, kv.origin() + ": " + key + ": " + e.detail());
      }
    }
  };

  if (s.kind == ExperimentKind::Grid) {
    const auto gens = kv.get_strings("generators");
    if (!gens) throw Error(ErrorCode::MissingKey, kv.origin() + ": missing required key 'generators'");
    parse_each("generators", *gens, [&](const std::string& g) { s.grid.generators.push_back(parse_generator(g)); });
    s.grid.mean_degrees = kv.get_doubles("mean_degrees").value_or(std::vector<double>{s.base.mean_degree});
    s.grid.fake_fractions =
        kv.get_doubles("fake_fractions").value_or(std::vector<double>{s.base.fraction_fake});
  } else if (s.kind == ExperimentKind::Prevalence) {
    s.grid.generators = {s.base.generator};
    s.grid.mean_degrees = {s.base.mean_degree};
    s.grid.fake_fractions = kv.get_doubles("fake_fractions").value_or(std::vector<double>{0.05, 0.10});
  } else {
    s.flip_probs = kv.get_doubles("flip_probs").value_or(std::vector<double>{0.0, 0.1, 0.2, 0.3});
  }

  auto& o = s.options;
  if (auto seeds = kv.get_uints("seeds")) o.seeds = *seeds;
  if (auto methods = kv.get_strings("methods")) {
    o.methods.clear();
    parse_each("methods", *methods, [&](const std::string& m) { o.methods.push_back(parse_method(m)); });
  }
  if (auto v = kv.get_double("sigma")) o.method_options.sigma = *v;
  if (auto v = kv.get_double("phi")) o.method_options.phi = *v;
  if (auto v = kv.get_double("clamp_eps")) o.method_options.clamp_eps = *v;
  if (auto v = kv.get_double("prior")) o.method_options.prior = *v;
  if (auto v = kv.get_uint("rank_iterations")) o.method_options.rank_iterations = *v;
  if (auto v = kv.get_double("scar_weight")) o.method_options.scar.weight = *v;
  if (auto b = kv.get("buckets")) {
    parse_each("buckets", {*b}, [&](const std::string& text) {
      o.buckets = text == "fine" ? BucketScheme::fine()
                  : text == "coarse" ? BucketScheme::coarse()
                                     : BucketScheme::parse(text);
    });
  }
  if (auto v = kv.get_bool("include_timing")) o.include_timing = *v;
  if (auto v = kv.get_uint("threads")) o.threads = static_cast<unsigned>(*v);
  return s;
}

ExperimentReport run_experiment(const SweepConfig& config) {
  switch (config.kind) {
    case ExperimentKind::Noise:
      return run_noise_sweep(config.base, config.flip_probs, config.options);
    case ExperimentKind::Prevalence: {
      auto report = run_generator_sweep(config.base, config.grid, config.options);
      report.kind = "prevalence";
      return report;
    }
    case ExperimentKind::Grid:
      break;
  }
  return run_generator_sweep(config.base, config.grid, config.options);
}

}  // namespace sybiledge
