#pragma once

// JSON documents for problems, spectra, and descent configs; CSV for iterate
// histories. CSV decimals use 17 significant digits; JSON uses the shortest
// representation that round-trips exactly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "slinv/error.hpp"
#include "slinv/objective.hpp"
#include "slinv/optimizer.hpp"
#include "slinv/spectra.hpp"
#include "slinv/verification.hpp"

namespace slinv::io {

using nlohmann::json;

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(std::string("missing required key \"") + key + "\"");
  return j.at(key);
}

template <class T>
T get_as(const json& j, const char* key) {
  const json& v = require(j, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("key \"") + key + "\" has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get_as<T>(j, key);
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- problems ------------------------------------------------------------

inline json to_json(const Potential& q) { return json(std::vector<double>(q.values().begin(), q.values().end())); }

inline json to_json(const ProblemVector& pv) {
  return {{"h0", pv.h0()},
          {"h1", pv.h1()},
          {"h2", pv.h2()},
          {"grid", pv.grid_size()},
          {"q_values", to_json(pv.q())}};
}

// Potential from either "q_values" (explicit samples) or "potential" (a
// named kind sampled on "grid"). `grid_override` > 0 replaces the grid.
inline Potential potential_from_json(const json& j, std::size_t grid_override = 0) {
  if (j.contains("q_values")) {
    auto values = get_as<std::vector<double>>(j, "q_values");
    if (j.contains("grid") && get_as<std::size_t>(j, "grid") + 1 != values.size())
      throw ValidationError("\"grid\" does not match the length of \"q_values\"");
    Potential q(std::move(values));
    return grid_override > 0 ? q.resampled(grid_override) : q;
  }
  const auto kind_name = get_or<std::string>(j, "potential", "");
  if (kind_name.empty()) throw ValidationError("missing required key \"q_values\" or \"potential\"");
  const auto kind = parse_potential_kind(kind_name);
  if (!kind || *kind == PotentialKind::CustomGrid)
    throw ValidationError("unknown potential kind \"" + kind_name + "\"");
  const std::size_t M = grid_override > 0 ? grid_override : get_or<std::size_t>(j, "grid", 512);
  if (M < 2) throw ValidationError("\"grid\" must be at least 2");
  return make_potential(*kind, M);
}

inline ProblemVector problem_from_json(const json& j, std::size_t grid_override = 0) {
  const double h0 = get_as<double>(j, "h0");
  const double h1 = get_as<double>(j, "h1");
  const double h2 = get_as<double>(j, "h2");
  return ProblemVector(h0, h1, h2, potential_from_json(j, grid_override));
}

// ---- spectra -------------------------------------------------------------

inline json to_json(const SpectralTarget& t) {
  json entries = json::array();
  for (const auto& e : t.entries())
    entries.push_back({{"i", e.i}, {"n", e.n}, {"lambda", e.lambda}, {"weight", e.weight}});
  return {{"entries", entries}};
}

inline json to_json(const NoiseSpec& n) { return {{"r", n.r}, {"seed", n.seed}}; }

inline NoiseSpec noise_from_json(const json& j) {
  NoiseSpec n;
  n.r = get_or<double>(j, "r", 0.0);
  n.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (!(n.r >= 0.0)) throw ValidationError("noise \"r\" must be nonnegative");
  return n;
}

inline SpectralTarget target_from_json(const json& j) {
  const json& arr = require(j, "entries");
  if (!arr.is_array()) throw ValidationError("\"entries\" must be an array");
  std::vector<SpectralEntry> entries;
  for (const auto& e : arr)
    entries.push_back({get_as<int>(e, "i"), get_as<int>(e, "n"), get_as<double>(e, "lambda"),
                       get_or<double>(e, "weight", 1.0)});
  return SpectralTarget(std::move(entries));
}

// ---- descent config ------------------------------------------------------

inline json to_json(const DescentConfig& c) {
  return {{"max_iters", c.max_iters},
          {"g_tol", c.g_tol},
          {"reset_schedule", c.reset_schedule},
          {"restart_every", c.restart_every},
          {"snapshot_every", c.snapshot_every},
          {"line_search",
           {{"initial_step", c.line_search.initial_step},
            {"growth", c.line_search.growth},
            {"rel_tol", c.line_search.rel_tol},
            {"max_evals", c.line_search.max_evals}}}};
}

inline DescentConfig descent_from_json(const json& j) {
  DescentConfig c;
  c.max_iters = get_or(j, "max_iters", c.max_iters);
  c.g_tol = get_or(j, "g_tol", c.g_tol);
  c.reset_schedule = get_or(j, "reset_schedule", c.reset_schedule);
  c.restart_every = get_or(j, "restart_every", c.restart_every);
  c.snapshot_every = get_or(j, "snapshot_every", c.snapshot_every);
  if (j.is_object() && j.contains("line_search")) {
    const json& ls = j.at("line_search");
    auto& l = c.line_search;
    l.initial_step = get_or(ls, "initial_step", l.initial_step);
    l.growth = get_or(ls, "growth", l.growth);
    l.rel_tol = get_or(ls, "rel_tol", l.rel_tol);
    l.max_evals = get_or(ls, "max_evals", l.max_evals);
  }
  c.validate();
  return c;
}

// ---- iterate history -----------------------------------------------------

inline constexpr const char* kHistoryHeader = "iter,G,h0,h1,h2,delta2";

inline std::string history_csv(const std::vector<IterateRecord>& history) {
  std::ostringstream out;
  out << kHistoryHeader << '\n';
  for (const auto& r : history) {
    out << r.iter << ',' << format_double(r.G) << ',' << format_double(r.h0) << ','
        << format_double(r.h1) << ',' << format_double(r.h2) << ',';
    if (r.delta2) out << format_double(*r.delta2);
    out << '\n';
  }
  return out.str();
}

inline std::vector<IterateRecord> parse_history_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHistoryHeader)
    throw ValidationError("history CSV: unexpected header");
  std::vector<IterateRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() == 5 && !line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw ValidationError("history CSV: expected 6 columns");
    IterateRecord r;
    try {
      r.iter = std::stoi(f[0]);
      r.G = std::stod(f[1]);
      r.h0 = std::stod(f[2]);
      r.h1 = std::stod(f[3]);
      r.h2 = std::stod(f[4]);
      if (!f[5].empty()) r.delta2 = std::stod(f[5]);
    } catch (const std::exception&) {
      throw ValidationError("history CSV: malformed number in line \"" + line + "\"");
    }
    out.push_back(r);
  }
  return out;
}

// Long format: iter,x,q for every recorded snapshot.
inline std::string snapshots_csv(const std::vector<IterateRecord>& history) {
  std::ostringstream out;
  out << "iter,x,q\n";
  for (const auto& r : history) {
    if (!r.q_snapshot) continue;
    const auto& q = *r.q_snapshot;
    for (std::size_t k = 0; k < q.size(); ++k)
      out << r.iter << ',' << format_double(grid_node(k, q.grid_size())) << ','
          << format_double(q[k]) << '\n';
  }
  return out.str();
}

// ---- verification reports ------------------------------------------------

inline json to_json(const LemmaReport& r) {
  return {{"N", r.N},
          {"sign", r.sign == LemmaSign::Wronskian ? "wronskian" : "alternate"},
          {"matrix", r.matrix},
          {"max_deviation", r.max_deviation},
          {"worst_row", r.worst_row},
          {"worst_col", r.worst_col}};
}

inline json to_json(const BridgeReport& b) {
  return {{"i", b.i}, {"n", b.n}, {"j", b.j}, {"m", b.m}, {"gamma", b.gamma}, {"gamma_tilde", b.gamma_tilde}};
}

inline json to_json(const IndependenceReport& r) {
  return {{"N", r.N}, {"min_eigenvalue", r.min_eigenvalue}, {"determinant", r.determinant}};
}

inline json to_json(const InterlacingReport& r) {
  json j = {{"passed", r.passed}, {"n_first", r.n_first}, {"n_last", r.n_last}};
  if (r.ordering) j["ordering"] = *r.ordering == Interlacing::OneFirst ? "one_first" : "two_first";
  if (!r.passed) {
    j["violation_n"] = r.violation_n;
    j["message"] = r.message;
  }
  return j;
}

// ---- files ---------------------------------------------------------------

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::filesystem::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::parse_error& e) {
    throw ValidationError(p.string() + ": " + e.what());
  }
}

// Writes through a temporary file in the same directory, then renames.
inline void write_atomic(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

inline void write_json(const std::filesystem::path& p, const json& j) { write_atomic(p, j.dump(2) + "\n"); }

}  // namespace slinv::io
