#include "dtrans/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dtrans/errors.hpp"

namespace dtrans::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

bool to_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

bool to_count(const std::string& s, std::size_t& out) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return false;
  }
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  out = static_cast<std::size_t>(v);
  return end == s.c_str() + s.size();
}

class FieldReader {
 public:
  FieldReader(const KeyValues& values, std::vector<std::string>& errors)
      : values_(values), errors_(errors) {}

  const std::string* find(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  void count(const std::string& key, std::size_t& field) {
    const std::string* v = find(key);
    if (!v) return;
    std::size_t x;
    if (!to_count(*v, x) || x == 0) {
      errors_.push_back(key + ": expected a positive integer, got '" + *v + "'");
      return;
    }
    field = x;
  }

  void real(const std::string& key, double& field) {
    const std::string* v = find(key);
    if (!v) return;
    double x;
    if (!to_double(*v, x)) {
      errors_.push_back(key + ": expected a number, got '" + *v + "'");
      return;
    }
    field = x;
  }

  void count_list(const std::string& key, std::vector<std::size_t>& field) {
    const std::string* v = find(key);
    if (!v) return;
    std::vector<std::size_t> out;
    for (const auto& item : split_list(*v)) {
      std::size_t x;
      if (!to_count(item, x) || x == 0) {
        errors_.push_back(key + ": expected positive integers, got '" + item + "'");
        return;
      }
      out.push_back(x);
    }
    if (out.empty()) {
      errors_.push_back(key + ": empty list");
      return;
    }
    field = out;
  }

  void real_list(const std::string& key, std::vector<double>& field) {
    const std::string* v = find(key);
    if (!v) return;
    std::vector<double> out;
    for (const auto& item : split_list(*v)) {
      double x;
      if (!to_double(item, x)) {
        errors_.push_back(key + ": expected numbers, got '" + item + "'");
        return;
      }
      out.push_back(x);
    }
    field = out;
  }

  void text(const std::string& key, std::string& field) {
    if (const std::string* v = find(key)) field = *v;
  }

 private:
  const KeyValues& values_;
  std::vector<std::string>& errors_;
};

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "kind", "n", "generator", "N", "lambda", "t-grid", "grid", "seeds", "seed", "eps", "out",
      "format", "p", "q", "atoms", "samples", "replicas", "n-grid", "lambdas", "particles", "model",
      "regularity-pairs"};
  return keys;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"cost",        "couple",  "schrodinger", "paths",
                                              "interpolate", "entropy", "gaps"};
  return kinds;
}

std::string canonical_key(const std::string& key) {
  std::string k = trim(key);
  while (!k.empty() && k.front() == '-') k.erase(k.begin());
  std::replace(k.begin(), k.end(), '_', '-');
  if (k == "N") return k;
  std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
  return k;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  KeyValues out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out[canonical_key(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

ParseResult parse_config(const std::string& kind, const KeyValues& values) {
  ParseResult res;
  ExperimentConfig& c = res.config;
  c.kind = kind;
  for (const auto& [key, value] : values) {
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
      res.errors.push_back(key + ": unknown key");
    }
  }
  FieldReader r(values, res.errors);
  r.text("kind", c.kind);
  r.count("n", c.n);
  r.text("generator", c.generator);
  r.count_list("N", c.sizes);
  if (const std::string* v = r.find("lambda")) {
    if (*v == "auto") {
      c.lambda.reset();
    } else {
      double x;
      if (!to_double(*v, x) || !(x > 0.0)) {
        res.errors.push_back("lambda: expected 'auto' or a positive number, got '" + *v + "'");
      } else {
        c.lambda = x;
      }
    }
  }
  r.count("t-grid", c.t_grid);
  r.count("grid", c.grid);
  r.count("seeds", c.seeds);
  if (const std::string* v = r.find("seed")) {
    std::size_t x;
    if (!to_count(*v, x)) {
      res.errors.push_back("seed: expected a nonnegative integer, got '" + *v + "'");
    } else {
      c.seed = static_cast<std::uint64_t>(x);
    }
  }
  r.real("eps", c.eps);
  r.text("out", c.out);
  r.text("format", c.format);
  r.real_list("p", c.p);
  r.real_list("q", c.q);
  r.count("atoms", c.atoms);
  r.count("samples", c.samples);
  r.count("replicas", c.replicas);
  r.count_list("n-grid", c.n_grid);
  r.real_list("lambdas", c.lambdas);
  r.count("particles", c.particles);
  r.text("model", c.model);
  r.count("regularity-pairs", c.regularity_pairs);
  for (const auto& e : check_config(c)) res.errors.push_back(e);
  return res;
}

std::vector<std::string> check_config(const ExperimentConfig& c) {
  std::vector<std::string> errors;
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end()) {
    errors.push_back("kind: unrecognized experiment '" + c.kind + "'");
  }
  if (c.n < 2) errors.push_back("n: must be at least 2");
  if (!(c.eps > 0.0) || !(static_cast<double>(c.n) * c.eps < 1.0)) {
    errors.push_back("eps: must satisfy 0 < n * eps < 1");
  }
  if (c.format != "json" && c.format != "csv" && c.format != "both") {
    errors.push_back("format: expected json, csv or both");
  }
  if (c.t_grid < 3) errors.push_back("t-grid: need at least 3 points");
  for (std::size_t N : c.sizes) {
    if (N < 2) errors.push_back("N: sizes must be at least 2");
    if (N > 16) errors.push_back("N: sizes above 16 are not supported");
  }
  for (double l : c.lambdas) {
    if (!(l > 0.0)) errors.push_back("lambdas: must be positive");
  }
  for (std::size_t m : c.n_grid) {
    if (m < 2) errors.push_back("n-grid: entries must be at least 2");
  }
  if (c.kind == "cost") {
    if (c.p.empty() || c.q.empty()) errors.push_back("p, q: both points are required");
    if (!c.p.empty() && c.p.size() != c.n) errors.push_back("p: length differs from n");
    if (!c.q.empty() && c.q.size() != c.n) errors.push_back("q: length differs from n");
    for (double x : c.p) {
      if (!(x > 0.0)) errors.push_back("p: coordinates must be positive");
    }
    for (double x : c.q) {
      if (!(x > 0.0)) errors.push_back("q: coordinates must be positive");
    }
  }
  return errors;
}

}  // namespace dtrans::cli
