#include "stacklp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "stacklp/error.hpp"
#include "stacklp/serialize.hpp"

namespace stacklp {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw Error(ErrorCode::config_error, "config key '" + key + "': '" + value + "' is not " + expected);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& text) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) bad_value(key, text, "an integer");
  return v;
}

// Accepts a decimal number or a fraction "a/b".
double parse_number(const std::string& key, const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const double num = parse_number(key, trim(text.substr(0, slash)));
    const double den = parse_number(key, trim(text.substr(slash + 1)));
    if (den == 0.0) bad_value(key, text, "a fraction with nonzero denominator");
    return num / den;
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) bad_value(key, text, "a number");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
  if (text == "false" || text == "no" || text == "0" || text == "off") return false;
  bad_value(key, text, "a boolean");
}

const char* scaling_name(FeatureScaling s) {
  switch (s) {
    case FeatureScaling::standardize: return "standardize";
    case FeatureScaling::min_max: return "min_max";
    case FeatureScaling::none: return "none";
  }
  return "standardize";
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::filesystem::path&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"data.path", [](RunConfig& c, const std::string& v, const std::filesystem::path& base) {
         const std::filesystem::path p(v);
         c.dataset = (p.is_absolute() ? p : base / p).lexically_normal();
       }},
      {"data.label_column", [](RunConfig& c, const std::string& v, const auto&) {
         c.schema.label_column = parse_integer<int>("data.label_column", v);
       }},
      {"data.positive", [](RunConfig& c, const std::string& v, const auto&) { c.schema.positive_value = v; }},
      {"data.negative", [](RunConfig& c, const std::string& v, const auto&) { c.schema.negative_value = v; }},
      {"data.header", [](RunConfig& c, const std::string& v, const auto&) {
         c.schema.has_header = parse_bool("data.header", v);
       }},
      {"data.id", [](RunConfig& c, const std::string& v, const auto&) { c.schema.id = v; }},
      {"folds.plan", [](RunConfig& c, const std::string& v, const auto&) {
         if (v == "kfold") c.plan = ResamplingPlan::kfold;
         else if (v == "bootstrap") c.plan = ResamplingPlan::bootstrap;
         else bad_value("folds.plan", v, "kfold or bootstrap");
       }},
      {"folds.k", [](RunConfig& c, const std::string& v, const auto&) { c.folds = parse_integer<int>("folds.k", v); }},
      {"folds.seed", [](RunConfig& c, const std::string& v, const auto&) {
         c.seed = parse_integer<std::uint64_t>("folds.seed", v);
       }},
      {"folds.replicates", [](RunConfig& c, const std::string& v, const auto&) {
         c.replicates = parse_integer<int>("folds.replicates", v);
       }},
      {"grid.cost_exp_lo", [](RunConfig& c, const std::string& v, const auto&) {
         c.cost_exp_lo = parse_integer<int>("grid.cost_exp_lo", v);
       }},
      {"grid.cost_exp_hi", [](RunConfig& c, const std::string& v, const auto&) {
         c.cost_exp_hi = parse_integer<int>("grid.cost_exp_hi", v);
       }},
      {"grid.gamma_exp_lo", [](RunConfig& c, const std::string& v, const auto&) {
         c.gamma_exp_lo = parse_integer<int>("grid.gamma_exp_lo", v);
       }},
      {"grid.gamma_exp_hi", [](RunConfig& c, const std::string& v, const auto&) {
         c.gamma_exp_hi = parse_integer<int>("grid.gamma_exp_hi", v);
       }},
      {"grid.step", [](RunConfig& c, const std::string& v, const auto&) {
         c.exp_step = parse_integer<int>("grid.step", v);
       }},
      {"grid.scaling", [](RunConfig& c, const std::string& v, const auto&) {
         if (v == "standardize") c.scaling = FeatureScaling::standardize;
         else if (v == "min_max") c.scaling = FeatureScaling::min_max;
         else if (v == "none") c.scaling = FeatureScaling::none;
         else bad_value("grid.scaling", v, "standardize, min_max or none");
       }},
      {"grid.tol", [](RunConfig& c, const std::string& v, const auto&) { c.svm_tol = parse_number("grid.tol", v); }},
      {"grid.max_iterations", [](RunConfig& c, const std::string& v, const auto&) {
         c.svm_max_iterations = parse_integer<long>("grid.max_iterations", v);
       }},
      {"combine.formulation", [](RunConfig& c, const std::string& v, const auto&) {
         try {
           c.formulation = formulation_from_string(v);
         } catch (const Error&) {
           bad_value("combine.formulation", v, "single_lp, bootstrap_lp or qp");
         }
       }},
      {"combine.score_kind", [](RunConfig& c, const std::string& v, const auto&) {
         try {
           c.score_kind = score_kind_from_string(v);
         } catch (const Error&) {
           bad_value("combine.score_kind", v, "raw, clipped or two_p_minus_one");
         }
       }},
      {"combine.margin", [](RunConfig& c, const std::string& v, const auto&) {
         c.margin = parse_number("combine.margin", v);
       }},
      {"combine.cap", [](RunConfig& c, const std::string& v, const auto&) {
         if (v.empty() || v == "none") c.cap.reset();
         else c.cap = parse_number("combine.cap", v);
       }},
      {"combine.sum_to_one", [](RunConfig& c, const std::string& v, const auto&) {
         c.sum_to_one = parse_bool("combine.sum_to_one", v);
       }},
      {"combine.penalty_c", [](RunConfig& c, const std::string& v, const auto&) {
         c.penalty_c = parse_number("combine.penalty_c", v);
       }},
      {"combine.qp_margin", [](RunConfig& c, const std::string& v, const auto&) {
         c.qp_margin = parse_number("combine.qp_margin", v);
       }},
      {"combine.qp_iterations", [](RunConfig& c, const std::string& v, const auto&) {
         c.qp_iterations = parse_integer<long>("combine.qp_iterations", v);
       }},
      {"output.dir", [](RunConfig& c, const std::string& v, const std::filesystem::path& base) {
         const std::filesystem::path p(v);
         c.output_dir = (p.is_absolute() ? p : base / p).lexically_normal();
       }},
  };
  return table;
}

void apply(RunConfig& c, const std::string& key, const std::string& value, const std::filesystem::path& base) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw Error(ErrorCode::config_error, "unknown config key '" + key + "'");
  it->second(c, trim(value), base);
}

void check(const RunConfig& c) {
  if (c.dataset.empty()) throw Error(ErrorCode::config_error, "config needs data.path");
  if (c.schema.positive_value.empty() || c.schema.negative_value.empty()) {
    throw Error(ErrorCode::config_error, "config needs data.positive and data.negative");
  }
  if (c.folds < 2) throw Error(ErrorCode::config_error, "folds.k must be at least 2");
  if (c.replicates < 1) throw Error(ErrorCode::config_error, "folds.replicates must be at least 1");
  if (c.exp_step < 1 || c.cost_exp_lo > c.cost_exp_hi || c.gamma_exp_lo > c.gamma_exp_hi) {
    throw Error(ErrorCode::config_error, "grid exponent ranges are empty");
  }
  if (!(c.svm_tol > 0.0) || c.svm_max_iterations < 1) {
    throw Error(ErrorCode::config_error, "grid.tol and grid.max_iterations must be positive");
  }
  if (c.cap && !(*c.cap > 0.0)) throw Error(ErrorCode::config_error, "combine.cap must be positive");
  if (!(c.penalty_c > 0.0) || c.qp_iterations < 1) {
    throw Error(ErrorCode::config_error, "combine.penalty_c and combine.qp_iterations must be positive");
  }
  if (c.formulation == Formulation::bootstrap_lp && c.plan != ResamplingPlan::bootstrap) {
    throw Error(ErrorCode::config_error, "bootstrap_lp needs folds.plan = bootstrap");
  }
}

}  // namespace

ModelGrid RunConfig::grid() const {
  return ModelGrid::from_exponents(cost_exp_lo, cost_exp_hi, gamma_exp_lo, gamma_exp_hi, exp_step);
}

SvmParams RunConfig::svm_params() const {
  SvmParams p;
  p.tol = svm_tol;
  p.max_iterations = svm_max_iterations;
  p.scaling = scaling;
  return p;
}

LpOptions RunConfig::lp_options() const { return LpOptions{margin, cap, sum_to_one}; }

QpOptions RunConfig::qp_options() const { return QpOptions{qp_iterations, qp_margin}; }

std::vector<std::string> RunConfig::canonical_lines() const {
  std::vector<std::string> lines = {
      "data.path = " + dataset.generic_string(),
      "data.label_column = " + std::to_string(schema.label_column),
      "data.positive = " + schema.positive_value,
      "data.negative = " + schema.negative_value,
      std::string("data.header = ") + (schema.has_header ? "true" : "false"),
      "data.id = " + schema.id,
      std::string("folds.plan = ") + (plan == ResamplingPlan::kfold ? "kfold" : "bootstrap"),
      "folds.k = " + std::to_string(folds),
      "folds.seed = " + std::to_string(seed),
      "folds.replicates = " + std::to_string(replicates),
      "grid.cost_exp_lo = " + std::to_string(cost_exp_lo),
      "grid.cost_exp_hi = " + std::to_string(cost_exp_hi),
      "grid.gamma_exp_lo = " + std::to_string(gamma_exp_lo),
      "grid.gamma_exp_hi = " + std::to_string(gamma_exp_hi),
      "grid.step = " + std::to_string(exp_step),
      std::string("grid.scaling = ") + scaling_name(scaling),
      "grid.tol = " + format_real(svm_tol),
      "grid.max_iterations = " + std::to_string(svm_max_iterations),
      std::string("combine.formulation = ") + to_string(formulation),
      std::string("combine.score_kind = ") + to_string(score_kind),
      "combine.margin = " + format_real(margin),
      "combine.cap = " + (cap ? format_real(*cap) : std::string("none")),
      std::string("combine.sum_to_one = ") + (sum_to_one ? "true" : "false"),
      "combine.penalty_c = " + format_real(penalty_c),
      "combine.qp_margin = " + format_real(qp_margin),
      "combine.qp_iterations = " + std::to_string(qp_iterations),
  };
  std::sort(lines.begin(), lines.end());
  return lines;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                       const std::vector<std::string>& overrides) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::config_error, std::string("config parse error: ") + e.what());
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw Error(ErrorCode::config_error, "config key '" + section + "' is outside any section");
    }
    for (const auto& [key, value] : body) apply(c, section + "." + key, value.data(), base_dir);
  }
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::config_error, "override '" + item + "' is not section.key=value");
    }
    apply(c, trim(item.substr(0, eq)), item.substr(eq + 1), std::filesystem::current_path());
  }
  check(c);
  std::string listing, grid_listing;
  for (const auto& line : c.canonical_lines()) {
    listing += line + "\n";
    if (line.rfind("combine.", 0) != 0) grid_listing += line + "\n";
  }
  c.hash = fnv1a_hex(listing);
  c.grid_hash = fnv1a_hex(grid_listing);
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_error, "cannot open config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), std::filesystem::absolute(path).parent_path(), overrides);
}

}  // namespace stacklp
