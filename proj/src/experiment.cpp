#include "hjflow/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "hjflow/error.hpp"
#include "hjflow/evi.hpp"
#include "hjflow/hamiltonians.hpp"
#include "hjflow/laplace.hpp"
#include "hjflow/tataru.hpp"
#include "hjflow/viscosity.hpp"

namespace hjflow {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- parsing

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// View of one JSON object that remembers its dotted path and rejects fields
// it was never asked about.
class Block {
 public:
  Block(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_object()) throw ConfigError(path_, "must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_ && j_->contains(key);
  }
  const json& at(const std::string& key) const { return j_->at(key); }
  std::string field(const std::string& key) const { return join(path_, key); }

  Block child(const std::string& key) {
    return has(key) ? Block(&at(key), field(key)) : Block(nullptr, field(key));
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    if (!at(key).is_number()) throw ConfigError(field(key), "must be a number");
    out = at(key).get<double>();
    if (!std::isfinite(out)) throw ConfigError(field(key), "must be finite");
  }

  template <class Int>
  void integer(const std::string& key, Int& out, long long min_value) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "must be an integer");
    const long long x = v.is_number_unsigned() ? static_cast<long long>(v.get<std::uint64_t>())
                                               : v.get<long long>();
    if (x < min_value)
      throw ConfigError(field(key), "must be at least " + std::to_string(min_value));
    out = static_cast<Int>(x);
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    if (!at(key).is_boolean()) throw ConfigError(field(key), "must be true or false");
    out = at(key).get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    if (!at(key).is_string()) throw ConfigError(field(key), "must be a string");
    out = at(key).get<std::string>();
  }

  void box(const std::string& key, Box& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError(field(key), "must be [lo, hi]");
    out = {v[0].get<double>(), v[1].get<double>()};
    if (!(out.lo < out.hi) || !std::isfinite(out.lo) || !std::isfinite(out.hi))
      throw ConfigError(field(key), "needs finite lo < hi");
  }

  void point(const std::string& key, PointSpec& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (v.is_number()) {
      out = {v.get<double>()};
      return;
    }
    if (!v.is_array() || v.empty())
      throw ConfigError(field(key), "must be a number or a non-empty array");
    out.clear();
    for (const json& c : v) {
      if (!c.is_number()) throw ConfigError(field(key), "coordinates must be numbers");
      out.push_back(c.get<double>());
    }
  }

  void int_list(const std::string& key, std::vector<int>& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError(field(key), "must be an array");
    out.clear();
    for (const json& c : v) {
      if (!c.is_number_integer() || c.get<long long>() < 1 ||
          c.get<long long>() > std::numeric_limits<int>::max())
        throw ConfigError(field(key), "entries must be positive integers");
      out.push_back(c.get<int>());
    }
  }

  // Every key present must have been queried.
  void finish() const {
    if (!j_) return;
    for (const auto& [k, v] : j_->items())
      if (!seen_.count(k)) throw ConfigError(field(k), "unknown field");
  }

 private:
  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

SpaceSpec parse_space(Block b) {
  SpaceSpec s;
  std::string kind = "euclidean";
  b.string("kind", kind);
  if (kind == "euclidean") {
    s.kind = SpaceKind::Euclidean;
  } else if (kind == "quantile" || kind == "quantile1d" || kind == "wasserstein") {
    s.kind = SpaceKind::Quantile1D;
  } else {
    throw ConfigError(b.field("kind"), "unknown space kind '" + kind + "'");
  }
  b.integer("dimension", s.dimension, 1);
  b.integer("N", s.quantiles, 2);
  std::string pot = "quadratic";
  b.string("potential", pot);
  try {
    s.potential = potential_from_string(pot);
  } catch (const Error&) {
    throw ConfigError(b.field("potential"), "unknown potential '" + pot + "'");
  }
  s.kappa = s.potential == PotentialKind::Quadratic ? 1.0
            : s.potential == PotentialKind::Quartic ? 0.0
                                                     : -1.0;
  b.number("kappa", s.kappa);
  // a concave quadratic flow leaves every box exponentially fast
  if (s.potential == PotentialKind::Quadratic)
    require(s.kappa >= 0.0, b.field("kappa"), "the quadratic potential needs kappa >= 0");
  if (s.potential == PotentialKind::Quartic)
    require(s.kappa == 0.0, b.field("kappa"), "the quartic potential has kappa 0");
  if (s.potential == PotentialKind::DoubleWell)
    require(s.kappa < 0.0, b.field("kappa"), "the double well needs kappa < 0");
  b.box("box", s.box);
  b.finish();
  return s;
}

HSpec parse_h(Block b) {
  HSpec h;
  b.string("type", h.type);
  require(h.type == "linear" || h.type == "constant" || h.type == "sine",
          b.field("type"), "must be linear, constant or sine");
  b.number("value", h.value);
  b.number("amplitude", h.amplitude);
  b.number("frequency", h.frequency);
  b.number("slope", h.slope);
  b.finish();
  return h;
}

GridParams parse_grid(Block& b) {
  GridParams g;
  b.number("half_width", g.half_width);
  require(g.half_width > 0.0, b.field("half_width"), "must be positive");
  b.number("dx", g.dx);
  require(g.dx > 0.0 && g.dx < g.half_width, b.field("dx"),
          "must be positive and below half_width");
  b.number("dt", g.dt);
  require(g.dt >= 0.0, b.field("dt"), "must be nonnegative (0 selects lambda/50)");
  b.integer("controls", g.controls, 1);
  b.number("control_bound", g.control_bound);
  require(g.control_bound > 0.0, b.field("control_bound"), "must be positive");
  b.number("tol", g.tol);
  require(g.tol > 0.0, b.field("tol"), "must be positive");
  return g;
}

void check_point(const ModelSpace& space, const PointSpec& p, const std::string& field) {
  if (p.size() != 1 && p.size() != space.size())
    throw ConfigError(field, "needs 1 or " + std::to_string(space.size()) + " coordinates");
  for (double c : p) require(std::isfinite(c), field, "coordinates must be finite");
  if (space.kind() == SpaceKind::Quantile1D)
    require(std::is_sorted(p.begin(), p.end()), field, "quantiles must be nondecreasing");
}

SpacePoint make_point(const ModelSpace& space, const PointSpec& p) {
  return p.size() == 1 ? space.constant_point(p[0]) : space.point(p);
}

Box default_evi_box(PotentialKind k) {
  // where the forward-difference error of the residual stays below 1e-3
  return k == PotentialKind::Quadratic ? Box{-2.0, 2.0} : Box{-1.5, 1.5};
}

bool inside(const Box& inner, const Box& outer) {
  return inner.lo >= outer.lo && inner.hi <= outer.hi;
}

}  // namespace

const std::vector<std::string>& experiment_commands() {
  static const std::vector<std::string> names{"evi-check", "tataru",     "laplace-converge",
                                              "ham-chain", "resolvent",  "comparison",
                                              "all"};
  return names;
}

ModelSpace SpaceSpec::build() const {
  Potential v = potential == PotentialKind::Quadratic ? Potential::quadratic(kappa)
                : potential == PotentialKind::Quartic ? Potential::quartic()
                                                      : Potential::double_well(kappa);
  return kind == SpaceKind::Euclidean ? ModelSpace::euclidean(dimension, v, box)
                                      : ModelSpace::quantile(quantiles, v, box);
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("", "configuration must be a JSON object");
  ExperimentConfig c;
  Block top(&j, "");
  require(top.has("schema"), "schema", "missing");
  require(top.at("schema").is_number_integer() && top.at("schema").get<long long>() == kConfigSchema,
          "schema", "unsupported schema version (expected " + std::to_string(kConfigSchema) + ")");
  top.string("command", c.command);
  const auto& cmds = experiment_commands();
  require(std::find(cmds.begin(), cmds.end(), c.command) != cmds.end(), "command",
          "unknown check '" + c.command + "'");
  top.integer("seed", c.seed, 0);
  top.string("output_dir", c.output_dir);

  c.space = parse_space(top.child("space"));
  const ModelSpace space = c.space.build();

  {
    Block b = top.child("evi");
    b.integer("instances", c.evi.instances, 1);
    b.number("delta", c.evi.delta);
    require(c.evi.delta > 0.0 && c.evi.delta <= 0.1, b.field("delta"), "must be in (0, 0.1]");
    Box sb = default_evi_box(c.space.potential);
    b.box("sample_box", sb);
    c.evi.sample_box = sb;
    require(inside(sb, c.space.box), b.field("sample_box"), "must lie inside space.box");
    b.integer("time_samples", c.evi.time_samples, 2);
    b.number("tolerance", c.evi.tolerance);
    require(c.evi.tolerance > 0.0, b.field("tolerance"), "must be positive");
    b.finish();
  }
  {
    Block b = top.child("tataru");
    TataruParams& t = c.tataru;
    b.point("pi", t.pi);
    check_point(space, t.pi, b.field("pi"));
    b.point("mu", t.mu);
    check_point(space, t.mu, b.field("mu"));
    b.number("epsilon", t.epsilon);
    require(t.epsilon >= 0.0, b.field("epsilon"), "must be nonnegative");
    if (b.has("kappa")) {
      double k = 0.0;
      b.number("kappa", k);
      t.kappa = k;
    }
    b.boolean("grid", t.grid);
    b.integer("instances", t.instances, 0);
    b.box("sample_box", t.sample_box);
    require(inside(t.sample_box, c.space.box), b.field("sample_box"),
            "must lie inside space.box");
    b.finish();
  }
  {
    Block b = top.child("laplace");
    LaplaceParams& l = c.laplace;
    b.number("epsilon", l.epsilon);
    require(l.epsilon > 0.0, b.field("epsilon"), "must be positive");
    b.point("pi", l.pi);
    check_point(space, l.pi, b.field("pi"));
    b.point("mu", l.mu);
    check_point(space, l.mu, b.field("mu"));
    b.int_list("m", l.m);
    require(!l.m.empty(), b.field("m"), "needs at least one value");
    for (std::size_t k = 1; k < l.m.size(); ++k)
      require(l.m[k] > l.m[k - 1], b.field("m"), "must be strictly increasing");
    b.int_list("n", l.n);
    b.integer("riemann_m", l.riemann_m, 1);
    b.number("tolerance", l.tolerance);
    require(l.tolerance > 0.0, b.field("tolerance"), "must be positive");
    b.finish();
  }
  {
    Block b = top.child("ham_chain");
    b.integer("samples", c.ham_chain.samples, 1);
    if (b.has("links")) {
      const json& v = b.at("links");
      require(v.is_array() && !v.empty(), b.field("links"), "must be a non-empty array");
      c.ham_chain.links.clear();
      for (const json& s : v) {
        require(s.is_string(), b.field("links"), "entries must be strings");
        try {
          chain_link_from_string(s.get<std::string>());
        } catch (const ConfigError&) {
          throw ConfigError(b.field("links"), "unknown link '" + s.get<std::string>() + "'");
        }
        c.ham_chain.links.push_back(s.get<std::string>());
      }
    }
    b.box("sample_box", c.ham_chain.sample_box);
    b.finish();
  }
  {
    Block b = top.child("resolvent");
    ResolventParams& r = c.resolvent;
    b.number("lambda", r.lambda);
    require(r.lambda > 0.0, b.field("lambda"), "must be positive");
    r.h = parse_h(b.child("h"));
    r.grid = parse_grid(b);
    b.integer("pairs", r.pairs, 0);
    b.number("slack_dx_multiple", r.slack_dx_multiple);
    require(r.slack_dx_multiple > 0.0, b.field("slack_dx_multiple"), "must be positive");
    b.finish();
  }
  {
    Block b = top.child("comparison");
    ComparisonParams& p = c.comparison;
    b.number("lambda", p.lambda);
    require(p.lambda > 0.0, b.field("lambda"), "must be positive");
    b.integer("pairs", p.pairs, 0);
    b.number("shift", p.shift);
    require(p.shift >= 0.0, b.field("shift"), "must be nonnegative");
    p.grid = parse_grid(b);
    b.finish();
  }
  top.finish();

  const bool one_d = space.kind() == SpaceKind::Euclidean && space.size() == 1;
  if ((c.command == "resolvent" || c.command == "comparison") && !one_d)
    throw ConfigError("space", "the control problem needs a 1-D euclidean space");
  c.source = j;
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------- report

void Report::add(std::string check, std::size_t instance, double value, double bound,
                 double violation, bool pass) {
  rows.push_back({std::move(check), instance, value, bound, violation, pass});
}

std::vector<CheckSummary> Report::summary() const {
  std::vector<CheckSummary> out;
  std::map<std::string, std::size_t> index;
  for (const ReportRow& r : rows) {
    auto [it, fresh] = index.emplace(r.check, out.size());
    if (fresh) out.push_back({r.check, 0, 0, -std::numeric_limits<double>::infinity()});
    CheckSummary& s = out[it->second];
    ++s.rows;
    if (!r.pass) ++s.failed;
    s.max_violation = std::max(s.max_violation, r.violation);
  }
  return out;
}

std::size_t Report::failed() const {
  return std::size_t(std::count_if(rows.begin(), rows.end(),
                                   [](const ReportRow& r) { return !r.pass; }));
}

namespace {

// JSON has no inf/nan; encode them as strings.
json number_json(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

json Report::to_json() const {
  json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["config"] = config;
  json checks = json::array();
  for (const CheckSummary& s : summary())
    checks.push_back({{"check", s.check},
                      {"rows", s.rows},
                      {"failed", s.failed},
                      {"max_violation", number_json(s.max_violation)}});
  j["summary"] = {{"rows", rows.size()},
                  {"passed", rows.size() - failed()},
                  {"failed", failed()},
                  {"pass", all_pass()},
                  {"checks", checks}};
  json rs = json::array();
  for (const ReportRow& r : rows)
    rs.push_back({{"check", r.check},
                  {"instance", r.instance},
                  {"value", number_json(r.value)},
                  {"bound", number_json(r.bound)},
                  {"violation", number_json(r.violation)},
                  {"pass", r.pass}});
  j["rows"] = rs;
  j["notes"] = notes;
  return j;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  // locale-independent decimal point
  for (char* p = buf; *p; ++p)
    if (*p == ',') *p = '.';
  return buf;
}

std::string report_csv(const Report& report) {
  std::string out = "check,instance,value,bound,violation,pass\n";
  for (const ReportRow& r : report.rows) {
    out += r.check + "," + std::to_string(r.instance) + "," + format_number(r.value) + "," +
           format_number(r.bound) + "," + format_number(r.violation) + "," +
           (r.pass ? "true" : "false") + "\n";
  }
  return out;
}

std::string table_csv(const DataTable& table) {
  std::string out;
  for (std::size_t k = 0; k < table.columns.size(); ++k)
    out += (k ? "," : "") + table.columns[k];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + format_number(row[k]);
    out += "\n";
  }
  return out;
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw ConfigError("format", "must be csv or json");
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  f.close();
  if (!f) throw IoError("write failed: " + path.string());
}

}  // namespace

std::vector<std::string> emit_report(const Report& report, const std::string& dir,
                                     ReportFormat format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  std::vector<std::string> written;
  const std::string stem = report.command.empty() ? "report" : report.command;
  const fs::path main = fs::path(dir) / (stem + (format == ReportFormat::Csv ? ".csv" : ".json"));
  write_file(main, format == ReportFormat::Csv ? report_csv(report)
                                               : report.to_json().dump(2) + "\n");
  written.push_back(main.string());
  for (const DataTable& t : report.tables) {
    const fs::path p = fs::path(dir) / (t.name + ".csv");
    write_file(p, table_csv(t));
    written.push_back(p.string());
  }
  return written;
}

// ---------------------------------------------------------------- drivers

namespace {

// Per-driver stream so that "all" reproduces each single-command run.
std::mt19937_64 driver_rng(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(salt)};
  return std::mt19937_64(seq);
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t salt) {
  return driver_rng(seed, salt)();
}

void run_evi(const ExperimentConfig& c, const ModelSpace& space, Report& rep) {
  EviSuiteOptions o;
  o.instances = c.evi.instances;
  o.delta = c.evi.delta;
  o.sample_box = *c.evi.sample_box;
  o.time_samples = c.evi.time_samples;
  o.tol_evi = o.tol_flow = o.tol_energy = c.evi.tolerance;
  o.seed = derived_seed(c.seed, 1);
  const EviReport r = run_evi_suite(space, o);
  for (const EviCheckRow& row : r.rows) {
    const std::string name = row.check == "evi_residual" ? "residual" : row.check;
    rep.add("evi." + name, row.instance, row.value, row.bound, row.violation, row.pass);
  }
  if (r.kappa_positive_growth_from_proof)
    rep.notes.push_back(
        "evi.distance_growth: kappa > 0 uses the estimate multiplied through by e^{-kappa t}");
}

void run_tataru(const ExperimentConfig& c, const ModelSpace& space, Report& rep) {
  const TataruParams& p = c.tataru;
  const SpacePoint pi = make_point(space, p.pi), mu = make_point(space, p.mu);
  TataruOptions to;
  to.keep_grid_values = p.grid;
  const TataruResult r = p.epsilon > 0.0 ? tataru_eps(space, p.epsilon, pi, mu, p.kappa, to)
                                         : tataru(space, pi, mu, p.kappa, to);
  rep.add("tataru.value", 0, r.value, r.value, 0.0, std::isfinite(r.value));
  for (std::size_t k = 0; k < r.minimizers.size(); ++k)
    rep.add("tataru.minimizer", k, r.minimizers[k], r.grid.t_cap, 0.0,
            r.minimizers[k] >= 0.0 && r.minimizers[k] <= r.grid.t_cap);
  if (p.grid) {
    DataTable t{"tataru_grid", {"t", "objective"}, {}};
    const double step = r.grid.t_cap / double(r.grid.points - 1);
    for (std::size_t k = 0; k < r.grid_values.size(); ++k)
      t.rows.push_back({double(k) * step, r.grid_values[k]});
    rep.tables.push_back(std::move(t));
  }

  // psi_eps: sup gap to sqrt(2r), positive derivative, monotone decrease in eps
  const std::vector<double> eps_list{1e-4, 1e-2, 0.5};
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const double eps = eps_list[e];
    double gap = 0.0, min_deriv = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 10000; ++k) {
      const double r0 = 4.0 * eps * k / 10000.0;
      gap = std::max(gap, std::abs(psi_eps(eps, r0) - std::sqrt(2.0 * r0)));
      min_deriv = std::min(min_deriv, psi_eps_derivative(eps, r0));
    }
    const double allowed = std::sqrt(2.0 * eps);
    rep.add("tataru.psi_gap", e, gap, allowed, gap - allowed, gap <= allowed);
    rep.add("tataru.psi_derivative", e, min_deriv, 0.0, -min_deriv, min_deriv > 0.0);
  }

  std::mt19937_64 rng = driver_rng(c.seed, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Box box = p.sample_box;
  const double tol = 1e-6;
  for (std::size_t i = 0; i < p.instances; ++i) {
    const SpacePoint m = space.sample(rng, box), mh = space.sample(rng, box);
    const SpacePoint n = space.sample(rng, box), nh = space.sample(rng, box);
    const double d_mn = tataru(space, m, n).value;
    const double lhs = d_mn - tataru(space, mh, nh).value;
    const double lip = space.distance(m, mh) + space.distance(n, nh);
    rep.add("tataru.lipschitz", i, lhs, lip, lhs - lip, lhs <= lip + tol);

    const double d_nnh = tataru(space, n, nh).value;
    const double tri = d_mn + d_nnh;
    const double d_mnh = tataru(space, m, nh).value;
    rep.add("tataru.triangle", i, d_mnh, tri, d_mnh - tri, d_mnh <= tri + tol);

    double slope = -std::numeric_limits<double>::infinity();
    for (double r : {1e-3, 1e-2, 1e-1})
      slope = std::max(slope, (tataru(space, space.flow(n, r), nh).value - d_nnh) / r);
    rep.add("tataru.flow_lipschitz", i, slope, 1.0, slope - 1.0, slope <= 1.0 + tol);

    const double k1 = space.kappa() - 1.0 - unit(rng), k2 = k1 + unit(rng);
    const double v1 = tataru(space, m, n, k1).value, v2 = tataru(space, m, n, k2).value;
    rep.add("tataru.kappa_monotone", i, v1, v2, v1 - v2, v1 <= v2 + 1e-9);

    for (double eps : {1e-4, 1e-2}) {
      const double g = std::abs(tataru_eps(space, eps, m, n).value - d_mn);
      const double allowed = std::sqrt(2.0 * eps);
      rep.add("tataru.smoothing_gap", i, g, allowed, g - allowed, g <= allowed);
    }
  }
}

void run_laplace(const ExperimentConfig& c, const ModelSpace& space, Report& rep) {
  const LaplaceParams& p = c.laplace;
  const SpacePoint pi = make_point(space, p.pi), mu = make_point(space, p.mu);
  const std::vector<VaradhanPoint> curve =
      varadhan_error_curve(space, p.epsilon, pi, mu, p.m, {});
  DataTable t{"laplace_curve", {"m", "n", "neg_log", "target", "abs_error"}, {}};
  for (const VaradhanPoint& v : curve)
    t.rows.push_back({double(v.m), double(v.n), v.neg_log, v.target, v.abs_error});

  const VaradhanPoint& first = curve.front();
  const VaradhanPoint& last = curve.back();
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const bool final_point = k + 1 == curve.size();
    const double bound = final_point ? p.tolerance : std::numeric_limits<double>::infinity();
    rep.add("laplace.varadhan_error", std::size_t(curve[k].m), curve[k].abs_error, bound,
            curve[k].abs_error - bound, curve[k].abs_error <= bound);
  }
  if (curve.size() > 1)
    rep.add("laplace.error_decrease", std::size_t(last.m), last.abs_error, first.abs_error,
            last.abs_error - first.abs_error, last.abs_error < first.abs_error);

  // Riemann refinement at a fixed m: the gap to the continuous value must
  // shrink as n grows.
  if (!p.n.empty()) {
    const std::vector<VaradhanPoint> ref =
        varadhan_error_curve(space, p.epsilon, pi, mu, {p.riemann_m}, p.n);
    const double cont = ref.front().neg_log;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < ref.size(); ++k) {
      t.rows.push_back({double(ref[k].m), double(ref[k].n), ref[k].neg_log, ref[k].target,
                        ref[k].abs_error});
      // |log L_n - log L| = m |neg_log_n - neg_log|
      const double gap = double(p.riemann_m) * std::abs(ref[k].neg_log - cont);
      rep.add("laplace.riemann_gap", std::size_t(ref[k].n), gap, prev, gap - prev,
              gap < prev);
      prev = gap;
    }
  }
  rep.tables.push_back(std::move(t));
}

void run_ham_chain(const ExperimentConfig& c, const ModelSpace& space, Report& rep) {
  for (std::size_t k = 0; k < c.ham_chain.links.size(); ++k) {
    const ChainLink link = chain_link_from_string(c.ham_chain.links[k]);
    ChainOptions o;
    o.samples = c.ham_chain.samples;
    o.seed = derived_seed(c.seed, 10 + std::uint64_t(link));
    o.sample_box = c.ham_chain.sample_box;
    const ChainReport r = chain_inequality_report(space, link, o);
    const double tol = link == ChainLink::FourToFive ? 1e-6
                       : link == ChainLink::FiveToSix ? 0.0
                                                      : 1e-9;
    const std::string name = "ham_chain." + to_string(link);
    for (const ChainSample& s : r.samples)
      rep.add(name, s.instance, s.lhs, s.rhs, s.violation, s.violation <= tol);
    if (r.unregularized_max_violation)
      rep.notes.push_back(name + ": max violation without the (1/m v h) factor = " +
                          format_number(*r.unregularized_max_violation));
  }
}

std::function<double(double)> make_h(const HSpec& h, const Box& box) {
  if (h.type == "constant") return [v = h.value](double) { return v; };
  if (h.type == "sine")
    return [a = h.amplitude, w = h.frequency](double x) { return a * std::sin(w * x); };
  return [s = h.slope, box](double x) { return s * std::clamp(x, box.lo, box.hi); };
}

ResolventOptions solver_options(const GridParams& g) {
  ResolventOptions o;
  o.half_width = g.half_width;
  o.dx = g.dx;
  o.dt = g.dt;
  o.controls = g.controls;
  o.control_bound = g.control_bound;
  o.tol = g.tol;
  return o;
}

// Random level-1 or Tataru pair for the 1-D OU-type space.
HamiltonianPair random_pair(const ModelSpace& s, Side side, std::mt19937_64& rng,
                            std::size_t k) {
  std::uniform_real_distribution<double> a(0.2, 2.0), c(0.1, 1.0), p(-2.0, 2.0);
  const double aa = a(rng);
  if (k % 3 == 2) {
    const double b = c(rng);
    const SpacePoint centre = s.point({p(rng)}), anchor = s.point({p(rng)});
    return build_tataru_pair(s, side, aa, b, 0.0, centre, anchor);
  }
  CylindricalTestFunction phi;
  std::vector<double> coef;
  for (std::size_t j = 0; j <= k % 2; ++j) {
    phi.anchors.push_back(s.point({p(rng)}));
    coef.push_back(c(rng));
  }
  phi.phi = affine(coef);
  const SpacePoint centre = s.point({p(rng)});
  return side == Side::Dagger ? build_cyl_dagger(s, aa, phi, centre)
                              : build_cyl_ddagger(s, aa, phi, centre);
}

void add_verdict(Report& rep, const std::string& name, std::size_t i,
                 const ViscosityReport& v, bool sub) {
  const double excess = sub ? v.slack : -v.slack;
  rep.add(name, i, v.slack, sub ? v.tolerance : -v.tolerance, excess - v.tolerance, v.pass);
  if (v.verdict == "marginal")
    rep.notes.push_back(name + " #" + std::to_string(i) + ": marginal (within 2x tolerance)");
}

void run_resolvent(const ExperimentConfig& c, const ModelSpace& space, Report& rep) {
  const ResolventParams& p = c.resolvent;
  const ResolventOptions o = solver_options(p.grid);
  const auto h = make_h(p.h, space.box());
  const ResolventResult r = solve_resolvent(space, p.lambda, h, o);
  DataTable t{"resolvent_u", {"x", "u"}, {}};
  for (std::size_t i = 0; i < r.u.grid.points; ++i)
    t.rows.push_back({r.u.grid.x(i), r.u.values[i]});
  rep.tables.push_back(std::move(t));

  rep.add("resolvent.converged", 0, r.last_increment, o.tol, r.last_increment - o.tol,
          r.last_increment <= o.tol);
  // round-off allowance on the increment ratio
  const double beta_bound = r.contraction * (1.0 + 1e-6);
  rep.add("resolvent.contraction", 0, r.worst_increment_ratio, beta_bound,
          r.worst_increment_ratio - beta_bound, r.worst_increment_ratio <= beta_bound);

  // Closed form for quadratic V and linear h: u = alpha x + lambda alpha^2 s^2 / 2,
  // alpha = s / (1 + lambda kappa), valid while the optimal control alpha is
  // admissible and the trajectories stay away from the clipping.
  const Potential& V = space.potential();
  if (p.h.type == "linear" && V.kind() == PotentialKind::Quadratic && V.kappa() > 0.0) {
    const double alpha = p.h.slope / (1.0 + p.lambda * V.kappa());
    if (std::abs(alpha) < o.control_bound) {
      const double beta = 0.5 * p.lambda * alpha * alpha;
      double err = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < r.u.grid.points; ++i) {
        const double x = r.u.grid.x(i);
        if (std::abs(x) > 2.0) continue;
        const double exact = alpha * x + beta;
        scale = std::max(scale, std::abs(exact));
        err = std::max(err, std::abs(r.u.values[i] - exact));
      }
      const double rel = err / scale;
      rep.add("resolvent.lq_oracle", 0, rel, 1e-2, rel - 1e-2, rel < 1e-2);
    }
  }

  // constant data and shift equivariance on the same grid
  const double cval = 0.7;
  const ResolventResult rc =
      solve_resolvent(space, p.lambda, [cval](double) { return cval; }, o);
  double cdev = 0.0;
  for (double v : rc.u.values) cdev = std::max(cdev, std::abs(v - cval));
  rep.add("resolvent.constant", 0, cdev, 1e-8, cdev - 1e-8, cdev <= 1e-8);
  const double shift = 0.3;
  const ResolventResult rs =
      solve_resolvent(space, p.lambda, [&](double x) { return h(x) + shift; }, o);
  double sdev = 0.0;
  for (std::size_t i = 0; i < r.u.values.size(); ++i)
    sdev = std::max(sdev, std::abs(rs.u.values[i] - r.u.values[i] - shift));
  rep.add("resolvent.shift", 0, sdev, 1e-8, sdev - 1e-8, sdev <= 1e-8);

  // viscosity verdicts
  const double tol = p.slack_dx_multiple * r.u.grid.dx();
  std::mt19937_64 rng = driver_rng(c.seed, 3);
  for (std::size_t i = 0; i < p.pairs; ++i)
    add_verdict(rep, "viscosity.subsolution", i,
                check_subsolution(r.u, space, random_pair(space, Side::Dagger, rng, i), h,
                                  p.lambda, tol),
                true);
  for (std::size_t i = 0; i < p.pairs; ++i)
    add_verdict(rep, "viscosity.supersolution", i,
                check_supersolution(r.u, space, random_pair(space, Side::Ddagger, rng, i), h,
                                    p.lambda, tol),
                false);
  GridFunction lifted = r.u;
  for (double& v : lifted.values) v += 0.5;
  for (std::size_t i = 0; i < std::min<std::size_t>(p.pairs, 10); ++i)
    add_verdict(rep, "viscosity.supersolution_lifted", i,
                check_supersolution(lifted, space, random_pair(space, Side::Ddagger, rng, i),
                                    h, p.lambda, tol),
                false);

  // designed failures: constant u far above the data at a pair whose g is tiny
  const Grid1D& g = r.u.grid;
  const double x0 = g.x(g.points * 3 / 5);
  const CylindricalTestFunction phi{affine({1.0}), {space.point({x0})}};
  const auto zero = [](double) { return 0.0; };
  const ViscosityReport bad_sub = check_subsolution(
      GridFunction::sample(g, [](double) { return 1.0; }), space,
      build_cyl_dagger(space, 0.01, phi, space.point({x0})), zero, p.lambda, tol);
  rep.add("viscosity.designed_failure", 0, bad_sub.slack, tol, tol - bad_sub.slack,
          !bad_sub.pass);
  const ViscosityReport bad_sup = check_supersolution(
      GridFunction::sample(g, [](double) { return -1.0; }), space,
      build_cyl_ddagger(space, 0.01, phi, space.point({x0})), zero, p.lambda, tol);
  rep.add("viscosity.designed_failure", 1, bad_sup.slack, -tol, tol + bad_sup.slack,
          !bad_sup.pass);
}

// Smooth bounded random data.
std::function<double(double)> random_h(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> amp(-1.0, 1.0), w(0.3, 3.0), ph(0.0, 6.283185307179586);
  std::array<double, 9> k{};
  for (std::size_t j = 0; j < 3; ++j) {
    k[3 * j] = amp(rng);
    k[3 * j + 1] = w(rng);
    k[3 * j + 2] = ph(rng);
  }
  return [k](double x) {
    double s = 0.0;
    for (std::size_t j = 0; j < 3; ++j) s += k[3 * j] * std::sin(k[3 * j + 1] * x + k[3 * j + 2]);
    return s;
  };
}

void run_comparison(const ExperimentConfig& c, const ModelSpace& space, Report& rep) {
  const ComparisonParams& p = c.comparison;
  const ResolventOptions o = solver_options(p.grid);
  const Grid1D grid = Grid1D::with_spacing(o.half_width, o.dx);
  std::mt19937_64 rng = driver_rng(c.seed, 4);
  std::uniform_real_distribution<double> lift(0.0, 0.5), w(0.3, 3.0), ph(0.0, 6.283185307179586);

  auto record = [&](std::size_t i, const std::function<double(double)>& hd,
                    const std::function<double(double)>& hu, const std::string& name,
                    bool near_equality) {
    const ResolventResult u = solve_resolvent(space, p.lambda, hd, o);
    const ResolventResult v = solve_resolvent(space, p.lambda, hu, o);
    const ComparisonResult r = comparison_gap(u.u, v.u, GridFunction::sample(grid, hd),
                                              GridFunction::sample(grid, hu), o.tol);
    rep.add(name, i, r.lhs, r.rhs, r.lhs - r.rhs - r.tolerance, r.pass);
    if (near_equality) {
      const double d = std::abs(r.lhs - r.rhs);
      rep.add(name + "_equality", i, d, r.tolerance, d - r.tolerance, d <= r.tolerance);
    }
  };

  {
    std::mt19937_64 shift_rng = driver_rng(c.seed, 5);
    const auto hd = random_h(shift_rng);
    record(0, hd, [hd, s = p.shift](double x) { return hd(x) - s; }, "comparison.shift", true);
  }
  for (std::size_t i = 0; i < p.pairs; ++i) {
    const auto hd = random_h(rng);
    const double c0 = lift(rng), c1 = lift(rng), om = w(rng), phase = ph(rng);
    // h_ddag = h_dag - (nonnegative bump)
    const auto hu = [=](double x) {
      return hd(x) - c0 - c1 * 0.5 * (1.0 + std::sin(om * x + phase));
    };
    record(i, hd, hu, "comparison.random", false);
  }
}

}  // namespace

Report run_experiment(const ExperimentConfig& c) {
  Report rep;
  rep.command = c.command;
  rep.config = c.source;
  rep.config["seed"] = c.seed;
  const ModelSpace space = c.space.build();
  const bool all = c.command == "all";
  const bool one_d = space.kind() == SpaceKind::Euclidean && space.size() == 1;
  if (all || c.command == "evi-check") run_evi(c, space, rep);
  if (all || c.command == "tataru") run_tataru(c, space, rep);
  if (all || c.command == "laplace-converge") run_laplace(c, space, rep);
  if (all || c.command == "ham-chain") run_ham_chain(c, space, rep);
  if (all && !one_d)
    rep.notes.push_back("resolvent and comparison skipped: they need a 1-D euclidean space");
  if ((all && one_d) || c.command == "resolvent") run_resolvent(c, space, rep);
  if ((all && one_d) || c.command == "comparison") run_comparison(c, space, rep);
  return rep;
}

}  // namespace hjflow
