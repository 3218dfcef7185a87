#include "allee/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "allee/host_parasitoid.hpp"
#include "allee/scalar_map.hpp"

namespace allee::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kSchemaVersion = "1";
constexpr const char* kOutputDirEnv = "ALLEE_OUTPUT_DIR";

// ---------------------------------------------------------------------------
// Output documents
// ---------------------------------------------------------------------------

using Value = std::variant<std::monostate, double, long, std::string, bool, Range>;

struct Entry {
  std::string key;
  Value value;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
  // Columns from this index on are emitted as one JSON array "samples".
  std::optional<std::size_t> samples_from;
};

struct Document {
  std::string command;
  std::vector<Entry> config;
  Table table;
  std::string trailer_name;  // e.g. "verdict"; empty for none
  std::vector<Entry> trailer;
};

std::string range_text(const Range& r) {
  return format_double(r.lo) + ":" + format_double(r.hi) + ":" + std::to_string(r.steps);
}

std::string text_of(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(long n) const { return std::to_string(n); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const Range& r) const { return range_text(r); }
  };
  return std::visit(Visitor{}, v);
}

json json_of(const Value& v) {
  struct Visitor {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(double d) const { return d; }
    json operator()(long n) const { return n; }
    json operator()(const std::string& s) const { return s; }
    json operator()(bool b) const { return b; }
    json operator()(const Range& r) const {
      return json{{"lo", r.lo}, {"hi", r.hi}, {"steps", r.steps}};
    }
  };
  return std::visit(Visitor{}, v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string render_csv(const Document& doc) {
  std::ostringstream os;
  os << "# allee " << doc.command << "\n";
  os << "# schema_version=" << kSchemaVersion << "\n";
  for (const auto& e : doc.config) os << "# " << e.key << "=" << text_of(e.value) << "\n";
  for (std::size_t i = 0; i < doc.table.columns.size(); ++i) {
    os << (i ? "," : "") << doc.table.columns[i];
  }
  os << "\n";
  for (const auto& row : doc.table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << csv_field(text_of(row[i]));
    }
    os << "\n";
  }
  if (!doc.trailer_name.empty()) {
    os << "# " << doc.trailer_name;
    for (const auto& e : doc.trailer) os << " " << e.key << "=" << text_of(e.value);
    os << "\n";
  }
  return os.str();
}

std::string render_json(const Document& doc) {
  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = doc.command;
  json config = json::object();
  for (const auto& e : doc.config) config[e.key] = json_of(e.value);
  out["config"] = config;

  json rows = json::array();
  const auto& t = doc.table;
  for (const auto& row : t.rows) {
    json obj = json::object();
    const std::size_t plain = t.samples_from.value_or(row.size());
    for (std::size_t i = 0; i < plain; ++i) obj[t.columns[i]] = json_of(row[i]);
    if (t.samples_from) {
      json samples = json::array();
      for (std::size_t i = plain; i < row.size(); ++i) samples.push_back(json_of(row[i]));
      obj["samples"] = samples;
    }
    rows.push_back(obj);
  }
  out[t.name] = rows;

  if (!doc.trailer_name.empty()) {
    json trailer = json::object();
    for (const auto& e : doc.trailer) trailer[e.key] = json_of(e.value);
    out[doc.trailer_name] = trailer;
  }
  return out.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Options
// ---------------------------------------------------------------------------

struct Options {
  std::string command;
  std::string model = "system";
  std::optional<double> a;
  std::optional<ParamSpec> r;
  std::optional<ParamSpec> beta;
  std::optional<double> x0;
  double y0 = 0.0;
  long steps = 1000;
  long stride = 1;
  long transient = 2000;
  long record = 64;
  double tol = 1e-6;
  std::string format = "csv";
  std::string output;
};

double require_a(const Options& o) {
  if (!o.a) throw DomainError("missing required option --a");
  return *o.a;
}

double require_value(const std::optional<ParamSpec>& p, const std::string& name) {
  if (!p) throw DomainError("missing required option --" + name);
  if (p->is_range()) throw DomainError("--" + name + " must be a single value here");
  return *p->value;
}

void check_positive(long v, const std::string& name) {
  if (v < 1) throw DomainError("--" + name + " must be a positive integer");
}

std::vector<Entry> common_config(const Options& o) {
  std::vector<Entry> c;
  c.push_back({"format", o.format});
  return c;
}

std::string equilibrium_condition(double lhs, double rhs, const std::string& l,
                                  const std::string& r) {
  const char* rel = lhs < rhs ? "<" : lhs > rhs ? ">" : "=";
  return l + rel + r;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

std::string stability_of(FixedPointClass c) {
  if (c == FixedPointClass::Stable) return "Stable";
  if (c == FixedPointClass::NonHyperbolic) return "NonHyperbolic";
  return "Unstable";
}

void add_threshold(Table& t, const std::string& name, std::optional<double> v) {
  if (!v) return;
  std::vector<Value> row(t.columns.size());
  row[0] = std::string("threshold");
  row[1] = name;
  row[2] = *v;
  t.rows.push_back(std::move(row));
}

Document equilibria_scalar(const Options& o) {
  const ScalarParams<double> p{require_value(o.r, "r"), require_a(o)};
  validate(p);
  Document doc;
  doc.command = "equilibria";
  doc.config = {{"model", std::string("scalar")}, {"a", p.a}, {"r", p.r}};
  for (auto& e : common_config(o)) doc.config.push_back(e);

  Table& t = doc.table;
  t.name = "equilibria";
  t.columns = {"kind", "name", "x", "multiplier", "class", "locally_stable", "schwarzian"};
  const char* names[3] = {"0", "a", "1"};
  const auto eqs = classify_scalar_equilibria(p);
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    const auto& e = eqs[i];
    Value sf;
    if (e.schwarzian) sf = *e.schwarzian;
    t.rows.push_back({std::string("fixed_point"), std::string(names[i]), e.x, e.multiplier,
                      std::string(to_string(e.stability)), e.locally_stable, sf});
  }
  if (const auto cycle = find_two_cycle(p)) {
    const std::string cls = to_string(classify_multiplier(cycle->multiplier));
    const bool stable = std::abs(cycle->multiplier) < 1;
    t.rows.push_back({std::string("cycle"), std::string("x1"), cycle->x1, cycle->multiplier,
                      cls, stable, Value{}});
    t.rows.push_back({std::string("cycle"), std::string("x2"), cycle->x2, cycle->multiplier,
                      cls, stable, Value{}});
  }
  add_threshold(t, "r0", allee_threshold_r0(p.a));
  add_threshold(t, "x_m", critical_point_xm(p));
  add_threshold(t, "x_a", solve_xa(p));
  return doc;
}

Document equilibria_system(const Options& o) {
  const SystemParams<double> p{require_value(o.r, "r"), require_a(o),
                               require_value(o.beta, "beta")};
  validate(p);
  Document doc;
  doc.command = "equilibria";
  doc.config = {{"model", std::string("system")}, {"a", p.a}, {"r", p.r}, {"beta", p.beta}};
  for (auto& e : common_config(o)) doc.config.push_back(e);

  Table& t = doc.table;
  t.name = "equilibria";
  t.columns = {"kind",       "name",       "x",          "y",
               "lambda1_re", "lambda1_im", "lambda2_re", "lambda2_im",
               "stability",  "class",      "regime",     "rationale"};
  auto eig_cells = [](const EigenPair<double>& e) {
    return std::vector<Value>{e.first.real(), e.first.imag(), e.second.real(),
                              e.second.imag()};
  };

  const double r0 = allee_threshold_r0(p.a);
  const std::string r_vs_r0 = equilibrium_condition(p.r, r0, "r", "r0");
  const std::string rationale[3] = {
      "multipliers exp(-ar) and 0",
      equilibrium_condition(p.beta * p.a, 1.0, "beta*a", "1"),
      r_vs_r0 + "; " + equilibrium_condition(p.beta, 1.0, "beta", "1")};
  const auto boundary = boundary_equilibria_report(p);
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const auto& b = boundary[i];
    std::vector<Value> row{std::string("boundary"), b.name, b.location.x(), b.location.y()};
    for (auto& c : eig_cells(b.eigenvalues)) row.push_back(c);
    row.push_back(stability_of(b.cls));
    row.push_back(std::string(to_string(b.cls)));
    row.push_back(Value{});
    row.push_back(rationale[i]);
    t.rows.push_back(std::move(row));
  }

  const auto th = solve_stability_thresholds(p);
  const auto interior = find_interior_equilibria(p);
  for (std::size_t i = 0; i < interior.size(); ++i) {
    const auto& e = interior[i];
    const auto c = classify_interior(e.x, e.eigenvalues, p, th);
    std::vector<Value> row{std::string("interior"), "E*" + std::to_string(i + 1), e.x, e.y};
    for (auto& cell : eig_cells(e.eigenvalues)) row.push_back(cell);
    row.push_back(stability_of(c.cls));
    row.push_back(std::string(to_string(c.cls)));
    row.push_back(std::string(to_string(c.regime_class)));
    row.push_back(c.rationale);
    t.rows.push_back(std::move(row));
  }

  add_threshold(t, "r0", r0);
  add_threshold(t, "x_hat", th.x_hat);
  add_threshold(t, "x_m", th.x_m);
  add_threshold(t, "x_a", solve_xa(p.host()));
  add_threshold(t, "x_D", th.x_D);
  add_threshold(t, "x_T", th.x_T);
  return doc;
}

Document bifurcation_scalar(const Options& o) {
  const double a = require_a(o);
  if (!o.r || !o.r->is_range()) throw DomainError("--r must be a range lo:hi:steps");
  check_positive(o.transient, "transient");
  check_positive(o.record, "record");
  if (!(o.tol > 0)) throw DomainError("--tol must be positive");
  validate(ScalarParams<double>{o.r->range->lo, a});
  const Range g = *o.r->range;
  const double seed = o.x0.value_or(default_sweep_seed(a));
  if (!(seed >= 0)) throw DomainError("seed --x0 must be nonnegative");

  Document doc;
  doc.command = "bifurcation";
  doc.config = {{"model", std::string("scalar")}, {"a", a}, {"r", g},
                {"seed", seed}, {"transient", o.transient}, {"record", o.record},
                {"distinct_tol", o.tol}};
  for (auto& e : common_config(o)) doc.config.push_back(e);

  Table& t = doc.table;
  t.name = "rows";
  t.columns = {"r", "distinct"};
  for (long i = 0; i < o.record; ++i) t.columns.push_back("s" + std::to_string(i));
  t.samples_from = 2;

  const auto rows = bifurcation_sweep(a, g.lo, g.hi, g.steps, o.transient,
                                      static_cast<std::size_t>(o.record),
                                      std::optional<double>(seed));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    std::vector<Value> cells{g.at(i), static_cast<long>(count_distinct(row.samples, o.tol))};
    for (double s : row.samples) cells.push_back(s);
    t.rows.push_back(std::move(cells));
  }
  return doc;
}

Document bifurcation_system(const Options& o) {
  const double a = require_a(o);
  if (!o.r || !o.beta) throw DomainError("system sweeps need both --r and --beta");
  if (o.r->is_range() == o.beta->is_range()) {
    throw DomainError("exactly one of --r and --beta must be a range lo:hi:steps");
  }
  check_positive(o.transient, "transient");
  check_positive(o.record, "record");
  if (!(o.tol > 0)) throw DomainError("--tol must be positive");
  const bool sweep_beta = o.beta->is_range();
  const Range g = sweep_beta ? *o.beta->range : *o.r->range;

  Document doc;
  doc.command = "bifurcation";
  doc.config = {{"model", std::string("system")}, {"a", a}};
  doc.config.push_back({"r", sweep_beta ? Value{*o.r->value} : Value{g}});
  doc.config.push_back({"beta", sweep_beta ? Value{g} : Value{*o.beta->value}});
  doc.config.push_back({"seed", std::string("interior equilibrium + (0.01, 0); "
                                            "((1+a)/2 + 0.01, 0.1) when none")});
  doc.config.push_back({"transient", o.transient});
  doc.config.push_back({"record", o.record});
  doc.config.push_back({"samples", std::string("x")});
  doc.config.push_back({"distinct_tol", o.tol});
  for (auto& e : common_config(o)) doc.config.push_back(e);

  Table& t = doc.table;
  t.name = "rows";
  t.columns = {sweep_beta ? "beta" : "r", "seed_x", "seed_y", "distinct"};
  for (long i = 0; i < o.record; ++i) t.columns.push_back("s" + std::to_string(i));
  t.samples_from = 4;

  for (std::size_t i = 0; i < g.steps; ++i) {
    const double v = g.at(i);
    const SystemParams<double> p{sweep_beta ? *o.r->value : v, a,
                                 sweep_beta ? v : *o.beta->value};
    validate(p);
    State<double> s((1 + a) / 2 + 0.01, 0.1);
    const auto eqs = find_interior_equilibria(p);
    if (!eqs.empty()) s = State<double>(eqs.front().x + 0.01, eqs.front().y);
    const State<double> seed = s;
    auto step = [&] {
      s = s.x() < 1e-15 ? State<double>::Zero() : eval_system(s, p);
    };
    for (long k = 0; k < o.transient; ++k) step();
    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(o.record));
    for (long k = 0; k < o.record; ++k) {
      step();
      samples.push_back(s.x() < 1e-15 ? 0.0 : s.x());
    }
    std::vector<Value> cells{v, seed.x(), seed.y(),
                             static_cast<long>(count_distinct(samples, o.tol))};
    for (double x : samples) cells.push_back(x);
    t.rows.push_back(std::move(cells));
  }
  return doc;
}

Document simulate(const Options& o) {
  const bool scalar = o.model == "scalar";
  const double a = require_a(o);
  const double r = require_value(o.r, "r");
  const double beta = scalar ? 1.0 : require_value(o.beta, "beta");
  if (!o.x0) throw DomainError("missing required option --x0");
  check_positive(o.steps, "steps");
  check_positive(o.stride, "stride");
  const SystemParams<double> p{r, a, beta};
  validate(p);
  const State<double> s0(*o.x0, scalar ? 0.0 : o.y0);

  Document doc;
  doc.command = "simulate";
  doc.config = {{"model", o.model}, {"a", a}, {"r", r}};
  if (!scalar) doc.config.push_back({"beta", beta});
  doc.config.push_back({"x0", s0.x()});
  if (!scalar) doc.config.push_back({"y0", s0.y()});
  doc.config.push_back({"steps", o.steps});
  doc.config.push_back({"stride", o.stride});
  for (auto& e : common_config(o)) doc.config.push_back(e);

  OrbitOptions opt;
  opt.stride = o.stride;
  // On the invariant axis y = 0 the system reduces to the scalar map.
  const auto orbit = simulate_orbit(s0, p, o.steps, opt);

  Table& t = doc.table;
  t.name = "orbit";
  t.columns = scalar ? std::vector<std::string>{"t", "x"}
                     : std::vector<std::string>{"t", "x", "y"};
  for (std::size_t i = 0; i < orbit.states.size(); ++i) {
    const auto& s = orbit.states[i];
    std::vector<Value> row{static_cast<long>(i) * orbit.stride, s.x()};
    if (!scalar) row.push_back(s.y());
    t.rows.push_back(std::move(row));
  }

  std::string target = orbit.verdict.target;
  if (scalar) {
    if (target == "E0") target = "0";
    else if (target == "E1") target = "a";
    else if (target == "E2") target = "1";
  }
  doc.trailer_name = "verdict";
  doc.trailer = {{"kind", std::string(to_string(orbit.verdict.kind))},
                 {"target", target},
                 {"period", static_cast<long>(orbit.verdict.period)},
                 {"steps", orbit.steps},
                 {"x", orbit.verdict.point.x()}};
  if (!scalar) doc.trailer.push_back({"y", orbit.verdict.point.y()});
  doc.trailer.push_back({"max_x", orbit.max_state.x()});
  if (!scalar) doc.trailer.push_back({"max_y", orbit.max_state.y()});
  return doc;
}

Document beta_c(const Options& o) {
  const double a = require_a(o);
  const double r = require_value(o.r, "r");
  if (!(o.tol > 0)) throw DomainError("--tol must be positive");
  const auto res = find_beta_c(a, r, o.tol);

  Document doc;
  doc.command = "beta-c";
  doc.config = {{"a", a}, {"r", r}, {"tol", o.tol}};
  for (auto& e : common_config(o)) doc.config.push_back(e);
  Table& t = doc.table;
  t.name = "result";
  t.columns = {"beta_c", "width", "x", "x_D", "iterations"};
  t.rows.push_back({res.beta_c, res.width, res.x, res.x_D, static_cast<long>(res.iterations)});
  return doc;
}

void write_output(const Options& o, const std::string& text, std::ostream& out) {
  if (o.output.empty()) {
    out << text;
    return;
  }
  const std::string path = resolve_output_path(o.output);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DomainError("cannot open output file " + path);
  f << text;
  if (!f) throw DomainError("failed writing output file " + path);
}

}  // namespace

double Range::at(std::size_t i) const {
  if (i + 1 == steps) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1);
}

ParamSpec parse_param(const std::string& text, const std::string& name) {
  auto number = [&](std::string_view s) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
      throw DomainError("--" + name + ": '" + std::string(s) + "' is not a number");
    }
    return v;
  };
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) return {number(text), std::nullopt};

  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos || text.find(':', c2 + 1) != std::string::npos) {
    throw DomainError("--" + name + ": ranges are written lo:hi:steps");
  }
  const std::string_view sv(text);
  const double lo = number(sv.substr(0, c1));
  const double hi = number(sv.substr(c1 + 1, c2 - c1 - 1));
  const std::string_view steps_text = sv.substr(c2 + 1);
  std::size_t steps = 0;
  const auto [ptr, ec] =
      std::from_chars(steps_text.data(), steps_text.data() + steps_text.size(), steps);
  if (ec != std::errc() || ptr != steps_text.data() + steps_text.size()) {
    throw DomainError("--" + name + ": step count must be an integer");
  }
  if (!(lo < hi)) throw DomainError("--" + name + ": empty range, need lo < hi");
  if (steps < 2) throw DomainError("--" + name + ": a range needs at least 2 steps");
  return {std::nullopt, Range{lo, hi, steps}};
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string resolve_output_path(const std::string& path) {
  const std::filesystem::path p(path);
  const char* dir = std::getenv(kOutputDirEnv);
  if (p.is_absolute() || dir == nullptr || *dir == '\0') return path;
  return (std::filesystem::path(dir) / p).string();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Allee-Ricker map and host-parasitoid dynamics", "allee"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "key=value file supplying any option; the command line wins");

  Options o;
  std::string r_text, beta_text;
  double a = 0, x0 = 0;
  auto* a_opt = app.add_option("--a", a, "Allee threshold, 0 < a < 1");
  auto* r_opt = app.add_option("--r", r_text, "growth rate: value or lo:hi:steps");
  auto* beta_opt = app.add_option("--beta", beta_text, "parasitoid conversion: value or lo:hi:steps");
  auto* x0_opt = app.add_option("--x0", x0, "initial host density (sweep seed for scalar sweeps)");
  app.add_option("--y0", o.y0, "initial parasitoid density")->capture_default_str();
  app.add_option("--model", o.model, "scalar or system")
      ->check(CLI::IsMember({"scalar", "system"}))
      ->capture_default_str();
  app.add_option("--steps", o.steps, "simulation step budget")->capture_default_str();
  app.add_option("--stride", o.stride, "keep every stride-th state")->capture_default_str();
  app.add_option("--transient", o.transient, "sweep steps discarded per grid point")
      ->capture_default_str();
  app.add_option("--record", o.record, "sweep samples kept per grid point")->capture_default_str();
  app.add_option("--tol", o.tol, "beta-c bisection tolerance; sweep distinct-value tolerance")
      ->capture_default_str();
  app.add_option("--format", o.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--output", o.output, "output file (relative paths resolve under $" +
                                           std::string(kOutputDirEnv) + ")");

  auto* eq_cmd = app.add_subcommand("equilibria", "fixed points, classes and thresholds");
  auto* bif_cmd = app.add_subcommand("bifurcation", "parameter sweep of recorded orbit samples");
  std::string bif_model;
  bif_cmd->add_option("model", bif_model, "scalar or system")
      ->required()
      ->check(CLI::IsMember({"scalar", "system"}));
  auto* sim_cmd = app.add_subcommand("simulate", "iterate one orbit and report a verdict");
  auto* bc_cmd = app.add_subcommand("beta-c", "Neimark-Sacker value of beta for given a, r");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (a_opt->count() > 0) o.a = a;
    if (x0_opt->count() > 0) o.x0 = x0;
    if (r_opt->count() > 0) o.r = parse_param(r_text, "r");
    if (beta_opt->count() > 0) o.beta = parse_param(beta_text, "beta");

    Document doc;
    if (eq_cmd->parsed()) {
      doc = o.model == "scalar" ? equilibria_scalar(o) : equilibria_system(o);
    } else if (bif_cmd->parsed()) {
      o.model = bif_model;
      doc = bif_model == "scalar" ? bifurcation_scalar(o) : bifurcation_system(o);
    } else if (sim_cmd->parsed()) {
      doc = simulate(o);
    } else if (bc_cmd->parsed()) {
      doc = beta_c(o);
    }
    write_output(o, o.format == "json" ? render_json(doc) : render_csv(doc), out);
    return kExitOk;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace allee::cli
