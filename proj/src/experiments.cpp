#include "ldm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "ldm/csv.hpp"
#include "ldm/errors.hpp"
#include "ldm/gaussian.hpp"
#include "ldm/lattice.hpp"
#include "ldm/mine.hpp"
#include "ldm/properties.hpp"
#include "ldm/scorefield.hpp"
#include "ldm/seed.hpp"
#include "ldm/svg.hpp"
#include "ldm/toric.hpp"

namespace ldm {

using nlohmann::json;

namespace {

enum class Kind { integer, number, boolean, string, numbers, integers, intervals };

struct Param {
  std::string key;
  Kind kind;
  json fallback;
  std::string doc;
  std::vector<std::string> choices = {};
};

json default_p_grid() {
  json g = json::array();
  for (int i = 0; i <= 20; ++i) g.push_back(i / 40.0);
  return g;
}

const std::map<std::string, std::vector<Param>>& table() {
  static const std::map<std::string, std::vector<Param>> t = {
      {"toric",
       {
           {"L", Kind::integer, 3, "torus size (2 or 3)"},
           {"r", Kind::integer, 1, "buffer width around the central edge"},
           {"p_grid", Kind::numbers, default_p_grid(), "flip probabilities in [0, 1/2]"},
           {"anyons", Kind::boolean, true, "also assemble the CMI from the anyon entropy formula"},
       }},
      {"gauss-recovery",
       {
           {"dim", Kind::integer, 1, "lattice dimension (1 or 2)"},
           {"L", Kind::integer, 16, "lattice length"},
           {"periodic", Kind::boolean, false, "periodic boundary"},
           {"coupling", Kind::number, 0.4, "nearest-neighbour precision coupling"},
           {"steps", Kind::integer, 8, "number of diffusion steps N"},
           {"r_values", Kind::integers, json{0, 1, 2, 3, 4}, "buffer widths to sweep"},
           {"k", Kind::integer, 1, "block size"},
           {"t_max", Kind::number, 0.98, "final forward time"},
           {"eps", Kind::number, 0.01, "target total error for the radius bound"},
       }},
      {"sample",
       {
           {"dataset", Kind::string, "two_point", "dataset source", {"two_point", "single_point", "csv"}},
           {"point", Kind::numbers, json{0.5, -0.25}, "the data point of the single_point dataset"},
           {"data_path", Kind::string, "", "CSV of data points for dataset = csv"},
           {"eta", Kind::number, 0.0, "backward noise parameter (>= 0)"},
           {"mode", Kind::string, "global", "score used per step", {"global", "local", "hybrid"}},
           {"r", Kind::integer, 1, "buffer width of local scores"},
           {"k", Kind::integer, 1, "block size of local updates"},
           {"intervals", Kind::intervals, json{{0.2, 0.5}}, "times where hybrid mode uses the global score"},
           {"steps", Kind::integer, 200, "backward steps"},
           {"t_min", Kind::number, 0.01, "stopping time"},
           {"t_max", Kind::number, 1.0, "starting time"},
           {"draws", Kind::integer, 1000, "number of samples"},
           {"denoise_final", Kind::boolean, true, "report posterior means at t_min"},
       }},
      {"mine",
       {
           {"data", Kind::string, "gaussian", "sample source", {"gaussian", "independent", "csv"}},
           {"rho", Kind::number, 0.8, "correlation of the gaussian source"},
           {"samples", Kind::integer, 20000, "number of generated samples"},
           {"data_path", Kind::string, "", "CSV of samples for data = csv"},
           {"a_columns", Kind::integer, 1, "leading CSV columns forming X_A"},
           {"batch", Kind::integer, 256, "minibatch size"},
           {"learning_rate", Kind::number, 1e-3, "Adam step size"},
           {"iterations", Kind::integer, 20000, "training iterations"},
           {"ema_rate", Kind::number, 0.001, "moving-average rate"},
           {"hidden", Kind::integer, 64, "hidden layer width"},
           {"eval_shuffles", Kind::integer, 4, "shuffles pooled in the final evaluation"},
       }},
      {"reorg",
       {
           {"dim", Kind::integer, 2, "lattice dimension (1 or 2)"},
           {"L", Kind::integer, 11, "lattice length"},
           {"k", Kind::integer, 1, "block size"},
           {"r", Kind::integer, 2, "separation parameter"},
           {"periodic", Kind::boolean, false, "periodic boundary"},
       }},
      {"fawzi-check",
       {
           {"discrete_instances", Kind::integer, 1000, "random discrete instances"},
           {"gaussian_instances", Kind::integer, 500, "random Gaussian instances"},
       }},
  };
  return t;
}

json kind_schema(const Param& p) {
  switch (p.kind) {
    case Kind::integer: return {{"type", "integer"}};
    case Kind::number: return {{"type", "number"}};
    case Kind::boolean: return {{"type", "boolean"}};
    case Kind::string: {
      json s = {{"type", "string"}};
      if (!p.choices.empty()) s["enum"] = p.choices;
      return s;
    }
    case Kind::numbers: return {{"type", "array"}, {"items", {{"type", "number"}}}};
    case Kind::integers: return {{"type", "array"}, {"items", {{"type", "integer"}}}};
    case Kind::intervals:
      return {{"type", "array"},
              {"items", {{"type", "array"}, {"items", {{"type", "number"}}}, {"minItems", 2}, {"maxItems", 2}}}};
  }
  return {};
}

bool matches(const Param& p, const json& v) {
  switch (p.kind) {
    case Kind::integer: return v.is_number_integer();
    case Kind::number: return v.is_number();
    case Kind::boolean: return v.is_boolean();
    case Kind::string:
      return v.is_string() &&
             (p.choices.empty() || std::find(p.choices.begin(), p.choices.end(), v.get<std::string>()) != p.choices.end());
    case Kind::numbers:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
    case Kind::integers:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_integer(); });
    case Kind::intervals:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) {
               return e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number();
             });
  }
  return false;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

// Library constructors report bad parameters as invalid_argument.
template <class F>
auto checked(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace fs = std::filesystem;

class Output {
public:
  explicit Output(const ExperimentConfig& cfg) : dir_(cfg.out) { fs::create_directories(dir_); }

  std::string path(const std::string& name) {
    files_.push_back(name);
    return (dir_ / name).string();
  }

  std::vector<std::string> finish(const ExperimentConfig& cfg) {
    json manifest = {{"experiment", cfg.experiment},
                     {"seed", cfg.seed},
                     {"version", kVersion},
                     {"config", {{"experiment", cfg.experiment}, {"seed", cfg.seed}, {"plot", cfg.plot}, {"params", cfg.params}}},
                     {"outputs", files_}};
    std::ofstream out(path("manifest.json"));
    out << manifest.dump(2) << '\n';
    return files_;
  }

private:
  fs::path dir_;
  std::vector<std::string> files_;
};

std::vector<double> as_doubles(const json& v) { return v.get<std::vector<double>>(); }

// ---------------------------------------------------------------- toric

std::vector<std::string> run_toric(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const int L = p["L"];
  const int r = p["r"];
  const auto grid = as_doubles(p["p_grid"]);
  const bool anyons = p["anyons"];
  require(L == 2 || L == 3, "toric: L must be 2 or 3 for exact enumeration");
  require(r >= 0, "toric: r must be nonnegative");
  require(!grid.empty(), "toric: p_grid is empty");
  for (double v : grid) require(v >= 0.0 && v <= 0.5, "toric: p_grid values must lie in [0, 1/2]");

  const TorusCode code(L);
  const Tripartition part = edge_tripartition(code, Region({central_edge(code)}), r);
  const auto rows = toric_cmi_sweep(code, grid, part);
  std::vector<double> via;
  if (anyons) {
    for (const auto& row : rows) via.push_back(cmi_via_anyons(code, part, row.p));
  }

  Output out(cfg);
  {
    std::vector<std::string> header{"p", "r", "cmi"};
    if (anyons) header.push_back("cmi_anyons");
    CsvWriter csv(out.path("toric_cmi.csv"), header);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      csv.cell(rows[i].p).cell(r).cell(rows[i].cmi);
      if (anyons) csv.cell(via[i]);
      csv.end_row();
    }
    auto peak = std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.cmi < b.cmi; });
    csv.comment("L=" + std::to_string(L) + " A=edge " + std::to_string(part.a.sites()[0]) +
                " |B|=" + std::to_string(part.b.size()) + " |C|=" + std::to_string(part.c.size()) +
                " peak_p=" + format_double(peak->p) + " peak_cmi=" + format_double(peak->cmi));
  }
  if (cfg.plot) {
    Series s{"exact", {}, {}};
    for (const auto& row : rows) {
      s.x.push_back(row.p);
      s.y.push_back(row.cmi);
    }
    write_line_chart(out.path("toric_cmi.svg"), "toric code CMI, L=" + std::to_string(L), "p", "I(A:C|B) [nats]", {s});
  }
  return out.finish(cfg);
}

// ------------------------------------------------------- gauss-recovery

std::vector<std::string> run_gauss_recovery(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const int dim = p["dim"];
  const int L = p["L"];
  const bool periodic = p["periodic"];
  const double coupling = p["coupling"];
  const int steps = p["steps"];
  const auto rs = p["r_values"].get<std::vector<int>>();
  const int k = p["k"];
  const double t_max = p["t_max"];
  const double eps = p["eps"];
  require(steps >= 1, "gauss-recovery: steps must be positive");
  require(!rs.empty(), "gauss-recovery: r_values is empty");
  for (int r : rs) require(r >= 0, "gauss-recovery: r values must be nonnegative");
  require(t_max > 0.0 && t_max < 1.0, "gauss-recovery: t_max must lie in (0, 1)");
  require(eps > 0.0 && eps < 1.0, "gauss-recovery: eps must lie in (0, 1)");
  const Lattice lat = checked([&] { return Lattice(dim, L, periodic); });
  require(lat.size() <= 64, "gauss-recovery: at most 64 sites");
  require(k >= 1 && k <= L, "gauss-recovery: k must lie in [1, L]");
  const GaussianDist p0 = checked([&] { return gmrf(lat, coupling); });

  RecoveryOptions opts;
  opts.k = k;
  opts.t_max = t_max;
  struct Row {
    int r;
    bool full;
    RecoveryResult res;
  };
  std::vector<Row> rows;
  for (int r : rs) rows.push_back({r, false, multi_step_local_recovery(p0, lat, steps, r, opts)});
  const int full_r = L;
  rows.push_back({full_r, true, multi_step_local_recovery(p0, lat, steps, full_r, opts)});

  std::vector<double> fr;
  std::vector<double> fc;
  for (const auto& row : rows) {
    if (row.full) continue;
    fr.push_back(row.r);
    fc.push_back(row.res.max_cmi);
  }
  const MarkovFit fit = fr.size() >= 2 ? markov_length_fit(fr, fc) : MarkovFit{};

  std::vector<std::pair<int, double>> sweep;
  for (const auto& row : rows) {
    if (!row.full) sweep.emplace_back(row.r, row.res.kl);
  }
  std::sort(sweep.begin(), sweep.end());
  bool monotone = true;
  for (std::size_t i = 1; i < sweep.size(); ++i) monotone = monotone && sweep[i].second <= sweep[i - 1].second;
  std::vector<double> kr;
  std::vector<double> kv;
  for (const auto& [r, v] : sweep) {
    kr.push_back(r);
    kv.push_back(v);
  }
  const MarkovFit kl_fit = kr.size() >= 2 ? markov_length_fit(kr, kv) : MarkovFit{};

  Output out(cfg);
  {
    CsvWriter csv(out.path("gauss_recovery.csv"), {"r", "N", "K", "kl", "cmi", "xi", "sum_step_kl", "full_buffer"});
    for (const auto& row : rows) {
      csv.cell(row.r).cell(steps).cell(lat.size()).cell(row.res.kl).cell(row.res.max_cmi).cell(fit.xi);
      csv.cell(row.res.sum_step_kl).cell(row.full ? 1 : 0);
      csv.end_row();
    }
    std::ostringstream foot;
    foot << "monotone_in_r=" << (monotone ? "true" : "false") << " ln_kl_slope=" << format_double(kl_fit.slope)
         << " xi=" << format_double(fit.xi) << " gamma=" << format_double(fit.gamma)
         << " fit_residual=" << format_double(fit.residual);
    if (fit.decaying && fit.gamma > 0.0) {
      foot << " required_radius=" << required_radius(fit.xi, steps, lat.size(), eps, fit.gamma)
           << " required_radius_without_N=" << required_radius(fit.xi, steps, lat.size(), eps, fit.gamma, false);
    }
    csv.comment(foot.str());
  }
  if (cfg.plot) {
    Series s{"ln KL", kr, {}};
    for (double v : kv) s.y.push_back(v > 0.0 ? std::log(v) : std::nan(""));
    Series c{"ln max CMI", fr, {}};
    for (double v : fc) c.y.push_back(v > 0.0 ? std::log(v) : std::nan(""));
    write_line_chart(out.path("gauss_recovery.svg"), "local recovery error vs buffer width", "r", "log value", {s, c});
  }
  return out.finish(cfg);
}

// --------------------------------------------------------------- sample

Eigen::MatrixXd load_matrix(const std::string& path, const char* what) {
  require(!path.empty(), std::string(what) + ": data_path is required");
  require(fs::exists(path), std::string(what) + ": cannot read " + path);
  const CsvTable t = checked([&] { return read_csv(path); });
  require(!t.rows.empty(), std::string(what) + ": " + path + " has no rows");
  Eigen::MatrixXd m(t.rows.size(), t.rows[0].size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    require(t.rows[i].size() == t.rows[0].size(), std::string(what) + ": ragged rows in " + path);
    for (std::size_t j = 0; j < t.rows[i].size(); ++j) m(i, j) = t.rows[i][j];
  }
  return m;
}

std::vector<std::string> run_sample(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const std::string source = p["dataset"];
  Eigen::MatrixXd data;
  if (source == "two_point") {
    data.resize(2, 2);
    data << 1.0, 0.0, -1.0, 0.0;
  } else if (source == "single_point") {
    const auto pt = as_doubles(p["point"]);
    require(!pt.empty(), "sample: point is empty");
    data = Eigen::Map<const Eigen::RowVectorXd>(pt.data(), static_cast<Eigen::Index>(pt.size()));
  } else {
    data = load_matrix(p["data_path"], "sample");
  }
  const Dataset ds = checked([&] { return Dataset(data); });

  NoiseSchedule sched;
  sched.steps = p["steps"];
  sched.t_min = p["t_min"];
  sched.t_max = p["t_max"];
  SamplerConfig sc;
  sc.eta = p["eta"];
  const std::string mode = p["mode"];
  sc.mode = mode == "global" ? SamplerMode::global : mode == "local" ? SamplerMode::local : SamplerMode::hybrid;
  sc.r = p["r"];
  sc.k = p["k"];
  sc.global_intervals.clear();
  for (const auto& iv : p["intervals"]) sc.global_intervals.emplace_back(iv[0].get<double>(), iv[1].get<double>());
  sc.draws = p["draws"];
  sc.seed = cfg.seed;
  sc.denoise_final = p["denoise_final"];
  checked([&] {
    sched.validate();
    sc.validate();
    return 0;
  });
  require(sc.k <= ds.lattice().length(), "sample: k exceeds the number of coordinates");

  const Eigen::MatrixXd xs = sample_backward(ds, sched, sc);

  // Nearest data point of every sample.
  std::vector<int> hits(ds.size(), 0);
  int near = 0;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    Eigen::Index best = 0;
    const double d = (ds.samples().rowwise() - xs.row(i)).rowwise().norm().minCoeff(&best);
    ++hits[best];
    near += d <= 0.1;
  }

  Output out(cfg);
  {
    std::vector<std::string> header{"draw"};
    for (Eigen::Index j = 0; j < xs.cols(); ++j) header.push_back("x" + std::to_string(j));
    CsvWriter csv(out.path("samples.csv"), header);
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
      csv.cell(static_cast<long long>(i));
      for (Eigen::Index j = 0; j < xs.cols(); ++j) csv.cell(xs(i, j));
      csv.end_row();
    }
    std::ostringstream foot;
    foot << "within_0.1=" << format_double(static_cast<double>(near) / xs.rows()) << " nearest_counts=";
    for (std::size_t i = 0; i < hits.size() && i < 16; ++i) foot << (i ? "," : "") << hits[i];
    csv.comment(foot.str());
  }
  if (cfg.plot && xs.cols() >= 2) {
    std::vector<std::array<double, 2>> pts;
    std::vector<std::array<double, 2>> marks;
    for (Eigen::Index i = 0; i < xs.rows(); ++i) pts.push_back({xs(i, 0), xs(i, 1)});
    for (Eigen::Index i = 0; i < ds.size(); ++i) marks.push_back({ds.samples()(i, 0), ds.samples()(i, 1)});
    write_scatter(out.path("samples.svg"), "endpoints (" + mode + ")", pts, marks);
  }
  return out.finish(cfg);
}

// ----------------------------------------------------------------- mine

std::vector<std::string> run_mine(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  MineConfig mc;
  mc.batch = p["batch"];
  mc.learning_rate = p["learning_rate"];
  mc.iterations = p["iterations"];
  mc.ema_rate = p["ema_rate"];
  mc.hidden = p["hidden"];
  mc.eval_shuffles = p["eval_shuffles"];
  mc.seed = derive_seed(cfg.seed, 0);
  checked([&] {
    mc.validate();
    return 0;
  });

  const std::string source = p["data"];
  PairedSamples s;
  double exact = std::nan("");
  if (source == "csv") {
    const Eigen::MatrixXd m = load_matrix(p["data_path"], "mine");
    const int ac = p["a_columns"];
    require(ac >= 1 && ac < m.cols(), "mine: a_columns must leave at least one column on each side");
    s.a = m.leftCols(ac);
    s.s = m.rightCols(m.cols() - ac);
  } else {
    const int n = p["samples"];
    const double rho = source == "gaussian" ? p["rho"].get<double>() : 0.0;
    require(n >= mc.batch, "mine: samples must be at least the batch size");
    require(rho > -1.0 && rho < 1.0, "mine: rho must lie in (-1, 1)");
    std::mt19937_64 rng(derive_seed(cfg.seed, 100));
    std::normal_distribution<double> g;
    s.a.resize(n, 1);
    s.s.resize(n, 1);
    for (int i = 0; i < n; ++i) {
      const double a = g(rng);
      const double z = g(rng);
      s.a(i, 0) = a;
      s.s(i, 0) = rho * a + std::sqrt(1.0 - rho * rho) * z;
    }
    exact = -0.5 * std::log(1.0 - rho * rho);
  }
  require(s.size() >= mc.batch, "mine: fewer samples than the batch size");

  const MineResult res = mine_estimate(s, mc);

  Output out(cfg);
  CsvWriter csv(out.path("mine.csv"), {"estimate", "batch_average", "exact", "iterations", "samples"});
  csv.cell(res.estimate).cell(res.batch_average).cell(exact).cell(res.iterations).cell(static_cast<long long>(s.size()));
  csv.end_row();
  return out.finish(cfg);
}

// ---------------------------------------------------------------- reorg

std::vector<std::string> run_reorg(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const Lattice lat = checked([&] { return Lattice(p["dim"].get<int>(), p["L"].get<int>(), p["periodic"].get<bool>()); });
  const int k = p["k"];
  const int r = p["r"];
  const ReorgSchedule sched = checked([&] { return reorganize(lat, k, r); });
  const std::string verdict = validate_schedule(lat, sched);

  Output out(cfg);
  std::ofstream txt(out.path("schedule.txt"));
  txt << "lattice dim=" << lat.dim() << " L=" << lat.length() << (lat.periodic() ? " periodic" : " open") << " k=" << k
      << " r=" << r << "\n";
  txt << "substeps=" << sched.substeps.size() << " regions=" << sched.region_count() << "\n";
  for (std::size_t m = 0; m < sched.substeps.size(); ++m) {
    txt << "substep " << m << ":";
    for (const auto& reg : sched.substeps[m]) {
      txt << " {";
      for (std::size_t i = 0; i < reg.size(); ++i) txt << (i ? "," : "") << reg.sites()[i];
      txt << "}";
    }
    txt << "\n";
  }
  txt << "check: " << (verdict.empty() ? "ok" : verdict) << "\n";
  txt.close();
  auto files = out.finish(cfg);
  if (!verdict.empty()) throw NumericError("reorg: schedule check failed: " + verdict);
  return files;
}

// ---------------------------------------------------- recovery bounds

std::vector<std::string> run_recovery_bounds(const ExperimentConfig& cfg) {
  const int nd = cfg.params["discrete_instances"];
  const int ng = cfg.params["gaussian_instances"];
  require(nd >= 0 && ng >= 0, "fawzi-check: instance counts must be nonnegative");
  auto reports = discrete_recovery_suite(nd, derive_seed(cfg.seed, 0));
  for (auto& r : gaussian_recovery_suite(ng, derive_seed(cfg.seed, 1))) reports.push_back(r);

  Output out(cfg);
  int bad = 0;
  {
    CsvWriter csv(out.path("recovery_bounds.csv"), {"suite", "instances", "violations", "worst_excess"});
    for (const auto& r : reports) {
      csv.cell(r.name).cell(r.instances).cell(r.violations).cell(r.worst_excess);
      csv.end_row();
      bad += r.violations;
    }
  }
  auto files = out.finish(cfg);
  if (bad > 0) throw NumericError("fawzi-check: " + std::to_string(bad) + " inequality violations");
  return files;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : table()) n.push_back(k);
    return n;
  }();
  return names;
}

json config_schema() {
  json defs = json::object();
  for (const auto& [name, params] : table()) {
    json props = json::object();
    for (const auto& p : params) {
      json s = kind_schema(p);
      s["default"] = p.fallback;
      s["description"] = p.doc;
      props[p.key] = s;
    }
    defs[name] = {{"type", "object"},
                  {"additionalProperties", false},
                  {"properties",
                   {{"experiment", {{"const", name}}},
                    {"seed", {{"type", "integer"}, {"minimum", 0}}},
                    {"out", {{"type", "string"}}},
                    {"plot", {{"type", "boolean"}}},
                    {"params", {{"type", "object"}, {"additionalProperties", false}, {"properties", props}}}}}};
  }
  return {{"$schema", "http://json-schema.org/draft-07/schema#"}, {"title", "ldm experiment config"}, {"definitions", defs}};
}

ExperimentConfig parse_config(const std::string& experiment, const json& doc, const Overrides& ov) {
  auto it = table().find(experiment);
  if (it == table().end()) throw ConfigError("unknown experiment '" + experiment + "'");
  require(doc.is_object() || doc.is_null(), "config must be a JSON object");

  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.params = json::object();
  const json top = doc.is_null() ? json::object() : doc;
  for (const auto& [key, value] : top.items()) {
    if (key == "experiment") {
      require(value.is_string() && value.get<std::string>() == experiment,
              "config is for experiment " + value.dump() + ", not '" + experiment + "'");
    } else if (key == "seed") {
      require(value.is_number_unsigned() || (value.is_number_integer() && value.get<long long>() >= 0),
              "seed must be a nonnegative integer");
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "out") {
      require(value.is_string() && !value.get<std::string>().empty(), "out must be a nonempty string");
      cfg.out = value;
    } else if (key == "plot") {
      require(value.is_boolean(), "plot must be a boolean");
      cfg.plot = value;
    } else if (key == "params") {
      require(value.is_object(), "params must be an object");
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  const json given = top.contains("params") ? top["params"] : json::object();
  for (const auto& [key, value] : given.items()) {
    auto p = std::find_if(it->second.begin(), it->second.end(), [&](const Param& q) { return q.key == key; });
    if (p == it->second.end()) throw ConfigError(experiment + ": unknown parameter '" + key + "'");
    if (!matches(*p, value)) {
      throw ConfigError(experiment + ": parameter '" + key + "' should be " + kind_schema(*p).dump() + ", got " +
                        value.dump());
    }
  }
  for (const auto& p : it->second) cfg.params[p.key] = given.contains(p.key) ? given[p.key] : p.fallback;
  if (ov.out) cfg.out = *ov.out;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.plot) cfg.plot = true;
  return cfg;
}

std::vector<std::string> run_experiment(const ExperimentConfig& cfg) {
  static const std::map<std::string, std::function<std::vector<std::string>(const ExperimentConfig&)>> runners = {
      {"toric", run_toric},
      {"gauss-recovery", run_gauss_recovery},
      {"sample", run_sample},
      {"mine", run_mine},
      {"reorg", run_reorg},
      {"fawzi-check", run_recovery_bounds},
  };
  auto it = runners.find(cfg.experiment);
  if (it == runners.end()) throw ConfigError("unknown experiment '" + cfg.experiment + "'");
  return it->second(cfg);
}

}  // namespace ldm
