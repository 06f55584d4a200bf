#include "ipm/cli/sweep_config.hpp"

#include <cmath>
#include <sstream>

#include "ipm/error.hpp"
#include "ipm/reference/orthogonal.hpp"

namespace ipm::cli {
namespace {

engine::InitialMeasure parse_initial(const std::string& text) {
  if (text == "gaussian") return engine::StandardGaussian{};
  if (text.rfind("point:", 0) == 0) {
    return engine::PointMass{parse_number_list(text.substr(6), "initial")};
  }
  if (text.rfind("file:", 0) == 0) {
    const std::string path = text.substr(5);
    if (path.empty()) throw ConfigError("initial: file: needs a path");
    return engine::FromFile{path};
  }
  throw ConfigError("initial: expected gaussian, point:<x1,...> or file:<path>, got '" + text + "'");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::array<int, 2> int_pair(const KeyValueConfig& kv, const std::string& key, std::array<int, 2> fallback) {
  if (!kv.has(key)) return fallback;
  const auto v = kv.get_doubles(key, {});
  if (v.size() == 1) return {static_cast<int>(v[0]), static_cast<int>(v[0])};
  if (v.size() != 2) throw ConfigError(key + ": expected one or two integers");
  return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

}  // namespace

model::ProblemOptions ProblemSelection::resolve() const {
  std::map<std::string, std::string> rest = options;
  std::optional<Eigen::MatrixXd> q;
  if (const auto it = rest.find("e3.q_file"); it != rest.end()) {
    q = reference::read_matrix_csv(it->second);
    rest.erase(it);
  }
  model::ProblemOptions o = model::ProblemOptions::from_map(rest);
  if (q) o.e3_q = std::move(q);
  return o;
}

std::shared_ptr<const model::ProblemSpec> ProblemSelection::make() const {
  return model::builtin_problem(name, resolve());
}

std::vector<double> uniform_alpha_grid(int count, double lo, double hi) {
  if (count < 1) throw ConfigError("alpha grid needs at least one point");
  if (count == 1) return {lo};
  if (!(hi > lo)) throw ConfigError("alpha grid needs min < max");
  std::vector<double> a(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) a[static_cast<std::size_t>(j)] = lo + (hi - lo) * j / (count - 1);
  return a;
}

double parse_burn_in(const std::string& text, double horizon) {
  if (text.rfind("T/", 0) == 0) {
    const double k = parse_number(text.substr(2), "burn_in");
    if (!(k > 0.0)) throw ConfigError("burn_in: T/k needs k > 0");
    return horizon / k;
  }
  return parse_number(text, "burn_in");
}

void SweepConfig::validate() const {
  if (alphas.empty()) throw ConfigError("alpha grid is empty");
  for (std::size_t i = 1; i < alphas.size(); ++i) {
    if (!(alphas[i] > alphas[i - 1])) throw ConfigError("alpha grid must be strictly increasing");
  }
  if (epsilons.empty()) throw ConfigError("epsilon list is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw ConfigError("epsilons must be positive");
    if (warm_start && i > 0 && !(epsilons[i] < epsilons[i - 1])) {
      throw ConfigError("warm_start needs a strictly descending epsilon list");
    }
  }
  if (replicates < 1) throw ConfigError("replicates must be at least 1");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (histogram_bins[0] < 1 || histogram_bins[1] < 1) throw ConfigError("histogram.bins must be positive");
  for (std::size_t stage = 0; stage < epsilons.size(); ++stage) {
    engine::RunConfig probe = run;
    probe.epsilon = epsilons[stage];
    probe.alpha = alphas.front();
    probe.burn_in = burn_in_for_stage(stage);
    probe.validate();
  }
}

double SweepConfig::burn_in_for_stage(std::size_t stage) const {
  return parse_burn_in(warm_start && stage > 0 ? warm_burn_in : burn_in, run.horizon);
}

const std::set<std::string>& run_keys() {
  static const std::set<std::string> keys = {"problem", "epsilon", "alpha", "particles", "dt", "horizon",
                                             "burn_in", "seed",    "initial", "output"};
  return keys;
}

const std::set<std::string>& sweep_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k = run_keys();
    k.insert({"epsilons", "alphas", "alpha.count", "alpha.min", "alpha.max", "warm_start", "warm_burn_in",
              "replicates", "workers", "histogram.alphas", "histogram.bins", "histogram.axes"});
    return k;
  }();
  return keys;
}

ProblemSelection problem_from(const KeyValueConfig& kv) {
  ProblemSelection p;
  p.name = kv.get_string("problem", p.name);
  p.options = kv.with_prefix("problem.");
  return p;
}

engine::RunConfig run_config_from(const KeyValueConfig& kv) {
  engine::RunConfig c;
  c.epsilon = kv.get_double("epsilon", c.epsilon);
  c.alpha = kv.get_double("alpha", c.alpha);
  const std::int64_t m = kv.get_int("particles", static_cast<std::int64_t>(c.num_particles));
  if (m < 1) throw ConfigError("particles must be positive");
  c.num_particles = static_cast<std::size_t>(m);
  c.dt = kv.get_double("dt", c.dt);
  c.horizon = kv.get_double("horizon", c.horizon);
  c.burn_in = parse_burn_in(kv.get_string("burn_in", "0"), c.horizon);
  c.seed = kv.get_u64("seed", c.seed);
  c.initial_measure = parse_initial(kv.get_string("initial", "gaussian"));
  return c;
}

SweepConfig sweep_config_from(const KeyValueConfig& kv) {
  SweepConfig s;
  s.problem = problem_from(kv);
  s.run = run_config_from(kv);
  if (kv.has("alphas")) {
    s.alphas = kv.get_doubles("alphas", {});
  } else {
    s.alphas = uniform_alpha_grid(static_cast<int>(kv.get_int("alpha.count", 32)), kv.get_double("alpha.min", -0.1),
                                  kv.get_double("alpha.max", 1.1));
  }
  s.epsilons = kv.get_doubles("epsilons", s.epsilons);
  s.warm_start = kv.get_bool("warm_start", s.warm_start);
  s.burn_in = kv.get_string("burn_in", s.burn_in);
  s.warm_burn_in = kv.get_string("warm_burn_in", s.warm_burn_in);
  s.replicates = static_cast<int>(kv.get_int("replicates", s.replicates));
  s.workers = static_cast<int>(kv.get_int("workers", s.workers));
  s.output_dir = kv.get_string("output", s.output_dir.string());
  s.histogram_alphas = kv.get_doubles("histogram.alphas", {});
  s.histogram_bins = int_pair(kv, "histogram.bins", s.histogram_bins);
  s.histogram_axes = int_pair(kv, "histogram.axes", s.histogram_axes);
  return s;
}

std::string describe(const engine::InitialMeasure& measure) {
  if (std::holds_alternative<engine::StandardGaussian>(measure)) return "gaussian";
  if (const auto* p = std::get_if<engine::PointMass>(&measure)) {
    std::string s = "point:";
    for (std::size_t i = 0; i < p->x0.size(); ++i) s += (i ? "," : "") + format_double(p->x0[i]);
    return s;
  }
  return "file:" + std::get<engine::FromFile>(measure).path.string();
}

}  // namespace ipm::cli
