#include "ipm/cli/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ipm/cli/key_value.hpp"
#include "ipm/cli/sweep_config.hpp"
#include "ipm/error.hpp"

namespace ipm::cli {
namespace {

using nlohmann::json;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

engine::InitialMeasure initial_from_text(const std::string& text) {
  KeyValueConfig kv;
  kv.set("initial", text);
  return run_config_from(kv).initial_measure;
}

}  // namespace

std::string format_summary_row(const SummaryRow& r) {
  std::string s = g17(r.epsilon) + "," + g17(r.alpha) + "," + g17(r.lambda_hat) + ",";
  if (r.standard_error) s += g17(*r.standard_error);
  s += "," + std::to_string(r.n_replicates) + "," + g17(r.burn_in) + "," + std::to_string(r.num_particles) + "," +
       g17(r.dt) + "," + g17(r.horizon) + "," + std::to_string(r.seed);
  return s;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) out << format_summary_row(r) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kSummaryHeader) throw IoError(path.string() + ": bad summary header");
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 10) throw IoError(path.string() + ": expected 10 fields in '" + line + "'");
    try {
      SummaryRow r;
      r.epsilon = std::stod(f[0]);
      r.alpha = std::stod(f[1]);
      r.lambda_hat = std::stod(f[2]);
      if (!f[3].empty()) r.standard_error = std::stod(f[3]);
      r.n_replicates = std::stoi(f[4]);
      r.burn_in = std::stod(f[5]);
      r.num_particles = std::stoull(f[6]);
      r.dt = std::stod(f[7]);
      r.horizon = std::stod(f[8]);
      r.seed = std::stoull(f[9]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw IoError(path.string() + ": malformed row '" + line + "'");
    }
  }
  return rows;
}

void write_run_metadata(const std::filesystem::path& path, const RunMetadata& m) {
  json chain = json::array();
  for (const auto& link : m.provenance) {
    chain.push_back({{"epsilon", link.epsilon}, {"ensemble", link.ensemble.string()}, {"hash", link.hash}});
  }
  const auto& c = m.config;
  json j = {
      {"problem", m.problem},
      {"problem_options", m.problem_options},
      {"config",
       {{"epsilon", c.epsilon},
        {"alpha", c.alpha},
        {"num_particles", c.num_particles},
        {"dt", c.dt},
        {"horizon", c.horizon},
        {"burn_in", c.burn_in},
        {"seed", c.seed},
        {"initial_measure", describe(c.initial_measure)}}},
      {"replicate", m.replicate},
      {"burn_in_policy", m.burn_in_policy},
      {"provenance", chain},
      {"input_hash", m.input_hash ? json(*m.input_hash) : json(nullptr)},
      {"final_ensemble_hash", m.final_ensemble_hash},
      {"status", m.status},
      {"error", m.error},
      {"lambda_hat", std::isfinite(m.lambda_hat) ? json(m.lambda_hat) : json(nullptr)},
      {"wall_seconds", m.wall_seconds},
      {"min_ess", m.min_ess},
  };
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

RunMetadata read_run_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    const json j = json::parse(in);
    RunMetadata m;
    m.problem = j.at("problem").get<std::string>();
    m.problem_options = j.at("problem_options").get<std::map<std::string, std::string>>();
    const json& c = j.at("config");
    m.config.epsilon = c.at("epsilon").get<double>();
    m.config.alpha = c.at("alpha").get<double>();
    m.config.num_particles = c.at("num_particles").get<std::size_t>();
    m.config.dt = c.at("dt").get<double>();
    m.config.horizon = c.at("horizon").get<double>();
    m.config.burn_in = c.at("burn_in").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.initial_measure = initial_from_text(c.at("initial_measure").get<std::string>());
    m.replicate = j.at("replicate").get<int>();
    m.burn_in_policy = j.at("burn_in_policy").get<std::string>();
    for (const auto& link : j.at("provenance")) {
      m.provenance.push_back({link.at("epsilon").get<double>(), link.at("ensemble").get<std::string>(),
                              link.at("hash").get<std::string>()});
    }
    if (!j.at("input_hash").is_null()) m.input_hash = j.at("input_hash").get<std::string>();
    m.final_ensemble_hash = j.at("final_ensemble_hash").get<std::string>();
    m.status = j.at("status").get<std::string>();
    m.error = j.at("error").get<std::string>();
    m.lambda_hat = j.at("lambda_hat").is_null() ? std::nan("") : j.at("lambda_hat").get<double>();
    m.wall_seconds = j.at("wall_seconds").get<double>();
    m.min_ess = j.at("min_ess").get<double>();
    return m;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create directory " + dir.string() + (ec ? ": " + ec.message() : ""));
  }
}

}  // namespace ipm::cli
