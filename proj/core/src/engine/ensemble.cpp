#include "ipm/engine/ensemble.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ipm/error.hpp"

namespace ipm::engine {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <class T>
T parse(const std::string& text, const std::filesystem::path& path) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw IoError("malformed value '" + text + "' in " + path.string());
  }
  return v;
}

}  // namespace

void save_ensemble(const std::filesystem::path& path, const Ensemble& ensemble,
                   const EnsembleHeader& header) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  std::fprintf(f, "d,M,problem,epsilon,alpha,seed,step\n");
  std::fprintf(f, "%d,%zu,%s,%.17g,%.17g,%llu,%llu\n", ensemble.dim, ensemble.size(),
               header.problem.c_str(), header.epsilon, header.alpha,
               static_cast<unsigned long long>(header.seed),
               static_cast<unsigned long long>(ensemble.step));
  const auto d = static_cast<std::size_t>(ensemble.dim);
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      std::fprintf(f, k ? ",%.17g" : "%.17g", ensemble.positions[i * d + k]);
    }
    std::fputc('\n', f);
  }
  const bool failed = std::ferror(f) != 0;
  if (std::fclose(f) != 0 || failed) throw IoError("failed writing " + path.string());
}

LoadedEnsemble load_ensemble(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "d,M,problem,epsilon,alpha,seed,step") {
    throw IoError("missing ensemble header in " + path.string());
  }
  if (!std::getline(in, line)) throw IoError("missing ensemble metadata in " + path.string());
  const auto meta = split(line);
  if (meta.size() != 7) throw IoError("ensemble metadata needs 7 fields in " + path.string());

  LoadedEnsemble out;
  const int d = parse<int>(meta[0], path);
  const auto m = parse<std::size_t>(meta[1], path);
  if (d < 1 || m < 1) throw IoError("ensemble dimension and size must be positive in " + path.string());
  out.header.problem = meta[2];
  out.header.epsilon = parse<double>(meta[3], path);
  out.header.alpha = parse<double>(meta[4], path);
  out.header.seed = parse<std::uint64_t>(meta[5], path);
  out.ensemble = Ensemble(d, m);
  out.ensemble.step = parse<std::uint64_t>(meta[6], path);

  std::size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (i == m) throw IoError("more than M=" + std::to_string(m) + " rows in " + path.string());
    const auto cells = split(line);
    if (cells.size() != static_cast<std::size_t>(d)) {
      throw IoError("row " + std::to_string(i) + " has " + std::to_string(cells.size()) +
                    " coordinates, expected " + std::to_string(d) + " in " + path.string());
    }
    for (int k = 0; k < d; ++k) {
      const double v = parse<double>(cells[static_cast<std::size_t>(k)], path);
      if (!std::isfinite(v)) {
        throw NonFiniteError("non-finite coordinate in row " + std::to_string(i) + " of " + path.string());
      }
      out.ensemble.row(i)[static_cast<std::size_t>(k)] = v;
    }
    ++i;
  }
  if (i != m) {
    throw IoError("expected " + std::to_string(m) + " rows, found " + std::to_string(i) + " in " +
                  path.string());
  }
  return out;
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001b3ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace ipm::engine
