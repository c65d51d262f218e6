#include "riskrule/datagen.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>
#include <fmt/format.h>

#include "riskrule/errors.hpp"
#include "riskrule/rng.hpp"

namespace riskrule {
namespace {

template <typename Draw>
std::vector<Vector> rejection(double radius, int count, int dim, Draw&& draw) {
  if (!(radius > 0.0)) throw DomainError("radius must be positive");
  if (count < 1) throw DomainError("count must be at least 1");
  if (dim < 1) throw DomainError("dimension must be at least 1");
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  Vector u(dim);
  std::uint64_t draws = 0;
  std::uint64_t since_accept = 0;
  const double shift = 1.0 / dim;
  while (static_cast<int>(out.size()) < count) {
    if (draws >= kGenerationCap) {
      throw GenerationStallError(fmt::format(
          "{} draws produced only {} of {} points", draws, out.size(), count));
    }
    if (since_accept >= kStallWindow) {
      throw GenerationStallError(fmt::format(
          "no point accepted in {} consecutive draws (radius {})", since_accept, radius));
    }
    ++draws;
    ++since_accept;
    double sum = 0.0;
    for (int k = 0; k < dim; ++k) {
      u[k] = draw();
      sum += u[k];
    }
    if (!(sum > 0.0)) continue;
    Vector xi = u / sum - Vector::Constant(dim, shift);
    if (xi.norm() <= radius) {
      out.push_back(std::move(xi));
      since_accept = 0;
    }
  }
  return out;
}

}  // namespace

std::string to_string(DataKind kind) {
  switch (kind) {
    case DataKind::kShrinkingUniform:
      return "shrinking_uniform";
    case DataKind::kSimplexUniform:
      return "simplex_uniform";
    case DataKind::kSimplexBeta:
      return "simplex_beta";
  }
  return "unknown";
}

DataKind parse_data_kind(const std::string& text) {
  if (text == "shrinking_uniform") return DataKind::kShrinkingUniform;
  if (text == "simplex_uniform") return DataKind::kSimplexUniform;
  if (text == "simplex_beta") return DataKind::kSimplexBeta;
  throw DomainError(fmt::format("unknown data kind '{}'", text));
}

int DataSpec::resolved_dim() const {
  if (dim > 0) return dim;
  return kind == DataKind::kShrinkingUniform ? 101 : 100;
}

std::string DataSpec::describe() const {
  switch (kind) {
    case DataKind::kShrinkingUniform:
      return fmt::format("kind={} nu={} count={} seed={} dim={}", to_string(kind), nu,
                         count, seed, resolved_dim());
    case DataKind::kSimplexUniform:
      return fmt::format("kind={} radius={} count={} seed={} dim={}", to_string(kind),
                         radius, count, seed, resolved_dim());
    case DataKind::kSimplexBeta:
      return fmt::format("kind={} a={} b={} radius={} count={} seed={} dim={}",
                         to_string(kind), a, b, radius, count, seed, resolved_dim());
  }
  return {};
}

std::vector<Vector> shrinking_uniform(int nu, int count, std::uint64_t seed, int dim) {
  if (nu < 1 || nu > 8) throw DomainError(fmt::format("nu must be in 1..8, got {}", nu));
  if (count < 1) throw DomainError("count must be at least 1");
  if (dim < 1) throw DomainError("dimension must be at least 1");
  const double h0 = 0.18 - 0.02 * nu;
  const double h = 0.009 - 0.001 * nu;
  Rng rng(seed);
  std::vector<Vector> out;
  for (int n = 0; n < count; ++n) {
    Vector xi(dim);
    xi[0] = rng.uniform(-h0, h0);
    for (int k = 1; k < dim; ++k) xi[k] = rng.uniform(-h, h);
    out.push_back(std::move(xi));
  }
  return out;
}

std::vector<Vector> simplex_uniform(double radius, int count, std::uint64_t seed, int dim) {
  Rng rng(seed);
  return rejection(radius, count, dim, [&] { return rng.uniform01(); });
}

std::vector<Vector> simplex_beta(double a, double b, double radius, int count,
                                 std::uint64_t seed, int dim) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta parameters must be positive");
  Rng rng(seed);
  return rejection(radius, count, dim,
                   [&] { return boost::math::ibeta_inv(a, b, rng.uniform01()); });
}

std::vector<Vector> generate(const DataSpec& spec) {
  const int dim = spec.resolved_dim();
  switch (spec.kind) {
    case DataKind::kShrinkingUniform:
      return shrinking_uniform(spec.nu, spec.count, spec.seed, dim);
    case DataKind::kSimplexUniform:
      return simplex_uniform(spec.radius, spec.count, spec.seed, dim);
    case DataKind::kSimplexBeta:
      return simplex_beta(spec.a, spec.b, spec.radius, spec.count, spec.seed, dim);
  }
  throw DomainError("unknown data kind");
}

void write_points(const std::filesystem::path& path, const std::vector<Vector>& points,
                  const std::string& provenance) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << "# " << provenance << '\n';
  const auto dim = points.empty() ? 0 : points[0].size();
  for (Eigen::Index k = 0; k < dim; ++k) out << (k ? "," : "") << "xi_" << k + 1;
  out << '\n';
  for (const auto& p : points) {
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      out << (k ? "," : "") << fmt::format("{:.17g}", p[k]);
    }
    out << '\n';
  }
}

std::vector<Vector> read_points(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot read {}", path.string()));
  std::vector<Vector> points;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.rfind("xi", 0) == 0) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw StructuralError(fmt::format("{}:{}: bad number '{}'", path.string(), lineno, cell));
      }
    }
    if (!points.empty() && static_cast<Eigen::Index>(values.size()) != points[0].size()) {
      throw StructuralError(fmt::format("{}:{}: expected {} values, got {}", path.string(),
                                        lineno, points[0].size(), values.size()));
    }
    points.push_back(Eigen::Map<const Vector>(values.data(),
                                              static_cast<Eigen::Index>(values.size())));
  }
  return points;
}

}  // namespace riskrule
