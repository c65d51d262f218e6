#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "riskrule/types.hpp"

namespace riskrule {

enum class DataKind { kShrinkingUniform, kSimplexUniform, kSimplexBeta };

std::string to_string(DataKind kind);
DataKind parse_data_kind(const std::string& text);

struct DataSpec {
  DataKind kind = DataKind::kSimplexUniform;
  int nu = 8;           // shrinking_uniform level, 1..8
  double radius = 0.05;
  double a = 0.1;       // beta shape parameters
  double b = 0.1;
  int count = 1;
  std::uint64_t seed = 1;
  // Point dimension: I + 1 for shrinking_uniform, I for the simplex kinds.
  int dim = 0;          // 0 picks 101 or 100

  int resolved_dim() const;
  // One-line description used as provenance in point files.
  std::string describe() const;
};

inline constexpr std::uint64_t kGenerationCap = 10'000'000;
inline constexpr std::uint64_t kStallWindow = 1'000'000;

// xi_0 uniform on [-0.18 + 0.02 nu, 0.18 - 0.02 nu] and the remaining
// coordinates uniform on [-0.009 + 0.001 nu, 0.009 - 0.001 nu].
std::vector<Vector> shrinking_uniform(int nu, int count, std::uint64_t seed, int dim = 101);

// Rejection sampling: draw dim uniforms, normalize to sum one, subtract
// 1/dim, accept when the Euclidean norm is at most `radius`.
std::vector<Vector> simplex_uniform(double radius, int count, std::uint64_t seed,
                                    int dim = 100);

// As simplex_uniform with Beta(a, b) draws before normalizing.
std::vector<Vector> simplex_beta(double a, double b, double radius, int count,
                                 std::uint64_t seed, int dim = 100);

std::vector<Vector> generate(const DataSpec& spec);

// CSV: a '#' provenance line, a header row xi_1..xi_r, one point per row.
void write_points(const std::filesystem::path& path, const std::vector<Vector>& points,
                  const std::string& provenance);
std::vector<Vector> read_points(const std::filesystem::path& path);

}  // namespace riskrule
