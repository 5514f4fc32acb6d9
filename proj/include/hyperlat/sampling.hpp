#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>

#include "hyperlat/counting.hpp"
#include "hyperlat/rng.hpp"

namespace hyperlat::sampling {

enum class Method { conditional_count, rejection };

std::string method_name(Method m);
Method parse_method(std::string_view name);

struct SamplerConfig {
  counting::RegionSpec region;
  u64 seed = 0;
  Method method = Method::conditional_count;
};

struct LatticePoint {
  std::vector<u64> coords;
};

// Exact uniform sampler over a region. The law of each draw is exactly
// uniform: every coordinate is selected by inverse transform on exact
// conditional completion counts, with integer uniforms only in the decision
// path. Rejection is available for degree == 1 regions as an independent
// cross-check. Per-region tables are built once and shared across draws.
class Sampler {
 public:
  Sampler(const SamplerConfig& config, counting::CountOptions opts = {});

  LatticePoint sample(SplitMix64& stream) const;
  u128 region_size() const { return total_; }
  const SamplerConfig& config() const { return config_; }

 private:
  LatticePoint sample_product(SplitMix64& stream) const;     // degree == dim
  LatticePoint sample_simplex(SplitMix64& stream) const;     // degree == 1, conditional
  LatticePoint sample_rejection(SplitMix64& stream) const;   // degree == 1
  LatticePoint sample_general(SplitMix64& stream) const;     // 1 < degree < dim

  SamplerConfig config_;
  u128 total_ = 0;

  // degree == dim: completion counts over the quotient set, plus cumulative
  // first-coordinate blocks for O(log) selection of the heaviest coordinate.
  std::shared_ptr<const counting::QuotientTable> quotients_;
  struct Block {
    u64 v_lo, v_hi;
    u128 per_value;
    u128 cum;  // completions for all v' <= v_hi
  };
  std::vector<Block> first_blocks_;

  // 1 < degree < dim: cumulative counts over the first coordinate.
  std::vector<u128> first_cum_;
};

// m independent draws; a deterministic function of (seed, region, m, method).
std::vector<LatticePoint> sample_batch(const SamplerConfig& config, u64 m,
                                       counting::CountOptions opts = {});

// (log i_1/log n, ..., log i_r/log n)
std::vector<double> log_coords(const LatticePoint& point, u64 threshold);

void dump_csv(std::span<const LatticePoint> points, std::ostream& out);
void dump_csv(std::span<const LatticePoint> points, const std::filesystem::path& path);
std::vector<LatticePoint> read_csv(const std::filesystem::path& path);
// JSON side file recording region, seed, method, RNG identifier and draw count.
void write_metadata(const SamplerConfig& config, u64 draws, const std::filesystem::path& path);

}  // namespace hyperlat::sampling
