#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "asyncts/data.hpp"
#include "asyncts/network.hpp"

namespace asyncts::testing {

std::filesystem::path data_dir();
std::filesystem::path sample_csv();

/// Smooth synthetic series: a noisy sine around 100.
RawSeries synthetic_series(std::size_t n, std::uint64_t seed, Date first = {2012, 1, 2});

/// Windows cut from synthetic_series.
std::vector<NormalizedWindow> synthetic_windows(std::size_t count, std::size_t window, std::uint64_t seed);

/// Small network for fast protocol tests.
NetworkConfig tiny_network(std::size_t hidden = 4, std::size_t layers = 2);

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Central differences of the full loss against backward(), over every
/// parameter. Relative error is |a - n| / max(|a| + |n|, floor).
GradCheck check_gradients(const ParameterVector& params, std::span<const double> inputs, double target,
                          const NetworkConfig& cfg, const std::optional<EvlContext>& evl, double h = 1e-5,
                          double floor = 1e-6);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace asyncts::testing
