#pragma once

#include <span>
#include <vector>

namespace dol {

enum class BandwidthRule { diffusion, plug_in };

struct KdeConfig {
  int grid_size = 1 << 14;  ///< rounded up to a power of two, at least 256
  BandwidthRule rule = BandwidthRule::diffusion;
  /// Fraction of the data range added on each side of the grid.
  double padding = 0.1;
};

/// Gaussian kernel density estimate on a regular grid.
///
/// The diffusion rule is Botev, Grotowski and Kroese's (2010) fixed-point
/// bandwidth selector computed through the discrete cosine transform of the
/// binned data; the plug-in rule is Silverman's 0.9 min(sd, iqr/1.34) n^-1/5
/// and is also the fallback when the fixed-point equation has no root.
/// Densities below the floor (1e-6 times the smallest density seen at a
/// sample) are raised to it so log-densities stay finite off support.
class KernelDensity {
 public:
  KernelDensity(std::span<const double> samples, const KdeConfig& cfg = {});

  double log_density(double x) const;
  std::vector<double> log_density(std::span<const double> xs) const;

  double bandwidth() const { return bandwidth_; }
  bool used_fallback() const { return used_fallback_; }
  double grid_min() const { return lo_; }
  double grid_max() const { return hi_; }
  double log_floor() const { return log_floor_; }
  std::span<const double> grid_density() const { return density_; }
  double grid_step() const { return (hi_ - lo_) / static_cast<double>(density_.size() - 1); }

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
  double bandwidth_ = 0.0;
  bool used_fallback_ = false;
  double log_floor_ = 0.0;
  std::vector<double> density_;
};

/// Convenience wrapper: fit on `samples`, evaluate at `queries`. Requires at
/// least 100 samples (DataError otherwise).
std::vector<double> kde_log_density(std::span<const double> samples,
                                    std::span<const double> queries, const KdeConfig& cfg = {});

}  // namespace dol
