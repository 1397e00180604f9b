#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lfgt/codec.hpp"
#include "lfgt/coefficients.hpp"
#include "lfgt/transform.hpp"

namespace lfgt {

/// Fraction of energy retained when keeping the first i of n coefficients,
/// for i = 1..n.
struct CompactionCurve {
  std::vector<double> kept;    // i / n
  std::vector<double> energy;  // cumulative energy / total
  bool zero_energy = false;    // total energy was 0; curve is identically 1

  std::size_t size() const { return kept.size(); }
  /// Energy fraction after keeping ceil(fraction * n) coefficients.
  double at(double fraction) const;
};

/// Compaction of (rank, value) pairs sorted by rank; equal ranks keep their
/// input order.
CompactionCurve compaction_from_ranked(std::vector<std::pair<std::size_t, double>> ranked);

/// Spatio-angular compaction: coefficients ordered by (scan rank, super-ray).
CompactionCurve compaction_curve(const CoefficientTensor& tensor, const ScanOrder& scan);

/// Spatial coefficients of each super-ray in each view; rays[k][w] is empty
/// when super-ray k is absent from canonical view w.
struct SpatialCoefficients {
  int n_u = 0;
  int n_v = 0;
  std::vector<std::vector<Eigen::VectorXd>> rays;
};

SpatialCoefficients spatial_coefficients(const LightField& lf, const SuperRaySegmentation& seg,
                                         const std::vector<SuperRayMembers>& members,
                                         const TransformOptions& options);

/// Spatial-only compaction: coefficients ordered by eigenvalue rank (band),
/// then super-ray, then view.
CompactionCurve spatial_compaction_curve(const SpatialCoefficients& spatial);

struct BandStatistics {
  /// correlation[b](i, j): Pearson correlation between views i and j of band
  /// b over super-rays where band b exists in every view.
  std::vector<Eigen::MatrixXd> correlation;
  std::vector<bool> correlation_missing;  // fewer than 2 samples
  std::vector<std::size_t> correlation_samples;

  /// Covariance of the first `covariance.rows()` bands over (super-ray, view)
  /// samples holding all of them.
  Eigen::MatrixXd covariance;
  std::size_t covariance_samples = 0;
  bool covariance_missing = false;

  /// log10 variance per (band, angular index) after the angular transform;
  /// NaN where fewer than 2 observations exist.
  std::vector<std::vector<double>> log_variance;

  /// Mean |correlation| over off-diagonal entries of bands [first, last].
  double mean_abs_correlation(int first, int last) const;
};

/// Zero entries of a correlation matrix are reported where a view has no
/// variance (NaN would break the [-1, 1] contract).
BandStatistics band_statistics(const SpatialCoefficients& spatial, const CoefficientTensor& tensor,
                               int correlation_bands = 8, int covariance_bands = 64);

struct RateAllocation {
  double segmentation_percent = 0.0;
  double disparity_percent = 0.0;
  double coefficients_percent = 0.0;
  double bpp = 0.0;
  double psnr = 0.0;
  std::size_t bytes = 0;
};

/// Decodes `stream` and compares against `reference`.
RateAllocation rate_allocation_report(std::span<const std::uint8_t> stream, const LightField& reference,
                                      int threads = 0);

/// CSV "kept,energy" with 17 significant digits.
void write_compaction_csv(std::ostream& out, const CompactionCurve& curve);
CompactionCurve read_compaction_csv(std::istream& in);
/// CSV "band,view_i,view_j,value" (missing bands omitted).
void write_correlation_csv(std::ostream& out, const BandStatistics& stats);
/// CSV "band_i,band_j,log_abs_covariance".
void write_covariance_csv(std::ostream& out, const BandStatistics& stats);
/// CSV "band,angular,log10_variance" (missing entries as "nan").
void write_log_variance_csv(std::ostream& out, const BandStatistics& stats);
/// CSV "super_ray,band,angular_index,value".
void write_coefficients_csv(std::ostream& out, const CoefficientTensor& tensor);

/// Formats with 17 significant digits; non-finite values as "inf"/"nan".
std::string format_double(double v);

}  // namespace lfgt
