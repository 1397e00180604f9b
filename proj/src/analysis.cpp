#include "lfgt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>

namespace lfgt {

double CompactionCurve::at(double fraction) const {
  if (energy.empty()) return 1.0;
  const double n = static_cast<double>(energy.size());
  const auto i = static_cast<std::size_t>(std::ceil(std::clamp(fraction, 0.0, 1.0) * n - 1e-12));
  if (i == 0) return 0.0;
  return energy[std::min(i, energy.size()) - 1];
}

CompactionCurve compaction_from_ranked(std::vector<std::pair<std::size_t, double>> ranked) {
  if (ranked.empty()) throw Error("compaction curve of an empty tensor");
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  CompactionCurve curve;
  const std::size_t n = ranked.size();
  double total = 0.0;
  for (const auto& [rank, v] : ranked) total += v * v;
  curve.zero_energy = total == 0.0;
  curve.kept.reserve(n);
  curve.energy.reserve(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += ranked[i].second * ranked[i].second;
    curve.kept.push_back(static_cast<double>(i + 1) / static_cast<double>(n));
    curve.energy.push_back(curve.zero_energy ? 1.0 : std::min(1.0, acc / total));
  }
  curve.energy.back() = 1.0;
  return curve;
}

CompactionCurve compaction_curve(const CoefficientTensor& tensor, const ScanOrder& scan) {
  std::vector<std::pair<std::size_t, double>> ranked;
  ranked.reserve(tensor.coefficient_count());
  for (const auto& ray : tensor.rays)
    for (std::size_t b = 0; b < ray.size(); ++b)
      for (std::size_t a = 0; a < ray[b].size(); ++a) {
        const int r = scan.rank({static_cast<int>(b), static_cast<int>(a)});
        if (r < 0) throw Error("scan order does not cover every coefficient position");
        ranked.emplace_back(static_cast<std::size_t>(r), ray[b][a]);
      }
  return compaction_from_ranked(std::move(ranked));
}

SpatialCoefficients spatial_coefficients(const LightField& lf, const SuperRaySegmentation& seg,
                                         const std::vector<SuperRayMembers>& members,
                                         const TransformOptions& options) {
  if (options.mode == TransformMode::NonSeparable) throw Error("spatial coefficients need a separable mode");
  SpatialCoefficients out;
  out.n_u = seg.n_u;
  out.n_v = seg.n_v;
  out.rays.assign(members.size(), std::vector<Eigen::VectorXd>(static_cast<std::size_t>(seg.n_u * seg.n_v)));
  for_each_transform(seg, members, options, [&](int k, const SuperRayTransform& t) {
    const auto& m = members[static_cast<std::size_t>(k)];
    auto coeffs = spatial_forward(t, gather_signals(lf, m));
    for (std::size_t i = 0; i < m.views.size(); ++i) {
      const auto w = m.views[i].view;
      out.rays[static_cast<std::size_t>(k)][static_cast<std::size_t>(w.u * seg.n_v + w.v)] = std::move(coeffs[i]);
    }
  });
  return out;
}

CompactionCurve spatial_compaction_curve(const SpatialCoefficients& spatial) {
  std::vector<std::pair<std::size_t, double>> ranked;
  for (const auto& ray : spatial.rays)
    for (const auto& view : ray)
      for (Eigen::Index b = 0; b < view.size(); ++b) ranked.emplace_back(static_cast<std::size_t>(b), view(b));
  return compaction_from_ranked(std::move(ranked));
}

double BandStatistics::mean_abs_correlation(int first, int last) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (int b = std::max(first, 0); b <= last && b < static_cast<int>(correlation.size()); ++b) {
    if (correlation_missing[static_cast<std::size_t>(b)]) continue;
    const auto& c = correlation[static_cast<std::size_t>(b)];
    for (Eigen::Index i = 0; i < c.rows(); ++i)
      for (Eigen::Index j = 0; j < c.cols(); ++j)
        if (i != j) {
          sum += std::abs(c(i, j));
          ++n;
        }
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

namespace {

// Correlation of the columns of `samples` (rows are observations).
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& samples) {
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::MatrixXd centred = samples.rowwise() - mean;
  const Eigen::MatrixXd cov = centred.transpose() * centred;
  const Eigen::Index n = cov.rows();
  Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        corr(i, j) = 1.0;
        continue;
      }
      const double d = std::sqrt(cov(i, i) * cov(j, j));
      if (d > 0) corr(i, j) = std::clamp(cov(i, j) / d, -1.0, 1.0);
    }
  return corr;
}

}  // namespace

BandStatistics band_statistics(const SpatialCoefficients& spatial, const CoefficientTensor& tensor,
                               int correlation_bands, int covariance_bands) {
  const std::size_t views = static_cast<std::size_t>(spatial.n_u * spatial.n_v);
  if (views < 2) throw Error("band statistics need at least two views");
  BandStatistics stats;

  for (int b = 0; b < correlation_bands; ++b) {
    std::vector<std::size_t> complete;
    for (std::size_t k = 0; k < spatial.rays.size(); ++k) {
      bool ok = true;
      for (const auto& v : spatial.rays[k]) ok = ok && v.size() > b;
      if (ok) complete.push_back(k);
    }
    stats.correlation_samples.push_back(complete.size());
    if (complete.size() < 2) {
      stats.correlation.push_back(Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(views),
                                                            static_cast<Eigen::Index>(views),
                                                            std::numeric_limits<double>::quiet_NaN()));
      stats.correlation_missing.push_back(true);
      continue;
    }
    Eigen::MatrixXd samples(static_cast<Eigen::Index>(complete.size()), static_cast<Eigen::Index>(views));
    for (std::size_t s = 0; s < complete.size(); ++s)
      for (std::size_t w = 0; w < views; ++w)
        samples(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(w)) = spatial.rays[complete[s]][w](b);
    stats.correlation.push_back(correlation_matrix(samples));
    stats.correlation_missing.push_back(false);
  }

  std::vector<const Eigen::VectorXd*> rows;
  for (const auto& ray : spatial.rays)
    for (const auto& v : ray)
      if (v.size() >= covariance_bands) rows.push_back(&v);
  stats.covariance_samples = rows.size();
  stats.covariance_missing = rows.size() < 2;
  if (!stats.covariance_missing) {
    Eigen::MatrixXd samples(static_cast<Eigen::Index>(rows.size()), covariance_bands);
    for (std::size_t s = 0; s < rows.size(); ++s)
      samples.row(static_cast<Eigen::Index>(s)) = rows[s]->head(covariance_bands).transpose();
    const Eigen::MatrixXd centred = samples.rowwise() - samples.colwise().mean();
    stats.covariance = centred.transpose() * centred / static_cast<double>(rows.size() - 1);
  }

  const ScanOrder scan = learn_scan_order(tensor, 1);
  std::vector<std::vector<double>> logvar;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const Position p = scan.order[i];
    if (static_cast<std::size_t>(p.band) >= logvar.size()) logvar.resize(static_cast<std::size_t>(p.band) + 1);
    auto& row = logvar[static_cast<std::size_t>(p.band)];
    if (static_cast<std::size_t>(p.angular) >= row.size())
      row.resize(static_cast<std::size_t>(p.angular) + 1, std::numeric_limits<double>::quiet_NaN());
    // Sample variance (n - 1) over the super-rays holding the position.
    const double n = static_cast<double>(scan.observations[i]);
    row[static_cast<std::size_t>(p.angular)] =
        n < 2 ? std::numeric_limits<double>::quiet_NaN() : std::log10(scan.variance[i] * n / (n - 1));
  }
  stats.log_variance = std::move(logvar);
  return stats;
}

RateAllocation rate_allocation_report(std::span<const std::uint8_t> stream, const LightField& reference,
                                      int threads) {
  const DecodeResult decoded = decode_light_field(stream, threads);
  if (!decoded.light_field.same_shape(reference)) throw Error("reference light field shape differs from the stream");
  const Bitstream parsed = Bitstream::parse(stream);
  const RateSplit split = rate_split(parsed);
  RateAllocation r;
  r.bytes = split.total();
  const double total = static_cast<double>(split.total());
  r.segmentation_percent = 100.0 * static_cast<double>(split.segmentation) / total;
  r.disparity_percent = 100.0 * static_cast<double>(split.disparity) / total;
  r.coefficients_percent = 100.0 * static_cast<double>(split.coefficients) / total;
  r.bpp = 8.0 * total / static_cast<double>(reference.sample_count());
  r.psnr = psnr(reference, decoded.light_field);
  return r;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_compaction_csv(std::ostream& out, const CompactionCurve& curve) {
  out << "kept,energy\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    out << format_double(curve.kept[i]) << ',' << format_double(curve.energy[i]) << '\n';
}

CompactionCurve read_compaction_csv(std::istream& in) {
  CompactionCurve curve;
  std::string line;
  if (!std::getline(in, line) || line != "kept,energy") throw FormatError("not a compaction CSV");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("malformed compaction CSV line");
    curve.kept.push_back(std::stod(line.substr(0, comma)));
    curve.energy.push_back(std::stod(line.substr(comma + 1)));
  }
  return curve;
}

void write_correlation_csv(std::ostream& out, const BandStatistics& stats) {
  out << "band,view_i,view_j,value\n";
  for (std::size_t b = 0; b < stats.correlation.size(); ++b) {
    if (stats.correlation_missing[b]) continue;
    const auto& c = stats.correlation[b];
    for (Eigen::Index i = 0; i < c.rows(); ++i)
      for (Eigen::Index j = 0; j < c.cols(); ++j)
        out << b << ',' << i << ',' << j << ',' << format_double(c(i, j)) << '\n';
  }
}

void write_covariance_csv(std::ostream& out, const BandStatistics& stats) {
  out << "band_i,band_j,log_abs_covariance\n";
  if (stats.covariance_missing) return;
  for (Eigen::Index i = 0; i < stats.covariance.rows(); ++i)
    for (Eigen::Index j = 0; j < stats.covariance.cols(); ++j)
      out << i << ',' << j << ',' << format_double(std::log10(std::abs(stats.covariance(i, j)))) << '\n';
}

void write_log_variance_csv(std::ostream& out, const BandStatistics& stats) {
  out << "band,angular,log10_variance\n";
  for (std::size_t b = 0; b < stats.log_variance.size(); ++b)
    for (std::size_t a = 0; a < stats.log_variance[b].size(); ++a)
      out << b << ',' << a << ',' << format_double(stats.log_variance[b][a]) << '\n';
}

void write_coefficients_csv(std::ostream& out, const CoefficientTensor& tensor) {
  out << "super_ray,band,angular_index,value\n";
  for (std::size_t k = 0; k < tensor.rays.size(); ++k)
    for (std::size_t b = 0; b < tensor.rays[k].size(); ++b)
      for (std::size_t a = 0; a < tensor.rays[k][b].size(); ++a)
        out << k << ',' << b << ',' << a << ',' << format_double(tensor.rays[k][b][a]) << '\n';
}

}  // namespace lfgt
