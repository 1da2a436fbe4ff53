#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace baytomo {

struct ChainSummary {
  std::size_t count = 0;
  std::vector<double> mean;
  /// Unbiased: M2 / (count - 1).
  std::vector<double> variance;
  /// log10 of the variance; -inf where the variance is exactly zero.
  std::vector<double> log10_variance;
};

/// Streaming mean / variance over fixed-dimension samples (Welford).
///
/// With batch_size > 0 it also keeps a running variance of consecutive batch
/// means, from which batch_means_standard_error() estimates the Monte Carlo
/// standard error of the mean without storing the chain. With
/// reservoir_stride > 0 every stride-th sample is kept verbatim.
class ChainAccumulator {
 public:
  explicit ChainAccumulator(std::size_t dimension, std::size_t batch_size = 0, std::size_t reservoir_stride = 0);

  void add(std::span<const double> sample);
  /// Chan et al. pairwise combination. Batch statistics combine only the
  /// completed batches of each side.
  void merge(const ChainAccumulator& other);

  std::size_t dimension() const { return mean_.size(); }
  std::size_t count() const { return count_; }
  std::span<const double> mean() const { return mean_; }
  std::span<const double> m2() const { return m2_; }

  /// Throws std::logic_error when count < 2.
  ChainSummary finalize() const;

  std::size_t batch_size() const { return batch_size_; }
  std::size_t completed_batches() const { return n_batches_; }
  /// sqrt(var(batch means) / n_batches) per component; needs >= 2 batches.
  std::vector<double> batch_means_standard_error() const;

  std::size_t reservoir_stride() const { return stride_; }
  const std::vector<std::vector<double>>& reservoir() const { return reservoir_; }

 private:
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;

  std::size_t batch_size_ = 0;
  std::size_t in_batch_ = 0;
  std::vector<double> batch_sum_;
  std::size_t n_batches_ = 0;
  std::vector<double> batch_mean_;
  std::vector<double> batch_m2_;

  std::size_t stride_ = 0;
  std::vector<std::vector<double>> reservoir_;
};

/// Standard error of the mean of a scalar series from non-overlapping batch
/// means. Trailing samples that do not fill a batch are dropped.
double batch_means_standard_error(std::span<const double> series, std::size_t n_batches = 20);

}  // namespace baytomo
