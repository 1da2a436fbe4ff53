#include "baytomo/accumulator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace baytomo {

ChainAccumulator::ChainAccumulator(std::size_t dimension, std::size_t batch_size, std::size_t reservoir_stride)
    : mean_(dimension, 0.0), m2_(dimension, 0.0), batch_size_(batch_size), stride_(reservoir_stride) {
  if (dimension == 0) throw std::invalid_argument("accumulator dimension must be positive");
  if (batch_size_ > 0) {
    batch_sum_.assign(dimension, 0.0);
    batch_mean_.assign(dimension, 0.0);
    batch_m2_.assign(dimension, 0.0);
  }
}

void ChainAccumulator::add(std::span<const double> sample) {
  if (sample.size() != mean_.size()) throw std::invalid_argument("sample dimension does not match the accumulator");
  ++count_;
  const double inv = 1.0 / static_cast<double>(count_);
  for (std::size_t k = 0; k < mean_.size(); ++k) {
    const double d = sample[k] - mean_[k];
    mean_[k] += d * inv;
    m2_[k] += d * (sample[k] - mean_[k]);
  }
  if (batch_size_ > 0) {
    for (std::size_t k = 0; k < mean_.size(); ++k) batch_sum_[k] += sample[k];
    if (++in_batch_ == batch_size_) {
      ++n_batches_;
      const double binv = 1.0 / static_cast<double>(n_batches_);
      for (std::size_t k = 0; k < mean_.size(); ++k) {
        const double bm = batch_sum_[k] / static_cast<double>(batch_size_);
        const double d = bm - batch_mean_[k];
        batch_mean_[k] += d * binv;
        batch_m2_[k] += d * (bm - batch_mean_[k]);
        batch_sum_[k] = 0.0;
      }
      in_batch_ = 0;
    }
  }
  if (stride_ > 0 && count_ % stride_ == 0) reservoir_.emplace_back(sample.begin(), sample.end());
}

namespace {

void chan_merge(std::size_t na, std::vector<double>& mean, std::vector<double>& m2, std::size_t nb,
                std::span<const double> mean_b, std::span<const double> m2_b) {
  if (nb == 0) return;
  const double a = static_cast<double>(na), b = static_cast<double>(nb), n = a + b;
  for (std::size_t k = 0; k < mean.size(); ++k) {
    const double d = mean_b[k] - mean[k];
    mean[k] += d * b / n;
    m2[k] += m2_b[k] + d * d * a * b / n;
  }
}

}  // namespace

void ChainAccumulator::merge(const ChainAccumulator& other) {
  if (other.dimension() != dimension()) throw std::invalid_argument("cannot merge accumulators of different dimension");
  if (other.batch_size_ != batch_size_) throw std::invalid_argument("cannot merge accumulators with different batch sizes");
  chan_merge(count_, mean_, m2_, other.count_, other.mean_, other.m2_);
  count_ += other.count_;
  if (batch_size_ > 0) {
    chan_merge(n_batches_, batch_mean_, batch_m2_, other.n_batches_, other.batch_mean_, other.batch_m2_);
    n_batches_ += other.n_batches_;
  }
  reservoir_.insert(reservoir_.end(), other.reservoir_.begin(), other.reservoir_.end());
}

ChainSummary ChainAccumulator::finalize() const {
  if (count_ < 2) throw std::logic_error("finalize needs at least two samples");
  ChainSummary s;
  s.count = count_;
  s.mean = mean_;
  s.variance.resize(mean_.size());
  s.log10_variance.resize(mean_.size());
  for (std::size_t k = 0; k < mean_.size(); ++k) {
    s.variance[k] = m2_[k] / static_cast<double>(count_ - 1);
    s.log10_variance[k] = s.variance[k] > 0.0 ? std::log10(s.variance[k]) : -std::numeric_limits<double>::infinity();
  }
  return s;
}

std::vector<double> ChainAccumulator::batch_means_standard_error() const {
  if (batch_size_ == 0 || n_batches_ < 2) throw std::logic_error("batch-means error needs at least two completed batches");
  std::vector<double> se(mean_.size());
  const double nb = static_cast<double>(n_batches_);
  for (std::size_t k = 0; k < se.size(); ++k) se[k] = std::sqrt(batch_m2_[k] / (nb - 1.0) / nb);
  return se;
}

double batch_means_standard_error(std::span<const double> series, std::size_t n_batches) {
  if (n_batches < 2) throw std::invalid_argument("need at least two batches");
  const std::size_t b = series.size() / n_batches;
  if (b == 0) throw std::invalid_argument("series shorter than the batch count");
  double mean = 0.0;
  std::vector<double> means(n_batches, 0.0);
  for (std::size_t i = 0; i < n_batches; ++i) {
    for (std::size_t j = 0; j < b; ++j) means[i] += series[i * b + j];
    means[i] /= static_cast<double>(b);
    mean += means[i];
  }
  mean /= static_cast<double>(n_batches);
  double ss = 0.0;
  for (double m : means) ss += (m - mean) * (m - mean);
  const double nb = static_cast<double>(n_batches);
  return std::sqrt(ss / (nb - 1.0) / nb);
}

}  // namespace baytomo
