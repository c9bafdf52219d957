#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace covhf {

/// Strictly increasing, nonnegative observation times of one asset.
class SamplingDesign {
 public:
  SamplingDesign() = default;
  /// Throws std::invalid_argument on a negative, non-finite or non-increasing time.
  explicit SamplingDesign(std::vector<double> times);

  std::span<const double> times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  double operator[](std::size_t i) const { return times_[i]; }
  double front() const { return times_.front(); }
  double back() const { return times_.back(); }

 private:
  std::vector<double> times_;
};

/// Refresh times of two designs and the next-tick interpolated designs.
///
/// `refresh` has N entries. `s_hat`/`t_hat` hold the interpolated designs
/// indexed like `refresh`; one of them may carry one extra trailing entry
/// when that design still ticks after the last refresh time (the other one
/// is then exhausted). `s_check[k]` is the last S-time strictly before
/// `s_hat[k]`; index 0 has no predecessor and repeats `s_hat[0]`.
struct SyncResult {
  std::vector<double> refresh;
  std::vector<double> s_hat;
  std::vector<double> t_hat;
  std::vector<double> s_check;
  std::vector<double> t_check;
  /// Position of s_hat[k] (t_hat[k]) inside the source design.
  std::vector<std::size_t> s_index;
  std::vector<std::size_t> t_index;
};

/// R^0 = S^0 v T^0, R^k = min{S > R^{k-1}} v min{T > R^{k-1}}; stops as soon
/// as either design has no time after the previous refresh time.
std::vector<double> refresh_times(const SamplingDesign& s, const SamplingDesign& t);

SyncResult interpolate(const SamplingDesign& s, const SamplingDesign& t);

/// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool empty() const { return end <= begin; }
  bool contains(std::size_t j) const { return begin <= j && j < end; }
};

/// Answers Kbar(i,j) = 1{[s_i, s_{i+kn}) and [t_j, t_{j+kn}) intersect}.
///
/// For fixed i the set of j with Kbar(i,j) = 1 is a contiguous range whose
/// endpoints are nondecreasing in i, so each row is stored as an IndexRange.
/// With `band_only` the rows are additionally confined to |i - j| <= kn,
/// which is exact for refresh-interpolated designs.
class OverlapOracle {
 public:
  OverlapOracle(std::span<const double> s, std::span<const double> t, std::size_t kn,
                bool band_only);

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }
  std::size_t kn() const { return kn_; }
  bool band_only() const { return band_only_; }

  const IndexRange& row(std::size_t i) const { return rows_.at(i); }
  bool operator()(std::size_t i, std::size_t j) const;
  /// Number of nonzero entries.
  std::size_t nonzeros() const;

 private:
  std::vector<IndexRange> rows_;
  std::size_t cols_ = 0;
  std::size_t kn_ = 0;
  bool band_only_ = true;
};

/// Overlap indicators for the interpolated designs of `sync`.
/// Requires kn >= 2 and at least kn + 1 points in each interpolated design.
OverlapOracle overlap_matrix(const SyncResult& sync, std::size_t kn, bool band_only = true);

}  // namespace covhf
