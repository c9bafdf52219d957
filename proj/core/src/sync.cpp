#include "covhf/sync.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace covhf {

SamplingDesign::SamplingDesign(std::vector<double> times) : times_(std::move(times)) {
  for (std::size_t i = 0; i < times_.size(); ++i) {
    const double t = times_[i];
    if (!std::isfinite(t) || t < 0.0) {
      throw std::invalid_argument("SamplingDesign: time " + std::to_string(i) +
                                  " is negative or not finite");
    }
    if (i > 0 && !(t > times_[i - 1])) {
      throw std::invalid_argument("SamplingDesign: times not strictly increasing at index " +
                                  std::to_string(i));
    }
  }
}

namespace {

void require_nonempty(const SamplingDesign& s, const SamplingDesign& t) {
  if (s.empty() || t.empty()) {
    throw std::invalid_argument("refresh time: both sampling designs must be nonempty");
  }
}

// First index >= from whose time is strictly greater than r.
std::size_t next_after(std::span<const double> x, std::size_t from, double r) {
  while (from < x.size() && x[from] <= r) ++from;
  return from;
}

}  // namespace

std::vector<double> refresh_times(const SamplingDesign& s, const SamplingDesign& t) {
  require_nonempty(s, t);
  const auto st = s.times();
  const auto tt = t.times();
  std::vector<double> r;
  r.reserve(std::min(st.size(), tt.size()));
  r.push_back(std::max(st[0], tt[0]));
  std::size_t i = 0;
  std::size_t j = 0;
  for (;;) {
    i = next_after(st, i, r.back());
    j = next_after(tt, j, r.back());
    if (i == st.size() || j == tt.size()) break;
    r.push_back(std::max(st[i], tt[j]));
  }
  return r;
}

SyncResult interpolate(const SamplingDesign& s, const SamplingDesign& t) {
  require_nonempty(s, t);
  const auto st = s.times();
  const auto tt = t.times();

  SyncResult out;
  const std::size_t cap = std::min(st.size(), tt.size()) + 1;
  out.refresh.reserve(cap);
  out.s_hat.reserve(cap);
  out.t_hat.reserve(cap);
  out.s_check.reserve(cap);
  out.t_check.reserve(cap);
  out.s_index.reserve(cap);
  out.t_index.reserve(cap);

  out.refresh.push_back(std::max(st[0], tt[0]));
  out.s_hat.push_back(st[0]);
  out.t_hat.push_back(tt[0]);
  out.s_check.push_back(st[0]);
  out.t_check.push_back(tt[0]);
  out.s_index.push_back(0);
  out.t_index.push_back(0);

  std::size_t i = 0;
  std::size_t j = 0;
  for (;;) {
    const double r = out.refresh.back();
    i = next_after(st, i, r);
    j = next_after(tt, j, r);
    const bool has_s = i < st.size();
    const bool has_t = j < tt.size();
    // i, j >= 1 here because st[0] <= r and tt[0] <= r.
    if (has_s) {
      out.s_hat.push_back(st[i]);
      out.s_check.push_back(st[i - 1]);
      out.s_index.push_back(i);
    }
    if (has_t) {
      out.t_hat.push_back(tt[j]);
      out.t_check.push_back(tt[j - 1]);
      out.t_index.push_back(j);
    }
    if (!has_s || !has_t) break;
    out.refresh.push_back(std::max(st[i], tt[j]));
  }
  return out;
}

OverlapOracle::OverlapOracle(std::span<const double> s, std::span<const double> t,
                             std::size_t kn, bool band_only)
    : kn_(kn), band_only_(band_only) {
  if (kn < 1) throw std::invalid_argument("OverlapOracle: kn must be positive");
  if (s.size() < kn + 1 || t.size() < kn + 1) {
    throw std::invalid_argument("OverlapOracle: each design needs at least kn + 1 points");
  }
  const std::size_t nrows = s.size() - kn;
  cols_ = t.size() - kn;
  rows_.resize(nrows);

  // Kbar(i,j) = 1  <=>  t[j] < s[i+kn]  and  t[j+kn] > s[i].
  std::size_t lo = 0;
  std::size_t hi = 0;
  for (std::size_t i = 0; i < nrows; ++i) {
    while (lo < cols_ && t[lo + kn] <= s[i]) ++lo;
    if (hi < lo) hi = lo;
    while (hi < cols_ && t[hi] < s[i + kn]) ++hi;
    IndexRange r{lo, hi};
    if (band_only) {
      r.begin = std::max(r.begin, i >= kn ? i - kn : std::size_t{0});
      r.end = std::min(r.end, i + kn + 1);
      if (r.end < r.begin) r.end = r.begin;
    }
    rows_[i] = r;
  }
}

bool OverlapOracle::operator()(std::size_t i, std::size_t j) const {
  if (i >= rows_.size() || j >= cols_) {
    throw std::out_of_range("OverlapOracle: index outside the design range");
  }
  return rows_[i].contains(j);
}

std::size_t OverlapOracle::nonzeros() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.empty() ? 0 : r.end - r.begin;
  return n;
}

OverlapOracle overlap_matrix(const SyncResult& sync, std::size_t kn, bool band_only) {
  if (kn < 2) throw std::invalid_argument("overlap_matrix: kn must be at least 2");
  return OverlapOracle(sync.s_hat, sync.t_hat, kn, band_only);
}

}  // namespace covhf
