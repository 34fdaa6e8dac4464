#include "apam/staleness.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace apam {

ParamHistory::ParamHistory(std::size_t capacity, DenseVec initial, Version first_version,
                           bool backfill)
    : capacity_(capacity), current_(first_version) {
  if (capacity == 0) throw std::invalid_argument("ParamHistory: capacity must be >= 1");
  if (backfill) {
    ring_.assign(capacity, initial);
  } else {
    ring_.push_back(std::move(initial));
  }
}

void ParamHistory::push(DenseVec x) {
  require_same_size(x.size(), dimension(), "ParamHistory::push");
  if (ring_.size() == capacity_) ring_.pop_front();
  ring_.push_back(std::move(x));
  ++current_;
}

const DenseVec& ParamHistory::at(Version v) const {
  if (!holds(v)) {
    throw HistoryEvicted("ParamHistory: version " + std::to_string(v) + " not in [" +
                         std::to_string(oldest_version()) + ", " + std::to_string(current_) +
                         "]");
  }
  return ring_[static_cast<std::size_t>(v - oldest_version())];
}

bool ReadMeta::is_consistent() const {
  return std::adjacent_find(per_coord_version.begin(), per_coord_version.end(),
                            std::not_equal_to<>()) == per_coord_version.end();
}

Version ReadMeta::min_version() const {
  if (per_coord_version.empty()) throw std::invalid_argument("ReadMeta: empty");
  return *std::min_element(per_coord_version.begin(), per_coord_version.end());
}

Version ReadMeta::max_version() const {
  if (per_coord_version.empty()) throw std::invalid_argument("ReadMeta: empty");
  return *std::max_element(per_coord_version.begin(), per_coord_version.end());
}

Snapshot snapshot_consistent(const ParamHistory& hist, std::size_t delay) {
  const Version v = hist.current_version() - static_cast<Version>(delay);
  Snapshot s;
  s.x = hist.at(v);
  s.meta.per_coord_version.assign(s.x.size(), v);
  return s;
}

Snapshot snapshot_inconsistent(const ParamHistory& hist,
                               std::span<const std::size_t> per_coord_delays) {
  const std::size_t n = hist.dimension();
  require_same_size(per_coord_delays.size(), n, "snapshot_inconsistent");
  Snapshot s;
  s.x.resize(n);
  s.meta.per_coord_version.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Version v = hist.current_version() - static_cast<Version>(per_coord_delays[i]);
    s.x[i] = hist.at(v)[i];
    s.meta.per_coord_version[i] = v;
  }
  return s;
}

std::size_t tau_of(const ReadMeta& meta, Version current) {
  const Version lo = meta.min_version();
  if (meta.max_version() > current) {
    throw std::invalid_argument("tau_of: read version newer than current");
  }
  return static_cast<std::size_t>(current - lo);
}

std::size_t tau_from_values(const ParamHistory& hist, std::span<const double> xhat) {
  require_same_size(xhat.size(), hist.dimension(), "tau_from_values");
  std::size_t tau = 0;
  const auto depth = static_cast<std::size_t>(hist.current_version() - hist.oldest_version());
  for (std::size_t i = 0; i < xhat.size(); ++i) {
    std::size_t j = 0;
    while (hist.at(hist.current_version() - static_cast<Version>(j))[i] != xhat[i]) {
      if (++j > depth) {
        throw HistoryEvicted("tau_from_values: coordinate " + std::to_string(i) +
                             " matches no stored iterate");
      }
    }
    tau = std::max(tau, j);
  }
  return tau;
}

Admission admit(const ReadMeta& meta, Version current, const StalenessPolicy& policy) {
  return tau_of(meta, current) <= policy.tau_max ? Admission::Accept : Admission::Drop;
}

MixtureReport mixture_bounds_check(const ParamHistory& hist, const ReadMeta& meta) {
  const std::size_t n = hist.dimension();
  require_same_size(meta.per_coord_version.size(), n, "mixture_bounds_check");
  const Version k = hist.current_version();
  MixtureReport r;
  r.tau = tau_of(meta, k);
  const DenseVec& xk = hist.at(k);

  double lhs_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = hist.at(meta.per_coord_version[i])[i] - xk[i];
    lhs_sq += d * d;
  }
  double sum_norm = 0.0, sum_sq = 0.0;
  for (std::size_t l = 0; l < r.tau; ++l) {
    const Version hi = k - static_cast<Version>(l);
    const double dsq = norm_sq(sub(hist.at(hi), hist.at(hi - 1)));
    sum_norm += std::sqrt(dsq);
    sum_sq += dsq;
  }
  r.lhs_sq = lhs_sq;
  r.lhs_norm = std::sqrt(lhs_sq);
  r.rhs_norm = sum_norm;
  r.rhs_sq = static_cast<double>(r.tau) * sum_sq;
  r.holds = r.lhs_norm <= r.rhs_norm + kAuditSlack && r.lhs_sq <= r.rhs_sq + kAuditSlack;
  return r;
}

SharedParams::SharedParams(std::span<const double> x, Version version)
    : n_(x.size()),
      values_(std::make_unique<std::atomic<double>[]>(x.size())),
      stamps_(std::make_unique<std::atomic<std::uint64_t>[]>(x.size())) {
  if (version < 0) throw std::invalid_argument("SharedParams: version must be >= 0");
  for (std::size_t i = 0; i < n_; ++i) {
    values_[i].store(x[i], std::memory_order_relaxed);
    stamps_[i].store(2 * static_cast<std::uint64_t>(version), std::memory_order_relaxed);
  }
  std::atomic_thread_fence(std::memory_order_release);
}

void SharedParams::publish(std::span<const double> x, Version version) {
  require_same_size(x.size(), n_, "SharedParams::publish");
  const std::uint64_t stamp = 2 * static_cast<std::uint64_t>(version);
  for (std::size_t i = 0; i < n_; ++i) {
    stamps_[i].store(stamp - 1, std::memory_order_relaxed);
    std::atomic_thread_fence(std::memory_order_release);
    values_[i].store(x[i], std::memory_order_relaxed);
    stamps_[i].store(stamp, std::memory_order_release);
  }
}

Snapshot SharedParams::read() const {
  Snapshot s;
  s.x.resize(n_);
  s.meta.per_coord_version.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (;;) {
      const std::uint64_t s1 = stamps_[i].load(std::memory_order_acquire);
      if (s1 & 1U) {
        std::this_thread::yield();
        continue;
      }
      const double v = values_[i].load(std::memory_order_relaxed);
      std::atomic_thread_fence(std::memory_order_acquire);
      const std::uint64_t s2 = stamps_[i].load(std::memory_order_relaxed);
      if (s1 == s2) {
        s.x[i] = v;
        s.meta.per_coord_version[i] = static_cast<Version>(s1 / 2);
        break;
      }
    }
  }
  return s;
}

}  // namespace apam
