#pragma once

// Parameter-version history, consistent and inconsistent snapshots, staleness
// measurement and the bounded-staleness admission rule.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "apam/vectormath.hpp"

namespace apam {

/// Iterate index. Signed so that a backfilled history can describe the
/// (constant) iterates before the first one.
using Version = std::int64_t;

class HistoryEvicted : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Ring of the most recent iterates with contiguous versions ending at
/// current_version(). Single writer.
class ParamHistory {
 public:
  /// With backfill the ring starts full: every slot holds `initial`, with
  /// versions first_version - capacity + 1 .. first_version.
  ParamHistory(std::size_t capacity, DenseVec initial, Version first_version = 0,
               bool backfill = false);

  void push(DenseVec x);

  Version current_version() const { return current_; }
  Version oldest_version() const { return current_ - static_cast<Version>(ring_.size()) + 1; }
  std::size_t occupancy() const { return ring_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t dimension() const { return ring_.back().size(); }
  bool holds(Version v) const { return v >= oldest_version() && v <= current_; }

  /// Iterate stored at version v; throws HistoryEvicted when outside the ring.
  const DenseVec& at(Version v) const;
  const DenseVec& current() const { return ring_.back(); }

 private:
  std::size_t capacity_;
  Version current_;
  std::deque<DenseVec> ring_;
};

/// Per-coordinate version each read value came from.
struct ReadMeta {
  std::vector<Version> per_coord_version;

  bool is_consistent() const;
  Version min_version() const;
  Version max_version() const;
  bool operator==(const ReadMeta&) const = default;
};

struct Snapshot {
  DenseVec x;
  ReadMeta meta;
};

Snapshot snapshot_consistent(const ParamHistory& hist, std::size_t delay);
Snapshot snapshot_inconsistent(const ParamHistory& hist,
                               std::span<const std::size_t> per_coord_delays);

/// current - min_i version_i, i.e. the largest per-coordinate delay.
std::size_t tau_of(const ReadMeta& meta, Version current);

/// Smallest j such that every coordinate of xhat equals the same coordinate
/// of one of x^(current-j) .. x^(current), searched over the stored ring.
/// Throws HistoryEvicted if some coordinate matches no stored iterate.
std::size_t tau_from_values(const ParamHistory& hist, std::span<const double> xhat);

enum class ReadMode { Consistent, Inconsistent };

struct StalenessPolicy {
  std::size_t tau_max = 0;
  ReadMode mode = ReadMode::Consistent;
  bool operator==(const StalenessPolicy&) const = default;
};

enum class Admission { Accept, Drop };

Admission admit(const ReadMeta& meta, Version current, const StalenessPolicy& policy);

/// Both sides of the mixture bounds
///   ||xhat - x^(k)||   <= sum_{l<tau} ||x^(k-l) - x^(k-l-1)||
///   ||xhat - x^(k)||^2 <= tau * sum_{l<tau} ||x^(k-l) - x^(k-l-1)||^2
struct MixtureReport {
  std::size_t tau = 0;
  double lhs_norm = 0.0;
  double rhs_norm = 0.0;
  double lhs_sq = 0.0;
  double rhs_sq = 0.0;
  bool holds = true;
};

inline constexpr double kAuditSlack = 1e-9;

/// Rebuilds xhat from the history via meta and evaluates both bounds at the
/// history's current version.
MixtureReport mixture_bounds_check(const ParamHistory& hist, const ReadMeta& meta);

/// Lock-free published copy of the master iterate for concurrent readers.
/// Each coordinate carries its own sequence stamp (2 * version, odd while
/// being written); a read is atomic per coordinate but the vector as a whole
/// may mix versions.
class SharedParams {
 public:
  SharedParams(std::span<const double> x, Version version);

  std::size_t dimension() const { return n_; }
  /// Master only.
  void publish(std::span<const double> x, Version version);
  Snapshot read() const;

 private:
  std::size_t n_;
  std::unique_ptr<std::atomic<double>[]> values_;
  std::unique_ptr<std::atomic<std::uint64_t>[]> stamps_;
};

}  // namespace apam
