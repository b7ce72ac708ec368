#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chisd/dynamics.hpp"
#include "chisd/eigensolver.hpp"

/**
 * \file landscape.hpp
 *
 * @brief Index classification, the solution set with its symmetry-aware membership test, and the downward/upward
 * searches that connect stationary points into a pathway map.
 */

namespace chisd {

  struct ClassifyOptions {
    HessianMode hessian = HessianMode::analytic;
    double dimer_length = 1e-3;
    EigenOptions eigen;
    /// |lambda| <= zero_rel * max(1, spectral scale) counts as a zero eigenvalue.
    double zero_rel = 1e-4;
    /// First block size tried; grown until a positive eigenvalue is seen.
    std::size_t initial_K = 4;
  };

  struct Classification {
    int index = 0;
    int n_zero = 0;
    /// Leading eigenvalues, ascending; at least index + n_zero + 2 of them unless the tangent space is smaller.
    std::vector<double> spectrum;
    Frame eigenvectors;
    std::vector<double> residuals;
    double zero_threshold = 0.0;
    double spectral_scale = 0.0;
  };

  /// Ambient Hessian-vector operator of the chosen mode on T(x), for the eigensolver.
  TangentOperator hessian_operator(const Problem& problem, const Manifold& chart, const Vector& x, HessianMode mode, double l);

  /// Morse index and zero-mode count at a stationary x.
  Classification classify(const Problem& problem, const Manifold& chart, const Vector& x, const ClassifyOptions& options = {});

  struct Provenance {
    long parent = -1;
    /// 1-based direction index of the perturbation, 0 for the seed.
    int direction = 0;
    /// +1 / -1 for the perturbation sign, 0 for the seed.
    int sign = 0;
    /// Target index of the CHiSD run that produced the point.
    int target = -1;
  };

  struct StationaryPoint {
    long id = -1;
    Vector x;
    double energy = 0.0;
    double grad_norm = 0.0;
    int index = 0;
    int n_zero = 0;
    std::vector<double> spectrum;
    Frame eigenvectors;
    Provenance provenance;
    /// Closest existing solution that matched in index and energy but missed the distance bound.
    long near_miss_of = -1;
    double near_miss_distance = 0.0;
  };

  struct Relation {
    long parent;
    long child;
    bool operator==(const Relation&) const = default;
  };

  struct Landscape {
    std::vector<StationaryPoint> solutions;
    std::vector<Relation> relations;

    const StationaryPoint& at(long id) const;
    bool has_relation(long parent, long child) const;
    /// Adds the relation unless present; returns whether it was new.
    bool add_relation(long parent, long child);
  };

  struct DedupOptions {
    double energy_rel = 1e-6;
    double distance = 1e-4;
    /// Same index and energy within near_miss_energy_rel but distance in (distance, near_miss_distance] is reported.
    double near_miss_distance = 1e-2;
    double near_miss_energy_rel = 1e-4;
  };

  /**
   * @brief Inserts candidate unless an equal solution exists; returns (inserted, canonical id).
   *
   * Equal means same index, |dE| <= energy_rel * max(1, |E|), problem prefilter passed and aligned distance <= distance.
   * Not thread safe: the searches call it from one thread in a fixed order.
   */
  std::pair<bool, long> dedup_insert(Landscape& landscape, StationaryPoint candidate, const Problem& problem,
                                     const DedupOptions& options = {});

  struct LandscapeConfig {
    /// alpha, beta, tolerances and budgets of every CHiSD run; k is set per launch.
    SearchConfig search;
    ClassifyOptions classify;
    DedupOptions dedup;
    double eps = 1e-2;
    /// Downward: a node of index k searches no lower than k - depth_cap (negative = exhaustive, down to 0).
    int depth_cap = -1;
    /// Upward: node indices at which expansion stops.
    int max_index = 4;
    /// Upward: CHiSD target m = index + n_zero + 1 (+ up_offset); negative offsets are clamped at index + 1.
    int up_offset = 0;
    /// Upward: further targets m + 1 .. m + up_extra tried after m, per node.
    int up_extra = 0;
    /// Stop once this many solutions exist.
    std::size_t max_solutions = 500;
    /// Concurrent CHiSD runs per job.
    std::size_t threads = 1;
  };

  /// One CHiSD launch and its outcome, for reporting.
  struct LaunchRecord {
    long source;
    int target;
    int direction;
    int sign;
    SearchStatus status;
    long iterations;
    double energy;
    /// Id in the landscape, or -1 when the run failed or was rejected.
    long result = -1;
    bool inserted = false;
    std::string note;
  };

  struct SearchReport {
    Landscape landscape;
    std::vector<LaunchRecord> launches;
  };

  /// The seed as a classified StationaryPoint; throws DomainError unless |grad E(x)| <= search.grad_tol.
  StationaryPoint make_seed(const Problem& problem, const Manifold& chart, const Vector& x, const LandscapeConfig& config);

  /// Queue-driven downward search from the seed (id 0). Failed branches are logged and skipped.
  SearchReport downward_search(const Problem& problem, const Manifold& chart, const StationaryPoint& seed,
                               const LandscapeConfig& config);

  /**
   * @brief Stack-driven upward search. From a k-saddle with z zero modes, m-CHiSD with m = k + z + 1 starts at
   * R_x(+-eps v_m) with frame v_1..v_m. Relations are recorded as (higher index, lower index).
   */
  SearchReport upward_search(const Problem& problem, const Manifold& chart, const StationaryPoint& seed, const LandscapeConfig& config);

  struct JsonOptions {
    /// Embed x as a coordinate array; otherwise write field_ref(id) as the reference.
    bool embed_coordinates = true;
    std::string field_pattern = "solutions/{id}.field";
  };

  /// Deterministic JSON: fixed key order, shortest round-trip doubles, no timestamps.
  std::string to_json(const Landscape& landscape, const std::string& problem_name, const JsonOptions& options = {});
  std::string launches_json(const std::vector<LaunchRecord>& launches);

  /// Parses to_json output (coordinates only when embedded).
  Landscape landscape_from_json(const std::string& text);

  /// DOT digraph ranked by index (higher index on top), nodes in id order labeled "id idx=k E=...".
  std::string to_dot(const Landscape& landscape);

}  // namespace chisd
