#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <unordered_map>
#include <utility>
#include <vector>

#include "epislfv/event_law.hpp"
#include "epislfv/geometry.hpp"
#include "epislfv/grid.hpp"
#include "epislfv/rng.hpp"

namespace epislfv {

struct DualAtom {
  std::uint64_t uid = 0;
  Point x;
  double death_time = std::numeric_limits<double>::infinity();
  std::size_t cell = 0;  // grid-matched mode only
};

/// Live atoms with a death queue and a uniform spatial hash for ball counts.
class AtomSet {
 public:
  AtomSet(int dim, double bucket_edge, std::size_t cell_count = 0);

  void add(const DualAtom& atom);
  void remove(std::uint64_t uid);
  const DualAtom* find(std::uint64_t uid) const;
  const std::vector<DualAtom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }

  /// Earliest death among live atoms (infinity when empty).
  std::pair<double, std::uint64_t> next_death();

  /// Atoms with |x - z| <= r (Euclidean, no wrapping); r must not exceed
  /// the bucket edge.
  std::size_t count_within(const Point& z, double r) const;
  /// Atoms occupying one grid cell.
  std::size_t occupancy(std::size_t cell) const noexcept { return occupancy_[cell]; }

 private:
  struct BucketEntry {
    std::uint64_t uid;
    Point x;
  };
  using Key = std::array<long long, kMaxDim>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = 0x9e3779b97f4a7c15ULL;
      for (long long v : k) h = mix64(h ^ static_cast<std::uint64_t>(v));
      return static_cast<std::size_t>(h);
    }
  };
  Key key_of(const Point& x) const noexcept;

  static constexpr std::size_t kLinearScanBelow = 64;

  int dim_;
  double bucket_edge_;
  std::vector<DualAtom> atoms_;
  std::unordered_map<std::uint64_t, std::size_t> position_;
  std::unordered_map<Key, std::vector<BucketEntry>, KeyHash> buckets_;
  std::vector<std::uint32_t> occupancy_;
  using DeathEntry = std::pair<double, std::uint64_t>;
  std::priority_queue<DeathEntry, std::vector<DeathEntry>, std::greater<>> deaths_;
};

enum class DualMode { kContinuous, kGridMatched };

struct DualConfig {
  EventLaw law;
  double gamma = 1.0;
  DualMode mode = DualMode::kContinuous;
  /// Required in grid-matched mode: same cells and torus as the forward run.
  std::optional<Grid> grid;
  /// Births plus deaths allowed per run before std::overflow_error.
  std::size_t event_cap = 50'000'000;

  static DualConfig continuous(const EventLaw& law, double gamma);
  static DualConfig grid_matched(const EventLaw& law, double gamma, const Grid& grid);
  void validate() const;
};

struct DualEvent {
  enum class Kind { kNone, kBirth, kDeath };
  Kind kind = Kind::kNone;
  double t = 0.0;
  DualAtom atom;
  std::size_t n_after = 0;
};

/// The ancestral process: atoms die at rate gamma; events centred at z
/// covering k atoms add one atom uniform in B(z, r) with probability
/// 1 - (1 - u)^k. Candidate events are proposed from the atoms themselves
/// (rate N * sum a_i V_i) and accepted with probability (1-(1-u)^k)/k.
///
/// In grid-matched mode atoms live on grid cells, V_i is the covered-cell
/// volume and coverage follows the forward simulator's stencil on the torus.
class AncestralSimulator {
 public:
  AncestralSimulator(const DualConfig& config, const std::vector<Point>& start, Rng rng, double start_time = 0.0);

  /// Next birth or death at time <= horizon. Returns kNone and sets the
  /// clock to horizon when there is none.
  DualEvent step(double horizon);
  void run_until(double t);

  double time() const noexcept { return time_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool extinct() const noexcept { return atoms_.empty(); }
  const std::vector<DualAtom>& atoms() const noexcept { return atoms_.atoms(); }
  const DualConfig& config() const noexcept { return config_; }
  double proposal_rate() const noexcept { return static_cast<double>(atoms_.size()) * class_total_; }

  std::size_t proposals() const noexcept { return proposals_; }
  std::size_t births() const noexcept { return births_; }
  std::size_t deaths() const noexcept { return deaths_; }

 private:
  std::size_t pick_class();
  void add_atom(const Point& x, std::size_t cell);
  bool propose_continuous(std::size_t cls, DualAtom& born);
  bool propose_grid(std::size_t cls, DualAtom& born);
  void count_event();

  DualConfig config_;
  Rng rng_;
  double time_;
  AtomSet atoms_;
  std::vector<double> class_weight_;  // cumulative, normalised
  double class_total_ = 0.0;
  std::vector<Stencil> stencils_;
  std::uint64_t next_uid_ = 0;
  std::size_t proposals_ = 0;
  std::size_t births_ = 0;
  std::size_t deaths_ = 0;
};

/// 1 - (1 - u)^k, accurate for small u.
double branching_probability(double u, std::size_t k);
/// (1 - (1 - u)^k) / k.
double thinning_acceptance(double u, std::size_t k);

struct ProbabilityEstimate {
  double p = 0.0;
  double se = 0.0;
  std::size_t replicates = 0;
};

/// P(N_t > 0) from a single atom at `origin`.
ProbabilityEstimate survival_prob(const DualConfig& config, double t, std::size_t replicates,
                                  std::uint64_t master_seed, unsigned threads = 1, const Point& origin = {});
/// P(Xi_t(A) > 0) from a single atom at `origin`.
ProbabilityEstimate occupancy_prob(const DualConfig& config, double t, const Shape& window, std::size_t replicates,
                                   std::uint64_t master_seed, unsigned threads = 1, const Point& origin = {});

/// Time to the first birth from fixed atoms with deaths switched off.
double first_birth_time(const DualConfig& config, const std::vector<Point>& atoms, SeedSpec seed);

struct BetaCouplingResult {
  std::size_t violations = 0;
  std::size_t checks = 0;
  std::optional<double> first_violation_time;
  std::vector<std::pair<double, std::size_t>> full_sizes;  // (t, N) after each change
  std::vector<std::pair<double, std::size_t>> beta_sizes;
  double first_beta_birth = std::numeric_limits<double>::infinity();
  std::size_t events = 0;
};

/// Joint run of the ancestral process for `law` and for
/// rescale_impact(law, beta), both from one atom at the origin, with the
/// second kept inside the first. Atoms of the rescaled process share uid,
/// location and death clock with their copy in the full process; any atom
/// of the rescaled process without such a copy is a violation.
BetaCouplingResult run_coupled_beta(const EventLaw& law, double gamma, double beta, double horizon, SeedSpec seed,
                                    std::size_t event_cap = 50'000'000);

}  // namespace epislfv
