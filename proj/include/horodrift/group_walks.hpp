#ifndef HORODRIFT_GROUP_WALKS_HPP
#define HORODRIFT_GROUP_WALKS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace horodrift::group_walks {

/// Discrete catalog entry: Z^d with standard generators or the free group
/// F_k, with mu uniform on the symmetric generating set.
struct GroupSpec {
  enum class Kind { Lattice, Free };
  Kind kind = Kind::Lattice;
  int param = 1;  // d for Z^d, k for F_k

  static GroupSpec lattice(int d);
  static GroupSpec free_group(int k);
  /// `z:<d>` or `free:<k>`.
  static GroupSpec parse(std::string_view name);
  std::string name() const;
  int generator_count() const { return 2 * param; }
};

/// mu^{*n}: dense array over a box for lattices, radial length vector for
/// free groups (all words of equal length are equiprobable by symmetry).
class WordDistribution {
 public:
  static WordDistribution initial(GroupSpec g, int n_max);

  const GroupSpec& group() const { return group_; }
  int n() const { return n_; }

  /// one convolution step with mu
  void step();

  /// total mass (compensated summation)
  double mass() const;
  /// E |X_n| in the word metric
  double expected_length() const;
  /// Shannon entropy over group elements (nats); free groups decompose as
  /// H(length) + E[ln #sphere]
  double entropy() const;
  /// radial marginal P(|X_n| = l)
  double prob_length(int l) const;
  int max_length() const;

  /// lattice only: probability at a lattice point
  double prob_at(std::span<const int> x) const;

 private:
  GroupSpec group_;
  int n_ = 0;
  int halfwidth_ = 0;               // lattice box [-hw, hw]^d
  std::vector<double> data_;        // lattice: dense; free: radial by length
  std::vector<double> scratch_;
};

/// Exact mu^{*n}.
WordDistribution convolve_n(const GroupSpec& group, int n);

/// Exact E|X_n|/n along the grid.
std::vector<std::pair<int, double>> word_drift(const GroupSpec& group,
                                               std::span<const int> n_grid);

struct EntropySequence {
  std::vector<std::pair<int, double>> h_over_n;  // certified upper bounds
  double richardson_limit = 0.0;                 // 1/n extrapolation of the last two
};

/// Exact H(mu^{*n})/n along the grid (non-increasing), plus the Richardson
/// limit estimate.
EntropySequence word_entropy(const GroupSpec& group, std::span<const int> n_grid);

struct GroupReportRow {
  std::string group;
  int n_max = 0;
  double drift = 0.0;           // E|X_n|/n at n_max (exact)
  double drift_limit = 0.0;     // Richardson extrapolate
  double drift_sq = 0.0;        // drift_limit^2
  double entropy_ub = 0.0;      // certified H/n at n_max
  double entropy_limit = 0.0;   // Richardson extrapolate
  std::string verdict;          // "consistent" or "anomalous (check!)"
};

/// Observational l^2-vs-h table; never asserts a theorem. Flags the case
/// where the certified entropy upper bound drops below the extrapolated
/// drift-squared lower estimate.
std::vector<GroupReportRow> drift_entropy_report(std::span<const GroupSpec> groups);

/// Default grids used by the report and the CLI.
std::vector<int> default_n_grid(const GroupSpec& group);

}  // namespace horodrift::group_walks

#endif
