#include "horodrift/group_walks.hpp"

#include <cmath>
#include <cstdlib>

#include "horodrift/error.hpp"

namespace horodrift::group_walks {

namespace {

// Neumaier compensated summation
class Kahan {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      c_ += (sum_ - t) + x;
    else
      c_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0, c_ = 0.0;
};

constexpr int kLatticeMaxN = 256;
constexpr int kFreeMaxN = 10000;

}  // namespace

GroupSpec GroupSpec::lattice(int d) {
  if (d < 1 || d > 2) throw Error("unknown_group", "lattice dimension must be 1 or 2");
  return {Kind::Lattice, d};
}

GroupSpec GroupSpec::free_group(int k) {
  if (k < 2 || k > 8) throw Error("unknown_group", "free rank must be in [2,8]");
  return {Kind::Free, k};
}

GroupSpec GroupSpec::parse(std::string_view name) {
  auto num = [&](std::string_view v) {
    try {
      std::size_t used = 0;
      const std::string s(v);
      int x = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
      return x;
    } catch (const std::exception&) {
      throw Error("unknown_group", "bad group id: " + std::string(name));
    }
  };
  if (name.substr(0, 2) == "z:") return lattice(num(name.substr(2)));
  if (name.substr(0, 5) == "free:") return free_group(num(name.substr(5)));
  throw Error("unknown_group", "unknown group id: " + std::string(name));
}

std::string GroupSpec::name() const {
  return kind == Kind::Lattice ? "z:" + std::to_string(param)
                               : "free:" + std::to_string(param);
}

WordDistribution WordDistribution::initial(GroupSpec g, int n_max) {
  WordDistribution d;
  d.group_ = g;
  d.n_ = 0;
  if (g.kind == GroupSpec::Kind::Lattice) {
    if (n_max > kLatticeMaxN)
      throw Error("contract_error", "lattice convolution limited to n <= 256");
    d.halfwidth_ = n_max;
    const std::size_t side = static_cast<std::size_t>(2 * n_max + 1);
    const std::size_t cells = g.param == 1 ? side : side * side;
    d.data_.assign(cells, 0.0);
    d.scratch_.assign(cells, 0.0);
    // delta at the identity
    const std::size_t center =
        g.param == 1 ? static_cast<std::size_t>(n_max)
                     : static_cast<std::size_t>(n_max) * side + static_cast<std::size_t>(n_max);
    d.data_[center] = 1.0;
  } else {
    if (n_max > kFreeMaxN)
      throw Error("contract_error", "free-group recursion limited to n <= 10000");
    d.data_.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    d.scratch_.assign(d.data_.size(), 0.0);
    d.data_[0] = 1.0;
  }
  return d;
}

void WordDistribution::step() {
  if (group_.kind == GroupSpec::Kind::Lattice) {
    const int hw = halfwidth_;
    const std::size_t side = static_cast<std::size_t>(2 * hw + 1);
    std::fill(scratch_.begin(), scratch_.end(), 0.0);
    if (group_.param == 1) {
      const double w = 0.5;
      for (std::size_t i = 0; i < side; ++i) {
        const double p = data_[i];
        if (p == 0.0) continue;
        if (i > 0) scratch_[i - 1] += w * p;
        if (i + 1 < side) scratch_[i + 1] += w * p;
      }
    } else {
      const double w = 0.25;
      for (std::size_t i = 0; i < side; ++i) {
        for (std::size_t j = 0; j < side; ++j) {
          const double p = data_[i * side + j];
          if (p == 0.0) continue;
          if (i > 0) scratch_[(i - 1) * side + j] += w * p;
          if (i + 1 < side) scratch_[(i + 1) * side + j] += w * p;
          if (j > 0) scratch_[i * side + j - 1] += w * p;
          if (j + 1 < side) scratch_[i * side + j + 1] += w * p;
        }
      }
    }
    data_.swap(scratch_);
    ++n_;
    if (n_ > halfwidth_) throw Error("contract_error", "lattice box overflow");
    return;
  }
  // free group: birth-death chain on word length; from l >= 1 the walk
  // lengthens with probability (2k-1)/2k and shortens with probability 1/2k
  const double up = static_cast<double>(2 * group_.param - 1) /
                    static_cast<double>(2 * group_.param);
  const double dn = 1.0 / static_cast<double>(2 * group_.param);
  std::fill(scratch_.begin(), scratch_.end(), 0.0);
  const std::size_t L = data_.size();
  if (data_[0] != 0.0) scratch_[1] += data_[0];
  for (std::size_t l = 1; l < L; ++l) {
    const double p = data_[l];
    if (p == 0.0) continue;
    if (l + 1 < L) scratch_[l + 1] += up * p;
    scratch_[l - 1] += dn * p;
  }
  data_.swap(scratch_);
  ++n_;
  if (static_cast<std::size_t>(n_) >= data_.size())
    throw Error("contract_error", "free-group length vector overflow");
}

double WordDistribution::mass() const {
  Kahan k;
  for (double p : data_) k.add(p);
  return k.value();
}

double WordDistribution::expected_length() const {
  Kahan k;
  if (group_.kind == GroupSpec::Kind::Free) {
    for (std::size_t l = 0; l < data_.size(); ++l)
      k.add(static_cast<double>(l) * data_[l]);
    return k.value();
  }
  const int hw = halfwidth_;
  const std::size_t side = static_cast<std::size_t>(2 * hw + 1);
  if (group_.param == 1) {
    for (std::size_t i = 0; i < side; ++i)
      k.add(std::abs(static_cast<double>(i) - hw) * data_[i]);
    return k.value();
  }
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j)
      k.add((std::abs(static_cast<double>(i) - hw) + std::abs(static_cast<double>(j) - hw)) *
            data_[i * side + j]);
  return k.value();
}

double WordDistribution::entropy() const {
  Kahan k;
  if (group_.kind == GroupSpec::Kind::Free) {
    // H(elements) = H(length) + E[ln #sphere(l)], sphere(l) = 2k (2k-1)^{l-1}
    const double g2 = static_cast<double>(2 * group_.param);
    for (std::size_t l = 0; l < data_.size(); ++l) {
      const double p = data_[l];
      if (p <= 0.0) continue;
      k.add(-p * std::log(p));
      if (l >= 1)
        k.add(p * (std::log(g2) + static_cast<double>(l - 1) * std::log(g2 - 1.0)));
    }
    return k.value();
  }
  for (double p : data_) {
    if (p > 0.0) k.add(-p * std::log(p));
  }
  return k.value();
}

double WordDistribution::prob_length(int l) const {
  if (l < 0) return 0.0;
  if (group_.kind == GroupSpec::Kind::Free)
    return static_cast<std::size_t>(l) < data_.size() ? data_[static_cast<std::size_t>(l)]
                                                      : 0.0;
  Kahan k;
  const int hw = halfwidth_;
  const std::size_t side = static_cast<std::size_t>(2 * hw + 1);
  if (group_.param == 1) {
    for (std::size_t i = 0; i < side; ++i)
      if (std::abs(static_cast<int>(i) - hw) == l) k.add(data_[i]);
    return k.value();
  }
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j)
      if (std::abs(static_cast<int>(i) - hw) + std::abs(static_cast<int>(j) - hw) == l)
        k.add(data_[i * side + j]);
  return k.value();
}

int WordDistribution::max_length() const {
  if (group_.kind == GroupSpec::Kind::Free) return static_cast<int>(data_.size()) - 1;
  return group_.param * halfwidth_;
}

double WordDistribution::prob_at(std::span<const int> x) const {
  if (group_.kind != GroupSpec::Kind::Lattice)
    throw Error("unsupported", "prob_at is lattice-only");
  if (x.size() != static_cast<std::size_t>(group_.param))
    throw Error("contract_error", "lattice point dimension mismatch");
  const int hw = halfwidth_;
  for (int c : x)
    if (std::abs(c) > hw) return 0.0;
  const std::size_t side = static_cast<std::size_t>(2 * hw + 1);
  if (group_.param == 1) return data_[static_cast<std::size_t>(x[0] + hw)];
  return data_[static_cast<std::size_t>(x[0] + hw) * side + static_cast<std::size_t>(x[1] + hw)];
}

WordDistribution convolve_n(const GroupSpec& group, int n) {
  if (n < 1) throw Error("contract_error", "convolution power must be >= 1");
  auto d = WordDistribution::initial(group, n);
  for (int i = 0; i < n; ++i) d.step();
  return d;
}

std::vector<std::pair<int, double>> word_drift(const GroupSpec& group,
                                               std::span<const int> n_grid) {
  if (n_grid.empty()) throw Error("contract_error", "empty n grid");
  auto d = WordDistribution::initial(group, n_grid.back());
  std::vector<std::pair<int, double>> out;
  std::size_t gi = 0;
  for (int n = 1; n <= n_grid.back() && gi < n_grid.size(); ++n) {
    d.step();
    if (n == n_grid[gi]) {
      out.emplace_back(n, d.expected_length() / n);
      ++gi;
    }
  }
  return out;
}

EntropySequence word_entropy(const GroupSpec& group, std::span<const int> n_grid) {
  if (n_grid.empty()) throw Error("contract_error", "empty n grid");
  auto d = WordDistribution::initial(group, n_grid.back());
  EntropySequence out;
  std::size_t gi = 0;
  for (int n = 1; n <= n_grid.back() && gi < n_grid.size(); ++n) {
    d.step();
    if (n == n_grid[gi]) {
      out.h_over_n.emplace_back(n, d.entropy() / n);
      ++gi;
    }
  }
  if (out.h_over_n.size() >= 2) {
    // h(n) = h + a/n  =>  h = (n2 h(n2) - n1 h(n1)) / (n2 - n1)
    const auto [n1, h1] = out.h_over_n[out.h_over_n.size() - 2];
    const auto [n2, h2] = out.h_over_n.back();
    out.richardson_limit = (n2 * h2 - n1 * h1) / static_cast<double>(n2 - n1);
  } else {
    out.richardson_limit = out.h_over_n.back().second;
  }
  return out;
}

std::vector<int> default_n_grid(const GroupSpec& group) {
  if (group.kind == GroupSpec::Kind::Lattice) return {4, 8, 16, 32, 64};
  return {10, 25, 50, 100, 200};
}

std::vector<GroupReportRow> drift_entropy_report(std::span<const GroupSpec> groups) {
  std::vector<GroupReportRow> rows;
  for (const auto& g : groups) {
    const auto grid = default_n_grid(g);
    const auto drifts = word_drift(g, grid);
    const auto ents = word_entropy(g, grid);
    GroupReportRow row;
    row.group = g.name();
    row.n_max = grid.back();
    row.drift = drifts.back().second;
    if (drifts.size() >= 2) {
      const auto [n1, d1] = drifts[drifts.size() - 2];
      const auto [n2, d2] = drifts.back();
      row.drift_limit = (n2 * d2 - n1 * d1) / static_cast<double>(n2 - n1);
    } else {
      row.drift_limit = row.drift;
    }
    if (row.drift_limit < 0.0) row.drift_limit = 0.0;
    row.drift_sq = row.drift_limit * row.drift_limit;
    row.entropy_ub = ents.h_over_n.back().second;
    row.entropy_limit = ents.richardson_limit;
    // H/n is a certified upper bound for h_walk; flag only the anomaly the
    // discrete theory cannot currently rule out
    row.verdict = row.entropy_ub + 1e-9 < row.drift_sq ? "anomalous (check!)" : "consistent";
    rows.push_back(row);
  }
  return rows;
}

}  // namespace horodrift::group_walks
