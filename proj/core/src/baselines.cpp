#include "ffl/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "ffl/errors.hpp"

namespace ffl {

DefenseKind defense_from_string(const std::string& name) {
  if (name == "ffl") return DefenseKind::ffl;
  if (name == "fedavg") return DefenseKind::fedavg;
  if (name == "median") return DefenseKind::median;
  if (name == "trimmed_mean") return DefenseKind::trimmed_mean;
  if (name == "multi_krum") return DefenseKind::multi_krum;
  throw ConfigError("unknown defense: " + name);
}

std::string to_string(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::ffl: return "ffl";
    case DefenseKind::fedavg: return "fedavg";
    case DefenseKind::median: return "median";
    case DefenseKind::trimmed_mean: return "trimmed_mean";
    case DefenseKind::multi_krum: return "multi_krum";
  }
  return "?";
}

namespace {

std::size_t common_dim(const std::vector<std::vector<double>>& updates) {
  if (updates.empty()) throw std::domain_error("no updates to aggregate");
  const std::size_t dim = updates.front().size();
  for (const auto& u : updates) {
    if (u.size() != dim) throw ShapeError("update length mismatch");
  }
  return dim;
}

}  // namespace

std::vector<double> fedavg(const std::vector<std::vector<double>>& updates,
                           std::span<const double> data_counts) {
  const std::size_t dim = common_dim(updates);
  if (data_counts.size() != updates.size()) {
    throw ShapeError("updates/data_counts length mismatch");
  }
  const double total =
      std::accumulate(data_counts.begin(), data_counts.end(), 0.0);
  if (total <= 0.0) throw std::domain_error("total data count is zero");
  std::vector<double> out(dim, 0.0);
  for (std::size_t k = 0; k < updates.size(); ++k) {
    const double w = data_counts[k] / total;
    for (std::size_t i = 0; i < dim; ++i) out[i] += w * updates[k][i];
  }
  return out;
}

std::vector<double> aggregate_coordinate_median(
    const std::vector<std::vector<double>>& updates) {
  const std::size_t dim = common_dim(updates);
  std::vector<double> out(dim);
  std::vector<double> column(updates.size());
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < updates.size(); ++k) column[k] = updates[k][i];
    std::sort(column.begin(), column.end());
    const std::size_t n = column.size();
    out[i] = (n % 2 == 1) ? column[n / 2]
                          : 0.5 * (column[n / 2 - 1] + column[n / 2]);
  }
  return out;
}

std::vector<double> trimmed_mean(
    const std::vector<std::vector<double>>& updates, double beta) {
  const std::size_t dim = common_dim(updates);
  if (beta < 0.0 || beta >= 0.5) {
    throw std::domain_error("trim fraction must be in [0, 0.5)");
  }
  const std::size_t n = updates.size();
  const auto trim = static_cast<std::size_t>(beta * static_cast<double>(n));
  if (2 * trim >= n) throw std::domain_error("trimming removes every value");
  std::vector<double> out(dim);
  std::vector<double> column(n);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < n; ++k) column[k] = updates[k][i];
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (std::size_t k = trim; k < n - trim; ++k) s += column[k];
    out[i] = s / static_cast<double>(n - 2 * trim);
  }
  return out;
}

std::vector<double> multi_krum(const std::vector<std::vector<double>>& updates,
                               std::size_t f, std::size_t m_select) {
  const std::size_t dim = common_dim(updates);
  const std::size_t n = updates.size();
  if (n < f + 3) throw std::domain_error("multi-krum needs n >= f + 3");
  if (m_select == 0 || m_select > n - f - 2) {
    throw std::domain_error("m_select must be in [1, n - f - 2]");
  }
  const std::size_t neighbors = n - f - 2;

  std::vector<double> scores(n, 0.0);
  std::vector<double> dists;
  for (std::size_t k = 0; k < n; ++k) {
    dists.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == k) continue;
      double d2 = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double d = updates[k][i] - updates[j][i];
        d2 += d * d;
      }
      dists.push_back(d2);
    }
    std::sort(dists.begin(), dists.end());
    for (std::size_t t = 0; t < neighbors; ++t) scores[k] += dists[t];
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b)
                   { return scores[a] < scores[b]; });

  std::vector<double> out(dim, 0.0);
  for (std::size_t t = 0; t < m_select; ++t) {
    for (std::size_t i = 0; i < dim; ++i) out[i] += updates[order[t]][i];
  }
  for (auto& x : out) x /= static_cast<double>(m_select);
  return out;
}

}  // namespace ffl
