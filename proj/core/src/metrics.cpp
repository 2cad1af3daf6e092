#include "gatt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "gatt/errors.hpp"

namespace gatt {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw ValidationError(std::string(what) + ": length mismatch");
}

// counts inversions while sorting v
std::uint64_t merge_count(std::vector<double>& v) {
  std::vector<double> buf(v.size());
  std::uint64_t inversions = 0;
  for (std::size_t width = 1; width < v.size(); width *= 2) {
    for (std::size_t lo = 0; lo + width < v.size(); lo += 2 * width) {
      const std::size_t mid = lo + width;
      const std::size_t hi = std::min(lo + 2 * width, v.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          inversions += mid - i;
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
      std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
                buf.begin() + static_cast<std::ptrdiff_t>(hi),
                v.begin() + static_cast<std::ptrdiff_t>(lo));
    }
  }
  return inversions;
}

std::uint64_t tie_pairs(std::uint64_t run) { return run * (run - 1) / 2; }

}  // namespace

std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y) {
  check_lengths(x.size(), y.size(), "pearson");
  const std::size_t n = x.size();
  if (n < 2) throw ValidationError("pearson: need at least 2 samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mean_rank = static_cast<double>(i + j) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x,
                               std::span<const double> y) {
  check_lengths(x.size(), y.size(), "spearman");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

std::optional<double> kendall(std::span<const double> x,
                              std::span<const double> y) {
  check_lengths(x.size(), y.size(), "kendall");
  const std::size_t n = x.size();
  if (n < 2) throw ValidationError("kendall: need at least 2 samples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });

  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::uint64_t n1 = 0, n3 = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
      n1 += tie_pairs(j - i + 1);
      std::size_t a = i;
      while (a <= j) {
        std::size_t b = a;
        while (b + 1 <= j && y[order[b + 1]] == y[order[a]]) ++b;
        n3 += tie_pairs(b - a + 1);
        a = b + 1;
      }
      i = j + 1;
    }
  }
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::uint64_t discordant = merge_count(ys);  // ys now sorted
  std::uint64_t n2 = 0;
  {
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && ys[j + 1] == ys[i]) ++j;
      n2 += tie_pairs(j - i + 1);
      i = j + 1;
    }
  }
  if (n0 == n1 || n0 == n2) return std::nullopt;
  const double numer = static_cast<double>(n0) - static_cast<double>(n1) -
                       static_cast<double>(n2) + static_cast<double>(n3) -
                       2.0 * static_cast<double>(discordant);
  const double denom = std::sqrt(static_cast<double>(n0 - n1) *
                                 static_cast<double>(n0 - n2));
  return numer / denom;
}

std::optional<double> auroc(std::span<const double> scores,
                            const std::vector<bool>& labels) {
  check_lengths(scores.size(), labels.size(), "auroc");
  std::size_t n_pos = 0;
  for (bool b : labels) n_pos += b ? 1 : 0;
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const std::vector<double> ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) rank_sum += ranks[i];
  }
  const double u = rank_sum - static_cast<double>(n_pos) *
                                  (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

namespace {
int simplex_argmax(std::span<const double> p) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(p.size()); ++c) {
    if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)]) {
      best = c;
    }
  }
  return best;
}
}  // namespace

double delta_pc(std::span<const double> p, std::span<const double> p_erased) {
  check_lengths(p.size(), p_erased.size(), "delta_pc");
  const std::size_t i = static_cast<std::size_t>(simplex_argmax(p));
  return p[i] - p_erased[i];
}

double delta_ne(std::span<const double> p, std::span<const double> p_erased) {
  check_lengths(p.size(), p_erased.size(), "delta_ne");
  auto entropy = [](std::span<const double> v) {
    double h = 0.0;
    for (double q : v) {
      if (q > 0.0) h -= q * std::log(q);
    }
    return h;
  };
  return entropy(p_erased) - entropy(p);
}

bool delta_p(std::span<const double> p, std::span<const double> p_erased) {
  check_lengths(p.size(), p_erased.size(), "delta_p");
  return simplex_argmax(p) != simplex_argmax(p_erased);
}

}  // namespace gatt
