#include "gatt/sparse.hpp"

#include <algorithm>

#include "gatt/errors.hpp"

namespace gatt {

namespace {
bool entry_less(const SparseMatrix::Entry& e, std::pair<int, int> rc) {
  return e.row != rc.first ? e.row < rc.first : e.col < rc.second;
}
}  // namespace

SparseMatrix SparseMatrix::identity(int n) {
  SparseMatrix m(n);
  for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
  return m;
}

void SparseMatrix::set(int row, int col, double value) {
  if (row < 0 || row >= n_ || col < 0 || col >= n_) {
    throw ValidationError("SparseMatrix::set: index out of range");
  }
  if (entries_.empty() || entry_less(entries_.back(), {row, col})) {
    entries_.push_back({row, col, value});
    return;
  }
  auto it = std::lower_bound(entries_.begin(), entries_.end(),
                             std::pair{row, col}, entry_less);
  if (it != entries_.end() && it->row == row && it->col == col) {
    it->value = value;
  } else {
    entries_.insert(it, {row, col, value});
  }
}

double SparseMatrix::at(int row, int col) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(),
                             std::pair{row, col}, entry_less);
  if (it != entries_.end() && it->row == row && it->col == col) {
    return it->value;
  }
  return 0.0;
}

bool SparseMatrix::contains(int row, int col) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(),
                             std::pair{row, col}, entry_less);
  return it != entries_.end() && it->row == row && it->col == col;
}

std::span<const SparseMatrix::Entry> SparseMatrix::row(int r) const {
  auto lo = std::lower_bound(entries_.begin(), entries_.end(),
                             std::pair{r, 0}, entry_less);
  auto hi = std::lower_bound(lo, entries_.end(), std::pair{r + 1, 0},
                             entry_less);
  return {std::to_address(lo), static_cast<std::size_t>(hi - lo)};
}

double SparseMatrix::row_sum(int r) const {
  double sum = 0.0;
  for (const auto& e : row(r)) sum += e.value;
  return sum;
}

SparseMatrix SparseMatrix::multiply(const SparseMatrix& rhs) const {
  if (n_ != rhs.n_) {
    throw ValidationError("SparseMatrix::multiply: dimension mismatch");
  }
  SparseMatrix out(n_);
  std::vector<double> acc(static_cast<std::size_t>(n_), 0.0);
  std::vector<int> touched;
  int current_row = -1;
  auto flush = [&] {
    std::sort(touched.begin(), touched.end());
    for (int c : touched) {
      out.set(current_row, c, acc[static_cast<std::size_t>(c)]);
      acc[static_cast<std::size_t>(c)] = 0.0;
    }
    touched.clear();
  };
  for (std::size_t i = 0; i < entries_.size();) {
    current_row = entries_[i].row;
    for (; i < entries_.size() && entries_[i].row == current_row; ++i) {
      const auto& e = entries_[i];
      for (const auto& f : rhs.row(e.col)) {
        if (acc[static_cast<std::size_t>(f.col)] == 0.0) {
          touched.push_back(f.col);
        }
        acc[static_cast<std::size_t>(f.col)] += e.value * f.value;
      }
    }
    flush();
  }
  return out;
}

}  // namespace gatt
