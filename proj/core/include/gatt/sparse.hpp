#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

namespace gatt {

// Square sparse matrix in coordinate form, entries kept sorted by
// (row, col) so equality and serialization are canonical. Immutable in
// spirit: build once, then share freely across threads.
class SparseMatrix {
 public:
  struct Entry {
    int row = 0;
    int col = 0;
    double value = 0.0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  SparseMatrix() = default;
  explicit SparseMatrix(int n) : n_(n) {}

  static SparseMatrix identity(int n);

  int size() const { return n_; }
  std::size_t nnz() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  // Inserts or overwrites. Appending in sorted order is O(1).
  void set(int row, int col, double value);

  double at(int row, int col) const;
  bool contains(int row, int col) const;
  double row_sum(int row) const;

  // Contiguous view of one row's entries.
  std::span<const Entry> row(int r) const;

  // this * rhs, both n x n.
  SparseMatrix multiply(const SparseMatrix& rhs) const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  int n_ = 0;
  std::vector<Entry> entries_;
};

}  // namespace gatt
