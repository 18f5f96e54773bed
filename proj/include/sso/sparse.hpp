#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace sso {

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Caps the worker count used by parallel kernels (matvec row partitioning).
/// 1 disables threading. Results are bitwise independent of the setting:
/// each output row is computed by exactly one worker in fixed in-row order.
void set_max_threads(int threads);
int max_threads();

/// Symmetric sparse matrix in compressed-row form. Construction canonicalizes
/// (sorted columns, duplicates summed) and enforces the symmetry invariant and
/// the presence of a positive diagonal in every row.
class SparseSym {
public:
    SparseSym() = default;

    /// Duplicate entries are summed. Throws std::invalid_argument on
    /// out-of-range indices, on a numerically asymmetric result, or when a
    /// diagonal entry is missing or not positive.
    static SparseSym from_triplets(int n, std::span<const Triplet> entries);

    int size() const { return n_; }
    std::span<const int> row_offsets() const { return row_offsets_; }
    std::span<const int> col_indices() const { return col_indices_; }
    std::span<const double> values() const { return values_; }

    /// y = A x. Length mismatch throws.
    void matvec(std::span<const double> x, std::span<double> y) const;
    std::vector<double> matvec(std::span<const double> x) const;

    std::vector<double> diagonal() const;

    /// Coordinate-format text dump, one "row col value" line per stored
    /// entry, sorted by (row, col).
    void dump_coordinate(std::ostream& os) const;

private:
    int n_ = 0;
    std::vector<int> row_offsets_;
    std::vector<int> col_indices_;
    std::vector<double> values_;
};

} // namespace sso
