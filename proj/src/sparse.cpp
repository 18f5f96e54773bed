#include "sso/sparse.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

namespace sso {

namespace {
std::atomic<int> g_max_threads{1};
}

void set_max_threads(int threads) {
    g_max_threads.store(threads < 1 ? 1 : threads);
}

int max_threads() { return g_max_threads.load(); }

SparseSym SparseSym::from_triplets(int n, std::span<const Triplet> entries) {
    if (n <= 0) {
        throw std::invalid_argument("SparseSym: dimension must be positive");
    }
    for (const Triplet& t : entries) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) {
            throw std::invalid_argument("SparseSym: index (" + std::to_string(t.row) +
                                        ", " + std::to_string(t.col) +
                                        ") out of range for n=" + std::to_string(n));
        }
    }

    // Canonicalize: bucket per row, sort by column, sum duplicates.
    std::vector<std::vector<std::pair<int, double>>> rows(static_cast<size_t>(n));
    for (const Triplet& t : entries) {
        rows[static_cast<size_t>(t.row)].emplace_back(t.col, t.value);
    }

    SparseSym A;
    A.n_ = n;
    A.row_offsets_.assign(static_cast<size_t>(n) + 1, 0);
    for (int r = 0; r < n; ++r) {
        auto& row = rows[static_cast<size_t>(r)];
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        size_t w = 0;
        for (size_t k = 0; k < row.size(); ++k) {
            if (w > 0 && row[w - 1].first == row[k].first) {
                row[w - 1].second += row[k].second;
            } else {
                row[w++] = row[k];
            }
        }
        row.resize(w);
        A.row_offsets_[static_cast<size_t>(r) + 1] =
            A.row_offsets_[static_cast<size_t>(r)] + static_cast<int>(w);
    }
    A.col_indices_.reserve(static_cast<size_t>(A.row_offsets_.back()));
    A.values_.reserve(static_cast<size_t>(A.row_offsets_.back()));
    for (int r = 0; r < n; ++r) {
        for (const auto& [c, v] : rows[static_cast<size_t>(r)]) {
            A.col_indices_.push_back(c);
            A.values_.push_back(v);
        }
    }

    double max_abs = 0.0;
    for (double v : A.values_) max_abs = std::max(max_abs, std::abs(v));
    const double sym_tol = 1e-14 * max_abs;

    auto entry = [&](int r, int c) -> const double* {
        const int begin = A.row_offsets_[static_cast<size_t>(r)];
        const int end = A.row_offsets_[static_cast<size_t>(r) + 1];
        auto first = A.col_indices_.begin() + begin;
        auto last = A.col_indices_.begin() + end;
        auto it = std::lower_bound(first, last, c);
        if (it == last || *it != c) return nullptr;
        return &A.values_[static_cast<size_t>(begin + (it - first))];
    };

    for (int r = 0; r < n; ++r) {
        const int begin = A.row_offsets_[static_cast<size_t>(r)];
        const int end = A.row_offsets_[static_cast<size_t>(r) + 1];
        bool has_diag = false;
        for (int k = begin; k < end; ++k) {
            const int c = A.col_indices_[static_cast<size_t>(k)];
            const double v = A.values_[static_cast<size_t>(k)];
            if (c == r) {
                has_diag = true;
                if (!(v > 0.0)) {
                    throw std::invalid_argument("SparseSym: diagonal entry at row " +
                                                std::to_string(r) + " must be > 0");
                }
                continue;
            }
            const double* mirror = entry(c, r);
            if (mirror == nullptr || std::abs(*mirror - v) > sym_tol) {
                throw std::invalid_argument("SparseSym: asymmetric entry at (" +
                                            std::to_string(r) + ", " + std::to_string(c) + ")");
            }
        }
        if (!has_diag) {
            throw std::invalid_argument("SparseSym: missing diagonal entry at row " +
                                        std::to_string(r));
        }
    }
    return A;
}

void SparseSym::matvec(std::span<const double> x, std::span<double> y) const {
    if (static_cast<int>(x.size()) != n_ || static_cast<int>(y.size()) != n_) {
        throw std::invalid_argument("SparseSym::matvec: length mismatch");
    }
    auto rows = [&](int r_begin, int r_end) {
        for (int r = r_begin; r < r_end; ++r) {
            double sum = 0.0;
            const int begin = row_offsets_[static_cast<size_t>(r)];
            const int end = row_offsets_[static_cast<size_t>(r) + 1];
            for (int k = begin; k < end; ++k) {
                sum += values_[static_cast<size_t>(k)] *
                       x[static_cast<size_t>(col_indices_[static_cast<size_t>(k)])];
            }
            y[static_cast<size_t>(r)] = sum;
        }
    };

    const int threads = std::min(max_threads(), n_ / 512);
    if (threads < 2) {
        rows(0, n_);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    const int chunk = (n_ + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = t * chunk;
        const int end = std::min(n_, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(rows, begin, end);
    }
    for (auto& th : pool) th.join();
}

std::vector<double> SparseSym::matvec(std::span<const double> x) const {
    std::vector<double> y(static_cast<size_t>(n_));
    matvec(x, y);
    return y;
}

std::vector<double> SparseSym::diagonal() const {
    std::vector<double> d(static_cast<size_t>(n_), 0.0);
    for (int r = 0; r < n_; ++r) {
        const int begin = row_offsets_[static_cast<size_t>(r)];
        const int end = row_offsets_[static_cast<size_t>(r) + 1];
        for (int k = begin; k < end; ++k) {
            if (col_indices_[static_cast<size_t>(k)] == r) {
                d[static_cast<size_t>(r)] = values_[static_cast<size_t>(k)];
                break;
            }
        }
    }
    return d;
}

void SparseSym::dump_coordinate(std::ostream& os) const {
    os.precision(17);
    // CSR order is already sorted by (row, col).
    for (int r = 0; r < n_; ++r) {
        const int begin = row_offsets_[static_cast<size_t>(r)];
        const int end = row_offsets_[static_cast<size_t>(r) + 1];
        for (int k = begin; k < end; ++k) {
            os << r << ' ' << col_indices_[static_cast<size_t>(k)] << ' '
               << values_[static_cast<size_t>(k)] << '\n';
        }
    }
}

} // namespace sso
