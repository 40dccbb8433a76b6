#include "cbb84/gf2.hpp"

#include <algorithm>
#include <bit>
#include <utility>

namespace cbb84 {

namespace {

std::size_t word_count(std::size_t length) {
    return (length + BitVector::kWordBits - 1) / BitVector::kWordBits;
}

std::string shape(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

BitVector::BitVector(std::size_t length) : words_(word_count(length), 0), length_(length) {}

BitVector BitVector::unit(std::size_t length, std::size_t index) {
    BitVector v(length);
    v.set(index, true);
    return v;
}

BitVector BitVector::from_string(std::string_view bits) {
    BitVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1') {
            v.set(i, true);
        } else if (bits[i] != '0') {
            throw std::invalid_argument("bit string contains '" + std::string(1, bits[i]) +
                                        "' at offset " + std::to_string(i));
        }
    }
    return v;
}

BitVector BitVector::from_bits(const std::vector<int>& bits) {
    BitVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != 0 && bits[i] != 1) {
            throw std::invalid_argument("bit value must be 0 or 1");
        }
        v.set(i, bits[i] == 1);
    }
    return v;
}

void BitVector::check_index(std::size_t i) const {
    if (i >= length_) {
        throw std::out_of_range("bit index " + std::to_string(i) + " out of range for length " +
                                std::to_string(length_));
    }
}

bool BitVector::get(std::size_t i) const {
    check_index(i);
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1U;
}

void BitVector::set(std::size_t i, bool value) {
    check_index(i);
    const Word mask = Word{1} << (i % kWordBits);
    if (value) {
        words_[i / kWordBits] |= mask;
    } else {
        words_[i / kWordBits] &= ~mask;
    }
}

void BitVector::flip(std::size_t i) {
    check_index(i);
    words_[i / kWordBits] ^= Word{1} << (i % kWordBits);
}

std::size_t BitVector::weight() const noexcept {
    std::size_t w = 0;
    for (Word word : words_) {
        w += static_cast<std::size_t>(std::popcount(word));
    }
    return w;
}

bool BitVector::is_zero() const noexcept {
    return std::all_of(words_.begin(), words_.end(), [](Word w) { return w == 0; });
}

bool BitVector::dot(const BitVector& other) const {
    if (other.length_ != length_) {
        throw DimensionError("dot: lengths " + std::to_string(length_) + " and " +
                             std::to_string(other.length_));
    }
    Word acc = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) {
        acc ^= words_[i] & other.words_[i];
    }
    return std::popcount(acc) & 1;
}

BitVector& BitVector::operator+=(const BitVector& other) {
    if (other.length_ != length_) {
        throw DimensionError("add: lengths " + std::to_string(length_) + " and " +
                             std::to_string(other.length_));
    }
    for (std::size_t i = 0; i < words_.size(); ++i) {
        words_[i] ^= other.words_[i];
    }
    return *this;
}

BitVector BitVector::gather(const std::vector<std::size_t>& indices) const {
    BitVector out(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (get(indices[i])) {
            out.set(i, true);
        }
    }
    return out;
}

BitVector BitVector::concat(const BitVector& tail) const {
    BitVector out(length_ + tail.length_);
    for (std::size_t i = 0; i < length_; ++i) {
        if (get(i)) out.set(i, true);
    }
    for (std::size_t i = 0; i < tail.length_; ++i) {
        if (tail.get(i)) out.set(length_ + i, true);
    }
    return out;
}

std::string BitVector::to_string() const {
    std::string s(length_, '0');
    for (std::size_t i = 0; i < length_; ++i) {
        if (get(i)) s[i] = '1';
    }
    return s;
}

std::strong_ordering operator<=>(const BitVector& a, const BitVector& b) {
    if (auto c = a.length_ <=> b.length_; c != 0) return c;
    // Lexicographic by logical bit index, not by word value.
    for (std::size_t i = 0; i < a.length_; ++i) {
        const bool x = a.get(i);
        const bool y = b.get(i);
        if (x != y) return x ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    return std::strong_ordering::equal;
}

BitVector add(const BitVector& a, const BitVector& b) {
    BitVector out = a;
    out += b;
    return out;
}

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols) : rows_(rows, BitVector(cols)), cols_(cols) {}

BitMatrix BitMatrix::identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m.set(i, i, true);
    }
    return m;
}

BitMatrix BitMatrix::from_rows(std::vector<BitVector> rows, std::size_t cols) {
    if (!rows.empty()) {
        cols = rows.front().size();
    }
    for (const auto& r : rows) {
        if (r.size() != cols) {
            throw DimensionError("from_rows: ragged rows");
        }
    }
    BitMatrix m;
    m.rows_ = std::move(rows);
    m.cols_ = cols;
    return m;
}

BitMatrix BitMatrix::from_strings(const std::vector<std::string>& rows) {
    std::vector<BitVector> vs;
    vs.reserve(rows.size());
    for (const auto& r : rows) {
        vs.push_back(BitVector::from_string(r));
    }
    return from_rows(std::move(vs));
}

BitVector BitMatrix::column(std::size_t c) const {
    BitVector out(rows());
    for (std::size_t r = 0; r < rows(); ++r) {
        if (rows_[r].get(c)) out.set(r, true);
    }
    return out;
}

BitMatrix BitMatrix::transpose() const {
    BitMatrix t(cols_, rows());
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            if (rows_[r].get(c)) t.set(c, r, true);
        }
    }
    return t;
}

BitVector mat_vec(const BitMatrix& m, const BitVector& v) {
    if (m.cols() != v.size()) {
        throw DimensionError("mat_vec: matrix " + shape(m.rows(), m.cols()) + " times vector of length " +
                             std::to_string(v.size()));
    }
    BitVector out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (m.row(r).dot(v)) out.set(r, true);
    }
    return out;
}

BitVector vec_mat(const BitVector& c, const BitMatrix& m) {
    if (c.size() != m.rows()) {
        throw DimensionError("vec_mat: vector of length " + std::to_string(c.size()) + " times matrix " +
                             shape(m.rows(), m.cols()));
    }
    BitVector out(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (c.get(r)) out += m.row(r);
    }
    return out;
}

BitMatrix multiply(const BitMatrix& a, const BitMatrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("multiply: " + shape(a.rows(), a.cols()) + " times " + shape(b.rows(), b.cols()));
    }
    std::vector<BitVector> rows;
    rows.reserve(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        rows.push_back(vec_mat(a.row(r), b));
    }
    return BitMatrix::from_rows(std::move(rows), b.cols());
}

namespace {

// Gauss-Jordan elimination in place. When `transform` is non-null it receives
// the row operations, so that rows[i] == transform[i] * original.
std::vector<std::size_t> eliminate(std::vector<BitVector>& rows, std::size_t cols,
                                   std::vector<BitVector>* transform) {
    std::vector<std::size_t> pivots;
    std::size_t next = 0;
    for (std::size_t c = 0; c < cols && next < rows.size(); ++c) {
        std::size_t found = next;
        while (found < rows.size() && !rows[found].get(c)) ++found;
        if (found == rows.size()) continue;
        std::swap(rows[next], rows[found]);
        if (transform) std::swap((*transform)[next], (*transform)[found]);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r != next && rows[r].get(c)) {
                rows[r] += rows[next];
                if (transform) (*transform)[r] += (*transform)[next];
            }
        }
        pivots.push_back(c);
        ++next;
    }
    return pivots;
}

}  // namespace

RowEchelon row_reduce(const BitMatrix& m) {
    std::vector<BitVector> rows = m.row_vectors();
    auto pivots = eliminate(rows, m.cols(), nullptr);
    RowEchelon out;
    out.rank = pivots.size();
    out.pivot_columns = std::move(pivots);
    out.reduced = BitMatrix::from_rows(std::move(rows), m.cols());
    return out;
}

std::size_t rank(const BitMatrix& m) { return row_reduce(m).rank; }

BitMatrix nullspace(const BitMatrix& m) {
    const auto ech = row_reduce(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto p : ech.pivot_columns) is_pivot[p] = true;

    std::vector<BitVector> basis;
    for (std::size_t free = 0; free < m.cols(); ++free) {
        if (is_pivot[free]) continue;
        BitVector x = BitVector::unit(m.cols(), free);
        for (std::size_t i = 0; i < ech.rank; ++i) {
            if (ech.reduced.get(i, free)) x.set(ech.pivot_columns[i], true);
        }
        basis.push_back(std::move(x));
    }
    return BitMatrix::from_rows(std::move(basis), m.cols());
}

RowSpaceSolver::RowSpaceSolver(const BitMatrix& m) : cols_(m.cols()), source_rows_(m.rows()) {
    std::vector<BitVector> rows = m.row_vectors();
    std::vector<BitVector> transform = BitMatrix::identity(m.rows()).row_vectors();
    pivots_ = eliminate(rows, m.cols(), &transform);
    rows.resize(pivots_.size());
    transform.resize(pivots_.size());
    echelon_ = std::move(rows);
    transform_ = std::move(transform);
}

std::pair<BitVector, BitVector> RowSpaceSolver::reduce(const BitVector& v) const {
    if (v.size() != cols_) {
        throw DimensionError("solve: vector of length " + std::to_string(v.size()) + " against " +
                             std::to_string(cols_) + " columns");
    }
    BitVector residual = v;
    BitVector coeffs(source_rows_);
    for (std::size_t i = 0; i < pivots_.size(); ++i) {
        if (residual.get(pivots_[i])) {
            residual += echelon_[i];
            coeffs += transform_[i];
        }
    }
    return {std::move(coeffs), std::move(residual)};
}

std::optional<BitVector> RowSpaceSolver::solve(const BitVector& v) const {
    auto [coeffs, residual] = reduce(v);
    if (!residual.is_zero()) return std::nullopt;
    return std::move(coeffs);
}

std::optional<BitVector> solve_membership(const BitMatrix& m, const BitVector& v) {
    if (m.cols() != v.size()) {
        throw DimensionError("solve_membership: matrix " + shape(m.rows(), m.cols()) + " against vector of length " +
                             std::to_string(v.size()));
    }
    return RowSpaceSolver(m).solve(v);
}

}  // namespace cbb84

std::size_t std::hash<cbb84::BitVector>::operator()(const cbb84::BitVector& v) const noexcept {
    std::size_t h = v.size() * 0x9e3779b97f4a7c15ULL;
    for (auto w : v.words()) {
        h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}
