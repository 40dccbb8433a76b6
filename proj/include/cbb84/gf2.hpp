#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cbb84 {

/// Raised when operands of a GF(2) operation have incompatible shapes.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense vector over GF(2), packed 64 bits per word.
///
/// Bits past `size()` in the last word are always zero, so word-wise
/// comparison and hashing are exact.
class BitVector {
public:
    using Word = std::uint64_t;
    static constexpr std::size_t kWordBits = 64;

    BitVector() = default;
    explicit BitVector(std::size_t length);

    static BitVector zeros(std::size_t length) { return BitVector(length); }
    static BitVector unit(std::size_t length, std::size_t index);
    /// Parses a string of '0'/'1' characters. Anything else throws std::invalid_argument.
    static BitVector from_string(std::string_view bits);
    static BitVector from_bits(const std::vector<int>& bits);

    std::size_t size() const noexcept { return length_; }
    bool empty() const noexcept { return length_ == 0; }

    bool get(std::size_t i) const;
    void set(std::size_t i, bool value);
    void flip(std::size_t i);

    std::size_t weight() const noexcept;
    bool is_zero() const noexcept;

    /// Parity of the bitwise AND.
    bool dot(const BitVector& other) const;

    BitVector& operator+=(const BitVector& other);

    /// Bits at the given indices, in the given order.
    BitVector gather(const std::vector<std::size_t>& indices) const;
    BitVector concat(const BitVector& tail) const;

    std::string to_string() const;

    const std::vector<Word>& words() const noexcept { return words_; }

    friend bool operator==(const BitVector&, const BitVector&) = default;
    friend std::strong_ordering operator<=>(const BitVector& a, const BitVector& b);

private:
    void check_index(std::size_t i) const;

    std::vector<Word> words_;
    std::size_t length_ = 0;
};

/// Componentwise XOR. Throws DimensionError on length mismatch.
BitVector add(const BitVector& a, const BitVector& b);
inline BitVector operator+(const BitVector& a, const BitVector& b) { return add(a, b); }

/// Dense row-major matrix over GF(2); each row is a BitVector.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols);

    static BitMatrix identity(std::size_t n);
    /// All rows must share one length; an empty list yields a 0 x `cols` matrix.
    static BitMatrix from_rows(std::vector<BitVector> rows, std::size_t cols = 0);
    static BitMatrix from_strings(const std::vector<std::string>& rows);

    std::size_t rows() const noexcept { return rows_.size(); }
    std::size_t cols() const noexcept { return cols_; }

    bool get(std::size_t r, std::size_t c) const { return rows_.at(r).get(c); }
    void set(std::size_t r, std::size_t c, bool value) { rows_.at(r).set(c, value); }

    const BitVector& row(std::size_t r) const { return rows_.at(r); }
    const std::vector<BitVector>& row_vectors() const noexcept { return rows_; }
    BitVector column(std::size_t c) const;

    BitMatrix transpose() const;

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

private:
    std::vector<BitVector> rows_;
    std::size_t cols_ = 0;
};

/// result[i] = <row i of m, v>. Throws DimensionError unless m.cols() == v.size().
BitVector mat_vec(const BitMatrix& m, const BitVector& v);

/// Row combination c * m = sum of c[i] * row i. Throws DimensionError unless c.size() == m.rows().
BitVector vec_mat(const BitVector& c, const BitMatrix& m);

/// Matrix product a * b.
BitMatrix multiply(const BitMatrix& a, const BitMatrix& b);

struct RowEchelon {
    BitMatrix reduced;  ///< same shape as the input; zero rows last
    std::size_t rank = 0;
    std::vector<std::size_t> pivot_columns;
};

/// Reduced row-echelon form with leftmost-pivot selection; canonical for a row space.
RowEchelon row_reduce(const BitMatrix& m);

std::size_t rank(const BitMatrix& m);

/// Basis of { x : m * x = 0 }, one basis vector per free column, as rows.
BitMatrix nullspace(const BitMatrix& m);

/// Precomputed elimination of a fixed matrix, answering repeated row-space
/// membership queries in O(rows * words).
class RowSpaceSolver {
public:
    explicit RowSpaceSolver(const BitMatrix& m);

    std::size_t rank() const noexcept { return pivots_.size(); }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t rows() const noexcept { return source_rows_; }

    /// Coefficients c (length rows()) with c * m = v, or nullopt if v is not in the row space.
    std::optional<BitVector> solve(const BitVector& v) const;

    /// Eliminates v against the pivot rows and returns the accumulated
    /// coefficients together with the residual. The residual is zero iff v is
    /// in the row space.
    std::pair<BitVector, BitVector> reduce(const BitVector& v) const;

private:
    std::size_t cols_ = 0;
    std::size_t source_rows_ = 0;
    std::vector<std::size_t> pivots_;
    std::vector<BitVector> echelon_;    // nonzero RREF rows
    std::vector<BitVector> transform_;  // echelon_[i] = transform_[i] * m
};

/// Coefficients c with c * m = v, or nullopt if v is not in the row space of m.
std::optional<BitVector> solve_membership(const BitMatrix& m, const BitVector& v);

}  // namespace cbb84

template <>
struct std::hash<cbb84::BitVector> {
    std::size_t operator()(const cbb84::BitVector& v) const noexcept;
};
