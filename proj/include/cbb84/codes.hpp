#pragma once

#include "cbb84/gf2.hpp"
#include "cbb84/random.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cbb84 {

class InvalidCodeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidPairError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Classical binary [n, k, d] code with generator (k x n) and parity-check ((n-k) x n) matrices.
///
/// The constructor checks ranks and G * H^T = 0. The declared distance `d` is
/// trusted; verify_min_distance() confirms it by enumeration for small k.
class LinearCode {
public:
    LinearCode(std::size_t d, BitMatrix generator, BitMatrix parity_check);

    /// Derives the parity-check matrix as the nullspace of the generator.
    static LinearCode from_generator(std::size_t d, BitMatrix generator);

    std::size_t n() const noexcept { return generator_.cols(); }
    std::size_t k() const noexcept { return generator_.rows(); }
    std::size_t d() const noexcept { return d_; }
    /// Correction radius floor((d - 1) / 2).
    std::size_t t() const noexcept { return d_ == 0 ? 0 : (d_ - 1) / 2; }

    const BitMatrix& generator() const noexcept { return generator_; }
    const BitMatrix& parity_check() const noexcept { return parity_check_; }

    BitVector syndrome(const BitVector& word) const { return mat_vec(parity_check_, word); }
    bool contains(const BitVector& word) const { return syndrome(word).is_zero(); }
    BitVector encode(const BitVector& message) const { return vec_mat(message, generator_); }

    /// All 2^k codewords in message order. Throws std::length_error for k > 24.
    std::vector<BitVector> codewords() const;

    /// Minimum weight over nonzero codewords by enumeration (k <= 24); n + 1 for k = 0.
    std::size_t min_distance() const;
    bool verify_min_distance() const { return k() == 0 || min_distance() >= d_; }

private:
    std::size_t d_;
    BitMatrix generator_;
    BitMatrix parity_check_;
};

/// Uniform over the 2^k codewords.
BitVector random_codeword(const LinearCode& code, Rng& rng);

LinearCode make_hamming_7_4();
/// The [7,3,4] simplex code, dual of the Hamming code.
LinearCode make_hamming_7_4_dual();
/// Cyclic [23,12,7] Golay code, generator polynomial x^11+x^10+x^6+x^5+x^4+x^2+1.
LinearCode make_golay_23_12();
/// [23,11,8] even-weight subcode of the Golay code (its dual).
LinearCode make_golay_23_11();

/// Bounded-distance decoder: minimum-weight coset leaders for every error of weight <= t.
class SyndromeTable {
public:
    explicit SyndromeTable(const LinearCode& code);

    std::size_t size() const noexcept { return leaders_.size(); }
    std::size_t max_weight() const noexcept { return max_weight_; }

    /// Leader for the syndrome, or nullopt if no error of weight <= t produces it.
    const BitVector* lookup(const BitVector& syndrome) const;

    const std::unordered_map<BitVector, BitVector>& entries() const noexcept { return leaders_; }

private:
    std::size_t max_weight_;
    std::unordered_map<BitVector, BitVector> leaders_;
};

struct DecodeResult {
    BitVector codeword;
    BitVector corrected_error;
};

/// Syndrome decoder bound to one code.
class Decoder {
public:
    explicit Decoder(LinearCode code);

    const LinearCode& code() const noexcept { return code_; }
    const SyndromeTable& table() const noexcept { return table_; }

    /// received + tabulated leader, or nullopt (decode failure) when the
    /// syndrome is outside the table. Throws DimensionError on length mismatch.
    std::optional<DecodeResult> decode(const BitVector& received) const;

private:
    LinearCode code_;
    SyndromeTable table_;
};

/// One-shot decode; builds the syndrome table each call.
std::optional<DecodeResult> decode_to_codeword(const LinearCode& code, const BitVector& received);

/// Nested pair C2 in C1 with a canonical basis of the quotient C1 / C2.
///
/// The quotient basis extends the reduced row-echelon basis of C2 with reduced
/// rows of C1 taken greedily in order, so two parties building the same pair
/// derive the same labels without communicating.
class CssPair {
public:
    /// Throws InvalidPairError if lengths differ, a C2 generator row is not in
    /// C1, or the quotient is trivial.
    CssPair(LinearCode outer, LinearCode inner, std::string name = {});

    const LinearCode& outer() const noexcept { return decoder_.code(); }
    const LinearCode& inner() const noexcept { return inner_; }
    const Decoder& decoder() const noexcept { return decoder_; }
    std::size_t n() const noexcept { return outer().n(); }
    std::size_t key_width() const noexcept { return key_width_; }
    const std::string& name() const noexcept { return name_; }

    /// Rows spanning C1 / C2; label bit j is the coefficient on row j.
    const BitMatrix& quotient_basis() const noexcept { return quotient_basis_; }

    /// Label of the coset codeword + C2. Throws PreconditionError if codeword is not in C1.
    BitVector coset_label(const BitVector& codeword) const;

    /// Label read off an arbitrary word by eliminating against the C1 basis and
    /// ignoring the residual; agrees with coset_label on codewords.
    BitVector project_label(const BitVector& word) const;

private:
    LinearCode inner_;
    Decoder decoder_;
    std::size_t key_width_;
    std::string name_;
    BitMatrix quotient_basis_;
    std::shared_ptr<const RowSpaceSolver> solver_;  // rows: quotient basis, then C2 basis
};

CssPair make_css_pair(const LinearCode& c1, const LinearCode& c2);

BitVector coset_label(const CssPair& pair, const BitVector& codeword);

/// [[7,1,3]]: Hamming [7,4] over its dual.
CssPair make_steane_pair();
/// [[23,1,7]]: Golay [23,12] over [23,11].
CssPair make_golay_pair();

}  // namespace cbb84
