#include "cbb84/codes.hpp"

#include <utility>

namespace cbb84 {

LinearCode::LinearCode(std::size_t d, BitMatrix generator, BitMatrix parity_check)
    : d_(d), generator_(std::move(generator)), parity_check_(std::move(parity_check)) {
    const std::size_t n = generator_.cols();
    if (parity_check_.cols() != n) {
        throw InvalidCodeError("generator has " + std::to_string(n) + " columns, parity check has " +
                               std::to_string(parity_check_.cols()));
    }
    if (generator_.rows() + parity_check_.rows() != n) {
        throw InvalidCodeError("k + (n - k) rows do not add up to n = " + std::to_string(n));
    }
    if (rank(generator_) != generator_.rows()) {
        throw InvalidCodeError("generator rows are linearly dependent");
    }
    if (rank(parity_check_) != parity_check_.rows()) {
        throw InvalidCodeError("parity-check rows are linearly dependent");
    }
    for (std::size_t r = 0; r < generator_.rows(); ++r) {
        if (!mat_vec(parity_check_, generator_.row(r)).is_zero()) {
            throw InvalidCodeError("generator row " + std::to_string(r) + " has nonzero syndrome");
        }
    }
}

LinearCode LinearCode::from_generator(std::size_t d, BitMatrix generator) {
    BitMatrix h = nullspace(generator);
    return LinearCode(d, std::move(generator), std::move(h));
}

std::vector<BitVector> LinearCode::codewords() const {
    if (k() > 24) {
        throw std::length_error("refusing to enumerate 2^" + std::to_string(k()) + " codewords");
    }
    const std::size_t count = std::size_t{1} << k();
    BitVector word(n());
    // Gray-code walk: one row addition per codeword, stored in message order.
    std::vector<BitVector> by_message(count);
    by_message[0] = word;
    for (std::size_t i = 1; i < count; ++i) {
        const std::size_t gray = i ^ (i >> 1);
        const std::size_t changed = static_cast<std::size_t>(__builtin_ctzll(i));
        word += generator_.row(changed);
        by_message[gray] = word;
    }
    return by_message;
}

std::size_t LinearCode::min_distance() const {
    std::size_t best = n() + 1;
    const auto words = codewords();
    for (std::size_t i = 1; i < words.size(); ++i) {
        best = std::min(best, words[i].weight());
    }
    return best;
}

BitVector random_codeword(const LinearCode& code, Rng& rng) {
    BitVector coeffs(code.k());
    for (std::size_t i = 0; i < code.k(); ++i) {
        if (random_bit(rng)) coeffs.set(i, true);
    }
    return code.encode(coeffs);
}

LinearCode make_hamming_7_4() {
    // Column j of H is the binary numeral j + 1, most significant bit in row 0.
    BitMatrix h(3, 7);
    for (std::size_t j = 0; j < 7; ++j) {
        const std::size_t numeral = j + 1;
        for (std::size_t r = 0; r < 3; ++r) {
            h.set(r, j, (numeral >> (2 - r)) & 1U);
        }
    }
    BitMatrix g = nullspace(h);
    return LinearCode(3, std::move(g), std::move(h));
}

LinearCode make_hamming_7_4_dual() {
    const auto hamming = make_hamming_7_4();
    return LinearCode(4, hamming.parity_check(), hamming.generator());
}

namespace {

BitMatrix cyclic_generator(std::size_t n, const std::vector<int>& poly_low_to_high) {
    const std::size_t deg = poly_low_to_high.size() - 1;
    const std::size_t k = n - deg;
    BitMatrix g(k, n);
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t i = 0; i <= deg; ++i) {
            if (poly_low_to_high[i]) g.set(r, r + i, true);
        }
    }
    return g;
}

}  // namespace

LinearCode make_golay_23_12() {
    // g(x) = 1 + x^2 + x^4 + x^5 + x^6 + x^10 + x^11
    const std::vector<int> g = {1, 0, 1, 0, 1, 1, 1, 0, 0, 0, 1, 1};
    return LinearCode::from_generator(7, cyclic_generator(23, g));
}

LinearCode make_golay_23_11() {
    // (x + 1) g(x) generates the even-weight subcode.
    const std::vector<int> g = {1, 1, 1, 1, 1, 0, 0, 1, 0, 0, 1, 0, 1};
    return LinearCode::from_generator(8, cyclic_generator(23, g));
}

SyndromeTable::SyndromeTable(const LinearCode& code) : max_weight_(code.t()) {
    const std::size_t n = code.n();
    // Enumerate error patterns by increasing weight; the first pattern to reach
    // a syndrome is a minimum-weight leader.
    std::vector<std::size_t> support;
    for (std::size_t w = 0; w <= max_weight_ && w <= n; ++w) {
        support.resize(w);
        for (std::size_t i = 0; i < w; ++i) support[i] = i;
        while (true) {
            BitVector e(n);
            for (auto p : support) e.set(p, true);
            leaders_.try_emplace(code.syndrome(e), std::move(e));

            // Next w-combination in lexicographic order.
            std::size_t i = w;
            while (i > 0 && support[i - 1] == n - w + (i - 1)) --i;
            if (i == 0) break;
            ++support[i - 1];
            for (std::size_t j = i; j < w; ++j) support[j] = support[j - 1] + 1;
        }
    }
}

const BitVector* SyndromeTable::lookup(const BitVector& syndrome) const {
    auto it = leaders_.find(syndrome);
    return it == leaders_.end() ? nullptr : &it->second;
}

Decoder::Decoder(LinearCode code) : code_(std::move(code)), table_(code_) {}

std::optional<DecodeResult> Decoder::decode(const BitVector& received) const {
    const BitVector* leader = table_.lookup(code_.syndrome(received));
    if (leader == nullptr) return std::nullopt;
    return DecodeResult{received + *leader, *leader};
}

std::optional<DecodeResult> decode_to_codeword(const LinearCode& code, const BitVector& received) {
    return Decoder(code).decode(received);
}

CssPair::CssPair(LinearCode outer, LinearCode inner, std::string name)
    : inner_(std::move(inner)), decoder_(std::move(outer)), key_width_(0), name_(std::move(name)) {
    const LinearCode& c1 = decoder_.code();
    if (c1.n() != inner_.n()) {
        throw InvalidPairError("block lengths differ: C1 has n = " + std::to_string(c1.n()) + ", C2 has n = " +
                               std::to_string(inner_.n()));
    }
    const RowSpaceSolver c1_space(c1.generator());
    for (std::size_t r = 0; r < inner_.k(); ++r) {
        if (!c1_space.solve(inner_.generator().row(r))) {
            throw InvalidPairError("C2 generator row " + std::to_string(r) + " (" +
                                   inner_.generator().row(r).to_string() + ") is not a codeword of C1");
        }
    }
    if (c1.k() <= inner_.k()) {
        throw InvalidPairError("C1 / C2 is trivial: dim C1 = " + std::to_string(c1.k()) + ", dim C2 = " +
                               std::to_string(inner_.k()));
    }
    key_width_ = c1.k() - inner_.k();

    const auto c2_rref = row_reduce(inner_.generator());
    const auto c1_rref = row_reduce(c1.generator());
    std::vector<BitVector> span(c2_rref.reduced.row_vectors().begin(),
                                c2_rref.reduced.row_vectors().begin() + static_cast<std::ptrdiff_t>(c2_rref.rank));
    std::vector<BitVector> extension;
    for (std::size_t r = 0; r < c1_rref.rank && extension.size() < key_width_; ++r) {
        const BitVector& candidate = c1_rref.reduced.row(r);
        std::vector<BitVector> trial = span;
        trial.push_back(candidate);
        if (rank(BitMatrix::from_rows(trial, c1.n())) == trial.size()) {
            span = std::move(trial);
            extension.push_back(candidate);
        }
    }
    quotient_basis_ = BitMatrix::from_rows(extension, c1.n());

    std::vector<BitVector> combined = extension;
    combined.insert(combined.end(), c2_rref.reduced.row_vectors().begin(),
                    c2_rref.reduced.row_vectors().begin() + static_cast<std::ptrdiff_t>(c2_rref.rank));
    solver_ = std::make_shared<const RowSpaceSolver>(BitMatrix::from_rows(std::move(combined), c1.n()));
}

BitVector CssPair::coset_label(const BitVector& codeword) const {
    if (codeword.size() != n()) {
        throw DimensionError("coset_label: word of length " + std::to_string(codeword.size()) + " for n = " +
                             std::to_string(n()));
    }
    auto coeffs = solver_->solve(codeword);
    if (!coeffs) {
        throw PreconditionError("coset_label: " + codeword.to_string() + " is not a codeword of C1");
    }
    BitVector label(key_width_);
    for (std::size_t j = 0; j < key_width_; ++j) {
        if (coeffs->get(j)) label.set(j, true);
    }
    return label;
}

BitVector CssPair::project_label(const BitVector& word) const {
    auto coeffs = solver_->reduce(word).first;
    BitVector label(key_width_);
    for (std::size_t j = 0; j < key_width_; ++j) {
        if (coeffs.get(j)) label.set(j, true);
    }
    return label;
}

CssPair make_css_pair(const LinearCode& c1, const LinearCode& c2) { return CssPair(c1, c2); }

BitVector coset_label(const CssPair& pair, const BitVector& codeword) { return pair.coset_label(codeword); }

CssPair make_steane_pair() { return CssPair(make_hamming_7_4(), make_hamming_7_4_dual(), "steane"); }

CssPair make_golay_pair() { return CssPair(make_golay_23_12(), make_golay_23_11(), "golay"); }

}  // namespace cbb84
