#include "cbb84/channel.hpp"

#include <sstream>
#include <stdexcept>

namespace cbb84 {

namespace {

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must be in [0, 1], got " + std::to_string(p));
    }
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

void validate_attack(const AttackModel& attack, std::optional<std::size_t> transmission_length) {
    std::visit(overloaded{
                   [](const NoAttack&) {},
                   [](const BitFlipAttack& a) { check_probability(a.p, "bitflip probability"); },
                   [](const InterceptResendAttack& a) { check_probability(a.fraction, "intercept fraction"); },
                   [&](const CorrelatedPositionsAttack& a) {
                       check_probability(a.flip_probability, "correlated flip probability");
                       if (!transmission_length) return;
                       for (auto p : a.positions) {
                           if (p >= *transmission_length) {
                               throw std::invalid_argument("correlated position " + std::to_string(p) +
                                                           " beyond transmission length " +
                                                           std::to_string(*transmission_length));
                           }
                       }
                   },
               },
               attack);
}

std::string describe(const AttackModel& attack) {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const NoAttack&) { os << "none"; },
                   [&](const BitFlipAttack& a) { os << "bitflip(" << a.p << ")"; },
                   [&](const InterceptResendAttack& a) { os << "intercept(" << a.fraction << ")"; },
                   [&](const CorrelatedPositionsAttack& a) {
                       os << "correlated(" << a.positions.size() << " positions, " << a.flip_probability << ")";
                   },
               },
               attack);
    return os.str();
}

std::vector<QubitRecord> transmit(std::span<const QubitRecord> qubits, const AttackModel& attack, Rng& rng) {
    validate_attack(attack, qubits.size());
    std::vector<QubitRecord> out(qubits.begin(), qubits.end());
    std::visit(overloaded{
                   [](const NoAttack&) {},
                   [&](const BitFlipAttack& a) {
                       for (auto& q : out) {
                           if (bernoulli(rng, a.p)) q.flipped_in_prep_basis = !q.flipped_in_prep_basis;
                       }
                   },
                   [&](const InterceptResendAttack& a) {
                       for (auto& q : out) {
                           if (bernoulli(rng, a.fraction)) q.eve_measured_basis = basis_from_bit(random_bit(rng));
                       }
                   },
                   [&](const CorrelatedPositionsAttack& a) {
                       for (auto p : a.positions) {
                           if (bernoulli(rng, a.flip_probability)) {
                               out[p].flipped_in_prep_basis = !out[p].flipped_in_prep_basis;
                           }
                       }
                   },
               },
               attack);
    return out;
}

bool measure(const QubitRecord& q, Basis basis, Rng& rng) {
    // Eve measuring in the conjugate basis leaves a state whose outcome in
    // either basis is an unbiased coin.
    const bool disturbed = q.eve_measured_basis && *q.eve_measured_basis != q.prep_basis;
    if (disturbed || basis != q.prep_basis) {
        return random_bit(rng);
    }
    return q.prep_bit != q.flipped_in_prep_basis;
}

}  // namespace cbb84
