#pragma once

#include "cbb84/random.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cbb84 {

/// Z: {|0>, |1>}.  X: the Hadamard-rotated pair {|0bar>, |1bar>}.
enum class Basis : std::uint8_t { Z = 0, X = 1 };

inline Basis basis_from_bit(bool b) { return b ? Basis::X : Basis::Z; }
inline char basis_char(Basis b) { return b == Basis::Z ? 'Z' : 'X'; }

/// Classical stand-in for one BB84 qubit in flight.
///
/// `flipped_in_prep_basis` and `eve_measured_basis` are written only by
/// transmit(); the parties never touch them.
struct QubitRecord {
    Basis prep_basis = Basis::Z;
    bool prep_bit = false;
    bool flipped_in_prep_basis = false;
    std::optional<Basis> eve_measured_basis;

    friend bool operator==(const QubitRecord&, const QubitRecord&) = default;
};

struct NoAttack {
    friend bool operator==(const NoAttack&, const NoAttack&) = default;
};

/// Independent flip of each qubit in its preparation basis.
struct BitFlipAttack {
    double p = 0.0;
    friend bool operator==(const BitFlipAttack&, const BitFlipAttack&) = default;
};

/// Eve measures a random `fraction` of the qubits in a random basis and resends.
struct InterceptResendAttack {
    double fraction = 1.0;
    friend bool operator==(const InterceptResendAttack&, const InterceptResendAttack&) = default;
};

/// Flips confined to transmission indices Eve has chosen in advance.
struct CorrelatedPositionsAttack {
    std::vector<std::size_t> positions;
    double flip_probability = 1.0;
    friend bool operator==(const CorrelatedPositionsAttack&, const CorrelatedPositionsAttack&) = default;
};

using AttackModel = std::variant<NoAttack, BitFlipAttack, InterceptResendAttack, CorrelatedPositionsAttack>;

/// Throws std::invalid_argument for probabilities outside [0, 1]. When
/// `transmission_length` is given, correlated positions must lie below it.
void validate_attack(const AttackModel& attack, std::optional<std::size_t> transmission_length = std::nullopt);

/// Short human-readable form, e.g. "bitflip(0.1)".
std::string describe(const AttackModel& attack);

/// Passes the records through the channel, applying the attack. Channel
/// randomness comes only from `rng`.
std::vector<QubitRecord> transmit(std::span<const QubitRecord> qubits, const AttackModel& attack, Rng& rng);

/// Outcome of measuring the record in `basis`. Deterministic when the basis
/// matches the state's effective preparation basis, a fair coin otherwise.
/// Draws from `rng` only for coin outcomes.
bool measure(const QubitRecord& q, Basis basis, Rng& rng);

}  // namespace cbb84
