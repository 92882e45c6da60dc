#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "relsim/errors.hpp"
#include "relsim/fields.hpp"

namespace relsim {

/// One measured quantity and its acceptance interval.
struct Metric {
    std::string name;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool passed() const { return value >= lo && value <= hi; }
};

struct SuiteReport {
    std::string name;
    std::size_t cases = 0;
    std::vector<Metric> metrics;
    [[nodiscard]] bool passed() const;
};

struct SuiteOptions {
    std::uint64_t seed = 1;
    std::size_t cases = 0;  ///< 0 selects the suite default
    unsigned threads = 1;
    /// Negative control: evaluate one side of the oracle and covariance
    /// comparisons with the opposite sign convention.
    bool corrupt_sign = false;
};

/// A randomized field-evaluation case.
struct FieldCase {
    Coupling cpl;
    SourceParticle src{0.0, WorldLine::at_rest({}, 1.0)};
    double t = 0.0;
    Vec3 x;
};

enum class SourceKind { at_rest, inertial, circular };

/// Case `index` of a sweep: deterministic in (seed, index). Events sit at one
/// of three distance scales (3, 10, 30 source radii).
FieldCase random_field_case(std::uint64_t seed, std::size_t index, SourceKind kind);

/// Random orthochronous transform: boost with |beta| <= max_beta after a random rotation.
LorentzTransform random_lorentz(std::mt19937_64& rng, double max_beta);

SuiteReport normalization_suite(const SuiteOptions& opt);
SuiteReport oracle_suite(const SuiteOptions& opt);
SuiteReport gauge_suite(const SuiteOptions& opt);
SuiteReport bianchi_suite(const SuiteOptions& opt);
SuiteReport maxwell_suite(const SuiteOptions& opt);
/// 50 random transforms |beta| <= 0.9 each for a source at rest and a circular source.
SuiteReport covariance_suite(const SuiteOptions& opt);

/// Dispatch by name: normalization, gauge, bianchi, maxwell, covariance, oracle.
/// Throws DomainError for an unknown name.
SuiteReport run_suite(std::string_view which, const SuiteOptions& opt);

} // namespace relsim
