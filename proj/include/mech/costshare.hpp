#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mech/core.hpp"

namespace mech {

struct InvalidShares : std::runtime_error {
    InvalidShares() : std::runtime_error("cost share vector must be nonnegative and sum to 1") {}
};

struct InvalidSpec : std::runtime_error {
    explicit InvalidSpec(const std::string& what) : std::runtime_error(what) {}
};

// Shares for one coalition, indexed by agent; non-members hold 0.
struct CostShareVector {
    std::vector<double> shares;

    bool valid() const;
};

struct SpecViolation {
    uint32_t subset = 0;    // coalition S (bitmask)
    uint32_t superset = 0;  // coalition T with S strictly inside T
    size_t agent = 0;       // member of S whose share drops below its share under T
};

// Cost-share table of a largest unanimous mechanism: one vector per nonempty
// coalition of {0..n-1}, keyed by bitmask. Explicit tables cap n at 12.
class CostShareSpec {
public:
    CostShareSpec(size_t n, std::vector<CostShareVector> table);

    // Shares 1/|S| for every coalition (the serial cost sharing table).
    static CostShareSpec equal_shares(size_t n);

    size_t n() const { return n_; }
    bool monotone() const { return monotone_; }
    const CostShareVector& at(uint32_t coalition) const { return table_[coalition]; }

    std::string serialize() const;  // one line per coalition: bitmask + shares
    static CostShareSpec deserialize(const std::string& text);

private:
    size_t n_;
    std::vector<CostShareVector> table_;  // indexed by bitmask, entry 0 unused
    bool monotone_ = true;
};

// Exhaustive monotonicity check over all pairs S strictly inside T.
std::vector<SpecViolation> validate_spec(const CostShareSpec& spec);

BinaryOutcome conservative_equal_cost(const TypeProfile& profile);

BinaryOutcome unanimous(const TypeProfile& profile, const CostShareVector& shares);

// I(v), K(v): K is the largest k with at least k values >= 1/k.
struct Feasibility {
    int I = 0;
    int K = 0;
};
Feasibility coalition_feasibility(const std::vector<double>& values);

// Highest K(v) values consume and pay 1/K each; ties at the k-th value go to
// the lowest agent index.
BinaryOutcome serial_cost_sharing(const TypeProfile& profile);

// Iterative removal from the grand coalition until the current vector is
// unanimously accepted (or nobody is left).
BinaryOutcome largest_unanimous(const TypeProfile& profile, const CostShareSpec& spec);

}  // namespace mech
