#include "mech/costshare.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mech {

namespace {

constexpr double kShareTol = 1e-9;

}  // namespace

bool CostShareVector::valid() const {
    double total = 0.0;
    for (double s : shares) {
        if (s < 0.0) return false;
        total += s;
    }
    return std::abs(total - 1.0) <= kShareTol;
}

CostShareSpec::CostShareSpec(size_t n, std::vector<CostShareVector> table)
    : n_(n), table_(std::move(table)) {
    if (n < 1 || n > 12) throw InvalidSpec("explicit coalition tables support 1 <= n <= 12");
    if (table_.size() != (1u << n)) throw InvalidSpec("table must have an entry per coalition");
    for (uint32_t c = 1; c < table_.size(); ++c) {
        const auto& v = table_[c];
        if (v.shares.size() != n) throw InvalidSpec("coalition vector has wrong length");
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            if (v.shares[i] < 0.0) throw InvalidSpec("negative cost share");
            if (!(c & (1u << i)) && v.shares[i] != 0.0)
                throw InvalidSpec("non-member holds a positive share");
            total += v.shares[i];
        }
        if (std::abs(total - 1.0) > kShareTol) throw InvalidSpec("coalition shares must sum to 1");
    }
    // Monotonicity is not enforced here: validate_spec reports violations as
    // data, and largest_unanimous refuses to run on a non-monotone table.
    monotone_ = validate_spec(*this).empty();
}

CostShareSpec CostShareSpec::equal_shares(size_t n) {
    std::vector<CostShareVector> table(1u << n);
    for (uint32_t c = 1; c < table.size(); ++c) {
        table[c].shares.assign(n, 0.0);
        const double share = 1.0 / std::popcount(c);
        for (size_t i = 0; i < n; ++i)
            if (c & (1u << i)) table[c].shares[i] = share;
    }
    return CostShareSpec(n, std::move(table));
}

std::string CostShareSpec::serialize() const {
    std::ostringstream os;
    os.precision(17);
    os << n_ << '\n';
    for (uint32_t c = 1; c < table_.size(); ++c) {
        os << c;
        for (size_t i = 0; i < n_; ++i)
            if (c & (1u << i)) os << ' ' << table_[c].shares[i];
        os << '\n';
    }
    return os.str();
}

CostShareSpec CostShareSpec::deserialize(const std::string& text) {
    std::istringstream is(text);
    size_t n = 0;
    if (!(is >> n) || n < 1 || n > 12) throw InvalidSpec("bad agent count in spec table");
    std::vector<CostShareVector> table(1u << n);
    uint32_t mask = 0;
    while (is >> mask) {
        if (mask == 0 || mask >= table.size()) throw InvalidSpec("bad coalition bitmask");
        table[mask].shares.assign(n, 0.0);
        for (size_t i = 0; i < n; ++i)
            if (mask & (1u << i))
                if (!(is >> table[mask].shares[i])) throw InvalidSpec("truncated share list");
    }
    return CostShareSpec(n, std::move(table));
}

std::vector<SpecViolation> validate_spec(const CostShareSpec& spec) {
    std::vector<SpecViolation> out;
    const uint32_t full = (1u << spec.n()) - 1;
    for (uint32_t t = 1; t <= full; ++t) {
        // Enumerate proper nonempty sub-coalitions of t.
        for (uint32_t s = (t - 1) & t; s != 0; s = (s - 1) & t) {
            for (size_t i = 0; i < spec.n(); ++i) {
                if (!(s & (1u << i))) continue;
                if (spec.at(s).shares[i] < spec.at(t).shares[i] - kShareTol)
                    out.push_back({s, t, i});
            }
        }
    }
    return out;
}

BinaryOutcome conservative_equal_cost(const TypeProfile& profile) {
    const size_t n = profile.n();
    const double share = 1.0 / static_cast<double>(n);
    BinaryOutcome out;
    out.payments.assign(n, 0.0);
    out.built = std::all_of(profile.values.begin(), profile.values.end(),
                            [&](double v) { return v >= share; });
    if (out.built) {
        out.consumers.assign(n, true);
        out.payments.assign(n, share);
    }
    return out;
}

BinaryOutcome unanimous(const TypeProfile& profile, const CostShareVector& shares) {
    if (!shares.valid()) throw InvalidShares();
    if (shares.shares.size() != profile.n()) throw InvalidShares();
    BinaryOutcome out;
    out.payments.assign(profile.n(), 0.0);
    out.built = true;
    for (size_t i = 0; i < profile.n(); ++i)
        if (profile[i] < shares.shares[i]) out.built = false;
    if (out.built) {
        out.consumers.assign(profile.n(), true);
        out.payments = shares.shares;
    }
    return out;
}

Feasibility coalition_feasibility(const std::vector<double>& values) {
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    Feasibility f;
    for (size_t k = 1; k <= sorted.size(); ++k)
        if (sorted[k - 1] >= 1.0 / static_cast<double>(k)) f.K = static_cast<int>(k);
    f.I = f.K >= 1 ? 1 : 0;
    return f;
}

BinaryOutcome serial_cost_sharing(const TypeProfile& profile) {
    const size_t n = profile.n();
    BinaryOutcome out;
    out.payments.assign(n, 0.0);
    const int k = coalition_feasibility(profile.values).K;
    if (k == 0) return out;
    // Top-k agents by value, ties broken toward the lower index.
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return profile[a] > profile[b]; });
    out.built = true;
    out.consumers.assign(n, false);
    const double share = 1.0 / static_cast<double>(k);
    for (int j = 0; j < k; ++j) {
        out.consumers[order[j]] = true;
        out.payments[order[j]] = share;
    }
    return out;
}

BinaryOutcome largest_unanimous(const TypeProfile& profile, const CostShareSpec& spec) {
    const size_t n = profile.n();
    if (spec.n() != n) throw InvalidSpec("spec sized for a different agent count");
    if (!spec.monotone()) throw InvalidSpec("cost share monotonicity violated");
    uint32_t coalition = (1u << n) - 1;
    while (coalition != 0) {
        const auto& vec = spec.at(coalition);
        uint32_t next = coalition;
        for (size_t i = 0; i < n; ++i)
            if ((coalition & (1u << i)) && profile[i] < vec.shares[i]) next &= ~(1u << i);
        if (next == coalition) break;
        coalition = next;
    }
    BinaryOutcome out;
    out.payments.assign(n, 0.0);
    if (coalition == 0) return out;
    out.built = true;
    out.consumers.assign(n, false);
    for (size_t i = 0; i < n; ++i) {
        if (coalition & (1u << i)) {
            out.consumers[i] = true;
            out.payments[i] = spec.at(coalition).shares[i];
        }
    }
    return out;
}

}  // namespace mech
