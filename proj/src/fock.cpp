// fock.cpp — basis enumeration and second-quantized operators

#include "bosedot/fock.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bosedot/errors.hpp"

namespace bosedot {

void TruncationSpec::validate() const {
    require(n_modes >= 1, "truncation needs at least one mode per factor");
    require(n_max >= 0, "n_max must be nonnegative");
}

std::size_t TruncationSpec::field_dimension() const {
    constexpr std::size_t sat = std::numeric_limits<std::size_t>::max();
    const std::size_t m = 2 * static_cast<std::size_t>(n_modes);
    std::size_t total = 0;
    std::size_t shell = 1; // C(m + k - 1, k)
    for (int k = 0; k <= n_max; ++k) {
        if (k > 0) {
            const std::size_t num = m + k - 1;
            if (shell > sat / num) return sat;
            shell = shell * num / k;
        }
        if (total > sat - shell) return sat;
        total += shell;
    }
    return total;
}

std::size_t FockBasis::Hash::operator()(const std::vector<std::uint32_t>& v) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto x : v) {
        h ^= x + 0x9e3779b97f4a7c15ull;
        h *= 1099511628211ull;
    }
    return h ^ v.size();
}

FockBasis::FockBasis(const TruncationSpec& trunc) : trunc_(trunc) {
    trunc.validate();
    const std::size_t dim = trunc.field_dimension();
    if (dim > trunc.dim_cap) throw DimensionCapError(dim, trunc.dim_cap);
    states_.reserve(dim);
    lookup_.reserve(dim);
    const auto m = static_cast<std::uint32_t>(total_modes());
    for (int k = 0; k <= trunc.n_max; ++k) {
        shell_offsets_.push_back(states_.size());
        // Multisets of size k in lexicographic order of their sorted labels.
        std::vector<std::uint32_t> cur(k, 0);
        while (true) {
            lookup_.emplace(cur, states_.size());
            states_.push_back(cur);
            int pos = k - 1;
            while (pos >= 0 && cur[pos] == m - 1) --pos;
            if (pos < 0) break;
            const std::uint32_t next = cur[pos] + 1;
            for (int q = pos; q < k; ++q) cur[q] = next;
        }
    }
    shell_offsets_.push_back(states_.size());
}

std::vector<int> FockBasis::occupation(std::size_t i) const {
    std::vector<int> occ(total_modes(), 0);
    for (auto mode : states_.at(i)) ++occ[mode];
    return occ;
}

int FockBasis::count(std::size_t i, std::uint32_t mode) const {
    const auto& s = states_[i];
    auto r = std::equal_range(s.begin(), s.end(), mode);
    return static_cast<int>(r.second - r.first);
}

std::optional<std::size_t> FockBasis::index(const std::vector<std::uint32_t>& sorted_modes) const {
    auto it = lookup_.find(sorted_modes);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::size_t FockBasis::index_of_occupation(const std::vector<int>& occ) const {
    require(static_cast<int>(occ.size()) == total_modes(), "occupation vector has wrong length");
    std::vector<std::uint32_t> s;
    for (std::size_t mode = 0; mode < occ.size(); ++mode) {
        require(occ[mode] >= 0, "occupations must be nonnegative");
        s.insert(s.end(), occ[mode], static_cast<std::uint32_t>(mode));
    }
    auto idx = index(s);
    require(idx.has_value(), "occupation vector lies outside the truncation");
    return *idx;
}

namespace {

using Trip = Eigen::Triplet<cplx>;

std::vector<std::uint32_t> with_added(const std::vector<std::uint32_t>& s, std::uint32_t mode) {
    std::vector<std::uint32_t> out(s);
    out.insert(std::upper_bound(out.begin(), out.end(), mode), mode);
    return out;
}

std::vector<std::uint32_t> with_removed(const std::vector<std::uint32_t>& s, std::uint32_t mode) {
    std::vector<std::uint32_t> out(s);
    out.erase(std::lower_bound(out.begin(), out.end(), mode));
    return out;
}

SpMat from_triplets(std::size_t n, std::vector<Trip>& trips) {
    SpMat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.setFromTriplets(trips.begin(), trips.end());
    drop_zeros(m);
    return m;
}

void check_mode(const FockBasis& basis, int j) {
    require(j >= 0 && j < basis.n_modes(), "mode index out of range");
}

} // namespace

SparseOperator ladder(const FockBasis& basis, int j, Side side, Kind kind) {
    check_mode(basis, j);
    const auto mode = basis.global_mode(j, side);
    std::vector<Trip> trips;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const int n = basis.count(i, mode);
        if (kind == Kind::annihilate) {
            if (n == 0) continue;
            trips.emplace_back(*basis.index(with_removed(basis.state(i), mode)), i, std::sqrt(double(n)));
        } else {
            if (basis.quanta(i) >= basis.n_max()) continue; // hard truncation
            trips.emplace_back(*basis.index(with_added(basis.state(i), mode)), i, std::sqrt(double(n + 1)));
        }
    }
    std::string lbl = std::string(kind == Kind::create ? "a*" : "a") + "_" + std::to_string(j) +
                      (side == Side::left ? "L" : "R");
    return {from_triplets(basis.size(), trips), false, lbl};
}

SparseOperator dgamma(const FockBasis& basis, const std::vector<double>& values, Side side) {
    require(static_cast<int>(values.size()) == basis.n_modes(), "dgamma: need one value per mode");
    for (double v : values) require(std::isfinite(v), "dgamma: values must be finite");
    const auto lo = basis.global_mode(0, side);
    const auto hi = lo + static_cast<std::uint32_t>(basis.n_modes());
    std::vector<Trip> trips;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        double s = 0.0;
        for (auto mode : basis.state(i))
            if (mode >= lo && mode < hi) s += values[mode - lo];
        if (s != 0.0) trips.emplace_back(i, i, s);
    }
    return {from_triplets(basis.size(), trips), true, side == Side::left ? "dGamma_L" : "dGamma_R"};
}

SparseOperator number_op(const FockBasis& basis, int j, Side side) {
    check_mode(basis, j);
    std::vector<double> v(basis.n_modes(), 0.0);
    v[j] = 1.0;
    auto op = dgamma(basis, v, side);
    op.label = "n_" + std::to_string(j) + (side == Side::left ? "L" : "R");
    return op;
}

SparseOperator total_number(const FockBasis& basis, std::optional<Side> side) {
    std::vector<Trip> trips;
    const auto nl = static_cast<std::uint32_t>(basis.n_modes());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        int n = 0;
        for (auto mode : basis.state(i)) {
            const bool left = mode < nl;
            if (!side || (*side == Side::left) == left) ++n;
        }
        if (n) trips.emplace_back(i, i, double(n));
    }
    return {from_triplets(basis.size(), trips), true, side ? (*side == Side::left ? "N_L" : "N_R") : "N"};
}

SparseOperator dgamma_matrix(const FockBasis& basis, const SpMat& h, Side side) {
    const int n = basis.n_modes();
    require(h.rows() == n && h.cols() == n, "dgamma_matrix: one-body matrix must be n_modes x n_modes");
    const auto lo = basis.global_mode(0, side);
    std::vector<Trip> trips;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& s = basis.state(i);
        for (std::size_t p = 0; p < s.size(); ++p) {
            if (p > 0 && s[p] == s[p - 1]) continue; // distinct occupied modes only
            if (s[p] < lo || s[p] >= lo + static_cast<std::uint32_t>(n)) continue;
            const int k = static_cast<int>(s[p] - lo);
            const int nk = basis.count(i, s[p]);
            auto removed = with_removed(s, s[p]);
            for (SpMat::InnerIterator it(h, k); it; ++it) {
                const cplx hjk = it.value();
                if (hjk == cplx{}) continue;
                const auto mj = lo + static_cast<std::uint32_t>(it.row());
                auto target = with_added(removed, mj);
                const int nj_after = static_cast<int>(std::count(target.begin(), target.end(), mj));
                trips.emplace_back(*basis.index(target), i, hjk * (std::sqrt(double(nk)) * std::sqrt(double(nj_after))));
            }
        }
    }
    return {from_triplets(basis.size(), trips), false, side == Side::left ? "dGamma(h)_L" : "dGamma(h)_R"};
}

SparseOperator smeared_field(const FockBasis& basis, const std::vector<cplx>& coeffs, Side side, Kind kind) {
    const int n = basis.n_modes();
    require(static_cast<int>(coeffs.size()) == n, "smeared_field: need one coefficient per mode");
    const auto lo = basis.global_mode(0, side);
    std::vector<Trip> trips;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& s = basis.state(i);
        if (kind == Kind::annihilate) {
            for (std::size_t p = 0; p < s.size(); ++p) {
                if (p > 0 && s[p] == s[p - 1]) continue;
                if (s[p] < lo || s[p] >= lo + static_cast<std::uint32_t>(n)) continue;
                const cplx c = std::conj(coeffs[s[p] - lo]);
                if (c == cplx{}) continue;
                const int nk = basis.count(i, s[p]);
                trips.emplace_back(*basis.index(with_removed(s, s[p])), i, c * std::sqrt(double(nk)));
            }
        } else {
            if (basis.quanta(i) >= basis.n_max()) continue;
            for (int j = 0; j < n; ++j) {
                if (coeffs[j] == cplx{}) continue;
                const auto mode = lo + static_cast<std::uint32_t>(j);
                const int nj = basis.count(i, mode);
                trips.emplace_back(*basis.index(with_added(s, mode)), i, coeffs[j] * std::sqrt(double(nj + 1)));
            }
        }
    }
    std::string lbl = std::string(kind == Kind::create ? "a*(f)" : "a(f)") + (side == Side::left ? "_L" : "_R");
    return {from_triplets(basis.size(), trips), false, lbl};
}

SparseOperator lambda_op(const FockBasis& basis, const std::vector<double>& omegas) {
    for (double w : omegas) require(w >= 0.0, "lambda_op: frequencies must be nonnegative");
    SpMat l = dgamma(basis, omegas, Side::left).m + dgamma(basis, omegas, Side::right).m;
    drop_zeros(l);
    return {l, true, "Lambda"};
}

} // namespace bosedot
