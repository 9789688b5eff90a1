// fock.hpp — truncated doubled bosonic Fock space

#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "bosedot/sparse.hpp"

namespace bosedot {

struct TruncationSpec {
    int n_modes{1};                 // per factor; the field has 2 * n_modes modes
    int n_max{1};                   // cap on total quanta across both factors
    std::size_t dim_cap{200000};

    void validate() const;
    // sum_k C(2 n_modes + k - 1, k); saturates at SIZE_MAX on overflow.
    std::size_t field_dimension() const;
};

enum class Side { left, right };
enum class Kind { create, annihilate };

// States are sorted lists of occupied global mode labels (left j -> j, right j -> n_modes + j),
// ordered by total quanta and then lexicographically.
class FockBasis {
public:
    explicit FockBasis(const TruncationSpec& trunc);

    const TruncationSpec& trunc() const { return trunc_; }
    std::size_t size() const { return states_.size(); }
    int n_modes() const { return trunc_.n_modes; }
    int total_modes() const { return 2 * trunc_.n_modes; }
    int n_max() const { return trunc_.n_max; }

    const std::vector<std::uint32_t>& state(std::size_t i) const { return states_[i]; }
    int quanta(std::size_t i) const { return static_cast<int>(states_[i].size()); }
    std::vector<int> occupation(std::size_t i) const;
    int count(std::size_t i, std::uint32_t mode) const;
    std::optional<std::size_t> index(const std::vector<std::uint32_t>& sorted_modes) const;
    std::size_t index_of_occupation(const std::vector<int>& occ) const;
    // First index of the shell with k quanta; shell_begin(n_max + 1) == size().
    std::size_t shell_begin(int k) const { return shell_offsets_.at(k); }

    std::uint32_t global_mode(int j, Side side) const {
        return static_cast<std::uint32_t>(side == Side::left ? j : trunc_.n_modes + j);
    }

private:
    struct Hash {
        std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept;
    };
    TruncationSpec trunc_;
    std::vector<std::vector<std::uint32_t>> states_;
    std::vector<std::size_t> shell_offsets_;
    std::unordered_map<std::vector<std::uint32_t>, std::size_t, Hash> lookup_;
};

// Field-space operators (dimension basis.size()).
SparseOperator ladder(const FockBasis& basis, int j, Side side, Kind kind);
SparseOperator number_op(const FockBasis& basis, int j, Side side);
SparseOperator total_number(const FockBasis& basis, std::optional<Side> side = std::nullopt);
// sum_j values_j n_j on one side
SparseOperator dgamma(const FockBasis& basis, const std::vector<double>& values, Side side);
// Second quantization of a general one-body matrix h: sum_{jk} h_jk a*_j a_k.
SparseOperator dgamma_matrix(const FockBasis& basis, const SpMat& h, Side side);
// a(f) = sum conj(f_j) a_j, a*(f) = sum f_j a*_j
SparseOperator smeared_field(const FockBasis& basis, const std::vector<cplx>& coeffs, Side side, Kind kind);
// Lambda = dGamma(omega)_left + dGamma(omega)_right
SparseOperator lambda_op(const FockBasis& basis, const std::vector<double>& omegas);

} // namespace bosedot
