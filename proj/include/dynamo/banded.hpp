#pragma once

#include <vector>

#include "dynamo/grid.hpp"

namespace dynamo {

// Square complex band matrix with kl sub- and ku super-diagonals, stored in LAPACK
// band layout with kl extra rows reserved for the LU fill-in.
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(int n, int kl, int ku);

    int n() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }
    bool in_band(int i, int j) const { return j - i <= ku_ && i - j <= kl_ && i >= 0 && j >= 0 && i < n_ && j < n_; }
    cplx get(int i, int j) const { return in_band(i, j) ? ab_[idx(i, j)] : cplx(0.0); }
    cplx& at(int i, int j);
    void add(int i, int j, cplx v) { at(i, j) += v; }

    VecC multiply(const VecC& x) const;
    // number of diagonals that carry a nonzero entry
    int nonzero_diagonals() const;
    Eigen::MatrixXcd dense() const;

    const std::vector<cplx>& raw() const { return ab_; }
    int ldab() const { return 2 * kl_ + ku_ + 1; }

private:
    size_t idx(int i, int j) const { return static_cast<size_t>(kl_ + ku_ + i - j) + static_cast<size_t>(j) * ldab(); }
    int n_ = 0, kl_ = 0, ku_ = 0;
    std::vector<cplx> ab_;
};

// Banded LU with partial pivoting (LAPACK zgbtrf / zgbtrs).
class BandedLU {
public:
    BandedLU() = default;
    // Throws Error(Numerical) on an exactly singular pivot.
    explicit BandedLU(const BandedMatrix& a, bool estimate_condition = false);
    VecC solve(const VecC& b) const;
    // log|det| and arg det accumulated from the pivots (argument-principle counting)
    cplx log_det() const;
    // reciprocal 1-norm condition estimate (only when requested at construction; −1 otherwise)
    double rcond_estimate() const { return rcond_; }
    int n() const { return n_; }

private:
    int n_ = 0, kl_ = 0, ku_ = 0;
    std::vector<cplx> lu_;
    std::vector<int> ipiv_;
    double rcond_ = -1.0;
};

}  // namespace dynamo
