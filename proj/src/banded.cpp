#include "dynamo/banded.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace dynamo {

BandedMatrix::BandedMatrix(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku)
{
    if (n <= 0 || kl < 0 || ku < 0) throw Error(ErrorKind::Numerical, "banded matrix: bad shape");
    ab_.assign(static_cast<size_t>(ldab()) * n, cplx(0.0));
}

cplx& BandedMatrix::at(int i, int j)
{
    if (!in_band(i, j))
        throw Error(ErrorKind::Numerical,
                    "banded matrix: entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside the band");
    return ab_[idx(i, j)];
}

VecC BandedMatrix::multiply(const VecC& x) const
{
    VecC y = VecC::Zero(n_);
    for (int j = 0; j < n_; ++j) {
        const int i0 = std::max(0, j - ku_), i1 = std::min(n_ - 1, j + kl_);
        const cplx xj = x[j];
        for (int i = i0; i <= i1; ++i) y[i] += ab_[idx(i, j)] * xj;
    }
    return y;
}

int BandedMatrix::nonzero_diagonals() const
{
    int count = 0;
    for (int d = -kl_; d <= ku_; ++d) {
        bool nz = false;
        for (int i = std::max(0, -d); i < n_ && i + d < n_ && !nz; ++i) nz = get(i, i + d) != cplx(0.0);
        count += nz;
    }
    return count;
}

Eigen::MatrixXcd BandedMatrix::dense() const
{
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_, n_);
    for (int j = 0; j < n_; ++j)
        for (int i = std::max(0, j - ku_); i <= std::min(n_ - 1, j + kl_); ++i) m(i, j) = ab_[idx(i, j)];
    return m;
}

BandedLU::BandedLU(const BandedMatrix& a, bool estimate_condition) : n_(a.n()), kl_(a.kl()), ku_(a.ku()), lu_(a.raw()), ipiv_(a.n())
{
    // 1-norm of A for the condition estimate
    double anorm = 0.0;
    for (int j = 0; j < n_; ++j) {
        double s = 0.0;
        for (int i = std::max(0, j - ku_); i <= std::min(n_ - 1, j + kl_); ++i) s += std::abs(a.get(i, j));
        anorm = std::max(anorm, s);
    }
    const lapack_int info =
        LAPACKE_zgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, lu_.data(), a.ldab(), ipiv_.data());
    if (info > 0)
        throw Error(ErrorKind::Numerical, "shift collision: banded matrix singular to working precision (pivot " +
                                              std::to_string(info) + ")");
    if (info < 0) throw Error(ErrorKind::Numerical, "zgbtrf: illegal argument " + std::to_string(-info));
    double rc = 0.0;
    if (estimate_condition &&
        LAPACKE_zgbcon(LAPACK_COL_MAJOR, '1', n_, kl_, ku_, lu_.data(), 2 * kl_ + ku_ + 1, ipiv_.data(), anorm,
                       &rc) == 0)
        rcond_ = rc;
}

VecC BandedLU::solve(const VecC& b) const
{
    VecC x = b;
    const lapack_int info = LAPACKE_zgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, 1, lu_.data(), 2 * kl_ + ku_ + 1,
                                           ipiv_.data(), x.data(), n_);
    if (info != 0) throw Error(ErrorKind::Numerical, "zgbtrs failed");
    return x;
}

cplx BandedLU::log_det() const
{
    const int ldab = 2 * kl_ + ku_ + 1;
    double mag = 0.0, phase = 0.0;
    for (int i = 0; i < n_; ++i) {
        const cplx d = lu_[static_cast<size_t>(kl_ + ku_) + static_cast<size_t>(i) * ldab];
        mag += std::log(std::abs(d));
        phase += std::arg(d);
        if (ipiv_[i] != i + 1) phase += PI;
    }
    return {mag, std::remainder(phase, 2.0 * PI)};
}

}  // namespace dynamo
