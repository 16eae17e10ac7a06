#include "core/banded.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace neurodiffuse {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
      ab_(static_cast<std::size_t>(n) * ldab_, 0.0) {
    if (n < 1 || kl < 0 || ku < 0)
        throw InvalidArgument("banded matrix dimensions");
}

void BandedMatrix::zero() {
    std::fill(ab_.begin(), ab_.end(), 0.0);
}

void BandedMatrix::set_unit_row(int i) {
    const int jlo = std::max(0, i - kl_);
    const int jhi = std::min(n_ - 1, i + ku_);
    for (int j = jlo; j <= jhi; ++j)
        ab_[index(i, j)] = (i == j) ? 1.0 : 0.0;
}

std::vector<double> BandedMatrix::multiply(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
        const int ilo = std::max(0, j - ku_);
        const int ihi = std::min(n_ - 1, j + kl_);
        const double xj = x[j];
        for (int i = ilo; i <= ihi; ++i)
            y[i] += ab_[index(i, j)] * xj;
    }
    return y;
}

double BandedMatrix::inf_norm() const {
    std::vector<double> rowsum(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
        const int ilo = std::max(0, j - ku_);
        const int ihi = std::min(n_ - 1, j + kl_);
        for (int i = ilo; i <= ihi; ++i)
            rowsum[i] += std::abs(ab_[index(i, j)]);
    }
    return *std::max_element(rowsum.begin(), rowsum.end());
}

BandedLU::BandedLU(BandedMatrix a) : a_(std::move(a)), ipiv_(a_.n_) {
    const int n = a_.n_;
    const int kl = a_.kl_;
    const int ku = a_.ku_;
    const int ldab = a_.ldab_;
    double* ab = a_.ab_.data();
    // Column j of the working array starts at ab + j*ldab; the diagonal
    // entry sits at offset kl+ku.
    auto entry = [&](int i, int j) -> double& { return ab[j * ldab + kl + ku + i - j]; };

    int ju = 0; // rightmost column touched by eliminations so far
    for (int j = 0; j < n; ++j) {
        const int km = std::min(kl, n - 1 - j); // subdiagonal rows in column j
        // Partial pivot within the band.
        int jp = 0;
        double best = std::abs(entry(j, j));
        for (int i = 1; i <= km; ++i) {
            const double v = std::abs(entry(j + i, j));
            if (v > best) {
                best = v;
                jp = i;
            }
        }
        ipiv_[j] = j + jp;
        if (best == 0.0)
            throw SingularMatrix(j);

        ju = std::max(ju, std::min(j + ku + jp, n - 1));
        if (jp != 0) {
            for (int c = j; c <= ju; ++c)
                std::swap(entry(j, c), entry(j + jp, c));
        }
        if (km > 0) {
            const double inv_piv = 1.0 / entry(j, j);
            for (int i = 1; i <= km; ++i)
                entry(j + i, j) *= inv_piv;
            for (int c = j + 1; c <= ju; ++c) {
                const double ujc = entry(j, c);
                if (ujc == 0.0)
                    continue;
                for (int i = 1; i <= km; ++i)
                    entry(j + i, c) -= entry(j + i, j) * ujc;
            }
        }
    }
}

std::vector<double> BandedLU::solve(std::vector<double> b) const {
    const int n = a_.n_;
    const int kl = a_.kl_;
    const int ku = a_.ku_;
    const int ldab = a_.ldab_;
    const double* ab = a_.ab_.data();
    auto entry = [&](int i, int j) -> double { return ab[j * ldab + kl + ku + i - j]; };

    // L has unit diagonal; multipliers live below the diagonal of each column.
    for (int j = 0; j < n - 1; ++j) {
        const int jp = ipiv_[j];
        if (jp != j)
            std::swap(b[j], b[jp]);
        const int km = std::min(kl, n - 1 - j);
        const double bj = b[j];
        for (int i = 1; i <= km; ++i)
            b[j + i] -= entry(j + i, j) * bj;
    }
    // Back substitution on U, whose bandwidth is at most kl+ku.
    const int ub = kl + ku;
    for (int j = n - 1; j >= 0; --j) {
        b[j] /= entry(j, j);
        const double bj = b[j];
        const int ilo = std::max(0, j - ub);
        for (int i = ilo; i < j; ++i)
            b[i] -= entry(i, j) * bj;
    }
    return b;
}

std::vector<double> lu_solve(const BandedMatrix& a, const std::vector<double>& b) {
    BandedLU lu(a);
    return lu.solve(b);
}

} // namespace neurodiffuse
