#ifndef NEURODIFFUSE_CORE_BANDED_HPP
#define NEURODIFFUSE_CORE_BANDED_HPP

#include <vector>

namespace neurodiffuse {

// Band matrix with kl sub- and ku superdiagonals, stored column-wise with
// kl extra rows of fill space so the factorization can pivot in place
// (entry (i,j) at ab[j*ldab + kl + ku + i - j]).
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(int n, int kl, int ku);

    int n() const { return n_; }
    int kl() const { return kl_; }
    int ku() const { return ku_; }

    void zero();
    bool in_band(int i, int j) const {
        return i >= 0 && j >= 0 && i < n_ && j < n_ && j - i <= ku_ && i - j <= kl_;
    }
    void add(int i, int j, double v) { ab_[index(i, j)] += v; }
    void set(int i, int j, double v) { ab_[index(i, j)] = v; }
    double get(int i, int j) const { return in_band(i, j) ? ab_[index(i, j)] : 0.0; }

    void set_unit_row(int i);

    std::vector<double> multiply(const std::vector<double>& x) const;
    double inf_norm() const;

    double* data() { return ab_.data(); }
    const double* data() const { return ab_.data(); }
    int ldab() const { return ldab_; }
    std::size_t storage_bytes() const { return ab_.size() * sizeof(double); }

private:
    friend class BandedLU;
    int index(int i, int j) const { return j * ldab_ + (kl_ + ku_ + i - j); }

    int n_ = 0, kl_ = 0, ku_ = 0, ldab_ = 0;
    std::vector<double> ab_;
};

// LU factorization with partial pivoting confined to the band; the upper
// bandwidth grows to at most kl+ku from row interchanges.
class BandedLU {
public:
    explicit BandedLU(BandedMatrix a); // factors in place, throws SingularMatrix
    std::vector<double> solve(std::vector<double> b) const;

private:
    BandedMatrix a_;
    std::vector<int> ipiv_;
};

// One-shot solve; keeps a small backward-error check in debug builds out of
// the hot path by leaving verification to the caller/tests.
std::vector<double> lu_solve(const BandedMatrix& a, const std::vector<double>& b);

} // namespace neurodiffuse

#endif
