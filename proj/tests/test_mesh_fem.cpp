#include <cmath>
#include <random>

#include "core/banded.hpp"
#include "core/errors.hpp"
#include "core/fem.hpp"
#include "core/mesh.hpp"
#include "testing.hpp"

using namespace neurodiffuse;

namespace {

// Dense Gaussian elimination with partial pivoting; the independent check
// for the banded solver.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int j = 0; j < n; ++j) {
        int piv = j;
        for (int i = j + 1; i < n; ++i)
            if (std::abs(a[i][j]) > std::abs(a[piv][j]))
                piv = i;
        std::swap(a[j], a[piv]);
        std::swap(b[j], b[piv]);
        for (int i = j + 1; i < n; ++i) {
            const double m = a[i][j] / a[j][j];
            for (int k = j; k < n; ++k)
                a[i][k] -= m * a[j][k];
            b[i] -= m * b[j];
        }
    }
    for (int j = n - 1; j >= 0; --j) {
        for (int k = j + 1; k < n; ++k)
            b[j] -= a[j][k] * b[k];
        b[j] /= a[j][j];
    }
    return b;
}

// P1 mass/stiffness assembly used as a fixture for the banded layout.
void assemble_p1_mass(const Mesh1D& mesh, BandedMatrix& m) {
    const double h = mesh.h();
    for (int c = 0; c < mesh.num_cells; ++c) {
        m.add(c, c, h / 3.0);
        m.add(c, c + 1, h / 6.0);
        m.add(c + 1, c, h / 6.0);
        m.add(c + 1, c + 1, h / 3.0);
    }
}

void assemble_p1_stiffness(const Mesh1D& mesh, BandedMatrix& k) {
    const double h = mesh.h();
    for (int c = 0; c < mesh.num_cells; ++c) {
        k.add(c, c, 1.0 / h);
        k.add(c, c + 1, -1.0 / h);
        k.add(c + 1, c, -1.0 / h);
        k.add(c + 1, c + 1, 1.0 / h);
    }
}

} // namespace

int main() {
    TEST_CASE("build_mesh basics") {
        const Mesh1D m = build_mesh(0.01, 1000);
        CHECK_NEAR(m.h(), 1e-5, 1e-18);
        CHECK(static_cast<int>(m.vertices.size()) == 1001);

        const Mesh1D unit = build_mesh(1.0, 8);
        CHECK(static_cast<int>(unit.vertices.size()) == 9);
        for (int i = 0; i <= 8; ++i)
            CHECK_NEAR(unit.vertices[i], i / 8.0, 1e-15);

        const Mesh1D single = build_mesh(1.0, 1);
        CHECK_NEAR(single.vertices[0], 0.0, 0.0);
        CHECK_NEAR(single.vertices[1], 1.0, 0.0);

        CHECK_THROWS(InvalidArgument, build_mesh(-1.0, 4));
        CHECK_THROWS(InvalidArgument, build_mesh(1.0, 0));
    }
    TEST_CASE_END;

    TEST_CASE("P1 element mass matrix on one cell") {
        const Mesh1D m = build_mesh(1.0, 1);
        BandedMatrix mass(2, 1, 1);
        assemble_p1_mass(m, mass);
        CHECK_NEAR(mass.get(0, 0), 1.0 / 3.0, 1e-15);
        CHECK_NEAR(mass.get(0, 1), 1.0 / 6.0, 1e-15);
        CHECK_NEAR(mass.get(1, 0), 1.0 / 6.0, 1e-15);
        CHECK_NEAR(mass.get(1, 1), 1.0 / 3.0, 1e-15);
    }
    TEST_CASE_END;

    TEST_CASE("stiffness row sums vanish, mass row sums add to length") {
        const Mesh1D m = build_mesh(1.0, 2);
        BandedMatrix k(3, 1, 1);
        assemble_p1_stiffness(m, k);
        for (int i = 0; i < 3; ++i) {
            double row = 0.0;
            for (int j = 0; j < 3; ++j)
                row += k.get(i, j);
            CHECK_NEAR(row, 0.0, 1e-14);
        }
        BandedMatrix mass(3, 1, 1);
        assemble_p1_mass(m, mass);
        double total = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                total += mass.get(i, j);
        CHECK_REL(total, m.length, 1e-12);
    }
    TEST_CASE_END;

    TEST_CASE("banded lu: identity and a hand-checkable 2x2") {
        BandedMatrix eye(4, 1, 1);
        for (int i = 0; i < 4; ++i)
            eye.set(i, i, 1.0);
        const std::vector<double> b = {1, 2, 3, 4};
        const std::vector<double> x = lu_solve(eye, b);
        for (int i = 0; i < 4; ++i)
            CHECK_NEAR(x[i], b[i], 1e-15);

        BandedMatrix a(2, 1, 1);
        a.set(0, 0, 2.0);
        a.set(0, 1, 1.0);
        a.set(1, 0, 1.0);
        a.set(1, 1, 2.0);
        const std::vector<double> y = lu_solve(a, {3.0, 3.0});
        CHECK_NEAR(y[0], 1.0, 1e-14);
        CHECK_NEAR(y[1], 1.0, 1e-14);
    }
    TEST_CASE_END;

    TEST_CASE("banded lu matches dense elimination on random banded systems") {
        std::mt19937 rng(1234);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        const int n = 50, kl = 3, ku = 2;
        for (int trial = 0; trial < 5; ++trial) {
            BandedMatrix a(n, kl, ku);
            std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
            for (int i = 0; i < n; ++i) {
                for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
                    const double v = (i == j) ? 10.0 + uni(rng) : uni(rng);
                    a.set(i, j, v);
                    dense[i][j] = v;
                }
            }
            std::vector<double> b(n);
            for (double& v : b)
                v = uni(rng);
            const std::vector<double> x = lu_solve(a, b);
            const std::vector<double> xd = dense_solve(dense, b);
            for (int i = 0; i < n; ++i)
                CHECK_NEAR(x[i], xd[i], 1e-10);

            // backward error bound from the contract
            const std::vector<double> ax = a.multiply(x);
            double xmax = 0.0, rmax = 0.0, bmax = 0.0;
            for (int i = 0; i < n; ++i) {
                xmax = std::max(xmax, std::abs(x[i]));
                rmax = std::max(rmax, std::abs(ax[i] - b[i]));
                bmax = std::max(bmax, std::abs(b[i]));
            }
            CHECK(rmax <= 1e-10 * (a.inf_norm() * xmax + bmax));
        }
    }
    TEST_CASE_END;

    TEST_CASE("lu recovers x from A*x for random well-conditioned bands") {
        std::mt19937 rng(77);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        for (int seed = 0; seed < 12; ++seed) {
            const int n = 20 + 5 * seed;
            BandedMatrix a(n, 2, 2);
            for (int i = 0; i < n; ++i)
                for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j)
                    a.set(i, j, (i == j) ? 8.0 + uni(rng) : uni(rng));
            std::vector<double> x(n);
            for (double& v : x)
                v = uni(rng);
            const std::vector<double> got = lu_solve(a, a.multiply(x));
            for (int i = 0; i < n; ++i)
                CHECK_REL(got[i] + 2.0, x[i] + 2.0, 1e-10);
        }
    }
    TEST_CASE_END;

    TEST_CASE("singular pivot reports its index") {
        BandedMatrix a(3, 1, 1);
        a.set(0, 0, 1.0);
        a.set(1, 1, 0.0);
        a.set(2, 2, 1.0);
        bool hit = false;
        try {
            lu_solve(a, {1, 1, 1});
        } catch (const SingularMatrix& e) {
            hit = true;
            CHECK(e.pivot_index == 1);
        }
        CHECK(hit);
    }
    TEST_CASE_END;

    TEST_CASE("error norms: exact zero, analytic sin, interpolation rate") {
        const Mesh1D m = build_mesh(1.0, 16);
        const DofMap map(m, ElementFamily::P1c);

        FieldVector u = interpolate(map, [](double x) { return std::sin(M_PI * x); });
        const ErrorNorms self = error_norms(u, [&](double x) { return eval_field(u, x); },
                                            [&](double x) { return eval_field_deriv(u, x); });
        CHECK_NEAR(self.l2, 0.0, 1e-14);
        CHECK_NEAR(self.h1, 0.0, 1e-13);

        FieldVector zero(map);
        const ErrorNorms z = error_norms(zero, [](double x) { return std::sin(M_PI * x); },
                                         [](double x) { return M_PI * std::cos(M_PI * x); });
        CHECK_REL(z.l2, 1.0 / std::sqrt(2.0), 1e-10);
        CHECK_REL(z.h1, std::sqrt(0.5 + M_PI * M_PI / 2.0), 1e-10);

        // interpolant error decays at second order in L2
        double prev = 0.0;
        for (int level = 0; level < 2; ++level) {
            const Mesh1D mm = build_mesh(1.0, level == 0 ? 16 : 32);
            const DofMap mp(mm, ElementFamily::P1c);
            const FieldVector v = interpolate(mp, [](double x) { return std::sin(M_PI * x); });
            const ErrorNorms e = error_norms(v, [](double x) { return std::sin(M_PI * x); },
                                             [](double x) { return M_PI * std::cos(M_PI * x); });
            if (level == 1)
                CHECK_NEAR(std::log2(prev / e.l2), 2.0, 0.05);
            prev = e.l2;
        }
    }
    TEST_CASE_END;

    TEST_CASE("error norms invariant under traversal order") {
        // Mirroring the field about x = 1/2 visits the same per-cell
        // contributions in the opposite order; the norms must agree to
        // rounding.
        const Mesh1D m = build_mesh(1.0, 9);
        const DofMap map(m, ElementFamily::P1c);
        const FieldVector u = interpolate(map, [](double x) { return std::exp(x); });
        const ErrorNorms a = error_norms(u, [](double x) { return std::exp(x) + 0.01; },
                                         [](double x) { return std::exp(x); });
        FieldVector v(map);
        for (int i = 0; i < map.n_dofs(); ++i)
            v[i] = u[map.n_dofs() - 1 - i];
        const ErrorNorms b = error_norms(v, [](double x) { return std::exp(1.0 - x) + 0.01; },
                                         [](double x) { return -std::exp(1.0 - x); });
        CHECK_REL(a.l2, b.l2, 1e-13);
        CHECK_REL(a.h1, b.h1, 1e-13);
    }
    TEST_CASE_END;

    TEST_CASE("P2c interpolant of a cubic converges at third order") {
        double prev = 0.0;
        for (int level = 0; level < 3; ++level) {
            const int n = 8 << level;
            const Mesh1D m = build_mesh(1.0, n);
            const DofMap map(m, ElementFamily::P2c);
            const FieldVector u = interpolate(map, [](double x) { return x * x * x; });
            const ErrorNorms e = error_norms(u, [](double x) { return x * x * x; },
                                             [](double x) { return 3 * x * x; });
            if (level > 0)
                CHECK_NEAR(std::log2(prev / e.l2), 3.0, 0.05);
            prev = e.l2;
        }
    }
    TEST_CASE_END;

    TEST_CASE("interleaved layout: dof counts and bandwidth") {
        const Mesh1D m = build_mesh(1.0, 8);
        std::vector<SystemLayout::Field> fields;
        for (int i = 0; i < 8; ++i)
            fields.push_back({"s" + std::to_string(i), ElementFamily::P1c});
        fields.push_back({"a", ElementFamily::P0});
        const SystemLayout sys(m, fields);
        CHECK(sys.n_global() == 9 * 8 + 8);
        CHECK(sys.bandwidth() <= 17);

        // the zero-flow dof count the performance tables quote
        const Mesh1D big = build_mesh(0.01, 8000);
        const SystemLayout sys2(big, fields);
        CHECK(sys2.n_global() == 72008);

        // higher-order pairing has the same count at half the cells
        std::vector<SystemLayout::Field> ho;
        for (int i = 0; i < 8; ++i)
            ho.push_back({"s" + std::to_string(i), ElementFamily::P2c});
        ho.push_back({"a", ElementFamily::P1dc});
        const SystemLayout sys3(build_mesh(0.01, 4000), ho);
        CHECK(sys3.n_global() == 72008);
    }
    TEST_CASE_END;

    return testing::finish();
}
