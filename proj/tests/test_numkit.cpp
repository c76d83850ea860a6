#include <doctest.h>

#include "cmt/models.hpp"
#include "cmt/numkit.hpp"

using namespace cmt;

namespace {

CMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
    CMatrix m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("schur: already triangular input is reproduced") {
    const CMatrix a = mat2(0, 1, 0, 0);
    const SchurResult s = schur(a);
    CHECK((s.q * s.t * s.q.adjoint() - a).norm() <= 1e-12 * 2);
    CHECK((s.q.adjoint() * s.q - CMatrix::Identity(2, 2)).norm() <= 1e-12 * 2);
    CHECK(std::abs(s.t(0, 0)) <= 1e-14);
    CHECK(std::abs(s.t(1, 1)) <= 1e-14);
    CHECK(std::abs(s.t(1, 0)) <= 1e-14);
}

TEST_CASE("schur: rotation matrix has eigenvalues +/- i") {
    const CMatrix a = mat2(0, 1, -1, 0);
    const SchurResult s = schur(a);
    std::vector<Complex> evs = {s.t(0, 0), s.t(1, 1)};
    std::sort(evs.begin(), evs.end(),
              [](Complex x, Complex y) { return x.imag() < y.imag(); });
    CHECK(std::abs(evs[0] - Complex(0, -1)) <= 1e-12);
    CHECK(std::abs(evs[1] - Complex(0, 1)) <= 1e-12);
}

TEST_CASE("schur: identity stays the identity") {
    const CMatrix a = CMatrix::Identity(3, 3);
    const SchurResult s = schur(a);
    CHECK((s.t - a).norm() <= 1e-13);
}

TEST_CASE("schur: rejects non-square input") {
    CHECK_THROWS_AS(schur(CMatrix::Zero(2, 3)), ShapeError);
}

TEST_CASE("eig_clusters: diagonal matrix with distinct eigenvalues") {
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 0) = 1;
    a(1, 1) = 6;
    const ClusterResult r = eig_clusters(a, 1e-7);
    REQUIRE(r.clusters.size() == 2);
    CHECK(r.clusters[0].alg_mult == 1);
    CHECK(std::abs(r.clusters[0].center - Complex(1, 0)) <= 1e-12);
    CHECK((r.clusters[0].projector - mat2(1, 0, 0, 0)).norm() <= 1e-10);
    CHECK((r.clusters[1].projector - mat2(0, 0, 0, 1)).norm() <= 1e-10);
}

TEST_CASE("eig_clusters: nilpotent Jordan block is one cluster with full projector") {
    const CMatrix a = mat2(0, 1, 0, 0);
    const ClusterResult r = eig_clusters(a, 1e-7);
    REQUIRE(r.clusters.size() == 1);
    CHECK(r.clusters[0].alg_mult == 2);
    CHECK((r.clusters[0].projector - CMatrix::Identity(2, 2)).norm() <= 1e-12);
}

TEST_CASE("eig_clusters: repeated eigenvalue across positions merges") {
    CMatrix a = CMatrix::Zero(3, 3);
    a(0, 0) = 6;
    a(1, 1) = 1;
    a(2, 2) = 6;
    const ClusterResult r = eig_clusters(a, 1e-7);
    REQUIRE(r.clusters.size() == 2);
    CHECK(r.clusters[0].alg_mult == 1);  // sorted by |center|: 1 first
    CHECK(r.clusters[1].alg_mult == 2);
    CHECK(std::abs(r.clusters[1].center - Complex(6, 0)) <= 1e-12);
}

TEST_CASE("eig_clusters: projectors of a non-normal matrix resolve the identity") {
    SeededRng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const Index n = 2 + static_cast<Index>(trial);
        const CMatrix a = rng.matrix(n, n);
        const ClusterResult r = eig_clusters(a, 1e-7);
        CMatrix sum = CMatrix::Zero(n, n);
        Index mult = 0;
        for (const SpectralCluster& c : r.clusters) {
            sum += c.projector;
            mult += c.alg_mult;
            CHECK((c.projector * c.projector - c.projector).norm() <=
                  1e-7 * std::max(1.0, c.projector.norm()));
            CHECK((a * c.projector - c.projector * a).norm() <= 1e-7 * scale_of(a));
            // basis columns span an invariant subspace
            const CMatrix image = a * c.basis;
            double residual = 0;
            solve_ls(c.basis, image, &residual);
            CHECK(residual <= 1e-8 * scale_of(a));
        }
        CHECK(mult == n);
        CHECK((sum - CMatrix::Identity(n, n)).norm() <= 1e-9 * static_cast<double>(n));
        for (size_t i = 0; i < r.clusters.size(); ++i) {
            for (size_t j = 0; j < r.clusters.size(); ++j) {
                if (i == j) continue;
                CHECK((r.clusters[i].projector * r.clusters[j].projector).norm() <= 1e-7);
            }
        }
    }
}

TEST_CASE("eig_clusters: near-tolerance gap raises the warning flag") {
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 1.0 + 3e-7;  // gap in (tol, 10 tol) after scaling
    const ClusterResult r = eig_clusters(a, 1e-7);
    CHECK(r.gap_warning);
}

TEST_CASE("rank_basis: zero matrix") {
    const RankBasis rb = rank_basis(CMatrix::Zero(2, 2), 1e-9);
    CHECK(rb.rank == 0);
    CHECK(rb.col_basis.cols() == 0);
    CHECK(rb.null_basis.cols() == 2);
}

TEST_CASE("rank_basis: diagonal rank-1") {
    const CMatrix a = mat2(2, 0, 0, 0);
    const RankBasis rb = rank_basis(a, 1e-9);
    REQUIRE(rb.rank == 1);
    CHECK(std::abs(std::abs(rb.col_basis(0, 0)) - 1.0) <= 1e-12);
    CHECK(std::abs(rb.col_basis(1, 0)) <= 1e-12);
    CHECK(std::abs(std::abs(rb.null_basis(1, 0)) - 1.0) <= 1e-12);
}

TEST_CASE("rank_basis: proportional rows have rank 1") {
    const CMatrix a = mat2(1, 1, 1, 1);
    CHECK(rank_basis(a, 1e-9).rank == 1);
}

TEST_CASE("rank_basis: idempotent under re-extraction") {
    SeededRng rng(5);
    for (int trial = 0; trial < 8; ++trial) {
        const CMatrix a = rng.matrix(6, 3) * rng.matrix(3, 6);
        const RankBasis rb = rank_basis(a, 1e-9);
        CHECK(rank_basis(rb.col_basis, 1e-9).rank == rb.rank);
    }
}

TEST_CASE("det: identities and diagonal products") {
    CHECK(std::abs(det(CMatrix::Identity(3, 3)) - Complex(1, 0)) <= 1e-14);
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 2;
    d(1, 1) = 3;
    CHECK(std::abs(det(d) - Complex(6, 0)) <= 1e-14);
    CHECK(std::abs(det(CMatrix(0, 0)) - Complex(1, 0)) == 0.0);
}

TEST_CASE("det: multiplicative on random well-conditioned pairs") {
    SeededRng rng(7);
    for (int trial = 0; trial < 12; ++trial) {
        const Index n = 2 + static_cast<Index>(trial % 5);
        const CMatrix a = rng.matrix(n, n) + 2.0 * CMatrix::Identity(n, n);
        const CMatrix b = rng.matrix(n, n) + 2.0 * CMatrix::Identity(n, n);
        const Complex lhs = det(CMatrix(a * b));
        const Complex rhs = det(a) * det(b);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
    }
}

TEST_CASE("solve: residual small, singular input rejected with condition estimate") {
    SeededRng rng(11);
    const CMatrix a = rng.matrix(5, 5) + 3.0 * CMatrix::Identity(5, 5);
    const CMatrix b = rng.matrix(5, 2);
    const CMatrix x = solve(a, b);
    CHECK((a * x - b).norm() <= 1e-11 * std::max(1.0, b.norm()) * 10);

    CMatrix s = CMatrix::Zero(2, 2);
    s(0, 0) = 1;  // rank 1
    try {
        solve(s, CMatrix::Identity(2, 2));
        FAIL("expected SingularError");
    } catch (const SingularError& e) {
        CHECK(std::string(e.what()).find("condition") != std::string::npos);
    }
}

TEST_CASE("sylvester: hand example and residual property") {
    // 1*x - x*2 = 1  =>  x = -1
    CMatrix a(1, 1), b(1, 1), c(1, 1);
    a << Complex(1, 0);
    b << Complex(2, 0);
    c << Complex(1, 0);
    const CMatrix x = sylvester(a, b, c);
    CHECK(std::abs(x(0, 0) - Complex(-1, 0)) <= 1e-14);

    SeededRng rng(3);
    for (int trial = 0; trial < 6; ++trial) {
        const CMatrix sa = rng.matrix(4, 4) + 4.0 * CMatrix::Identity(4, 4);
        const CMatrix sb = rng.matrix(3, 3) - 4.0 * CMatrix::Identity(3, 3);
        const CMatrix sc = rng.matrix(4, 3);
        const CMatrix sx = sylvester(sa, sb, sc);
        CHECK((sa * sx - sx * sb - sc).norm() <= 1e-11 * std::max(1.0, sc.norm()) * 100);
    }
}

TEST_CASE("sylvester: overlapping spectra are rejected") {
    const CMatrix a = CMatrix::Identity(2, 2);
    const CMatrix b = CMatrix::Identity(3, 3);
    CHECK_THROWS_AS(sylvester(a, b, CMatrix::Zero(2, 3)), SpectraOverlapError);
}
