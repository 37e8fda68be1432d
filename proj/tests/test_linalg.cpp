#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kge/linalg.hpp"
#include "kge/rng.hpp"

using namespace kge;

TEST_CASE("dot and norms against hand values") {
    Vec a{1.0, 2.0, 3.0}, b{4.0, -5.0, 6.0};
    CHECK(dot(a, b) == doctest::Approx(12.0).epsilon(1e-15));
    CHECK(norm2(a) == doctest::Approx(14.0).epsilon(1e-15));
    CHECK(norm(b) == doctest::Approx(std::sqrt(77.0)).epsilon(1e-15));
    CHECK_THROWS_AS(dot(a, Vec{1.0}), std::invalid_argument);
}

TEST_CASE("mat_vec matches manual expansion") {
    Mat m(2, 3);
    m.data = {1, 2, 3, 4, 5, 6};
    Vec v{1, -1, 2};
    Vec out = mat_vec(m, v);
    CHECK(out[0] == doctest::Approx(1 - 2 + 6));
    CHECK(out[1] == doctest::Approx(4 - 5 + 12));
    CHECK_THROWS_AS(mat_vec(m, Vec{1.0}), std::invalid_argument);
}

TEST_CASE("identity matrix is a fixed point of mat_vec") {
    Rng rng(11);
    Vec v(7);
    for (double& x : v) x = rng.uniform(-2, 2);
    Vec out = mat_vec(Mat::identity(7), v);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(out[i] == v[i]);
}

// independent nested-loop oracle for the trilinear form
static double naive_trilinear(const Tensor3& w, const Vec& a, const Vec& b,
                              const Vec& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.d1; ++i)
        for (std::size_t j = 0; j < w.d2; ++j)
            for (std::size_t k = 0; k < w.d3; ++k)
                s += w.at(i, j, k) * a[i] * b[j] * c[k];
    return s;
}

TEST_CASE("tucker_trilinear matches the naive oracle on random draws") {
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t d1 = 1 + rng.next_below(5);
        std::size_t d2 = 1 + rng.next_below(5);
        std::size_t d3 = 1 + rng.next_below(5);
        Tensor3 w(d1, d2, d3);
        for (double& x : w.data) x = rng.uniform(-1, 1);
        Vec a(d1), b(d2), c(d3);
        for (double& x : a) x = rng.uniform(-1, 1);
        for (double& x : b) x = rng.uniform(-1, 1);
        for (double& x : c) x = rng.uniform(-1, 1);
        CHECK(tucker_trilinear(w, a, b, c) ==
              doctest::Approx(naive_trilinear(w, a, b, c)).epsilon(1e-12));
    }
    Tensor3 w(2, 2, 2);
    CHECK_THROWS_AS(tucker_trilinear(w, Vec{1.0}, Vec{1, 1}, Vec{1, 1}),
                    std::invalid_argument);
}

TEST_CASE("mode3_mix is consistent with the trilinear form") {
    Rng rng(17);
    for (int rep = 0; rep < 30; ++rep) {
        std::size_t d1 = 1 + rng.next_below(4);
        std::size_t d2 = 1 + rng.next_below(4);
        std::size_t d3 = 1 + rng.next_below(4);
        Tensor3 w(d1, d2, d3);
        for (double& x : w.data) x = rng.uniform(-1, 1);
        Vec a(d1), b(d2), c(d3);
        for (double& x : a) x = rng.uniform(-1, 1);
        for (double& x : b) x = rng.uniform(-1, 1);
        for (double& x : c) x = rng.uniform(-1, 1);
        Mat m = mode3_mix(w, b);
        double via_matrix = dot(a, mat_vec(m, c));
        CHECK(via_matrix ==
              doctest::Approx(tucker_trilinear(w, a, b, c)).epsilon(1e-12));
    }
}

TEST_CASE("tensor layout stores (i,j,k) at ((i*d2)+j)*d3+k") {
    Tensor3 w(2, 3, 4);
    w.at(1, 2, 3) = 9.0;
    CHECK(w.data[(1 * 3 + 2) * 4 + 3] == 9.0);
}
