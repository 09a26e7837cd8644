#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "primeforms/arith.hpp"

namespace primeforms {

// ceil for the two scalar modes
inline double scalar_ceil(double t) { return std::ceil(t); }
inline mpq_class scalar_ceil(const mpq_class& t) {
    mpz_class c;
    mpz_cdiv_q(c.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
    return mpq_class(c);
}
inline double scalar_abs(double t) { return std::fabs(t); }
inline mpq_class scalar_abs(const mpq_class& t) { return abs(t); }
inline double to_double(double t) { return t; }
inline double to_double(const mpq_class& t) { return t.get_d(); }

// representative of t mod 1 in (-1/2, 1/2]
template <class T>
T centered_frac(const T& t) {
    return t - scalar_ceil(T(t - T(1) / 2));
}

// representative of t mod 1 in [0, 1)
template <class T>
T unit_frac(const T& t) {
    return t + scalar_ceil(T(-t));
}

// [[1, x, z], [0, 1, y], [0, 0, 1]]
template <class T>
struct Heisenberg {
    T x{0}, y{0}, z{0};

    Heisenberg operator*(const Heisenberg& o) const { return {x + o.x, y + o.y, z + o.z + x * o.y}; }
    Heisenberg inverse() const { return {-x, -y, -z + x * y}; }
    bool operator==(const Heisenberg& o) const { return x == o.x && y == o.y && z == o.z; }

    static Heisenberg identity() { return {T(0), T(0), T(0)}; }

    Heisenberg pow(std::int64_t n) const {
        T m(static_cast<long>(n)), tri(static_cast<long>(n) * static_cast<long>(n - 1) / 2);
        if constexpr (std::is_same_v<T, double>) tri = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
        return {m * x, m * y, m * z + tri * x * y};
    }
    Heisenberg pow_iterated(std::int64_t n) const {
        Heisenberg r = identity();
        Heisenberg base = n >= 0 ? *this : inverse();
        for (std::int64_t k = 0; k < (n >= 0 ? n : -n); ++k) r = r * base;
        return r;
    }
};

template <class T>
struct Reduction {
    Heisenberg<T> point;   // g * gamma, coordinates in (-1/2, 1/2]
    Heisenberg<T> gamma;   // integer entries
};

// Right-multiplies by integer translates fixing y, then x, then z.
template <class T>
Reduction<T> reduce_to_fundamental_domain(const Heisenberg<T>& g) {
    const T half = T(1) / 2;
    T b = -scalar_ceil(T(g.y - half));
    Heisenberg<T> p = g * Heisenberg<T>{T(0), b, T(0)};
    T a = -scalar_ceil(T(p.x - half));
    p = p * Heisenberg<T>{a, T(0), T(0)};
    T c = -scalar_ceil(T(p.z - half));
    p = p * Heisenberg<T>{T(0), T(0), c};
    return {p, Heisenberg<T>{a, b, c}};
}

template <class T>
bool in_fundamental_domain(const Heisenberg<T>& p) {
    const T half = T(1) / 2;
    auto ok = [&](const T& t) { return -half < t && t <= half; };
    return ok(p.x) && ok(p.y) && ok(p.z);
}

// Reduced g^n for g = [[1, -theta, -theta], [0, 1, 2], [0, 0, 1]].
inline Heisenberg<mpq_class> quadratic_phase_orbit(const mpq_class& theta, std::int64_t n) {
    Heisenberg<mpq_class> g{-theta, mpq_class(2), -theta};
    return reduce_to_fundamental_domain(g.pow(n)).point;
}

// ({-n theta}, 0, {n^2 theta}) with {.} in (-1/2, 1/2].
inline Heisenberg<mpq_class> quadratic_phase_closed_form(const mpq_class& theta, std::int64_t n) {
    mpq_class m(static_cast<long>(n));
    return {centered_frac(mpq_class(-m * theta)), mpq_class(0), centered_frac(mpq_class(m * m * theta))};
}

// Circular distance between a and b in R/Z.
template <class T>
T circle_distance(const T& a, const T& b) {
    return scalar_abs(centered_frac(T(a - b)));
}

// Points of (R/Z)^k; residual = max_j dist(y00_j, (y01 + y10 - y11)_j).
template <class T>
T abelian_constraint(const std::vector<T>& y00, const std::vector<T>& y10, const std::vector<T>& y01,
                     const std::vector<T>& y11) {
    T worst(0);
    for (std::size_t j = 0; j < y00.size(); ++j) {
        T d = circle_distance(y00[j], T(y01[j] + y10[j] - y11[j]));
        if (d > worst) worst = d;
    }
    return worst;
}

// x + (n + omega.h) g for omega in {00, 10, 01, 11}.
template <class T>
std::array<std::vector<T>, 4> abelian_parallelepiped(const std::vector<T>& x, const std::vector<T>& g, std::int64_t n,
                                                     std::int64_t h1, std::int64_t h2) {
    std::array<std::vector<T>, 4> out;
    const std::int64_t m[4] = {n, n + h1, n + h2, n + h1 + h2};
    for (int v = 0; v < 4; ++v)
        for (std::size_t j = 0; j < x.size(); ++j)
            out[v].push_back(unit_frac(T(x[j] + T(static_cast<long>(m[v])) * g[j])));
    return out;
}

template <class T>
struct SkewPoint {
    T x{0}, y{0};
};

// omega indexed by mask with bit (j-1) holding omega_j; label "w1w2w3".
inline std::string cube_label(unsigned mask) {
    std::string s;
    for (int j = 0; j < 3; ++j) s += (mask >> j & 1) ? '1' : '0';
    return s;
}

enum class SkewOrbitConvention {
    iterate,     // y + m x + m(m-1)/2 alpha, the m-th iterate of (x, y) -> (x + alpha, y + x)
    closed_form  // y + m x + m(m+1)/2 alpha
};

template <class T>
SkewPoint<T> skew_orbit(const T& alpha, const SkewPoint<T>& start, std::int64_t m, SkewOrbitConvention conv) {
    T mm(static_cast<long>(m));
    T tri(static_cast<long>(conv == SkewOrbitConvention::iterate ? m * (m - 1) / 2 : m * (m + 1) / 2));
    return {unit_frac(T(start.x + mm * alpha)), unit_frac(T(start.y + tri * alpha + mm * start.x))};
}

template <class T>
SkewPoint<T> skew_step(const T& alpha, const SkewPoint<T>& p) {
    return {unit_frac(T(p.x + alpha)), unit_frac(T(p.y + p.x))};
}

template <class T>
std::array<SkewPoint<T>, 8> skew_parallelepiped(const T& alpha, const SkewPoint<T>& start, std::int64_t n,
                                                const std::array<std::int64_t, 3>& h, SkewOrbitConvention conv) {
    std::array<SkewPoint<T>, 8> out;
    for (unsigned w = 0; w < 8; ++w) {
        std::int64_t m = n;
        for (int j = 0; j < 3; ++j)
            if (w >> j & 1) m += h[j];
        out[w] = skew_orbit(alpha, start, m, conv);
    }
    return out;
}

template <class T>
struct SkewConstraintResult {
    std::array<T, 3> x_checks{};  // each rearranged x-constraint against the predicted x_000
    SkewPoint<T> predicted;        // alternating-sum prediction of vertex 000, reduced to [0,1)
    T residual{0};                 // distance of the prediction from the supplied vertex 000
};

// points[w] for w = 1..7 are used; points[0] is the true vertex the prediction is measured against.
template <class T>
SkewConstraintResult<T> skew_constraint(const std::array<SkewPoint<T>, 8>& points) {
    SkewConstraintResult<T> r;
    T px(0), py(0);
    for (unsigned w = 1; w < 8; ++w) {
        int sign = (std::popcount(w) & 1) ? 1 : -1;  // -(-1)^{|w|}
        px += T(sign) * points[w].x;
        py += T(sign) * points[w].y;
    }
    r.predicted = {unit_frac(px), unit_frac(py)};
    // x_000 = x_010 + x_001 - x_011, = x_001 + x_100 - x_101, = x_100 + x_010 - x_110
    auto X = [&](const char* lbl) {
        unsigned w = 0;
        for (int j = 0; j < 3; ++j)
            if (lbl[j] == '1') w |= 1u << j;
        return points[w].x;
    };
    r.x_checks[0] = circle_distance(r.predicted.x, T(X("010") + X("001") - X("011")));
    r.x_checks[1] = circle_distance(r.predicted.x, T(X("001") + X("100") - X("101")));
    r.x_checks[2] = circle_distance(r.predicted.x, T(X("100") + X("010") - X("110")));
    T dx = circle_distance(r.predicted.x, points[0].x), dy = circle_distance(r.predicted.y, points[0].y);
    r.residual = dx > dy ? dx : dy;
    return r;
}

// Lower faces of {0,1}^3 in the fixed decreasing order, by max element.
inline const std::array<unsigned, 8>& hk_face_order() {
    // 111, 011, 101, 110, 001, 010, 100, 000 written as omega_1 omega_2 omega_3
    static const std::array<unsigned, 8> order = {0b111, 0b110, 0b101, 0b011, 0b100, 0b010, 0b001, 0b000};
    return order;
}

template <class T>
struct HKFactorization {
    std::array<Heisenberg<T>, 8> taus;  // in hk_face_order
    std::array<unsigned, 8> faces{};    // max element of each lower face
    bool success = false;
    std::string failure;  // which face check failed
};

// g = tau_1^{F_1} ... tau_8^{F_8}; tau_i is read off the residual at max(F_i).
template <class T>
HKFactorization<T> hk_factorize_heisenberg(const std::array<Heisenberg<T>, 8>& cube, const T& tol = T(0)) {
    HKFactorization<T> out;
    out.faces = hk_face_order();
    auto residual = cube;
    out.success = true;
    for (int i = 0; i < 8; ++i) {
        const unsigned top = out.faces[i];
        const Heisenberg<T> tau = residual[top];
        out.taus[i] = tau;
        const Heisenberg<T> inv = tau.inverse();
        for (unsigned w = 0; w < 8; ++w)
            if ((w & ~top) == 0) residual[w] = inv * residual[w];
        const int codim = 3 - std::popcount(top);
        auto small = [&](const T& v) { return scalar_abs(v) <= tol; };
        if (codim == 2 && !(small(tau.x) && small(tau.y))) {
            out.success = false;
            if (out.failure.empty()) out.failure = "face " + cube_label(top) + " factor not central";
        }
        if (codim == 3 && !(small(tau.x) && small(tau.y) && small(tau.z))) {
            out.success = false;
            if (out.failure.empty()) out.failure = "face " + cube_label(top) + " factor not trivial";
        }
    }
    return out;
}

template <class T>
std::array<Heisenberg<T>, 8> hk_reconstruct(const HKFactorization<T>& f) {
    std::array<Heisenberg<T>, 8> g;
    g.fill(Heisenberg<T>::identity());
    for (int i = 0; i < 8; ++i)
        for (unsigned w = 0; w < 8; ++w)
            if ((w & ~f.faces[i]) == 0) g[w] = g[w] * f.taus[i];
    return g;
}

// (g^{n + omega.h} x0) as group elements.
template <class T>
std::array<Heisenberg<T>, 8> heisenberg_parallelepiped(const Heisenberg<T>& g, const Heisenberg<T>& x0, std::int64_t n,
                                                       const std::array<std::int64_t, 3>& h) {
    std::array<Heisenberg<T>, 8> out;
    for (unsigned w = 0; w < 8; ++w) {
        std::int64_t m = n;
        for (int j = 0; j < 3; ++j)
            if (w >> j & 1) m += h[j];
        out[w] = g.pow(m) * x0;
    }
    return out;
}

using NilFunction = std::function<std::complex<double>(double, double, double)>;

// rho_j(x) rho_k(y) e(z) with cos^2 bumps centred at j/4, k/4 (half-width 1/4).
// k must avoid the cell straddling y = 1/2 so the function is continuous on the quotient.
NilFunction cell_phase_function(int j, int k);

// E_{n <= N} mu(n) F(reduced g^n x0).
double mobius_nil_correlation(std::int64_t N, const Heisenberg<double>& g, const Heisenberg<double>& x0, const NilFunction& F,
                              const ArithTables& tables, unsigned threads = 1);

// |E_{n <= N} mu(n) e(alpha n)|
double mobius_phase_correlation(std::int64_t N, double alpha, const ArithTables& tables);

// max over alpha = j / K, j = 0..K-1, of |E_{n <= N} mu(n) e(alpha n)|.
struct PhaseScan {
    double max_abs = 0;
    double argmax_alpha = 0;
};
PhaseScan mobius_phase_scan(std::int64_t N, int K, const ArithTables& tables);

}  // namespace primeforms
