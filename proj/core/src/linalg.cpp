#include "primeforms/linalg.hpp"

#include <stdexcept>
#include <utility>

namespace primeforms {

QMatrix to_rational(const ZMatrix& m) {
    QMatrix out;
    out.reserve(m.size());
    for (const auto& row : m) {
        QVector r;
        r.reserve(row.size());
        for (const auto& v : row) r.emplace_back(v);
        out.push_back(std::move(r));
    }
    return out;
}

ZMatrix to_integer(const std::vector<std::vector<std::int64_t>>& m) {
    ZMatrix out;
    for (const auto& row : m) {
        ZVector r;
        for (auto v : row) r.emplace_back(static_cast<long>(v));
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<int> rref(QMatrix& m, int cols) {
    std::vector<int> pivots;
    int rows = static_cast<int>(m.size());
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int sel = -1;
        for (int i = r; i < rows; ++i)
            if (sgn(m[i][c]) != 0) { sel = i; break; }
        if (sel < 0) continue;
        std::swap(m[r], m[sel]);
        mpq_class inv = 1 / m[r][c];
        for (int j = c; j < cols; ++j) m[r][j] *= inv;
        for (int i = 0; i < rows; ++i) {
            if (i == r || sgn(m[i][c]) == 0) continue;
            mpq_class f = m[i][c];
            for (int j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

int rank(const QMatrix& m, int cols) {
    QMatrix w = m;
    return static_cast<int>(rref(w, cols).size());
}

std::vector<QVector> nullspace(const QMatrix& m, int cols) {
    QMatrix w = m;
    auto piv = rref(w, cols);
    std::vector<bool> is_pivot(cols, false);
    for (int c : piv) is_pivot[c] = true;
    std::vector<QVector> basis;
    for (int f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        QVector v(cols, mpq_class(0));
        v[f] = 1;
        for (size_t r = 0; r < piv.size(); ++r) v[piv[r]] = -w[r][f];
        basis.push_back(std::move(v));
    }
    return basis;
}

std::optional<QVector> solve(const QMatrix& m, const QVector& rhs, int cols) {
    QMatrix aug = m;
    for (size_t i = 0; i < aug.size(); ++i) {
        aug[i].resize(cols);
        aug[i].push_back(rhs[i]);
    }
    auto piv = rref(aug, cols + 1);
    if (!piv.empty() && piv.back() == cols) return std::nullopt;
    QVector x(cols, mpq_class(0));
    for (size_t r = 0; r < piv.size(); ++r) x[piv[r]] = aug[r][cols];
    return x;
}

ZVector primitive_integer(const QVector& v) {
    mpz_class l = 1;
    for (const auto& q : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
    ZVector z;
    z.reserve(v.size());
    mpz_class g = 0;
    for (const auto& q : v) {
        mpz_class e = q.get_num() * (l / q.get_den());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), e.get_mpz_t());
        z.push_back(e);
    }
    if (g == 0) return z;
    int sign = 0;
    for (const auto& e : z)
        if (sgn(e) != 0) { sign = sgn(e); break; }
    for (auto& e : z) {
        e /= g;
        if (sign < 0) e = -e;
    }
    return z;
}

int rank_mod_p(const ZMatrix& m, int cols, std::uint64_t p) {
    std::vector<std::vector<std::uint64_t>> w;
    w.reserve(m.size());
    for (const auto& row : m) {
        std::vector<std::uint64_t> r(cols);
        for (int j = 0; j < cols; ++j) {
            mpz_class t;
            mpz_fdiv_r_ui(t.get_mpz_t(), row[j].get_mpz_t(), p);
            r[j] = t.get_ui();
        }
        w.push_back(std::move(r));
    }
    auto powmod = [p](std::uint64_t a, std::uint64_t e) {
        std::uint64_t r = 1;
        a %= p;
        while (e) {
            if (e & 1) r = static_cast<std::uint64_t>((unsigned __int128)r * a % p);
            a = static_cast<std::uint64_t>((unsigned __int128)a * a % p);
            e >>= 1;
        }
        return r;
    };
    int rows = static_cast<int>(w.size());
    int rk = 0;
    for (int c = 0; c < cols && rk < rows; ++c) {
        int sel = -1;
        for (int i = rk; i < rows; ++i)
            if (w[i][c]) { sel = i; break; }
        if (sel < 0) continue;
        std::swap(w[rk], w[sel]);
        std::uint64_t inv = powmod(w[rk][c], p - 2);
        for (int i = rk + 1; i < rows; ++i) {
            if (!w[i][c]) continue;
            std::uint64_t f = static_cast<std::uint64_t>((unsigned __int128)w[i][c] * inv % p);
            for (int j = c; j < cols; ++j) {
                std::uint64_t sub = static_cast<std::uint64_t>((unsigned __int128)f * w[rk][j] % p);
                w[i][j] = (w[i][j] + p - sub) % p;
            }
        }
        ++rk;
    }
    return rk;
}

namespace {

// col_a <- x col_a + y col_b ; col_b <- u col_a + v col_b  (determinant 1)
void column_combine(ZMatrix& m, int a, int b, const mpz_class& x, const mpz_class& y,
                    const mpz_class& u, const mpz_class& v) {
    for (auto& row : m) {
        mpz_class na = x * row[a] + y * row[b];
        mpz_class nb = u * row[a] + v * row[b];
        row[a] = std::move(na);
        row[b] = std::move(nb);
    }
}

}  // namespace

ZMatrix column_hermite(const ZMatrix& m, int cols, ZMatrix& h_out, int& rank_out) {
    ZMatrix w = m;
    ZMatrix u(cols, ZVector(cols, mpz_class(0)));
    for (int i = 0; i < cols; ++i) u[i][i] = 1;
    int k = 0;
    for (size_t r = 0; r < w.size() && k < cols; ++r) {
        for (int c = k + 1; c < cols; ++c) {
            if (sgn(w[r][c]) == 0) continue;
            mpz_class a = w[r][k], b = w[r][c], g, x, y;
            mpz_gcdext(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
            mpz_class uu = -b / g, vv = a / g;
            column_combine(w, k, c, x, y, uu, vv);
            column_combine(u, k, c, x, y, uu, vv);
        }
        if (sgn(w[r][k]) == 0) continue;
        if (sgn(w[r][k]) < 0) {
            for (auto& row : w) row[k] = -row[k];
            for (auto& row : u) row[k] = -row[k];
        }
        // reduce earlier columns against this pivot to keep entries small
        for (int c = 0; c < k; ++c) {
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), w[r][c].get_mpz_t(), w[r][k].get_mpz_t());
            if (q == 0) continue;
            for (auto& row : w) row[c] -= q * row[k];
            for (auto& row : u) row[c] -= q * row[k];
        }
        ++k;
    }
    h_out = w;
    rank_out = k;
    return u;
}

mpz_class dot(const ZVector& a, const ZVector& b) {
    mpz_class s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<ZVector> lll_reduce(std::vector<ZVector> b) {
    const size_t n = b.size();
    if (n < 2) return b;
    std::vector<QVector> bs(n);
    std::vector<QVector> mu(n, QVector(n, mpq_class(0)));
    std::vector<mpq_class> norm(n);
    auto qdot = [](const QVector& x, const QVector& y) {
        mpq_class s = 0;
        for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
        return s;
    };
    auto gram_schmidt = [&]() {
        for (size_t i = 0; i < n; ++i) {
            bs[i].assign(b[i].begin(), b[i].end());
            for (size_t j = 0; j < i; ++j) {
                QVector bi(b[i].begin(), b[i].end());
                mu[i][j] = qdot(bi, bs[j]) / norm[j];
                for (size_t k = 0; k < bs[i].size(); ++k) bs[i][k] -= mu[i][j] * bs[j][k];
            }
            norm[i] = qdot(bs[i], bs[i]);
            if (sgn(norm[i]) == 0) throw std::invalid_argument("lll_reduce: dependent vectors");
        }
    };
    gram_schmidt();
    const mpq_class delta(3, 4);
    size_t k = 1;
    while (k < n) {
        for (size_t jj = k; jj-- > 0;) {
            mpq_class m = mu[k][jj];
            // nearest integer
            mpq_class shifted = m + mpq_class(1, 2);
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
            if (q != 0) {
                for (size_t c = 0; c < b[k].size(); ++c) b[k][c] -= q * b[jj][c];
                gram_schmidt();
            }
        }
        if (norm[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norm[k - 1]) {
            ++k;
        } else {
            std::swap(b[k], b[k - 1]);
            gram_schmidt();
            k = k > 1 ? k - 1 : 1;
        }
    }
    return b;
}

std::vector<ZVector> lattice_hnf(const std::vector<ZVector>& gens, int dim) {
    ZMatrix w = gens;
    std::vector<ZVector> out;
    size_t r = 0;
    for (int c = 0; c < dim && r < w.size(); ++c) {
        for (size_t i = r + 1; i < w.size(); ++i) {
            if (sgn(w[i][c]) == 0) continue;
            mpz_class a = w[r][c], b = w[i][c], g, x, y;
            mpz_gcdext(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
            mpz_class uu = -b / g, vv = a / g;
            for (int j = 0; j < dim; ++j) {
                mpz_class nr = x * w[r][j] + y * w[i][j];
                mpz_class ni = uu * w[r][j] + vv * w[i][j];
                w[r][j] = std::move(nr);
                w[i][j] = std::move(ni);
            }
        }
        if (sgn(w[r][c]) == 0) continue;
        if (sgn(w[r][c]) < 0)
            for (auto& e : w[r]) e = -e;
        for (size_t i = 0; i < r; ++i) {
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), w[i][c].get_mpz_t(), w[r][c].get_mpz_t());
            if (q == 0) continue;
            for (int j = 0; j < dim; ++j) w[i][j] -= q * w[r][j];
        }
        ++r;
    }
    for (size_t i = 0; i < r; ++i) out.push_back(w[i]);
    return out;
}

}  // namespace primeforms
