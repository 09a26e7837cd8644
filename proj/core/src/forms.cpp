#include "primeforms/forms.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "primeforms/errors.hpp"

namespace primeforms {

std::int64_t AffineForm::operator()(const std::vector<std::int64_t>& n) const {
    std::int64_t v = constant;
    for (size_t j = 0; j < coeffs.size(); ++j) v += coeffs[j] * n[j];
    return v;
}

bool AffineForm::is_constant() const {
    return std::all_of(coeffs.begin(), coeffs.end(), [](std::int64_t c) { return c == 0; });
}

void FormSystem::validate() const {
    if (d < 0) throw validation_error("form system: negative dimension");
    for (size_t i = 0; i < forms.size(); ++i) {
        if (static_cast<int>(forms[i].coeffs.size()) != d)
            throw validation_error("form " + std::to_string(i) + ": expected " + std::to_string(d) +
                                   " coefficients");
        if (forms[i].is_constant())
            throw validation_error("form " + std::to_string(i) + " is constant");
    }
}

bool FormSystem::pairwise_independent() const {
    for (int i = 0; i < t(); ++i)
        for (int j = i + 1; j < t(); ++j) {
            QMatrix m;
            for (int k : {i, j}) {
                QVector row;
                for (auto c : forms[k].coeffs) row.emplace_back(static_cast<long>(c));
                row.emplace_back(static_cast<long>(forms[k].constant));
                m.push_back(std::move(row));
            }
            if (rank(m, d + 1) < 2) return false;
        }
    return true;
}

QMatrix FormSystem::linear_part() const {
    QMatrix m;
    for (const auto& f : forms) {
        QVector row;
        for (auto c : f.coeffs) row.emplace_back(static_cast<long>(c));
        m.push_back(std::move(row));
    }
    return m;
}

FormSystem ap_system(int k) {
    if (k < 1) throw validation_error("ap_system: k must be positive");
    FormSystem s;
    s.d = 2;
    for (int j = 0; j < k; ++j) s.forms.push_back({{1, j}, 0});
    return s;
}

FormSystem identity_system(int d) {
    FormSystem s;
    s.d = d;
    for (int i = 0; i < d; ++i) {
        AffineForm f;
        f.coeffs.assign(d, 0);
        f.coeffs[i] = 1;
        s.forms.push_back(f);
    }
    return s;
}

FormSystem shift_system(std::int64_t h) {
    FormSystem s;
    s.d = 1;
    s.forms.push_back({{1}, 0});
    s.forms.push_back({{1}, h});
    return s;
}

FormSystem balog_system(int d) {
    FormSystem s;
    s.d = d;
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            AffineForm f;
            f.coeffs.assign(d, 0);
            f.coeffs[i] += 1;
            f.coeffs[j] += 1;
            f.constant = 1;
            s.forms.push_back(f);
        }
    return s;
}

FormSystem cube_system(int d) {
    if (d < 1 || d > 21) throw validation_error("cube_system: d out of range");
    FormSystem s;
    s.d = d;
    for (std::uint32_t mask = 0; mask < (1u << (d - 1)); ++mask) {
        AffineForm f;
        f.coeffs.assign(d, 0);
        f.coeffs[0] = 1;
        for (int j = 1; j < d; ++j)
            if (mask & (1u << (j - 1))) f.coeffs[j] = 1;
        s.forms.push_back(f);
    }
    return s;
}

mpq_class size_at_scale(const FormSystem& sys, std::int64_t N) {
    if (N < 1) throw validation_error("size_at_scale: N must be positive");
    mpq_class total = 0;
    for (const auto& f : sys.forms) {
        for (auto c : f.coeffs) total += mpz_class(static_cast<long>(std::llabs(c)));
        total += mpq_class(mpz_class(static_cast<long>(std::llabs(f.constant))),
                           mpz_class(static_cast<long>(N)));
    }
    total.canonicalize();
    return total;
}

namespace {

QVector homogeneous(const AffineForm& f) {
    QVector v;
    for (auto c : f.coeffs) v.emplace_back(static_cast<long>(c));
    return v;
}

// The constant term always lies in the span (c0 * 1), so membership reduces to the
// homogeneous parts.
bool member_by_rank(const QVector& cand, const QMatrix& rows, int d) {
    if (rows.empty()) return std::all_of(cand.begin(), cand.end(), [](const mpq_class& q) { return sgn(q) == 0; });
    QMatrix with = rows;
    with.push_back(cand);
    return rank(with, d) == rank(rows, d);
}

}  // namespace

bool affine_span_member(const AffineForm& candidate, const std::vector<AffineForm>& cls) {
    if (cls.empty()) return candidate.is_constant();
    int d = static_cast<int>(candidate.coeffs.size());
    QMatrix rows;
    for (const auto& f : cls) {
        if (static_cast<int>(f.coeffs.size()) != d)
            throw validation_error("affine_span_member: dimension mismatch");
        rows.push_back(homogeneous(f));
    }
    return member_by_rank(homogeneous(candidate), rows, d);
}

IndexComplexity i_complexity(const FormSystem& sys, int i) {
    const int t = sys.t();
    if (i < 0 || i >= t) throw validation_error("i_complexity: index out of range");
    if (t > 20) throw resource_error("i_complexity: more than 20 forms");
    std::vector<int> others;
    for (int j = 0; j < t; ++j)
        if (j != i) others.push_back(j);
    const int m = static_cast<int>(others.size());
    const std::uint32_t full = (1u << m) - 1;
    IndexComplexity out;
    if (m == 0) {
        out.value = 0;
        return out;
    }
    QVector target = homogeneous(sys.forms[i]);
    // admissible masks: the class span avoids psi_i.  Downward closed, so a mask is
    // tested only when all its one-smaller subsets passed.
    std::vector<char> ok(full + 1, 0);
    ok[0] = 1;
    std::vector<std::uint32_t> order(full + 1);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [](std::uint32_t a, std::uint32_t b) {
        return __builtin_popcount(a) < __builtin_popcount(b);
    });
    for (std::uint32_t mask : order) {
        if (mask == 0) continue;
        bool subs = true;
        for (int b = 0; b < m && subs; ++b)
            if ((mask >> b) & 1u) subs = ok[mask & ~(1u << b)];
        if (!subs) continue;
        QMatrix rows;
        for (int b = 0; b < m; ++b)
            if ((mask >> b) & 1u) rows.push_back(homogeneous(sys.forms[others[b]]));
        ok[mask] = !member_by_rank(target, rows, sys.d);
    }
    for (int b = 0; b < m; ++b)
        if (!ok[1u << b]) return out;  // psi_i is in the span of a single other form

    constexpr int inf = std::numeric_limits<int>::max() / 2;
    std::vector<int> best(full + 1, inf);
    std::vector<std::uint32_t> choice(full + 1, 0);
    best[0] = 0;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        std::uint32_t low = mask & (~mask + 1);
        std::uint32_t rest = mask ^ low;
        // enumerate sub = low | r for r subset of rest
        for (std::uint32_t r = rest;; r = (r - 1) & rest) {
            std::uint32_t sub = low | r;
            if (ok[sub] && best[mask ^ sub] + 1 < best[mask]) {
                best[mask] = best[mask ^ sub] + 1;
                choice[mask] = sub;
            }
            if (r == 0) break;
        }
    }
    out.value = std::max(best[full] - 1, 0);
    for (std::uint32_t mask = full; mask; mask ^= choice[mask]) {
        std::vector<int> cls;
        for (int b = 0; b < m; ++b)
            if ((choice[mask] >> b) & 1u) cls.push_back(others[b]);
        out.classes.push_back(cls);
    }
    return out;
}

ComplexityResult complexity(const FormSystem& sys) {
    ComplexityResult r;
    r.overall = 0;
    for (int i = 0; i < sys.t(); ++i) {
        r.per_index.push_back(i_complexity(sys, i));
        const auto& v = r.per_index.back().value;
        if (!v || !r.overall)
            r.overall.reset();
        else
            r.overall = std::max(*r.overall, *v);
    }
    return r;
}

NormalFormCheck is_normal_form(const FormSystem& sys, int s) {
    NormalFormCheck out;
    const int d = sys.d, t = sys.t();
    const int max_size = std::min(s + 1, d);
    for (int i = 0; i < t; ++i) {
        bool found = false;
        std::vector<int> pick;
        for (int size = 1; size <= max_size && !found; ++size) {
            std::vector<int> idx(size);
            std::iota(idx.begin(), idx.end(), 0);
            while (true) {
                bool good = true;
                for (int k = 0; k < t && good; ++k) {
                    bool nonzero = true;
                    for (int e : idx)
                        if (sys.forms[k].coeffs[e] == 0) { nonzero = false; break; }
                    good = (k == i) ? nonzero : !nonzero;
                }
                if (good) {
                    found = true;
                    pick = idx;
                    break;
                }
                int pos = size - 1;
                while (pos >= 0 && idx[pos] == d - size + pos) --pos;
                if (pos < 0) break;
                ++idx[pos];
                for (int q = pos + 1; q < size; ++q) idx[q] = idx[q - 1] + 1;
            }
        }
        if (!found) {
            out.witness_sets.clear();
            return out;
        }
        out.witness_sets.push_back(pick);
    }
    out.holds = true;
    return out;
}

namespace {

std::vector<ZVector> column_generators(const FormSystem& sys) {
    std::vector<ZVector> cols;
    for (int j = 0; j < sys.d; ++j) {
        ZVector c;
        for (const auto& f : sys.forms) c.emplace_back(static_cast<long>(f.coeffs[j]));
        cols.push_back(c);
    }
    return cols;
}

bool lex_less(const ZVector& a, const ZVector& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

bool same_image_lattice(const FormSystem& a, const FormSystem& b) {
    if (a.t() != b.t()) return false;
    for (int i = 0; i < a.t(); ++i)
        if (a.forms[i].constant != b.forms[i].constant) return false;
    return lattice_hnf(column_generators(a), a.t()) == lattice_hnf(column_generators(b), b.t());
}

NormalFormExtension normal_form_extension(const FormSystem& sys, int s) {
    sys.validate();
    auto cx = complexity(sys);
    if (!cx.overall) throw validation_error("no normal form exists (infinite complexity)");
    if (*cx.overall > s)
        throw validation_error("normal_form_extension: s is below the system's complexity");
    NormalFormExtension out;
    if (is_normal_form(sys, s).holds) {
        out.system = sys;
        out.unchanged = true;
        return out;
    }
    for (int i = 0; i < sys.t(); ++i) {
        ZVector target;
        for (auto c : sys.forms[i].coeffs) target.emplace_back(static_cast<long>(c));
        for (const auto& cls : cx.per_index[i].classes) {
            QMatrix rows;
            for (int j : cls) rows.push_back(homogeneous(sys.forms[j]));
            auto basis = rows.empty() ? std::vector<QVector>{} : nullspace(rows, sys.d);
            if (rows.empty())
                for (int j = 0; j < sys.d; ++j) {
                    QVector e(sys.d, mpq_class(0));
                    e[j] = 1;
                    basis.push_back(e);
                }
            std::optional<ZVector> best;
            mpz_class best_norm;
            for (const auto& q : basis) {
                ZVector v = primitive_integer(q);
                if (dot(v, target) == 0) continue;
                mpz_class n2 = dot(v, v);
                if (!best || n2 < best_norm || (n2 == best_norm && lex_less(v, *best))) {
                    best = v;
                    best_norm = n2;
                }
            }
            if (!best) throw std::logic_error("normal_form_extension: no witness vector");
            out.witnesses.push_back(*best);
            out.witness_owner.push_back(i);
        }
    }
    FormSystem ext;
    ext.d = sys.d + static_cast<int>(out.witnesses.size());
    for (const auto& f : sys.forms) {
        AffineForm g = f;
        ZVector fv;
        for (auto c : f.coeffs) fv.emplace_back(static_cast<long>(c));
        for (const auto& w : out.witnesses) {
            mpz_class v = dot(fv, w);
            if (!v.fits_slong_p()) throw resource_error("normal_form_extension: coefficient overflow");
            g.coeffs.push_back(v.get_si());
        }
        ext.forms.push_back(g);
    }
    if (!is_normal_form(ext, s).holds)
        throw std::logic_error("normal_form_extension: result is not in normal form");
    if (!same_image_lattice(ext, sys))
        throw std::logic_error("normal_form_extension: image lattice changed");
    out.system = ext;
    return out;
}

MatrixParameterization parameterize_matrix_system(const std::vector<std::vector<std::int64_t>>& A,
                                                  const std::vector<std::int64_t>& b,
                                                  std::int64_t N, int columns) {
    (void)N;
    const int s = static_cast<int>(A.size());
    if (static_cast<int>(b.size()) != s) throw validation_error("parameterize: b has wrong length");
    int t = s ? static_cast<int>(A[0].size()) : columns;
    for (const auto& row : A)
        if (static_cast<int>(row.size()) != t) throw validation_error("parameterize: ragged matrix");
    MatrixParameterization out;
    if (s == 0) {
        if (t == 0) throw validation_error("parameterize: empty system without dimension");
        out.system = identity_system(t);
        out.base.assign(t, 0);
        for (int i = 0; i < t; ++i) {
            ZVector e(t, 0);
            e[i] = 1;
            out.generators.push_back(e);
        }
        return out;
    }
    ZMatrix Az = to_integer(A);
    QMatrix Aq = to_rational(Az);
    if (rank(Aq, t) < s) throw validation_error("not full rank");
    // row space must contain no nonzero vector supported on <= 2 coordinates
    for (int a = 0; a < t; ++a)
        for (int c = a; c < t; ++c) {
            QMatrix rest;
            for (const auto& row : Aq) {
                QVector r;
                for (int j = 0; j < t; ++j)
                    if (j != a && j != c) r.push_back(row[j]);
                rest.push_back(r);
            }
            int cols = t - (a == c ? 1 : 2);
            if (cols < s || rank(rest, cols) < s) throw validation_error("degenerate (binary) system");
        }
    ZMatrix H;
    int rk = 0;
    ZMatrix U = column_hermite(Az, t, H, rk);
    ZVector y(s);
    for (int r = 0; r < s; ++r) {
        mpz_class acc = static_cast<long>(b[r]);
        for (int c = 0; c < r; ++c) acc -= H[r][c] * y[c];
        if (!mpz_divisible_p(acc.get_mpz_t(), H[r][r].get_mpz_t())) throw validation_error("inconsistent system");
        y[r] = acc / H[r][r];
    }
    ZVector x0(t, 0);
    for (int i = 0; i < t; ++i)
        for (int r = 0; r < s; ++r) x0[i] += U[i][r] * y[r];
    std::vector<ZVector> kernel;
    for (int c = s; c < t; ++c) {
        ZVector v(t);
        for (int i = 0; i < t; ++i) v[i] = U[i][c];
        kernel.push_back(v);
    }
    kernel = lll_reduce(kernel);
    // Babai rounding of the base point against the kernel lattice
    if (!kernel.empty()) {
        const int k = static_cast<int>(kernel.size());
        QMatrix gram(k, QVector(k));
        QVector rhs(k);
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) gram[i][j] = dot(kernel[i], kernel[j]);
            rhs[i] = dot(kernel[i], x0);
        }
        auto coef = solve(gram, rhs, k);
        for (int i = 0; i < k; ++i) {
            mpq_class shifted = (*coef)[i] + mpq_class(1, 2);
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
            for (int j = 0; j < t; ++j) x0[j] -= q * kernel[i][j];
        }
    }
    FormSystem sys;
    sys.d = t - s;
    for (int i = 0; i < t; ++i) {
        AffineForm f;
        for (const auto& v : kernel) {
            if (!v[i].fits_slong_p()) throw resource_error("parameterize: coefficient overflow");
            f.coeffs.push_back(v[i].get_si());
        }
        if (!x0[i].fits_slong_p()) throw resource_error("parameterize: base point overflow");
        f.constant = x0[i].get_si();
        sys.forms.push_back(f);
    }
    // postconditions: A Psi(n) = b identically, Psi injective
    for (int r = 0; r < s; ++r) {
        if (dot(Az[r], x0) != static_cast<long>(b[r])) throw std::logic_error("parameterize: base point fails");
        for (const auto& v : kernel)
            if (dot(Az[r], v) != 0) throw std::logic_error("parameterize: generator not in kernel");
    }
    if (rank(to_rational([&] {
             ZMatrix m;
             for (const auto& v : kernel) m.push_back(v);
             return m;
         }()), t) != t - s)
        throw std::logic_error("parameterize: map not injective");
    sys.validate();
    out.system = sys;
    out.base = x0;
    out.generators = kernel;
    return out;
}

std::string describe(const AffineForm& f) {
    std::ostringstream os;
    bool first = true;
    for (size_t j = 0; j < f.coeffs.size(); ++j) {
        auto c = f.coeffs[j];
        if (c == 0) continue;
        if (!first) os << (c > 0 ? "+" : "-");
        else if (c < 0) os << "-";
        auto a = std::llabs(c);
        if (a != 1) os << a << "*";
        os << "n" << (j + 1);
        first = false;
    }
    if (f.constant != 0 || first) {
        if (!first) os << (f.constant >= 0 ? "+" : "-") << std::llabs(f.constant);
        else os << f.constant;
    }
    return os.str();
}

}  // namespace primeforms
