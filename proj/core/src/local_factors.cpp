#include "primeforms/local_factors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "primeforms/arith.hpp"
#include "primeforms/errors.hpp"

namespace primeforms {

mpq_class local_von_mangoldt(std::uint64_t q, std::int64_t b) {
    if (q == 0) throw validation_error("local_von_mangoldt: q must be positive");
    std::uint64_t r = static_cast<std::uint64_t>(((b % static_cast<std::int64_t>(q)) + static_cast<std::int64_t>(q)) %
                                                 static_cast<std::int64_t>(q));
    if (std::gcd(r, q) != 1 && q != 1) return 0;
    std::uint64_t phi = q, m = q;
    for (std::uint64_t p = 2; p * p <= m; ++p) {
        if (m % p) continue;
        phi = phi / p * (p - 1);
        while (m % p == 0) m /= p;
    }
    if (m > 1) phi = phi / m * (m - 1);
    mpq_class v(mpz_class(static_cast<unsigned long>(q)), mpz_class(static_cast<unsigned long>(phi)));
    v.canonicalize();
    return v;
}

namespace {

std::uint64_t mod_p(std::int64_t v, std::uint64_t p) {
    std::int64_t r = v % static_cast<std::int64_t>(p);
    return static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(p) : r);
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t p) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % p);
}

std::uint64_t invmod(std::uint64_t a, std::uint64_t p) {
    std::uint64_t r = 1, e = p - 2;
    while (e) {
        if (e & 1) r = mulmod(r, a, p);
        a = mulmod(a, a, p);
        e >>= 1;
    }
    return r;
}

// Rank of the coefficient rows of S and whether psi_i = 0 (i in S) is solvable mod p.
std::pair<int, bool> subset_rank(const FormSystem& sys, std::uint32_t mask, std::uint64_t p) {
    const int d = sys.d;
    std::vector<std::vector<std::uint64_t>> rows;
    for (int i = 0; i < sys.t(); ++i) {
        if (!((mask >> i) & 1u)) continue;
        std::vector<std::uint64_t> r(d + 1);
        for (int j = 0; j < d; ++j) r[j] = mod_p(sys.forms[i].coeffs[j], p);
        r[d] = mod_p(-sys.forms[i].constant, p);
        rows.push_back(std::move(r));
    }
    int rk = 0;
    const int n = static_cast<int>(rows.size());
    for (int c = 0; c < d && rk < n; ++c) {
        int sel = -1;
        for (int i = rk; i < n; ++i)
            if (rows[i][c]) { sel = i; break; }
        if (sel < 0) continue;
        std::swap(rows[rk], rows[sel]);
        std::uint64_t inv = invmod(rows[rk][c], p);
        for (int i = rk + 1; i < n; ++i) {
            if (!rows[i][c]) continue;
            std::uint64_t f = mulmod(rows[i][c], inv, p);
            for (int j = c; j <= d; ++j) rows[i][j] = (rows[i][j] + p - mulmod(f, rows[rk][j], p)) % p;
        }
        ++rk;
    }
    for (int i = rk; i < n; ++i)
        if (rows[i][d]) return {rk, false};
    return {rk, true};
}

mpq_class beta_from_count(const mpz_class& count, std::uint64_t q, std::uint64_t phi, int t, int d) {
    mpz_class num, den, qq = static_cast<unsigned long>(q), ph = static_cast<unsigned long>(phi);
    mpz_pow_ui(num.get_mpz_t(), qq.get_mpz_t(), t);
    num *= count;
    mpz_class qd, pt;
    mpz_pow_ui(qd.get_mpz_t(), qq.get_mpz_t(), d);
    mpz_pow_ui(pt.get_mpz_t(), ph.get_mpz_t(), t);
    den = qd * pt;
    mpq_class r(num, den);
    r.canonicalize();
    return r;
}

}  // namespace

mpq_class local_factor(const FormSystem& sys, std::uint64_t p) {
    const int t = sys.t();
    if (t > 20) throw resource_error("local_factor: more than 20 forms");
    if (p < 2 || p >= (1ull << 32)) throw validation_error("local_factor: p out of range");
    mpz_class total = 0, pp = static_cast<unsigned long>(p);
    for (std::uint32_t mask = 0; mask < (1u << t); ++mask) {
        auto [rk, ok] = subset_rank(sys, mask, p);
        if (!ok) continue;
        mpz_class term;
        mpz_pow_ui(term.get_mpz_t(), pp.get_mpz_t(), sys.d - rk);
        if (__builtin_popcount(mask) & 1) total -= term;
        else total += term;
    }
    return beta_from_count(total, p, p - 1, t, sys.d);
}

mpq_class local_factor_direct(const FormSystem& sys, std::uint64_t q) {
    const int d = sys.d;
    double cells = std::pow(static_cast<double>(q), d);
    if (cells > 1e6) throw resource_error("local_factor_direct: q^d above 1e6");
    std::vector<std::int64_t> n(d, 0);
    mpq_class sum = 0;
    std::uint64_t total = static_cast<std::uint64_t>(cells + 0.5);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        std::uint64_t r = idx;
        for (int j = 0; j < d; ++j) {
            n[j] = static_cast<std::int64_t>(r % q);
            r /= q;
        }
        mpq_class prod = 1;
        for (const auto& f : sys.forms) {
            prod *= local_von_mangoldt(q, f(n));
            if (sgn(prod) == 0) break;
        }
        sum += prod;
    }
    mpq_class r = sum / mpq_class(mpz_class(static_cast<unsigned long>(total)));
    r.canonicalize();
    return r;
}

mpq_class local_factor_q(const FormSystem& sys, std::uint64_t q) {
    if (q == 0) throw validation_error("local_factor_q: q must be positive");
    mpq_class r = 1;
    std::uint64_t m = q;
    for (std::uint64_t p = 2; p * p <= m; ++p) {
        if (m % p) continue;
        r *= local_factor(sys, p);
        while (m % p == 0) m /= p;
    }
    if (m > 1) r *= local_factor(sys, m);
    return r;
}

mpq_class ap_k_local_factor(int k, std::uint64_t p) {
    if (k < 1) throw validation_error("ap_k_local_factor: k must be positive");
    mpq_class ratio(mpz_class(static_cast<unsigned long>(p)), mpz_class(static_cast<unsigned long>(p - 1)));
    mpq_class pw = 1;
    for (int i = 0; i < k - 1; ++i) pw *= ratio;
    mpq_class pq(mpz_class(static_cast<unsigned long>(p)));
    if (p <= static_cast<std::uint64_t>(k)) return pw / pq;
    mpq_class r = (1 - mpq_class(k - 1) / pq) * pw;
    r.canonicalize();
    return r;
}

SingularSeries singular_series(const FormSystem& sys, std::uint64_t p_max, bool keep_profile, unsigned threads) {
    sys.validate();
    if (p_max < 2) throw validation_error("singular_series: P_max must be at least 2");
    SingularSeries out;
    out.p_max = p_max;
    out.pairwise_independent = sys.pairwise_independent();
    auto primes = primes_up_to(p_max);
    std::vector<mpq_class> beta(primes.size());
    threads = std::max(1u, threads);
    auto work = [&](unsigned w) {
        for (size_t k = w; k < primes.size(); k += threads) beta[k] = local_factor(sys, primes[k]);
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    long double prod = 1;
    double env = 0;
    for (size_t k = 0; k < primes.size(); ++k) {
        if (sgn(beta[k]) == 0) out.vanishing = true;
        prod *= static_cast<long double>(beta[k].get_d());
        if (primes[k] * 10ull > p_max) {
            mpq_class dev = abs(beta[k] - 1);
            double pk = primes[k];
            env = std::max(env, pk * pk * dev.get_d());
        }
    }
    out.truncated_product = static_cast<double>(prod);
    out.envelope_constant = env;
    double P = static_cast<double>(p_max);
    out.tail_log_bound = env / (P * std::log(P));  // sum_{p > P} p^-2 ~ 1/(P log P)
    if (keep_profile) {
        out.profile.primes = primes;
        out.profile.beta = std::move(beta);
    }
    return out;
}

mpq_class alpha_p(const std::vector<std::vector<std::int64_t>>& A, const std::vector<std::int64_t>& b,
                  std::uint64_t p) {
    if (A.empty()) {
        // no constraints: each coordinate averages Lambda_{Z_p} to 1
        return 1;
    }
    auto param = parameterize_matrix_system(A, b, 0);
    return local_factor(param.system, p);
}

double alpha_p_truncated(const std::vector<std::vector<std::int64_t>>& A, const std::vector<std::int64_t>& b,
                         std::uint64_t p, std::int64_t M) {
    if (A.empty()) return 1.0;
    const int t = static_cast<int>(A[0].size());
    double cells = std::pow(2.0 * M + 1, t);
    if (cells > 5e7) throw resource_error("alpha_p_truncated: box too large");
    std::vector<std::int64_t> x(t, -M);
    double lam = static_cast<double>(p) / static_cast<double>(p - 1);
    double sum = 0;
    std::uint64_t hits = 0;
    while (true) {
        bool ok = true;
        for (size_t r = 0; r < A.size() && ok; ++r) {
            std::int64_t s = 0;
            for (int j = 0; j < t; ++j) s += A[r][j] * x[j];
            ok = (s == b[r]);
        }
        if (ok) {
            ++hits;
            double prod = 1;
            for (int j = 0; j < t; ++j) prod *= (mod_p(x[j], p) != 0) ? lam : 0.0;
            sum += prod;
        }
        int j = 0;
        while (j < t && x[j] == M) x[j++] = -M;
        if (j == t) break;
        ++x[j];
    }
    return hits ? sum / static_cast<double>(hits) : 0.0;
}

ExceptionalPrimeSet exceptional_primes(const FormSystem& sys, std::uint64_t p_limit) {
    ExceptionalPrimeSet out;
    std::vector<std::uint64_t> found;
    const int d = sys.d;
    for (int i = 0; i < sys.t(); ++i)
        for (int j = i + 1; j < sys.t(); ++j) {
            std::vector<mpz_class> u, v;
            for (int k = 0; k < d; ++k) {
                u.emplace_back(static_cast<long>(sys.forms[i].coeffs[k]));
                v.emplace_back(static_cast<long>(sys.forms[j].coeffs[k]));
            }
            u.emplace_back(static_cast<long>(sys.forms[i].constant));
            v.emplace_back(static_cast<long>(sys.forms[j].constant));
            mpz_class g = 0;
            for (int a = 0; a <= d; ++a)
                for (int c = a + 1; c <= d; ++c) {
                    mpz_class m = u[a] * v[c] - u[c] * v[a];
                    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), m.get_mpz_t());
                }
            if (g == 0) throw validation_error("exceptional_primes: forms " + std::to_string(i) + " and " +
                                               std::to_string(j) + " are parallel");
            mpz_class m = g;
            for (unsigned long p = 2; mpz_class(p) * p <= m; ++p) {
                if (!mpz_divisible_ui_p(m.get_mpz_t(), p)) continue;
                found.push_back(p);
                while (mpz_divisible_ui_p(m.get_mpz_t(), p)) m /= p;
            }
            if (m > 1) {
                if (!m.fits_ulong_p()) throw resource_error("exceptional_primes: minor too large");
                found.push_back(m.get_ui());
            }
        }
    std::sort(found.begin(), found.end());
    found.erase(std::unique(found.begin(), found.end()), found.end());
    for (auto p : found)
        if (p <= p_limit) {
            out.primes.push_back(p);
            out.X += 1.0 / std::sqrt(static_cast<double>(p));
        }
    return out;
}

std::string local_profile_csv(const LocalProfile& profile) {
    std::ostringstream os;
    os << "p,num,den,value\r\n";
    os.precision(17);
    for (size_t k = 0; k < profile.primes.size(); ++k)
        os << profile.primes[k] << ',' << profile.beta[k].get_num().get_str() << ','
           << profile.beta[k].get_den().get_str() << ',' << profile.beta[k].get_d() << "\r\n";
    return os.str();
}

}  // namespace primeforms
