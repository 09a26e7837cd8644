#include "primeforms/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "primeforms/errors.hpp"

namespace primeforms {

namespace {

struct ZCon {
    ZVector a;
    mpz_class c;
};

using i128 = __int128;

i128 floor_div(i128 a, i128 b) {
    i128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

i128 ceil_div(i128 a, i128 b) { return -floor_div(-a, b); }

ZCon scale_halfspace(const Halfspace& h) {
    mpz_class l = h.c.get_den();
    for (const auto& q : h.a) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
    ZCon z;
    for (const auto& q : h.a) z.a.push_back(q.get_num() * (l / q.get_den()));
    z.c = h.c.get_num() * (l / h.c.get_den());
    return z;
}

// Returns false if the constraint is infeasible (0 <= negative); drops trivial ones via `trivial`.
bool normalize(ZCon& z, bool integer_tighten, bool& trivial) {
    mpz_class g = 0;
    for (const auto& v : z.a) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
    trivial = false;
    if (g == 0) {
        trivial = true;
        return sgn(z.c) >= 0;
    }
    if (integer_tighten) {
        for (auto& v : z.a) v /= g;
        mpz_fdiv_q(z.c.get_mpz_t(), z.c.get_mpz_t(), g.get_mpz_t());
    } else {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), z.c.get_mpz_t());
        if (g > 1) {
            for (auto& v : z.a) v /= g;
            z.c /= g;
        }
    }
    return true;
}

// Fourier-Motzkin elimination of `var`.  Sets infeasible when a contradiction appears.
std::vector<ZCon> eliminate(const std::vector<ZCon>& cons, int var, bool integer_tighten, bool& infeasible) {
    std::vector<const ZCon*> pos, neg;
    std::map<ZVector, mpz_class> out;
    auto add = [&](ZCon z) {
        bool trivial;
        if (!normalize(z, integer_tighten, trivial)) infeasible = true;
        if (trivial) return;
        auto it = out.find(z.a);
        if (it == out.end())
            out.emplace(std::move(z.a), std::move(z.c));
        else if (z.c < it->second)
            it->second = z.c;
    };
    for (const auto& z : cons) {
        int s = sgn(z.a[var]);
        if (s > 0) pos.push_back(&z);
        else if (s < 0) neg.push_back(&z);
        else add(z);
    }
    for (const auto* p : pos)
        for (const auto* n : neg) {
            mpz_class fp = -n->a[var], fn = p->a[var];
            ZCon z;
            z.a.resize(p->a.size());
            for (size_t j = 0; j < p->a.size(); ++j) z.a[j] = fp * p->a[j] + fn * n->a[j];
            z.a[var] = 0;
            z.c = fp * p->c + fn * n->c;
            add(std::move(z));
        }
    std::vector<ZCon> res;
    for (auto& [a, c] : out) res.push_back({a, c});
    return res;
}

std::int64_t to_i64(const mpz_class& v) {
    if (!v.fits_slong_p()) throw resource_error("lattice enumeration: constraint coefficient overflow");
    return v.get_si();
}

std::vector<ZCon> body_constraints(const ConvexBody& body, bool integer_tighten, bool& infeasible) {
    std::map<ZVector, mpz_class> uniq;
    for (const auto& h : body.halfspaces) {
        if (static_cast<int>(h.a.size()) != body.dim) throw validation_error("halfspace dimension mismatch");
        ZCon z = scale_halfspace(h);
        bool trivial;
        if (!normalize(z, integer_tighten, trivial)) infeasible = true;
        if (trivial) continue;
        auto it = uniq.find(z.a);
        if (it == uniq.end()) uniq.emplace(z.a, z.c);
        else if (z.c < it->second) it->second = z.c;
    }
    std::vector<ZCon> res;
    for (auto& [a, c] : uniq) res.push_back({a, c});
    return res;
}

}  // namespace

bool ConvexBody::contains(const std::vector<std::int64_t>& x) const {
    if (static_cast<int>(x.size()) != dim) throw validation_error("contains: point has wrong dimension");
    for (const auto& h : halfspaces) {
        mpq_class s = 0;
        for (int j = 0; j < dim; ++j) s += h.a[j] * mpq_class(mpz_class(static_cast<long>(x[j])));
        if (s > h.c) return false;
    }
    return true;
}

ConvexBody make_body(int dim, std::vector<Halfspace> hs, std::int64_t N) {
    if (dim < 1) throw validation_error("body dimension must be positive");
    if (N < 0) throw validation_error("box bound must be nonnegative");
    for (int j = 0; j < dim; ++j) {
        for (int s : {1, -1}) {
            Halfspace h;
            h.a.assign(dim, mpq_class(0));
            h.a[j] = s;
            h.c = mpz_class(static_cast<long>(N));
            hs.push_back(h);
        }
    }
    ConvexBody b;
    b.dim = dim;
    b.halfspaces = std::move(hs);
    b.box_bound = N;
    return b;
}

ConvexBody box_body(int dim, std::int64_t lo, std::int64_t hi) {
    std::vector<Halfspace> hs;
    for (int j = 0; j < dim; ++j) {
        Halfspace up, down;
        up.a.assign(dim, mpq_class(0));
        down.a.assign(dim, mpq_class(0));
        up.a[j] = 1;
        up.c = mpz_class(static_cast<long>(hi));
        down.a[j] = -1;
        down.c = mpz_class(static_cast<long>(-lo));
        hs.push_back(up);
        hs.push_back(down);
    }
    return make_body(dim, std::move(hs), std::max(std::llabs(lo), std::llabs(hi)));
}

ConvexBody interval_body(std::int64_t lo, std::int64_t hi) { return box_body(1, lo, hi); }

ConvexBody progression_body(int k, std::int64_t N) {
    std::vector<Halfspace> hs;
    hs.push_back({{mpq_class(-1), mpq_class(0)}, mpq_class(-1)});
    hs.push_back({{mpq_class(0), mpq_class(-1)}, mpq_class(-1)});
    hs.push_back({{mpq_class(1), mpq_class(k - 1)}, mpq_class(mpz_class(static_cast<long>(N)))});
    return make_body(2, std::move(hs), N);
}

ConvexBody simplex_body(const std::vector<std::vector<std::int64_t>>& v, std::int64_t N) {
    const int d = static_cast<int>(v.size()) - 1;
    if (d < 1) throw validation_error("simplex needs at least two vertices");
    std::vector<Halfspace> hs;
    for (int k = 0; k <= d; ++k) {
        std::vector<int> others;
        for (int j = 0; j <= d; ++j)
            if (j != k) others.push_back(j);
        QMatrix diff;
        for (size_t j = 1; j < others.size(); ++j) {
            QVector row;
            for (int c = 0; c < d; ++c) row.emplace_back(static_cast<long>(v[others[j]][c] - v[others[0]][c]));
            diff.push_back(row);
        }
        QVector n;
        if (diff.empty()) {
            n = {mpq_class(1)};
        } else {
            auto ns = nullspace(diff, d);
            if (ns.size() != 1) throw validation_error("simplex vertices are affinely dependent");
            n = ns[0];
        }
        auto val = [&](const std::vector<std::int64_t>& p) {
            mpq_class s = 0;
            for (int c = 0; c < d; ++c) s += n[c] * mpq_class(mpz_class(static_cast<long>(p[c])));
            return s;
        };
        mpq_class h = val(v[others[0]]), inside = val(v[k]);
        if (inside == h) throw validation_error("simplex vertices are affinely dependent");
        Halfspace hsp;
        if (inside < h) {
            hsp.a = n;
            hsp.c = h;
        } else {
            for (auto& q : n) q = -q;
            hsp.a = n;
            hsp.c = -h;
        }
        hs.push_back(hsp);
    }
    return make_body(d, std::move(hs), N);
}

ConvexBody restrict_positive(const ConvexBody& body, const FormSystem& sys) {
    ConvexBody out = body;
    for (const auto& f : sys.forms) {
        Halfspace h;
        for (auto c : f.coeffs) h.a.emplace_back(static_cast<long>(-c));
        h.c = mpz_class(static_cast<long>(f.constant - 1));
        out.halfspaces.push_back(h);
    }
    return out;
}

std::optional<std::pair<mpq_class, mpq_class>> form_range(const ConvexBody& body, const AffineForm& form) {
    bool infeasible = false;
    auto cons = body_constraints(body, false, infeasible);
    const int d = body.dim;
    for (auto& z : cons) z.a.push_back(0);
    ZCon up, down;  // u - psi(x) <= c ; psi(x) - u <= -c
    for (int j = 0; j < d; ++j) {
        up.a.emplace_back(static_cast<long>(-form.coeffs[j]));
        down.a.emplace_back(static_cast<long>(form.coeffs[j]));
    }
    up.a.emplace_back(1);
    down.a.emplace_back(-1);
    up.c = static_cast<long>(form.constant);
    down.c = static_cast<long>(-form.constant);
    cons.push_back(up);
    cons.push_back(down);
    for (int j = 0; j < d && !infeasible; ++j) cons = eliminate(cons, j, false, infeasible);
    if (infeasible) return std::nullopt;
    std::optional<mpq_class> lo, hi;
    for (const auto& z : cons) {
        int s = sgn(z.a[d]);
        if (s == 0) continue;
        mpq_class bound(z.c, z.a[d]);
        bound.canonicalize();
        if (s > 0) { if (!hi || bound < *hi) hi = bound; }
        else { if (!lo || bound > *lo) lo = bound; }
    }
    if (!lo || !hi) throw validation_error("form_range: body is unbounded");
    if (*lo > *hi) return std::nullopt;
    return std::make_pair(*lo, *hi);
}

ConvexBody pull_back(const ConvexBody& body, const FormSystem& map) {
    if (map.t() != body.dim) throw validation_error("pull_back: map target dimension mismatch");
    std::vector<Halfspace> hs;
    for (const auto& h : body.halfspaces) {
        Halfspace g;
        g.a.assign(map.d, mpq_class(0));
        g.c = h.c;
        for (int i = 0; i < map.t(); ++i) {
            for (int j = 0; j < map.d; ++j) g.a[j] += h.a[i] * mpq_class(mpz_class(static_cast<long>(map.forms[i].coeffs[j])));
            g.c -= h.a[i] * mpq_class(mpz_class(static_cast<long>(map.forms[i].constant)));
        }
        hs.push_back(g);
    }
    ConvexBody tmp;
    tmp.dim = map.d;
    tmp.halfspaces = hs;
    mpq_class bound = 0;
    for (int j = 0; j < map.d; ++j) {
        AffineForm coord;
        coord.coeffs.assign(map.d, 0);
        coord.coeffs[j] = 1;
        auto r = form_range(tmp, coord);
        if (!r) return make_body(map.d, hs, 0);
        mpq_class a1 = abs(r->first), a2 = abs(r->second);
        if (a1 > bound) bound = a1;
        if (a2 > bound) bound = a2;
    }
    mpz_class nb;
    mpz_cdiv_q(nb.get_mpz_t(), bound.get_num_mpz_t(), bound.get_den_mpz_t());
    return make_body(map.d, hs, to_i64(nb));
}

LatticeWalker::LatticeWalker(const ConvexBody& body) : dim_(body.dim) {
    if (dim_ > 6) throw resource_error("lattice enumeration limited to dimension 6");
    if (dim_ < 1) throw validation_error("lattice enumeration needs dimension >= 1");
    bool infeasible = false;
    auto cons = body_constraints(body, true, infeasible);
    levels_.resize(dim_);
    for (int k = dim_ - 1; k >= 0 && !infeasible; --k) {
        for (const auto& z : cons) {
            if (sgn(z.a[k]) == 0) continue;
            IntConstraint ic;
            for (int j = 0; j <= k; ++j) ic.a.push_back(to_i64(z.a[j]));
            ic.c = to_i64(z.c);
            levels_[k].push_back(ic);
        }
        cons = eliminate(cons, k, true, infeasible);
    }
    empty_ = infeasible;
    for (const auto& z : cons)
        if (sgn(z.c) < 0) empty_ = true;
}

bool LatticeWalker::bounds(int k, const std::int64_t* prefix, std::int64_t& lo, std::int64_t& hi) const {
    i128 l = std::numeric_limits<std::int64_t>::min(), h = std::numeric_limits<std::int64_t>::max();
    for (const auto& ic : levels_[k]) {
        i128 r = ic.c;
        for (int j = 0; j < k; ++j) r -= static_cast<i128>(ic.a[j]) * prefix[j];
        i128 ak = ic.a[k];
        if (ak > 0) h = std::min(h, floor_div(r, ak));
        else l = std::max(l, ceil_div(r, ak));
    }
    lo = static_cast<std::int64_t>(l);
    hi = static_cast<std::int64_t>(h);
    return l <= h;
}

namespace {

using u128 = unsigned __int128;

u128 count_rec(const LatticeWalker& w, int k, std::vector<std::int64_t>& x) {
    std::int64_t lo, hi;
    if (!w.bounds(k, x.data(), lo, hi)) return 0;
    if (k == w.dim() - 1) return static_cast<u128>(hi - lo + 1);
    u128 total = 0;
    for (std::int64_t v = lo; v <= hi; ++v) {
        x[k] = v;
        total += count_rec(w, k + 1, x);
    }
    return total;
}

void visit_rec(const LatticeWalker& w, int k, std::vector<std::int64_t>& x,
               const std::function<void(const std::vector<std::int64_t>&)>& fn) {
    std::int64_t lo, hi;
    if (!w.bounds(k, x.data(), lo, hi)) return;
    for (std::int64_t v = lo; v <= hi; ++v) {
        x[k] = v;
        if (k == w.dim() - 1) fn(x);
        else visit_rec(w, k + 1, x, fn);
    }
}

mpz_class from_u128(u128 v) {
    mpz_class hi = static_cast<unsigned long>(v >> 64);
    mpz_class lo = static_cast<unsigned long>(static_cast<std::uint64_t>(v));
    return (hi << 64) + lo;
}

}  // namespace

mpz_class lattice_count_exact(const ConvexBody& body) {
    LatticeWalker w(body);
    if (w.empty()) return 0;
    std::vector<std::int64_t> x(w.dim());
    return from_u128(count_rec(w, 0, x));
}

std::uint64_t lattice_count(const ConvexBody& body) {
    mpz_class c = lattice_count_exact(body);
    if (!c.fits_ulong_p()) throw resource_error("lattice count exceeds 64 bits");
    return c.get_ui();
}

void for_each_lattice_point(const ConvexBody& body,
                            const std::function<void(const std::vector<std::int64_t>&)>& fn) {
    LatticeWalker w(body);
    if (w.empty()) return;
    std::vector<std::int64_t> x(w.dim());
    visit_rec(w, 0, x, fn);
}

ArchimedeanFactor archimedean_factor(const ConvexBody& body, const FormSystem& sys, std::int64_t N) {
    if (sys.d != body.dim) throw validation_error("archimedean_factor: dimension mismatch");
    ArchimedeanFactor out;
    out.count = lattice_count_exact(restrict_positive(body, sys));
    out.normalized = out.count.get_d() / std::pow(static_cast<double>(N), body.dim);
    return out;
}

std::uint64_t boundary_shell_count(const ConvexBody& body, double eps, std::int64_t N) {
    if (!(eps > 0)) throw validation_error("boundary_shell_count: eps must be positive");
    auto offset_body = [&](double sign) {
        ConvexBody b = body;
        for (auto& h : b.halfspaces) {
            double norm = 0;
            for (const auto& q : h.a) norm += q.get_d() * q.get_d();
            mpq_class shift(sign * eps * static_cast<double>(N) * std::sqrt(norm));
            h.c += shift;
        }
        b.box_bound = body.box_bound + static_cast<std::int64_t>(std::ceil(eps * N)) + 1;
        return b;
    };
    std::uint64_t outer = lattice_count(offset_body(1.0));
    std::uint64_t inner = lattice_count(offset_body(-1.0));
    return outer - inner;
}

}  // namespace primeforms
