#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <gmpxx.h>

#include "primeforms/forms.hpp"
#include "primeforms/linalg.hpp"

namespace primeforms {

struct Halfspace {
    QVector a;  // a . x <= c
    mpq_class c;
};

struct ConvexBody {
    int dim = 0;
    std::vector<Halfspace> halfspaces;  // includes the box constraints
    std::int64_t box_bound = 0;         // K inside [-box_bound, box_bound]^dim

    bool contains(const std::vector<std::int64_t>& x) const;
};

// Adds the box constraints |x_j| <= N.
ConvexBody make_body(int dim, std::vector<Halfspace> halfspaces, std::int64_t N);
ConvexBody box_body(int dim, std::int64_t lo, std::int64_t hi);
// {n1 >= 1, n2 >= 1, n1 + (k-1) n2 <= N}: k-term progressions with positive difference.
ConvexBody progression_body(int k, std::int64_t N);
// {1 <= n <= N} in one dimension.
ConvexBody interval_body(std::int64_t lo, std::int64_t hi);
// Convex hull of d+1 affinely independent integer points.
ConvexBody simplex_body(const std::vector<std::vector<std::int64_t>>& vertices, std::int64_t N);
// {y : Psi(y) in K}.
ConvexBody pull_back(const ConvexBody& body, const FormSystem& map);
// K intersected with {psi_i >= 1 for all i}.
ConvexBody restrict_positive(const ConvexBody& body, const FormSystem& sys);

// Integer constraint a . x <= c with a leading-prefix layout.
struct IntConstraint {
    std::vector<std::int64_t> a;
    std::int64_t c = 0;
};

// Compiled enumerator: after construction, level k holds constraints in
// x_0..x_k whose x_k coefficient is nonzero (Fourier-Motzkin, ascending order).
class LatticeWalker {
public:
    explicit LatticeWalker(const ConvexBody& body);

    int dim() const { return dim_; }
    bool empty() const { return empty_; }
    // Bounds for x_k given x_0..x_{k-1}; returns false if the interval is empty.
    bool bounds(int k, const std::int64_t* prefix, std::int64_t& lo, std::int64_t& hi) const;

private:
    int dim_ = 0;
    bool empty_ = false;
    std::vector<std::vector<IntConstraint>> levels_;
};

std::uint64_t lattice_count(const ConvexBody& body);
mpz_class lattice_count_exact(const ConvexBody& body);
void for_each_lattice_point(const ConvexBody& body,
                            const std::function<void(const std::vector<std::int64_t>&)>& fn);

// Exact range of psi over the real body (nullopt if empty).
std::optional<std::pair<mpq_class, mpq_class>> form_range(const ConvexBody& body, const AffineForm& form);

struct ArchimedeanFactor {
    mpz_class count;
    double normalized = 0;  // count / N^d
};

ArchimedeanFactor archimedean_factor(const ConvexBody& body, const FormSystem& sys, std::int64_t N);

// Points within facet distance eps*N of the boundary (both sides).
std::uint64_t boundary_shell_count(const ConvexBody& body, double eps, std::int64_t N);

}  // namespace primeforms
