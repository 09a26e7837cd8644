#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <gmpxx.h>

// Exact linear algebra over Q, Z and Z/pZ.  Matrices are row-major vectors of rows.

namespace primeforms {

using QVector = std::vector<mpq_class>;
using QMatrix = std::vector<QVector>;
using ZVector = std::vector<mpz_class>;
using ZMatrix = std::vector<ZVector>;

QMatrix to_rational(const ZMatrix& m);
ZMatrix to_integer(const std::vector<std::vector<std::int64_t>>& m);

// Reduced row echelon form in place; returns pivot columns.
std::vector<int> rref(QMatrix& m, int cols);

int rank(const QMatrix& m, int cols);

// Basis of {x : m x = 0}, one vector per free column (free entry = 1).
std::vector<QVector> nullspace(const QMatrix& m, int cols);

// Some rational solution of m x = rhs, or nullopt.
std::optional<QVector> solve(const QMatrix& m, const QVector& rhs, int cols);

// Scale to a primitive integer vector (gcd 1, first nonzero entry positive).
ZVector primitive_integer(const QVector& v);

// Rank mod p of an integer matrix.  p must be a prime below 2^32.
int rank_mod_p(const ZMatrix& m, int cols, std::uint64_t p);

// Column-style Hermite reduction: returns unimodular U (cols x cols) with
// m*U = [H | 0], H lower echelon with positive pivots.  rank is written out.
ZMatrix column_hermite(const ZMatrix& m, int cols, ZMatrix& h_out, int& rank_out);

// LLL reduction (delta = 3/4) of the lattice spanned by independent vectors.
std::vector<ZVector> lll_reduce(std::vector<ZVector> basis);

// Canonical basis (row Hermite normal form) of the lattice spanned by the given
// vectors; lattices are equal iff these agree.
std::vector<ZVector> lattice_hnf(const std::vector<ZVector>& generators, int dim);

mpz_class dot(const ZVector& a, const ZVector& b);

}  // namespace primeforms
