#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "primeforms/linalg.hpp"

namespace primeforms {

struct AffineForm {
    std::vector<std::int64_t> coeffs;  // homogeneous part on the basis vectors
    std::int64_t constant = 0;

    std::int64_t operator()(const std::vector<std::int64_t>& n) const;
    bool is_constant() const;
};

struct FormSystem {
    int d = 0;
    std::vector<AffineForm> forms;

    int t() const { return static_cast<int>(forms.size()); }
    // Throws validation_error on dimension mismatch or a constant form.
    void validate() const;
    // No two forms are rational multiples of one another (constants included).
    bool pairwise_independent() const;
    QMatrix linear_part() const;
};

// Stock systems used as fixtures and by the CLI.
FormSystem ap_system(int k);                 // (n1, n1+n2, ..., n1+(k-1)n2)
FormSystem identity_system(int d);
FormSystem shift_system(std::int64_t h);     // (n, n+h)
FormSystem balog_system(int d);              // n_i+n_j+1, i <= j
FormSystem cube_system(int d);               // n1 + sum_{j in A} n_j, A subset of {2..d}

mpq_class size_at_scale(const FormSystem& sys, std::int64_t N);

bool affine_span_member(const AffineForm& candidate, const std::vector<AffineForm>& cls);

struct IndexComplexity {
    std::optional<int> value;               // nullopt means infinite
    std::vector<std::vector<int>> classes;  // a minimal partition of the other indices
};

IndexComplexity i_complexity(const FormSystem& sys, int i);

struct ComplexityResult {
    std::vector<IndexComplexity> per_index;
    std::optional<int> overall;
};

ComplexityResult complexity(const FormSystem& sys);

struct NormalFormCheck {
    bool holds = false;
    std::vector<std::vector<int>> witness_sets;  // J_i as basis indices
};

NormalFormCheck is_normal_form(const FormSystem& sys, int s);

struct NormalFormExtension {
    FormSystem system;
    std::vector<ZVector> witnesses;   // f_k, one per appended variable
    std::vector<int> witness_owner;   // form index each f_k was built for
    bool unchanged = false;
};

NormalFormExtension normal_form_extension(const FormSystem& sys, int s);

// Psi'(Z^{d'}) == Psi(Z^d): equal constants and equal column lattices.
bool same_image_lattice(const FormSystem& a, const FormSystem& b);

struct MatrixParameterization {
    FormSystem system;  // n -> base + generators * n
    ZVector base;
    std::vector<ZVector> generators;  // kernel basis vectors in Z^t
};

// Solutions of A x = b as an injective affine image of Z^{t-s}.
MatrixParameterization parameterize_matrix_system(const std::vector<std::vector<std::int64_t>>& A,
                                                  const std::vector<std::int64_t>& b,
                                                  std::int64_t N, int columns = 0);  // columns: t when A has no rows

std::string describe(const AffineForm& f);

}  // namespace primeforms
