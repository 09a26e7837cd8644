#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace primeforms {

using cplx = std::complex<double>;

enum class GowersMethod { naive, recursive, fourier };

const char* method_name(GowersMethod m);

struct GowersResult {
    double raw = 0;   // the 2^k-th power average
    double norm = 0;  // raw^(1/2^k), 0 when raw < 0
    GowersMethod method = GowersMethod::naive;
    bool negative_raw = false;  // raw below -1e-9 * scale
};

// Function on X_1 x ... x X_k, row-major with the last axis fastest.
struct BoxInput {
    std::vector<std::size_t> axes;
    std::vector<cplx> values;
    std::size_t size() const;
    void check() const;
};

// Functions f_B : X_B -> C for every B subset of the axes, indexed by bit mask of B.
// f[mask] is laid out over the axes of mask in increasing order, last fastest;
// f[0] holds a single value.
struct BoxFamily {
    std::vector<std::size_t> axes;
    std::vector<std::vector<cplx>> f;
    void check() const;
};

GowersResult box_norm(const BoxInput& f, GowersMethod method);

GowersResult gowers_norm_cyclic(const std::vector<cplx>& f, int s, GowersMethod method, unsigned threads = 1);

// U^{s+1} over the interval carrying f (length f.size()).  naive enumerates
// parallelepipeds inside the interval; recursive / fourier embed into Z_{2N}.
GowersResult gowers_norm_local(const std::vector<cplx>& f, int s, GowersMethod method, unsigned threads = 1);

struct InequalityCheck {
    double lhs = 0;
    double rhs = 0;
    bool holds = false;
};

// 2^{s+1} functions on Z_N indexed by omega as a bit mask (bit j = omega_j).
InequalityCheck gcs_check_cyclic(const std::vector<std::vector<cplx>>& family, int s);
// 2^k functions on the same box.
InequalityCheck gcs_check_box(const std::vector<BoxInput>& family);
// |E prod_B f_B(x_B)| against prod_B ||f_B^{2bar^{k-|B|}}||^{1/2^{k-|B|}}.
InequalityCheck second_gcs_check(const BoxFamily& family);

// Weighted box norm of g on X_B (B = all axes of nu) with weights nu_C, C a proper subset.
GowersResult weighted_box_norm(const BoxInput& g, const BoxFamily& nu);
// Same quantity for g = nu_B taken straight from the product over all C subset of B.
GowersResult weighted_self_norm(const BoxFamily& nu, unsigned mask);
// |E prod f_B| <= ||f_A||_{box(nu)} prod_{B proper} ||nu_B||_{box(nu)}^{1/2^{k-|B|}}; requires |f_B| <= nu_B.
InequalityCheck weighted_von_neumann_check(const BoxFamily& f, const BoxFamily& nu);

// max over witnesses w of |E F conj(w)| / ||w||_{U^{s+1}[N]}.
double dual_norm_lower_bound(const std::vector<cplx>& F, const std::vector<std::vector<cplx>>& witnesses, int s);

}  // namespace primeforms
