#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "primeforms/arith.hpp"
#include "primeforms/counting.hpp"
#include "primeforms/errors.hpp"
#include "primeforms/forms.hpp"
#include "primeforms/geometry.hpp"
#include "primeforms/gowers.hpp"
#include "primeforms/gysieve.hpp"
#include "primeforms/local_factors.hpp"
#include "primeforms/nilseq.hpp"
#include "primeforms/serialization.hpp"

using namespace primeforms;

namespace {

// Reads keys from the merged input and records every value used, defaults included.
class Config {
public:
    explicit Config(ordered_json in) : in_(std::move(in)) {}

    template <class T>
    T get(const std::string& key, const T& def) {
        T v = def;
        if (in_.contains(key)) {
            try {
                v = in_[key].get<T>();
            } catch (const nlohmann::json::exception&) {
                throw validation_error("config key '" + key + "' has the wrong type: " + in_[key].dump());
            }
        }
        resolved_[key] = v;
        return v;
    }
    ordered_json get_json(const std::string& key, const ordered_json& def) {
        ordered_json v = in_.contains(key) ? in_[key] : def;
        resolved_[key] = v;
        return v;
    }
    bool has(const std::string& key) const { return in_.contains(key); }
    void record(const std::string& key, const ordered_json& v) { resolved_[key] = v; }
    const ordered_json& resolved() const { return resolved_; }

private:
    ordered_json in_;
    ordered_json resolved_ = ordered_json::object();
};

struct Output {
    ordered_json result = ordered_json::object();
    std::map<std::string, std::string> tables;  // file name -> CSV text
    std::string summary;                        // one line for stdout when writing to a directory
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

std::uint64_t range_need(const FormSystem& sys, const ConvexBody& body) {
    std::uint64_t need = 2;
    for (const auto& f : sys.forms) {
        auto r = form_range(body, f);
        if (!r) continue;
        double lo = std::fabs(r->first.get_d()), hi = std::fabs(r->second.get_d());
        need = std::max<std::uint64_t>(need, static_cast<std::uint64_t>(std::ceil(std::max(lo, hi))) + 1);
    }
    return need;
}

constexpr std::uint64_t kMaxTable = 4'000'000'000ULL;

ArithTables tables_for(std::uint64_t need, unsigned threads) {
    if (need > kMaxTable) throw resource_error("arithmetic tables would need n_max = " + std::to_string(need));
    return build_tables(need, 1u << 20, threads);
}

// Commands without a scale still need N when a constant is declared proportional to it.
FormSystem system_of(Config& cfg, const ordered_json& def, std::int64_t N) {
    auto j = cfg.get_json("system", def);
    if (N <= 0 && j.dump().find("times_N") != std::string::npos) {
        if (!cfg.has("N")) throw validation_error("system has constants proportional to N; set N");
        N = cfg.get<std::int64_t>("N", 0);
    }
    return form_system_from_json(j, N);
}

ConvexBody body_of(Config& cfg, const ordered_json& system_json, const FormSystem& sys, std::int64_t N) {
    ordered_json def;
    if (system_json.contains("fixture") && system_json["fixture"] == "ap")
        def = {{"type", "progression"}, {"k", system_json.value("k", 3)}};
    else if (sys.d == 1)
        def = {{"type", "interval"}, {"lo", 1}, {"hi", "N"}};
    else
        def = {{"type", "box"}, {"dim", sys.d}, {"lo", 1}, {"hi", "N"}};
    auto j = cfg.get_json("body", def);
    ConvexBody b = body_from_json(j, sys.d, N);
    if (b.dim != sys.d) throw validation_error("body dimension does not match the system");
    return b;
}

ordered_json complexity_json(const std::optional<int>& c) {
    return c ? ordered_json(*c) : ordered_json("inf");
}

const ordered_json kAP4 = {{"fixture", "ap"}, {"k", 4}};

Output cmd_complexity(Config& cfg) {
    auto sys = system_of(cfg, kAP4, 0);
    auto res = complexity(sys);
    Output out;
    out.result["system"] = to_json(sys);
    out.result["per_index"] = ordered_json::array();
    for (int i = 0; i < sys.t(); ++i)
        out.result["per_index"].push_back(
            {{"index", i}, {"complexity", complexity_json(res.per_index[i].value)}, {"classes", res.per_index[i].classes}});
    out.result["complexity"] = complexity_json(res.overall);
    out.summary = "complexity " + out.result["complexity"].dump();
    return out;
}

Output cmd_normalize(Config& cfg) {
    auto sys = system_of(cfg, kAP4, 0);
    auto c = complexity(sys).overall;
    int s = cfg.get<int>("s", c ? std::max(1, *c) : 1);
    auto before = is_normal_form(sys, s);
    auto ext = normal_form_extension(sys, s);
    auto after = is_normal_form(ext.system, s);
    Output out;
    out.result["input"] = to_json(sys);
    out.result["input_normal"] = before.holds;
    out.result["extended"] = to_json(ext.system);
    out.result["unchanged"] = ext.unchanged;
    out.result["witnesses"] = ordered_json::array();
    for (std::size_t k = 0; k < ext.witnesses.size(); ++k) {
        ordered_json w = ordered_json::array();
        for (const auto& q : ext.witnesses[k]) w.push_back(q.get_str());
        out.result["witnesses"].push_back({{"form", ext.witness_owner[k]}, {"vector", w}});
    }
    out.result["output_normal"] = after.holds;
    out.result["witness_sets"] = after.witness_sets;
    out.result["same_image_lattice"] = same_image_lattice(sys, ext.system);
    out.summary = std::string("normal form ") + (after.holds ? "ok" : "FAILED") + ", d' = " + std::to_string(ext.system.d);
    return out;
}

Output cmd_local_factors(Config& cfg) {
    auto sys = system_of(cfg, kAP4, 0);
    auto pmax = cfg.get<std::uint64_t>("pmax", 100);
    unsigned threads = cfg.get<unsigned>("threads", 1);
    auto ss = singular_series(sys, pmax, true, threads);
    Output out;
    out.result["system"] = to_json(sys);
    out.result["factors"] = ordered_json::array();
    for (std::size_t k = 0; k < ss.profile.primes.size(); ++k)
        out.result["factors"].push_back(
            {{"p", ss.profile.primes[k]}, {"beta", ss.profile.beta[k].get_str()}, {"value", ss.profile.beta[k].get_d()}});
    out.result["exceptional_primes"] = exceptional_primes(sys, pmax).primes;
    out.tables["local_factors.csv"] = local_profile_csv(ss.profile);
    out.summary = std::to_string(ss.profile.primes.size()) + " local factors";
    return out;
}

// Leading constant of the count: product times vol(K / N), K / N given exactly as "volume".
// For progression fixtures vol{0 <= n1, 0 <= n2, n1 + (k-1) n2 <= 1} = 1/(2(k-1)).
Output cmd_singular_series(Config& cfg) {
    auto sj = cfg.get_json("system", kAP4);
    auto sys = form_system_from_json(sj, sj.dump().find("times_N") != std::string::npos ? cfg.get<std::int64_t>("N", 1000) : 0);
    auto pmax = cfg.get<std::uint64_t>("pmax", 1'000'000);
    unsigned threads = cfg.get<unsigned>("threads", 1);
    ordered_json vdef = nullptr;
    if (sj.contains("fixture") && sj["fixture"] == "ap" && sj.value("k", 3) >= 2)
        vdef = "1/" + std::to_string(2 * (sj.value("k", 3) - 1));
    auto vj = cfg.get_json("volume", vdef);
    auto ss = singular_series(sys, pmax, false, threads);
    Output out;
    out.result["system"] = to_json(sys);
    out.result["singular_series"] = to_json(ss);
    if (vj.is_null()) {
        out.result["leading_constant"] = nullptr;
        out.summary = fmt(ss.truncated_product);
    } else {
        double c = ss.truncated_product * rational_from_json(vj).get_d();
        out.result["leading_constant"] = c;
        out.summary = fmt(c);
    }
    return out;
}

PredictMode mode_of(const std::string& m) {
    if (m == "log_power") return PredictMode::log_power;
    if (m == "integral") return PredictMode::integral;
    throw validation_error("mode must be log_power or integral");
}

Output cmd_predict(Config& cfg) {
    auto N = cfg.get<std::int64_t>("N", 10000);
    auto sj = cfg.get_json("system", kAP4);
    auto sys = form_system_from_json(sj, N);
    auto body = body_of(cfg, sj, sys, N);
    auto pmax = cfg.get<std::uint64_t>("pmax", 100000);
    auto mode = cfg.get<std::string>("mode", "integral");
    unsigned threads = cfg.get<unsigned>("threads", 1);
    auto p = predict(sys, body, N, pmax, mode_of(mode), {threads});
    Output out;
    out.result["value"] = p.value;
    out.result["singular_product"] = p.singular_product;
    out.result["beta_infinity"] = p.beta_infinity;
    out.result["vanishing"] = p.vanishing;
    out.summary = fmt(p.value);
    return out;
}

Output cmd_count(Config& cfg) {
    auto N = cfg.get<std::int64_t>("N", 10000);
    auto sj = cfg.get_json("system", kAP4);
    auto sys = form_system_from_json(sj, N);
    auto body = body_of(cfg, sj, sys, N);
    auto wj = cfg.get_json("weights", "lambda");
    unsigned threads = cfg.get<unsigned>("threads", 1);
    std::vector<std::string> names;
    if (wj.is_string())
        names.assign(static_cast<std::size_t>(sys.t()), wj.get<std::string>());
    else
        names = wj.get<std::vector<std::string>>();
    if (static_cast<int>(names.size()) != sys.t()) throw validation_error("one weight per form required");
    auto tables = tables_for(range_need(sys, body), threads);
    Output out;
    bool all_prime = std::all_of(names.begin(), names.end(), [](const std::string& n) { return n == "prime"; });
    if (all_prime) {
        auto c = prime_point_count(sys, body, tables, {threads});
        out.result["value"] = c;
        out.summary = std::to_string(c);
    } else {
        std::vector<Weight> ws;
        for (const auto& n : names) ws.push_back(weight_from_name(n));
        double v = weighted_count(sys, body, ws, tables, {threads});
        out.result["value"] = v;
        out.summary = fmt(v);
    }
    return out;
}

Output cmd_compare(Config& cfg) {
    auto nj = cfg.get_json("N", ordered_json::array({10000, 100000}));
    std::vector<std::int64_t> Ns = nj.is_array() ? nj.get<std::vector<std::int64_t>>() : std::vector<std::int64_t>{nj.get<std::int64_t>()};
    if (Ns.empty()) throw validation_error("N list is empty");
    auto sj = cfg.get_json("system", kAP4);
    auto pmax = cfg.get<std::uint64_t>("pmax", 100000);
    unsigned threads = cfg.get<unsigned>("threads", 1);
    // body resolved once against the largest N so the recorded config is the template
    auto sys0 = form_system_from_json(sj, Ns.back());
    (void)body_of(cfg, sj, sys0, Ns.back());
    auto bj = cfg.resolved()["body"];
    std::vector<CorrelationReport> rows;
    Output out;
    out.result["rows"] = ordered_json::array();
    for (auto N : Ns) {
        auto sys = form_system_from_json(sj, N);
        auto body = body_from_json(bj, sys.d, N);
        auto tables = tables_for(range_need(sys, body), threads);
        auto r = compare(sys, body, N, pmax, tables, {threads});
        rows.push_back(r);
        out.result["rows"].push_back(to_json(r));
    }
    out.tables["correlation.csv"] = correlation_csv(rows);
    out.summary = "ratio_integral " + fmt(rows.back().ratio_integral);
    return out;
}

Output cmd_mobius_corr(Config& cfg) {
    auto N = cfg.get<std::int64_t>("N", 10000);
    auto sj = cfg.get_json("system", kAP4);
    auto sys = form_system_from_json(sj, N);
    auto body = body_of(cfg, sj, sys, N);
    auto fn = cfg.get<std::string>("function", "mobius");
    if (fn != "mobius" && fn != "liouville") throw validation_error("function must be mobius or liouville");
    unsigned threads = cfg.get<unsigned>("threads", 1);
    auto tables = tables_for(range_need(sys, body), threads);
    double v = mobius_correlation(sys, body, N, fn == "liouville", tables, {threads});
    Output out;
    out.result["value"] = v;
    out.result["abs"] = std::fabs(v);
    out.summary = fmt(v);
    return out;
}

Output cmd_chowla(Config& cfg) {
    auto N = cfg.get<std::int64_t>("N", 3000);
    auto fj = cfg.get_json("factors", ordered_json::array({{1, 0}, {0, 1}, {1, 1}}));
    unsigned threads = cfg.get<unsigned>("threads", 1);
    std::vector<AffineForm> factors;
    std::uint64_t need = 2;
    for (const auto& f : fj) {
        auto c = f.get<std::vector<std::int64_t>>();
        if (c.size() != 2) throw validation_error("each factor is a pair [a, b] for a y1 + b y2");
        factors.push_back({c, 0});
        need = std::max<std::uint64_t>(need, static_cast<std::uint64_t>((std::llabs(c[0]) + std::llabs(c[1])) * N) + 1);
    }
    auto tables = tables_for(need, threads);
    double v = chowla_check(factors, N, tables, {threads});
    Output out;
    out.result["value"] = v;
    out.result["abs"] = std::fabs(v);
    out.summary = fmt(v);
    return out;
}

GowersMethod gowers_method_of(const std::string& m) {
    if (m == "naive") return GowersMethod::naive;
    if (m == "recursive") return GowersMethod::recursive;
    if (m == "fourier") return GowersMethod::fourier;
    throw validation_error("method must be naive, recursive or fourier");
}

Output cmd_gowers(Config& cfg) {
    auto signal = cfg.get<std::string>("signal", "w_tricked");
    auto s = cfg.get<int>("s", 1);
    auto domain = cfg.get<std::string>("domain", "local");
    auto method = cfg.get<std::string>("method", "recursive");
    unsigned threads = cfg.get<unsigned>("threads", 1);
    std::vector<cplx> f;
    if (signal == "values") {
        for (const auto& v : cfg.get_json("values", ordered_json::array())) {
            if (v.is_array() && v.size() == 2)
                f.emplace_back(v[0].get<double>(), v[1].get<double>());
            else
                f.emplace_back(v.get<double>(), 0.0);
        }
    } else {
        auto N = cfg.get<std::int64_t>("N", 10000);
        if (N < 1) throw validation_error("N must be positive");
        if (signal == "random_sign") {
            auto seed = cfg.get<std::uint64_t>("seed", 1);
            cfg.record("rng", "mt19937_64");
            std::mt19937_64 rng(seed);
            for (std::int64_t n = 0; n < N; ++n) f.emplace_back((rng() >> 63) ? 1.0 : -1.0, 0.0);
        } else if (signal == "w_tricked" || signal == "sharp") {
            auto w = cfg.get<double>("w", 5);
            auto b = cfg.get<std::uint64_t>("b", 1);
            auto wp = w_trick(w);
            auto tables = tables_for(wp.W * static_cast<std::uint64_t>(N) + b + 1, threads);
            std::vector<double> dev;
            if (signal == "w_tricked") {
                dev = w_tricked_deviation(N, b, wp.W, tables);
            } else {
                auto gamma = cfg.get<double>("gamma", default_sharp_gamma(s));
                dev = sharp_deviation(N, b, wp.W, gamma, tables);
            }
            for (double x : dev) f.emplace_back(x, 0.0);
        } else {
            throw validation_error("signal must be values, random_sign, w_tricked or sharp");
        }
    }
    if (f.empty()) throw validation_error("empty signal");
    GowersResult r = domain == "cyclic"  ? gowers_norm_cyclic(f, s, gowers_method_of(method), threads)
                     : domain == "local" ? gowers_norm_local(f, s, gowers_method_of(method), threads)
                                         : throw validation_error("domain must be cyclic or local");
    Output out;
    out.result["length"] = f.size();
    out.result["raw"] = r.raw;
    out.result["norm"] = r.norm;
    out.result["method"] = method_name(r.method);
    out.result["negative_raw"] = r.negative_raw;
    out.summary = fmt(r.norm);
    return out;
}

SmoothCutoff cutoff_of(const std::string& name) {
    if (name == "bump") return normalized_bump();
    if (name == "tent") return smoothed_tent();
    throw validation_error("cutoff must be bump or tent");
}

Output cmd_gy_verify(Config& cfg) {
    auto N = cfg.get<std::int64_t>("N", 100000);
    auto sj = cfg.get_json("system", {{"fixture", "twin"}});
    auto sys = form_system_from_json(sj, N);
    auto body = body_of(cfg, sj, sys, N);
    auto a_list = cfg.get<std::vector<int>>("a", std::vector<int>(static_cast<std::size_t>(sys.t()), 1));
    std::vector<std::string> def_cut;
    for (int a : a_list) def_cut.push_back(a == 1 ? "tent" : "bump");
    auto cut_names = cfg.get<std::vector<std::string>>("cutoffs", def_cut);
    auto gamma = cfg.get<double>("gamma", 0.05);
    auto pmax = cfg.get<std::uint64_t>("pmax", 10000);
    unsigned threads = cfg.get<unsigned>("threads", 1);
    std::vector<SmoothCutoff> chis;
    for (const auto& n : cut_names) chis.push_back(cutoff_of(n));
    auto tables = tables_for(range_need(sys, body), threads);
    auto r = gy_estimate_check(sys, body, N, chis, a_list, gamma, pmax, tables, threads);
    Output out;
    out.result["report"] = to_json(r);
    out.result["sieve_factors"] = ordered_json::array();
    for (std::size_t i = 0; i < chis.size(); ++i)
        out.result["sieve_factors"].push_back({{"cutoff", chis[i].family_id}, {"a", a_list[i]}, {"c", sieve_factor(chis[i], a_list[i])}});
    out.result["bump_c2"] = sieve_factor(normalized_bump(), 2);
    out.summary = "ratio " + fmt(r.ratio);
    return out;
}

Output cmd_sieve_check(Config& cfg) {
    auto N = cfg.get<std::int64_t>("N", 100000);
    auto gamma = cfg.get<double>("gamma", 0.05);
    auto w = cfg.get<double>("w", 5);
    auto C = cfg.get<double>("C", 20);
    auto wp = w_trick(w);
    auto b_list = cfg.get<std::vector<std::uint64_t>>("residues", wp.residues);
    auto sj = cfg.get_json("system", {{"fixture", "ap"}, {"k", 2}});
    auto budget = cfg.get<std::uint64_t>("sample_budget", 2'000'000);
    auto seed = cfg.get<std::uint64_t>("seed", 1);
    cfg.record("rng", "mt19937_64");
    auto shifts = cfg.get<std::vector<std::int64_t>>("shifts", {0, 1});
    auto kappa = cfg.get<double>("kappa", 1.0);
    auto cap = cfg.get<double>("tau_cap", 0.0);
    auto qs = cfg.get<std::vector<int>>("tau_moments", {1, 2, 3});
    unsigned threads = cfg.get<unsigned>("threads", 1);
    auto sys = form_system_from_json(sj, N);
    std::uint64_t bmax = b_list.empty() ? 1 : *std::max_element(b_list.begin(), b_list.end());
    auto tables = tables_for(wp.W * static_cast<std::uint64_t>(N) + std::max<std::uint64_t>(bmax, wp.W) + 1, threads);
    auto sv = build_enveloping_sieve(N, gamma, w, b_list, C, tables);
    double mn = *std::min_element(sv.nu.begin(), sv.nu.end());
    auto dom = domination_constant(sv, tables);
    auto lf = linear_forms_check(sv, sys, budget, seed);
    TauParams tp{kappa, cap};
    auto cc = correlation_check(sv, shifts, tp, tables);
    auto mom = tau_moments(sv, qs, tp, tables);
    Output out;
    out.result["N_prime"] = sv.N_prime;
    out.result["R"] = sv.R;
    out.result["W"] = sv.W;
    out.result["mean"] = sv.mean();
    out.result["min"] = mn;
    out.result["domination"] = {{"C_dom", dom.C_dom}, {"argmax", dom.argmax}, {"from", dom.from}};
    out.result["linear_forms"] = {{"mean", lf.mean},           {"deviation", lf.deviation}, {"std_error", lf.std_error},
                                  {"samples", lf.samples},     {"exhaustive", lf.exhaustive}};
    out.result["correlation"] = {{"lhs", cc.lhs}, {"rhs", cc.rhs}, {"holds", cc.holds}};
    out.result["tau_moments"] = ordered_json::array();
    for (std::size_t i = 0; i < qs.size(); ++i) out.result["tau_moments"].push_back({{"q", qs[i]}, {"value", mom[i]}});
    out.summary = "mean " + fmt(sv.mean()) + " min " + fmt(mn) + " C_dom " + fmt(dom.C_dom);
    return out;
}

mpq_class random_rational(std::mt19937_64& rng, std::int64_t den_max) {
    std::uniform_int_distribution<std::int64_t> dd(1, den_max);
    std::int64_t den = dd(rng);
    std::uniform_int_distribution<std::int64_t> nd(-4 * den, 4 * den);
    mpq_class q(static_cast<long>(nd(rng)), static_cast<unsigned long>(den));
    q.canonicalize();
    return q;
}

Output cmd_nil_check(Config& cfg) {
    auto trials = cfg.get<int>("trials", 1000);
    auto seed = cfg.get<std::uint64_t>("seed", 1);
    cfg.record("rng", "mt19937_64");
    if (trials < 1) throw validation_error("trials must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> nd(-1000, 1000), hd(-50, 50);
    std::uniform_real_distribution<double> ud(0.0, 1.0);

    int quad_ok = 0;
    for (int i = 0; i < trials; ++i) {
        mpq_class theta = random_rational(rng, 1000);
        std::int64_t n = nd(rng);
        if (quadratic_phase_orbit(theta, n) == quadratic_phase_closed_form(theta, n)) ++quad_ok;
    }

    double abelian_worst = 0, skew_worst = 0;
    for (int i = 0; i < trials; ++i) {
        std::vector<double> x = {ud(rng), ud(rng)}, g = {ud(rng), ud(rng)};
        auto c = abelian_parallelepiped(x, g, nd(rng), hd(rng), hd(rng));
        abelian_worst = std::max(abelian_worst, abelian_constraint(c[0], c[1], c[2], c[3]));
        SkewPoint<double> start{ud(rng), ud(rng)};
        auto pts = skew_parallelepiped(ud(rng), start, nd(rng), {hd(rng), hd(rng), hd(rng)}, SkewOrbitConvention::iterate);
        skew_worst = std::max(skew_worst, skew_constraint(pts).residual);
    }

    int hk_ok = 0, perturbed_fail = 0;
    for (int i = 0; i < trials; ++i) {
        Heisenberg<mpq_class> g{random_rational(rng, 97), random_rational(rng, 97), random_rational(rng, 97)};
        Heisenberg<mpq_class> x0{random_rational(rng, 97), random_rational(rng, 97), random_rational(rng, 97)};
        auto cube = heisenberg_parallelepiped(g, x0, nd(rng) / 10, {hd(rng), hd(rng), hd(rng)});
        auto f = hk_factorize_heisenberg(cube);
        if (f.success && hk_reconstruct(f) == cube) ++hk_ok;
        auto bad = cube;
        bad[0].z += mpq_class(1, 10);
        if (!hk_factorize_heisenberg(bad).success) ++perturbed_fail;
    }

    Output out;
    out.result["trials"] = trials;
    out.result["quadratic_phase_exact"] = quad_ok;
    out.result["abelian_max_residual"] = abelian_worst;
    out.result["skew_max_residual"] = skew_worst;
    out.result["hk_success"] = hk_ok;
    out.result["hk_perturbed_failures"] = perturbed_fail;
    out.summary = "quad " + std::to_string(quad_ok) + "/" + std::to_string(trials) + " hk " + std::to_string(hk_ok) + " perturbed-fail " +
                  std::to_string(perturbed_fail);
    return out;
}

Output cmd_mn_corr(Config& cfg) {
    auto N = cfg.get<std::int64_t>("N", 100000);
    auto mode = cfg.get<std::string>("mode", "nil");
    unsigned threads = cfg.get<unsigned>("threads", 1);
    auto tables = tables_for(static_cast<std::uint64_t>(std::max<std::int64_t>(N, 2)) + 1, threads);
    Output out;
    if (mode == "nil") {
        auto gv = cfg.get<std::vector<double>>("g", {std::sqrt(2.0) - 1, std::sqrt(3.0) - 1, std::sqrt(5.0) - 2});
        auto xv = cfg.get<std::vector<double>>("x0", {0.0, 0.0, 0.0});
        auto cell = cfg.get<std::vector<int>>("cell", {1, 1});
        if (gv.size() != 3 || xv.size() != 3 || cell.size() != 2) throw validation_error("g and x0 have 3 entries, cell has 2");
        double v = mobius_nil_correlation(N, {gv[0], gv[1], gv[2]}, {xv[0], xv[1], xv[2]}, cell_phase_function(cell[0], cell[1]),
                                          tables, threads);
        out.result["abs"] = v;
        out.summary = fmt(v);
    } else if (mode == "phase") {
        auto alpha = cfg.get<double>("alpha", std::sqrt(2.0) - 1);
        double v = mobius_phase_correlation(N, alpha, tables);
        out.result["abs"] = v;
        out.summary = fmt(v);
    } else if (mode == "scan") {
        auto K = cfg.get<int>("K", 1024);
        auto sc = mobius_phase_scan(N, K, tables);
        out.result["max_abs"] = sc.max_abs;
        out.result["argmax_alpha"] = sc.argmax_alpha;
        out.summary = fmt(sc.max_abs);
    } else {
        throw validation_error("mode must be nil, phase or scan");
    }
    return out;
}

using Handler = Output (*)(Config&);

const std::vector<std::pair<std::string, Handler>>& commands() {
    static const std::vector<std::pair<std::string, Handler>> c = {
        {"complexity", cmd_complexity},   {"normalize", cmd_normalize}, {"local-factors", cmd_local_factors},
        {"singular-series", cmd_singular_series}, {"predict", cmd_predict}, {"count", cmd_count},
        {"compare", cmd_compare},         {"mobius-corr", cmd_mobius_corr}, {"chowla", cmd_chowla},
        {"gowers", cmd_gowers},           {"gy-verify", cmd_gy_verify}, {"sieve-check", cmd_sieve_check},
        {"nil-check", cmd_nil_check},     {"mn-corr", cmd_mn_corr},
    };
    return c;
}

struct Flags {
    std::string config, out, format = "json";
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed, pmax;
    std::optional<double> gamma, w;
};

int run(const std::string& name, Handler h, const Flags& fl) {
    const ordered_json from_file = fl.config.empty() ? ordered_json::object() : load_json_file(fl.config);
    if (!from_file.is_object()) throw validation_error(fl.config + ": top level must be an object");
    ordered_json in = from_file;
    if (fl.threads) in["threads"] = *fl.threads;
    if (fl.seed) in["seed"] = *fl.seed;
    if (fl.pmax) in["pmax"] = *fl.pmax;
    if (fl.gamma) in["gamma"] = *fl.gamma;
    if (fl.w) in["w"] = *fl.w;
    Config cfg(in);
    auto t0 = std::chrono::steady_clock::now();
    Output res = h(cfg);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // config-file keys must all be consumed; flags a command does not take are ignored
    for (auto it = from_file.begin(); it != from_file.end(); ++it)
        if (!cfg.resolved().contains(it.key())) throw validation_error("unknown config key '" + it.key() + "' for " + name);

    ordered_json report;
    report["command"] = name;
    report["config"] = cfg.resolved();
    report["result"] = res.result;
    report["timing"] = {{"seconds", secs}};

    if (!fl.out.empty()) {
        std::filesystem::create_directories(fl.out);
        std::ofstream(std::filesystem::path(fl.out) / "report.json") << report.dump(2) << "\n";
        for (const auto& [file, text] : res.tables) std::ofstream(std::filesystem::path(fl.out) / file, std::ios::binary) << text;
        std::cout << name << ": " << res.summary << "\n";
    } else if (fl.format == "csv") {
        if (res.tables.empty()) throw validation_error(name + " has no tabular output; use --format json");
        std::cout << res.tables.begin()->second;
    } else {
        std::cout << report.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"primeforms: prime values of affine-linear forms, experiments and checks"};
    app.require_subcommand(1);
    Flags fl;
    std::string chosen;
    for (const auto& [name, h] : commands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", fl.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--out", fl.out, "directory for report.json and CSV tables");
        sub->add_option("--threads", fl.threads, "worker threads");
        sub->add_option("--seed", fl.seed, "64-bit RNG seed");
        sub->add_option("--pmax", fl.pmax, "largest prime in local products");
        sub->add_option("--gamma", fl.gamma, "sieve level exponent");
        sub->add_option("--w", fl.w, "W-trick threshold");
        sub->add_option("--format", fl.format, "stdout format")->check(CLI::IsMember({"json", "csv"}));
        sub->callback([&chosen, n = name] { chosen = n; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    try {
        for (const auto& [name, h] : commands())
            if (name == chosen) return run(name, h, fl);
        return 3;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const resource_error& e) {
        std::cerr << "resource limit: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
