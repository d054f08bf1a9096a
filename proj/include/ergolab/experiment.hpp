#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "ergolab/action.hpp"
#include "ergolab/bernoulli_factor.hpp"
#include "ergolab/ergodicity.hpp"
#include "ergolab/groupoid_cost.hpp"
#include "ergolab/rokhlin.hpp"
#include "ergolab/weak_containment.hpp"

namespace ergolab {

using nlohmann::json;

// Reports print numbers with 12 significant digits; rounding values through
// that precision before serialization keeps emitted JSON at most 12
// significant digits and byte-deterministic.
inline double round12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::strtod(buf, nullptr);
}

inline std::string format12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find(',') == std::string::npos && s.find('"') == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

namespace cfg {

inline void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
}

template <class T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for \"" + key + "\"");
    }
}

inline std::int64_t get_count(const json& obj, const std::string& key, std::int64_t fallback,
                              std::int64_t lo, std::int64_t hi) {
    auto v = get_or<std::int64_t>(obj, key, fallback);
    if (v < lo || v > hi)
        throw ConfigError("\"" + key + "\" = " + std::to_string(v) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

inline double get_real(const json& obj, const std::string& key, double fallback, double lo,
                       double hi) {
    auto v = get_or<double>(obj, key, fallback);
    if (!(v >= lo && v <= hi))
        throw ConfigError("\"" + key + "\" = " + std::to_string(v) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

inline double parse_alpha(const json& obj, const std::string& key) {
    if (!obj.contains(key)) return golden_alpha();
    const auto& v = obj.at(key);
    if (v.is_string()) {
        if (v.get<std::string>() == "golden") return golden_alpha();
        throw ConfigError("alpha must be \"golden\" or a number in (0,1)");
    }
    double a = v.get<double>();
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("alpha must lie in (0,1)");
    return a;
}

inline Distribution parse_kappa(const json& obj, const std::string& key) {
    if (!obj.contains(key)) return Distribution({0.5, 0.5});
    try {
        return Distribution(obj.at(key).get<std::vector<double>>());
    } catch (const json::exception&) {
        throw ConfigError("kappa must be an array of probabilities");
    }
}

inline Rational parse_rational(const json& obj, const std::string& key,
                               Rational fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (v.is_string()) return Rational::parse(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long long>());
    throw ConfigError("\"" + key + "\" must be a rational string like \"1/2\"");
}

inline FiniteQuotientDesc parse_quotient(const json& obj) {
    require_object(obj, "quotient instance");
    reject_unknown_keys(obj, {"group", "quotient_size", "generator_permutations", "weights"},
                        "quotient instance");
    GroupFamily family = parse_family(get_or<std::string>(obj, "group", "Z"));
    int size = static_cast<int>(get_count(obj, "quotient_size", 0, 1, 64));
    std::vector<std::vector<int>> perms;
    try {
        perms = obj.at("generator_permutations").get<std::vector<std::vector<int>>>();
    } catch (const json::exception&) {
        throw ConfigError("generator_permutations must be arrays of indices");
    }
    std::vector<Rational> weights;
    if (obj.contains("weights"))
        for (const auto& w : obj.at("weights")) {
            if (w.is_string())
                weights.push_back(Rational::parse(w.get<std::string>()));
            else
                throw ConfigError("quotient weights must be rational strings");
        }
    return ActionDescriptor::finite_quotient(family, size, std::move(perms), std::move(weights))
        .as<FiniteQuotientDesc>();
}

inline ActionDescriptor parse_action(const json& obj);

inline ActionDescriptor parse_action_inner(const json& obj) {
    require_object(obj, "action");
    std::string kind = get_or<std::string>(obj, "kind", "");
    if (kind == "rotation") {
        reject_unknown_keys(obj, {"kind", "alpha"}, "rotation action");
        return ActionDescriptor::rotation(parse_alpha(obj, "alpha"));
    }
    if (kind == "bernoulli_shift") {
        reject_unknown_keys(obj, {"kind", "group", "kappa"}, "bernoulli_shift action");
        return ActionDescriptor::bernoulli_shift(
            parse_family(get_or<std::string>(obj, "group", "Z")), parse_kappa(obj, "kappa"));
    }
    if (kind == "trivial_finite") {
        reject_unknown_keys(obj, {"kind", "group", "n", "weights"}, "trivial_finite action");
        return ActionDescriptor::trivial_finite(
            parse_family(get_or<std::string>(obj, "group", "Z")),
            static_cast<int>(get_count(obj, "n", 2, 1, 1 << 20)),
            get_or<std::vector<double>>(obj, "weights", {}));
    }
    if (kind == "trivial_interval") {
        reject_unknown_keys(obj, {"kind", "group"}, "trivial_interval action");
        return ActionDescriptor::trivial_interval(
            parse_family(get_or<std::string>(obj, "group", "Z")));
    }
    if (kind == "finite_quotient") {
        json inner = obj;
        inner.erase("kind");
        FiniteQuotientDesc desc = parse_quotient(inner);
        return ActionDescriptor::finite_quotient(desc.family, desc.size, desc.generator_perms,
                                                 desc.weights);
    }
    if (kind == "product") {
        reject_unknown_keys(obj, {"kind", "factors"}, "product action");
        std::vector<ActionDescriptor> factors;
        for (const auto& f : obj.at("factors")) factors.push_back(parse_action(f));
        return ActionDescriptor::product(std::move(factors));
    }
    throw ConfigError("unknown action kind \"" + kind + "\"");
}

inline ActionDescriptor parse_action(const json& obj) { return parse_action_inner(obj); }

inline json action_to_json(const ActionDescriptor& action) {
    json j;
    if (action.is<RotationDesc>()) {
        j["kind"] = "rotation";
        j["alpha"] = round12(action.as<RotationDesc>().alpha);
    } else if (action.is<BernoulliShiftDesc>()) {
        const auto& d = action.as<BernoulliShiftDesc>();
        j["kind"] = "bernoulli_shift";
        j["group"] = family_name(d.family);
        j["kappa"] = d.base.probs();
    } else if (action.is<TrivialFiniteDesc>()) {
        const auto& d = action.as<TrivialFiniteDesc>();
        j["kind"] = "trivial_finite";
        j["group"] = family_name(d.family);
        j["n"] = d.n;
        j["weights"] = d.weights;
    } else if (action.is<TrivialIntervalDesc>()) {
        j["kind"] = "trivial_interval";
        j["group"] = family_name(action.as<TrivialIntervalDesc>().family);
    } else if (action.is<FiniteQuotientDesc>()) {
        const auto& d = action.as<FiniteQuotientDesc>();
        j["kind"] = "finite_quotient";
        j["group"] = family_name(d.family);
        j["quotient_size"] = d.size;
        j["generator_permutations"] = d.generator_perms;
        json ws = json::array();
        for (const auto& w : d.weights) ws.push_back(w.to_string());
        j["weights"] = ws;
    } else {
        j["kind"] = "product";
        json fs = json::array();
        for (const auto& f : action.as<ProductDesc>().factors) fs.push_back(action_to_json(f));
        j["factors"] = fs;
    }
    return j;
}

}  // namespace cfg

// --- per-family payload builders ----------------------------------------

inline json certificate_to_json(const ContainmentCertificate& cert) {
    json entries = json::array();
    for (std::size_t g = 0; g < cert.source.S.size(); ++g)
        for (std::size_t i = 0; i < cert.source.n_sets; ++i)
            for (std::size_t j = 0; j < cert.source.n_sets; ++j) {
                double dev = std::abs(cert.source.at(g, i, j) - cert.target.at(g, i, j));
                double se = cert.source.se(g, i, j) + cert.target.se(g, i, j);
                json row;
                row["gamma"] = cert.source.S[g].to_string();
                row["i"] = i;
                row["j"] = j;
                row["source"] = round12(cert.source.at(g, i, j));
                row["target"] = round12(cert.target.at(g, i, j));
                row["deviation"] = round12(dev);
                // same deviation in standard-error units; pass/fail stays raw
                row["deviation_se"] = se > 0.0 ? round12(dev / se) : 0.0;
                entries.push_back(row);
            }
    json j;
    j["epsilon"] = round12(cert.epsilon);
    j["max_deviation"] = round12(cert.max_deviation);
    j["pass"] = cert.pass;
    j["entries"] = entries;
    return j;
}

inline std::string certificate_to_csv(const ContainmentCertificate& cert) {
    std::string out = "gamma,i,j,source,target,deviation\n";
    for (std::size_t g = 0; g < cert.source.S.size(); ++g)
        for (std::size_t i = 0; i < cert.source.n_sets; ++i)
            for (std::size_t j = 0; j < cert.source.n_sets; ++j) {
                out += csv_field(cert.source.S[g].to_string()) + "," + std::to_string(i) + "," +
                       std::to_string(j) + "," + format12(cert.source.at(g, i, j)) + "," +
                       format12(cert.target.at(g, i, j)) + "," +
                       format12(std::abs(cert.source.at(g, i, j) - cert.target.at(g, i, j))) +
                       "\n";
            }
    return out;
}

struct ExperimentOutput {
    json payload;
    std::string csv;
    bool pass = false;
};

inline ExperimentOutput run_bernoulli_factor(const json& params, const ActionDescriptor& action,
                                             std::uint64_t seed) {
    cfg::reject_unknown_keys(params,
                             {"kappa", "F_radius", "delta", "epsilon", "n_samples", "n_labelings",
                              "cells"},
                             "bernoulli_factor params");
    Distribution kappa = cfg::parse_kappa(params, "kappa");
    int f_radius = static_cast<int>(cfg::get_count(params, "F_radius", 1, 0, 8));
    double delta = cfg::get_real(params, "delta", 0.05, 0.0, 1.0);
    ConstructionBudget budget;
    budget.epsilon = cfg::get_real(params, "epsilon", 0.05, 1e-9, 0.999999);
    budget.n_samples = cfg::get_count(params, "n_samples", 100000, 1, 100000000);
    budget.n_labelings = static_cast<int>(cfg::get_count(params, "n_labelings", 5, 1, 10000));
    if (params.contains("cells"))
        budget.circle_cells = cfg::get_count(params, "cells", 0, 1, kDefaultCellCap);

    FiniteSubset F = ball(action.family(), f_radius);
    ConstructionReport report = verify_construction(action, kappa, F, delta, budget, seed);

    json per_alpha = json::array();
    std::string csv = "alpha,empirical,expected,deviation\n";
    for (std::size_t c = 0; c < report.best_stats.counts.size(); ++c) {
        auto alpha = decode_pattern(static_cast<std::int64_t>(c), report.best_stats.d, F.size());
        json row;
        row["alpha"] = alpha;
        row["empirical"] = round12(report.best_stats.empirical[c]);
        row["expected"] = round12(report.best_stats.expected[c]);
        row["deviation"] =
            round12(std::abs(report.best_stats.empirical[c] - report.best_stats.expected[c]));
        per_alpha.push_back(row);
        std::string alpha_str;
        for (std::size_t k = 0; k < alpha.size(); ++k)
            alpha_str += (k ? "-" : "") + std::to_string(alpha[k]);
        csv += alpha_str + "," + format12(report.best_stats.empirical[c]) + "," +
               format12(report.best_stats.expected[c]) + "," +
               format12(std::abs(report.best_stats.empirical[c] - report.best_stats.expected[c])) +
               "\n";
    }

    json j;
    j["s"] = round12(report.s);
    j["J"] = report.cells;
    j["epsilon"] = round12(report.epsilon);
    j["per_alpha"] = per_alpha;
    j["best_max_deviation"] = round12(report.best_max_deviation);
    j["var_bound_12eps"] = round12(report.var_bound_12eps);
    j["pass"] = report.pass;
    j["delta"] = round12(report.delta);
    j["n_samples"] = report.n_samples;
    j["n_labelings"] = report.n_labelings;
    j["best_labeling_index"] = report.best_index;
    j["max_across_labeling_variance"] = round12(report.max_across_labeling_variance);
    j["chebyshev_c"] = round12(report.chebyshev_c);
    j["chebyshev_bound"] = round12(report.chebyshev_bound);
    j["separation"] = {{"s", round12(report.separation.s)},
                       {"epsilon_achieved", round12(report.separation.epsilon_achieved)},
                       {"single_failure_rate", round12(report.separation.single_failure_rate)},
                       {"pair_failure_rate", round12(report.separation.pair_failure_rate)}};
    json labs = json::array();
    for (const auto& run : report.labelings)
        labs.push_back({{"seed", run.labeling_seed},
                        {"max_abs_deviation", round12(run.max_abs_deviation)}});
    j["labelings"] = labs;
    return {j, csv, report.pass};
}

inline ExperimentOutput run_rokhlin(const json& params, std::uint64_t seed) {
    cfg::reject_unknown_keys(
        params, {"n", "k", "k_list", "p", "n_samples", "S_radius", "certificate", "epsilon"},
        "rokhlin params");
    TowerParams base;
    base.n = static_cast<int>(cfg::get_count(params, "n", 2, 2, 64));
    base.k = static_cast<int>(cfg::get_count(params, "k", 3, 1, 10000000));
    base.p = cfg::parse_rational(params, "p", Rational(1, 2));
    std::vector<std::int64_t> ks;
    if (params.contains("k_list"))
        ks = params.at("k_list").get<std::vector<std::int64_t>>();
    else
        ks = {base.k};
    auto n_samples = cfg::get_count(params, "n_samples", 100000, 1, 100000000);
    bool with_cert = cfg::get_or<bool>(params, "certificate", false);
    int s_radius = static_cast<int>(cfg::get_count(params, "S_radius", 1, 0, base.n));
    double epsilon = cfg::get_real(params, "epsilon", 0.1, 1e-9, 1.0);

    double target = 1.0 / base.n;
    json rows = json::array();
    std::string csv = "k,exact,empirical,deviation\n";
    json j;
    bool pass = true;
    for (std::size_t idx = 0; idx < ks.size(); ++idx) {
        if (ks[idx] < 1 || ks[idx] > 10000000)
            throw ConfigError("k_list entries must lie in [1, 1e7]");
        TowerParams params_k = base;
        params_k.k = static_cast<int>(ks[idx]);
        validate(params_k);
        BaseMeasure exact = base_measure_exact(params_k);
        ActionDescriptor action = tower_shift_action(params_k);
        const auto& shift = action.as<BernoulliShiftDesc>();
        std::uint64_t stream = stream_seed(seed, "rokhlin/" + std::to_string(params_k.k));
        std::int64_t hits = 0;
        for (std::int64_t i = 0; i < n_samples; ++i) {
            Point w = sample(action, stream, static_cast<std::uint64_t>(i));
            if (in_tower_base(shift, w.as<SymbolicPoint>(), params_k)) ++hits;
        }
        double empirical = static_cast<double>(hits) / static_cast<double>(n_samples);
        double exact_d = static_cast<double>(exact.value);
        json row;
        row["k"] = params_k.k;
        row["exact"] = round12(exact_d);
        if (exact.exact) row["exact_rational"] = exact.exact->to_string();
        row["empirical"] = round12(empirical);
        row["deviation"] = round12(std::abs(exact_d - target));
        rows.push_back(row);
        csv += std::to_string(params_k.k) + "," + format12(exact_d) + "," + format12(empirical) +
               "," + format12(std::abs(exact_d - target)) + "\n";
        // Monte Carlo consistency gate
        double se = std::sqrt(std::max(exact_d * (1.0 - exact_d), 1e-12) /
                              static_cast<double>(n_samples));
        if (std::abs(empirical - exact_d) > 4.0 * se + 1e-9) pass = false;
    }
    j["n"] = base.n;
    j["p"] = base.p.to_string();
    j["target"] = round12(target);
    j["n_samples"] = n_samples;
    j["rows"] = rows;

    if (with_cert) {
        TowerParams last = base;
        last.k = static_cast<int>(ks.back());
        TowerReport tower = tower_certificate(last, n_samples, ball(GroupFamily::Z, s_radius),
                                              stream_seed(seed, "rokhlin/certificate"), epsilon);
        j["certificate"] = certificate_to_json(tower.certificate);
        j["disjointness_violations"] = tower.disjointness_violations;
        pass = pass && tower.disjointness_violations == 0 && tower.certificate.pass;
    }
    j["pass"] = pass;
    return {j, csv, pass};
}

inline ExperimentOutput run_weak_contain(const json& params, std::uint64_t seed) {
    cfg::reject_unknown_keys(params, {"n", "k", "p", "S_radius", "epsilon", "n_samples"},
                             "weak_contain params");
    TowerParams tower;
    tower.n = static_cast<int>(cfg::get_count(params, "n", 4, 2, 64));
    tower.k = static_cast<int>(cfg::get_count(params, "k", 400, 1, 10000000));
    tower.p = cfg::parse_rational(params, "p", Rational(1, 2));
    int s_radius = static_cast<int>(cfg::get_count(params, "S_radius", 1, 0, tower.n));
    double epsilon = cfg::get_real(params, "epsilon", 0.1, 1e-9, 1.0);
    auto n_samples = cfg::get_count(params, "n_samples", 200000, 1, 100000000);

    TowerReport report = tower_certificate(tower, n_samples, ball(GroupFamily::Z, s_radius),
                                           stream_seed(seed, "weak_contain"), epsilon);
    bool pass = report.certificate.pass && report.disjointness_violations == 0;
    json j;
    j["n"] = tower.n;
    j["k"] = tower.k;
    j["exact_base_measure"] = round12(static_cast<double>(report.exact_base_measure.value));
    if (report.exact_base_measure.exact)
        j["exact_base_measure_rational"] = report.exact_base_measure.exact->to_string();
    j["empirical_base_measure"] = round12(report.empirical_base_measure);
    j["disjointness_violations"] = report.disjointness_violations;
    j["certificate"] = certificate_to_json(report.certificate);
    j["pass"] = pass;
    return {j, certificate_to_csv(report.certificate), pass};
}

inline ExperimentOutput run_blend(const json& params, std::uint64_t seed) {
    cfg::reject_unknown_keys(params,
                             {"alpha", "m", "q_min", "S_radius", "epsilon", "n_samples", "m_list"},
                             "blend params");
    double alpha = cfg::parse_alpha(params, "alpha");
    int m = static_cast<int>(cfg::get_count(params, "m", 1, 1, 3));
    auto q_min = cfg::get_count(params, "q_min", 100, 1, 1000000);
    int s_radius = static_cast<int>(cfg::get_count(params, "S_radius", 1, 0, 8));
    double epsilon = cfg::get_real(params, "epsilon", 0.05, 1e-9, 1.0);
    auto n_samples = cfg::get_count(params, "n_samples", 100000, 1, 100000000);
    std::vector<int> m_list = cfg::get_or<std::vector<int>>(params, "m_list", {2, 4, 6, 8});

    ActionDescriptor action = ActionDescriptor::rotation(alpha);
    FiniteSubset S = ball(GroupFamily::Z, s_radius);
    BlendCertificate blend =
        certify_product_with_finite(action, m, quarter_arc_blend_targets(1 << m), S, epsilon,
                                    n_samples, stream_seed(seed, "blend"), q_min);
    auto schmidt = conditional_measure_check(action, m_list, TestSet::interval(0.0, 0.25),
                                             n_samples, stream_seed(seed, "schmidt"));

    json j;
    j["alpha"] = round12(alpha);
    j["m"] = m;
    j["certificate"] = certificate_to_json(blend.certificate);
    json levels = json::array();
    for (const auto& lvl : blend.levels)
        levels.push_back({{"m_index", lvl.m_index},
                          {"q", lvl.q},
                          {"defect_bound", round12(lvl.defect_bound)},
                          {"empirical_defect", round12(lvl.empirical_defect)},
                          {"empirical_measure", round12(lvl.empirical_measure)}});
    j["levels"] = levels;
    json rows = json::array();
    std::string csv = "m,q_m,measure,defect_gamma1,target,deviation\n";
    for (const auto& row : schmidt) {
        rows.push_back({{"m", row.m},
                        {"q", row.q},
                        {"measure", round12(row.measure_A)},
                        {"joint", round12(row.joint)},
                        {"defect_gamma1", round12(row.defect_gamma1)},
                        {"target", round12(row.target)},
                        {"deviation", round12(row.deviation)}});
        csv += std::to_string(row.m) + "," + std::to_string(row.q) + "," +
               format12(row.measure_A) + "," + format12(row.defect_gamma1) + "," +
               format12(row.target) + "," + format12(row.deviation) + "\n";
    }
    j["schmidt_rows"] = rows;
    j["pass"] = blend.certificate.pass;
    return {j, csv, blend.certificate.pass};
}

inline ExperimentOutput run_convex(const json& params, std::uint64_t seed) {
    cfg::reject_unknown_keys(params,
                             {"alpha", "q_min", "T_radius", "kappa", "cells", "n_samples",
                              "threshold"},
                             "convex params");
    double alpha = cfg::parse_alpha(params, "alpha");
    auto q_min = cfg::get_count(params, "q_min", 100, 1, 1000000);
    int t_radius = static_cast<int>(cfg::get_count(params, "T_radius", 1, 0, 8));
    Distribution kappa = cfg::parse_kappa(params, "kappa");
    auto cells = cfg::get_count(params, "cells", 64, 1, kDefaultCellCap);
    auto n_samples = cfg::get_count(params, "n_samples", 100000, 1, 100000000);
    double threshold = cfg::get_real(params, "threshold", 0.03, 0.0, 1.0);

    ActionDescriptor action = ActionDescriptor::rotation(alpha);
    auto qs = continued_fraction_denominators(alpha, 30);
    std::int64_t q = 0;
    for (auto cand : qs)
        if (cand >= q_min) {
            q = cand;
            break;
        }
    if (q == 0) throw ConfigError("no continued-fraction denominator >= q_min");
    TestSet A = rotation_almost_invariant_set(q);

    Partition part = circle_partition(action, cells);
    Labeling lab0 = random_labeling(part, kappa, stream_seed(seed, "convex/labeling0"));
    Labeling lab1 = random_labeling(part, kappa, stream_seed(seed, "convex/labeling1"));
    FiniteSubset T = ball(GroupFamily::Z, t_radius);
    ConvexReport report =
        convex_combination_check(action, labeling_map(part, lab0), labeling_map(part, lab1), A, T,
                                 n_samples, stream_seed(seed, "convex/sampling"));
    bool pass = report.max_marginal_deviation < threshold;

    json patterns = json::array();
    std::string csv = "alpha,blended,mixture,deviation\n";
    for (std::size_t c = 0; c < report.blended.empirical.size(); ++c) {
        auto alpha_pat = decode_pattern(static_cast<std::int64_t>(c), report.blended.d, T.size());
        patterns.push_back(
            {{"alpha", alpha_pat},
             {"blended", round12(report.blended.empirical[c])},
             {"mixture", round12(report.mixture[c])},
             {"deviation", round12(std::abs(report.blended.empirical[c] - report.mixture[c]))}});
        std::string alpha_str;
        for (std::size_t k = 0; k < alpha_pat.size(); ++k)
            alpha_str += (k ? "-" : "") + std::to_string(alpha_pat[k]);
        csv += alpha_str + "," + format12(report.blended.empirical[c]) + "," +
               format12(report.mixture[c]) + "," +
               format12(std::abs(report.blended.empirical[c] - report.mixture[c])) + "\n";
    }
    json j;
    j["alpha"] = round12(alpha);
    j["q"] = q;
    j["cells"] = cells;
    j["max_marginal_deviation"] = round12(report.max_marginal_deviation);
    j["threshold"] = round12(threshold);
    j["patterns"] = patterns;
    j["pass"] = pass;
    return {j, csv, pass};
}

inline ExperimentOutput run_gcost(const json& params, std::uint64_t seed) {
    (void)seed;  // deterministic combinatorial search, no sampling
    cfg::reject_unknown_keys(params, {"instance", "S_radius", "mode", "exact_radius", "radius_cap"},
                             "gcost params");
    if (!params.contains("instance")) throw ConfigError("gcost needs an instance");
    FiniteQuotientDesc desc = cfg::parse_quotient(params.at("instance"));
    int s_radius = static_cast<int>(cfg::get_count(params, "S_radius", 1, 1, 8));
    std::string mode = cfg::get_or<std::string>(params, "mode", "both");
    int exact_radius = static_cast<int>(cfg::get_count(params, "exact_radius", 1, 1, 2));
    int radius_cap = static_cast<int>(cfg::get_count(params, "radius_cap", 8, 1, 16));
    if (mode != "exact" && mode != "greedy" && mode != "both")
        throw ConfigError("gcost mode must be exact, greedy or both");

    FiniteSubset S = ball(desc.family, s_radius);
    auto subset_json = [](const GroupoidSubset& subset) {
        json arr = json::array();
        for (const auto& e : subset)
            arr.push_back({{"x", e.x}, {"word", e.g.to_string()}});
        return arr;
    };

    json j;
    std::string csv = "x,word\n";
    const GroupoidSubset* csv_subset = nullptr;
    GcostReport exact_report, greedy_report;
    bool have_exact = false, have_greedy = false;
    if (mode == "exact" || mode == "both") {
        exact_report = gcost_search(desc, S, GcostMode::Exact, exact_radius, radius_cap);
        have_exact = true;
        j["exact"] = {{"value", exact_report.best_value.to_string()},
                      {"value_double", round12(exact_report.best_value.to_double())},
                      {"subset", subset_json(exact_report.best_subset)},
                      {"subsets_examined", exact_report.subsets_examined},
                      {"subsets_generating", exact_report.subsets_generating},
                      {"subsets_unknown", exact_report.subsets_unknown}};
        csv_subset = &exact_report.best_subset;
    }
    if (mode == "greedy" || mode == "both") {
        greedy_report = gcost_search(desc, S, GcostMode::Greedy, exact_radius, radius_cap);
        have_greedy = true;
        j["greedy"] = {{"value", greedy_report.best_value.to_string()},
                       {"value_double", round12(greedy_report.best_value.to_double())},
                       {"subset", subset_json(greedy_report.best_subset)}};
        if (!csv_subset) csv_subset = &greedy_report.best_subset;
    }
    bool pass = true;
    if (have_exact && have_greedy) pass = exact_report.best_value <= greedy_report.best_value;
    for (const auto& e : *csv_subset)
        csv += std::to_string(e.x) + "," + csv_field(e.g.to_string()) + "\n";
    j["radius_cap"] = radius_cap;
    j["pass"] = pass;
    return {j, csv, pass};
}

// --- dispatch ------------------------------------------------------------

struct RunResult {
    std::string experiment;
    std::uint64_t seed = 0;
    json report;       // full JSON report (config echo + payload)
    std::string csv;
    bool pass = false;
    std::string error;  // error name when the experiment failed
    double wall_seconds = 0.0;
};

inline const std::set<std::string>& experiment_names() {
    static const std::set<std::string> names{"bernoulli_factor", "rokhlin", "weak_contain",
                                             "blend", "convex", "gcost"};
    return names;
}

// Runs one experiment from a validated config. Config errors throw
// ConfigError; experiment-level errors are captured in the result so the
// CLI can emit a report naming them (exit code 3).
inline RunResult run_experiment(const json& config,
                                std::optional<std::uint64_t> seed_override = std::nullopt) {
    cfg::require_object(config, "config");
    cfg::reject_unknown_keys(config, {"experiment", "seed", "params", "action"}, "config");
    std::string experiment = cfg::get_or<std::string>(config, "experiment", "");
    if (!experiment_names().count(experiment))
        throw ConfigError("unknown experiment \"" + experiment + "\"");
    std::uint64_t seed = cfg::get_or<std::uint64_t>(config, "seed", 0);
    if (seed_override) seed = *seed_override;
    json params = config.contains("params") ? config.at("params") : json::object();
    cfg::require_object(params, "params");

    ActionDescriptor action =
        config.contains("action")
            ? cfg::parse_action(config.at("action"))
            : ActionDescriptor::rotation(golden_alpha());

    RunResult result;
    result.experiment = experiment;
    result.seed = seed;

    json echo;
    echo["experiment"] = experiment;
    echo["seed"] = seed;
    echo["params"] = params;
    if (config.contains("action") || experiment == "bernoulli_factor")
        echo["action"] = cfg::action_to_json(action);

    auto started = std::chrono::steady_clock::now();
    try {
        ExperimentOutput out;
        if (experiment == "bernoulli_factor")
            out = run_bernoulli_factor(params, action, seed);
        else if (experiment == "rokhlin")
            out = run_rokhlin(params, seed);
        else if (experiment == "weak_contain")
            out = run_weak_contain(params, seed);
        else if (experiment == "blend")
            out = run_blend(params, seed);
        else if (experiment == "convex")
            out = run_convex(params, seed);
        else
            out = run_gcost(params, seed);
        result.report["experiment"] = experiment;
        result.report["seed"] = seed;
        result.report["config"] = echo;
        result.report["payload"] = out.payload;
        result.report["pass"] = out.pass;
        result.report["error"] = nullptr;
        result.csv = out.csv;
        result.pass = out.pass;
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        result.report["experiment"] = experiment;
        result.report["seed"] = seed;
        result.report["config"] = echo;
        result.report["payload"] = json::object();
        result.report["pass"] = false;
        result.report["error"] = e.name();
        result.error = e.name();
        result.csv = "";
        result.pass = false;
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                              .count();
    return result;
}

// Writes report.json / report.csv under out_dir. Wall time stays out of the
// files so identical configs produce byte-identical outputs.
inline std::vector<std::string> emit_report(const RunResult& result, const std::string& format,
                                            const std::string& out_dir) {
    if (format != "json" && format != "csv" && format != "both")
        throw ConfigError("format must be json, csv or both");
    std::vector<std::string> written;
    auto write_file = [&](const std::string& name, const std::string& contents) {
        std::string path = out_dir.empty() ? name : out_dir + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open " + path + " for writing");
        out << contents;
        if (!out) throw IoError("short write to " + path);
        written.push_back(path);
    };
    if (format == "json" || format == "both")
        write_file("report.json", result.report.dump(2) + "\n");
    if (format == "csv" || format == "both") write_file("report.csv", result.csv);
    return written;
}

}  // namespace ergolab
