#pragma once

#include <string>
#include <utility>
#include <vector>

#include "riskscope/diagnostics.hpp"
#include "riskscope/io.hpp"
#include "riskscope/mc.hpp"

namespace riskscope {

// JSON views of the diagnostics and Monte Carlo report types.  Kept separate
// from io.hpp so the core serialization layer does not depend on the
// numerical modules.

inline Json flags_to_json(const std::vector<std::pair<std::string, double>>& flags) {
    Json j = Json::object();
    for (const auto& [k, v] : flags) j[k] = v;
    return j;
}

inline Json int_vector_to_json(const std::vector<int>& v) {
    Json arr = Json::array();
    for (int x : v) arr.push_back(x);
    return arr;
}

inline Json rip_report_to_json(const RipReport& r) {
    Json j;
    j["s"] = r.s;
    j["delta_s"] = r.delta_s;
    j["worst_support"] = int_vector_to_json(r.worst_support);
    j["method"] = rip_method_name(r.method);
    j["supports_checked"] = r.supports_checked;
    return j;
}

inline Json cone_report_to_json(const ConeConstantReport& r) {
    Json j;
    j["value"] = r.value;
    j["c0"] = r.c0;
    j["certificate_side"] = r.certificate_side;
    j["minimizer_u"] = vector_to_json(r.minimizer_u);
    j["flags"] = flags_to_json(r.flags);
    return j;
}

inline Json lasso_constants_to_json(const LassoConstants& c) {
    Json j;
    j["gamma"] = c.gamma;
    j["c0"] = c.c0;
    j["C_bar"] = c.C_bar;
    j["C_under"] = c.C_under;
    j["lambda_threshold"] = c.lambda_threshold;
    return j;
}

inline Json compat_adversary_to_json(const CompatAdversary& a) {
    Json j;
    j["t0"] = a.t0;
    j["gamma"] = a.gamma;
    j["phi"] = a.phi;
    j["q"] = a.q;
    j["beta_star"] = vector_to_json(a.beta_star);
    j["u"] = vector_to_json(a.u);
    return j;
}

// Packing elements are serialized as sorted support-index lists, which is
// both compact and enough to reconstruct the 0/1 vectors.
inline Json vg_packing_to_json(const VgPacking& v) {
    Json j;
    j["p"] = v.p;
    j["d"] = v.d;
    j["cardinality"] = static_cast<std::int64_t>(v.omega.size());
    j["log_card"] = v.log_card;
    j["log_card_bound"] = 0.5 * v.d * std::log(static_cast<double>(v.p) / (5.0 * v.d));
    Json supports = Json::array();
    for (const auto& w : v.omega) {
        Json sup = Json::array();
        for (int i = 0; i < w.size(); ++i)
            if (w[i] != 0.0) sup.push_back(i);
        supports.push_back(std::move(sup));
    }
    j["supports"] = std::move(supports);
    return j;
}

inline Json double_vector_to_json(const std::vector<double>& v) {
    Json arr = Json::array();
    for (double x : v) arr.push_back(extended_to_json(x));
    return arr;
}

inline Json interval_to_json(const Interval& iv) {
    Json j;
    j["lo"] = extended_to_json(iv.lo);
    j["hi"] = extended_to_json(iv.hi);
    return j;
}

inline Json fcurve_to_json(const FCurveEstimate& f) {
    Json j;
    j["grid"] = double_vector_to_json(f.grid);
    j["f_hat"] = double_vector_to_json(f.f_hat);
    j["std_err"] = double_vector_to_json(f.std_err);
    j["t_f_hat"] = f.t_f_hat;
    j["t_f_ci"] = interval_to_json(f.t_f_ci);
    j["excluded"] = double_vector_to_json(f.excluded);
    j["flags"] = flags_to_json(f.flags);
    return j;
}

// CSV with one row per grid point: t, f_hat, std_err.
inline std::string fcurve_to_csv(const FCurveEstimate& f) {
    std::string out = "t,f_hat,std_err\n";
    for (std::size_t k = 0; k < f.grid.size(); ++k) {
        out += format_double(f.grid[k]);
        out += ',';
        out += format_double(f.f_hat[k]);
        out += ',';
        out += format_double(f.std_err[k]);
        out += '\n';
    }
    return out;
}

inline Json risk_sample_to_json(const RiskSample& s, bool include_risks = true) {
    Json j;
    j["median_hat"] = s.median_hat;
    j["mean_hat"] = s.mean_hat;
    j["std_err"] = s.std_err;
    j["reps"] = s.reps;
    j["failures"] = s.failures;
    if (include_risks) j["risks"] = double_vector_to_json(s.risks);
    j["flags"] = flags_to_json(s.flags);
    return j;
}

inline Json concentration_to_json(const ConcentrationReport& r) {
    Json j;
    j["sigma"] = r.sigma;
    j["confidence"] = r.confidence;
    j["median_hat"] = r.median_hat;
    j["samples"] = r.samples;
    j["needed_reps"] = r.needed_reps;
    j["underpowered"] = r.underpowered;
    j["all_pass"] = r.all_pass;
    Json checks = Json::array();
    for (const auto& c : r.checks) {
        Json cj;
        cj["x"] = c.x;
        cj["limit"] = c.limit;
        cj["upper_freq"] = c.upper_freq;
        cj["upper_cp_lower"] = c.upper_cp_lower;
        cj["upper_pass"] = c.upper_pass;
        cj["lower_freq"] = c.lower_freq;
        cj["lower_cp_lower"] = c.lower_cp_lower;
        cj["lower_pass"] = c.lower_pass;
        checks.push_back(std::move(cj));
    }
    j["checks"] = std::move(checks);
    return j;
}

inline Json proximity_check_to_json(const ProximityCheck& c) {
    Json j;
    j["name"] = c.name;
    j["constant"] = c.constant;
    j["gap"] = c.gap;
    j["ci_slack"] = c.ci_slack;
    j["limit"] = c.limit;
    j["pass"] = c.pass;
    return j;
}

inline Json proximity_to_json(const ProximityReport& r) {
    Json j;
    j["sigma"] = r.sigma;
    j["t_f_hat"] = r.t_f_hat;
    j["median_hat"] = r.median_hat;
    j["mean_hat"] = r.mean_hat;
    j["median_check"] = proximity_check_to_json(r.median_check);
    j["mean_check"] = proximity_check_to_json(r.mean_check);
    j["all_pass"] = r.all_pass;
    return j;
}

}  // namespace riskscope
