#include "ppbound/cli/report.hpp"

#include <charconv>
#include <cmath>

#include "ppbound/estimate.hpp"

namespace ppbound::cli {

using nlohmann::json;

namespace {

json assumption(double value, double tolerance, bool satisfied, const char* proxy) {
  return json{{"proxy", proxy}, {"value", value}, {"tolerance", tolerance}, {"satisfied", satisfied}};
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json to_json(const AcceptanceCheck& c) {
  return json{{"name", c.name}, {"value", c.value}, {"lo", c.lo}, {"hi", c.hi}, {"passed", c.passed}};
}

json to_json(const AssumptionReport& r) {
  const auto& tol = r.tolerances;
  double max_w = 0.0;
  double max_bias = 0.0;
  double max_h6 = 0.0;
  for (const auto& p : r.probes) {
    max_w = std::max(max_w, p.max_abs_w);
    max_bias = std::max(max_bias, p.bias_budget);
    max_h6 = std::max(max_h6, p.h6_term);
  }
  json doc;
  doc["H1"] = assumption(r.min_expected_count, tol.min_expected_count, r.h1, "min_r n c nu_r m_r");
  doc["H2"] = assumption(r.n_delta_n, tol.n_delta, r.h2, "n delta_n");
  doc["H3"] = json{{"proxy", "sigma_hat positive semidefinite with unit diagonal"},
                   {"value", r.sigma_psd},
                   {"satisfied", r.h3}};
  doc["H4"] = assumption(max_w, tol.max_weight, r.h4, "max_r |w_r(x)| over probes");
  doc["H5"] = assumption(max_bias, tol.bias_budget, r.h5, "n |sum nu kappa fbar - f| / kappa_n over probes");
  doc["H6"] = assumption(max_h6, tol.h6, r.h6, "max over probes of sum |w_r| max((n delta)^2, n nu e^{-m c n nu}, Delta)");
  doc["h6_rate"] = r.h6_rate;
  doc["delta_n"] = r.delta_n;
  doc["Delta_n"] = r.Delta_n;
  doc["n_delta_n"] = r.n_delta_n;
  doc["any_degenerate"] = r.any_degenerate;
  json probes = json::array();
  for (const auto& p : r.probes) {
    probes.push_back(json{{"point", p.point},
                          {"degenerate", p.degenerate},
                          {"kappa_norm", p.kappa_norm},
                          {"max_abs_w", p.max_abs_w},
                          {"sum_abs_w", p.sum_abs_w},
                          {"bias_budget", p.bias_budget},
                          {"h6_term", p.h6_term}});
  }
  doc["probes"] = std::move(probes);
  doc["sigma_hat"] = r.sigma_hat;
  return doc;
}

json to_json(const ArrayDiagnostics& d) {
  json doc{{"quad_form", d.quad_form},
           {"target_quad_form", d.target_quad_form},
           {"max_norm", d.max_norm},
           {"a4_satisfied", d.a4_satisfied},
           {"lindeberg_tail", d.lindeberg_tail}};
  doc["variance_error"] = d.variance_error ? json(*d.variance_error) : json(nullptr);
  return doc;
}

json to_json(const McReport& r) {
  json doc;
  doc["experiment"] = r.experiment;
  doc["c_mode"] = to_string(r.c_mode);
  doc["replicates"] = r.replicates;
  doc["failed"] = r.failed;
  doc["valid"] = r.valid;
  doc["design"] = json{{"n", r.design.n}, {"k", r.design.k}, {"scheme", scheme_tag(r.design.scheme)},
                       {"smoothing", r.design.smoothing}};
  json probes = json::array();
  for (const auto& p : r.probes) {
    probes.push_back(json{{"point", p.point},
                          {"f_true", p.f_true},
                          {"kappa_norm", p.kappa_norm},
                          {"kernel_ratio", p.kernel_ratio},
                          {"count", p.z_known.size()},
                          {"ks_known", p.ks_known},
                          {"ks_estimated", p.ks_estimated},
                          {"ks_defined", p.ks_defined},
                          {"mean", p.mean},
                          {"variance", p.variance},
                          {"coverage", p.coverage},
                          {"rmse", p.rmse},
                          {"bias", p.bias}});
  }
  doc["probes"] = std::move(probes);
  doc["correlation"] = r.correlation;
  doc["coverage"] = r.coverage;
  if (!r.rate.empty()) {
    json rate = json::array();
    for (const auto& rp : r.rate) {
      rate.push_back(json{{"n", rp.n}, {"k", rp.k}, {"smoothing", rp.smoothing}, {"rmse", rp.rmse},
                          {"probe_rmse", rp.probe_rmse}});
    }
    doc["rate"] = std::move(rate);
    doc["slope"] = r.slope;
    doc["slope_half_width"] = r.slope_half_width;
  }
  if (!r.chat.empty()) {
    json chat = json::array();
    for (const auto& cp : r.chat) {
      chat.push_back(json{{"n", cp.n},
                          {"k", cp.k},
                          {"median_abs_error", cp.median_abs_error},
                          {"q99_abs_error", cp.q99_abs_error},
                          {"degenerate", cp.degenerate}});
    }
    doc["chat"] = std::move(chat);
    doc["chat_strictly_decreasing"] = r.chat_strictly_decreasing;
  }
  return doc;
}

json to_json(const OracleResult& o) {
  return json{{"lambda", o.lambda},
              {"draws", o.draws},
              {"closed_form", {{"mean", o.closed_form.mean},
                               {"variance", o.closed_form.variance},
                               {"ratio_mean", o.closed_form.ratio_mean}}},
              {"sampled", {{"mean", o.mean}, {"variance", o.variance}, {"ratio_mean", o.ratio_mean}}},
              {"standard_error", {{"mean", o.mean_se}, {"variance", o.variance_se}, {"ratio_mean", o.ratio_se}}},
              {"delta", {{"mean", o.mean - o.closed_form.mean},
                         {"variance", o.variance - o.closed_form.variance},
                         {"ratio_mean", o.ratio_mean - o.closed_form.ratio_mean}}},
              {"ks", o.ks},
              {"ratio_moments", o.ratio_moments},
              {"ratio_moment_se", o.ratio_moment_se}};
}

}  // namespace ppbound::cli
