#include "hjflow/hjflow.h"

#include <algorithm>
#include <exception>
#include <string>

#include "hjflow/error.hpp"
#include "hjflow/experiment.hpp"
#include "hjflow/tataru.hpp"

struct hjf_space {
  hjflow::ModelSpace space;
};

struct hjf_report {
  hjflow::Report report;
  std::string output_dir;
  std::string csv, json, summary;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_field;

hjf_status fail(hjf_status s, std::string what, std::string field = {}) {
  g_error = std::move(what);
  g_field = std::move(field);
  return s;
}

// Maps exceptions escaping the body to status codes.
template <class F>
hjf_status guarded(F&& body) {
  try {
    return body();
  } catch (const hjflow::ConfigError& e) {
    return fail(HJF_ERR_CONFIG, e.what(), e.field());
  } catch (const hjflow::NumericalError& e) {
    return fail(HJF_ERR_NUMERICAL, e.what());
  } catch (const hjflow::IoError& e) {
    return fail(HJF_ERR_IO, e.what());
  } catch (const hjflow::Error& e) {
    return fail(HJF_ERR_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(HJF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HJF_ERR_INTERNAL, "unknown exception");
  }
}

hjflow::SpacePoint point_of(const hjflow::ModelSpace& s, const double* x) {
  return s.point(std::vector<double>(x, x + s.size()));
}

}  // namespace

extern "C" {

const char* hjf_version(void) { return hjflow::kVersion; }

const char* hjf_status_string(hjf_status s) {
  switch (s) {
    case HJF_OK: return "ok";
    case HJF_ERR_ARGUMENT: return "invalid argument";
    case HJF_ERR_CONFIG: return "configuration error";
    case HJF_ERR_NUMERICAL: return "numerical error";
    case HJF_ERR_IO: return "i/o error";
    case HJF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* hjf_last_error(void) { return g_error.c_str(); }
const char* hjf_last_error_field(void) { return g_field.c_str(); }

hjf_status hjf_space_create(const char* spec_json, hjf_space** out) {
  if (!spec_json || !out) return fail(HJF_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    nlohmann::json spec;
    try {
      spec = nlohmann::json::parse(spec_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw hjflow::ConfigError("space", std::string("invalid JSON: ") + e.what());
    }
    const hjflow::ExperimentConfig c =
        hjflow::parse_config(nlohmann::json{{"schema", hjflow::kConfigSchema}, {"space", spec}});
    *out = new hjf_space{c.space.build()};
    return HJF_OK;
  });
}

void hjf_space_free(hjf_space* space) { delete space; }

size_t hjf_space_size(const hjf_space* space) { return space ? space->space.size() : 0; }

double hjf_space_kappa(const hjf_space* space) { return space ? space->space.kappa() : 0.0; }

hjf_status hjf_space_distance(const hjf_space* space, const double* x, const double* y,
                              double* out) {
  if (!space || !x || !y || !out) return fail(HJF_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = space->space.distance(point_of(space->space, x), point_of(space->space, y));
    return HJF_OK;
  });
}

hjf_status hjf_space_energy(const hjf_space* space, const double* x, double* energy,
                            double* slope) {
  if (!space || !x || !energy || !slope) return fail(HJF_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const hjflow::EnergySlope es = space->space.energy_and_slope(point_of(space->space, x));
    *energy = es.energy;
    *slope = es.slope;
    return HJF_OK;
  });
}

hjf_status hjf_space_flow(const hjf_space* space, const double* x, double t, double* out) {
  if (!space || !x || !out) return fail(HJF_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const hjflow::SpacePoint y = space->space.flow(point_of(space->space, x), t);
    std::copy(y.coords().begin(), y.coords().end(), out);
    return HJF_OK;
  });
}

hjf_status hjf_psi_eps(double eps, double r, double* out) {
  if (!out) return fail(HJF_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = hjflow::psi_eps(eps, r);
    return HJF_OK;
  });
}

hjf_status hjf_tataru(const hjf_space* space, const double* pi, const double* mu, double eps,
                      double* value, double* minimizers, size_t capacity, size_t* count) {
  if (!space || !pi || !mu || !value || (capacity && !minimizers))
    return fail(HJF_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    const hjflow::ModelSpace& s = space->space;
    const hjflow::TataruResult r =
        eps > 0.0 ? hjflow::tataru_eps(s, eps, point_of(s, pi), point_of(s, mu))
                  : hjflow::tataru(s, point_of(s, pi), point_of(s, mu));
    *value = r.value;
    std::copy_n(r.minimizers.begin(), std::min(capacity, r.minimizers.size()), minimizers);
    if (count) *count = r.minimizers.size();
    return HJF_OK;
  });
}

hjf_status hjf_run_experiment(const char* config_json, const char* command, int has_seed,
                              uint64_t seed, hjf_report** out) {
  if (!config_json || !out) return fail(HJF_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw hjflow::ConfigError("", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw hjflow::ConfigError("", "configuration must be a JSON object");
    if (command) j["command"] = command;
    if (has_seed) j["seed"] = seed;
    const hjflow::ExperimentConfig c = hjflow::parse_config(j);
    auto* r = new hjf_report{hjflow::run_experiment(c), c.output_dir, {}, {}, {}};
    r->csv = hjflow::report_csv(r->report);
    r->json = r->report.to_json().dump(2);
    for (const hjflow::CheckSummary& s : r->report.summary())
      r->summary += s.check + " rows=" + std::to_string(s.rows) +
                    " failed=" + std::to_string(s.failed) +
                    " max_violation=" + hjflow::format_number(s.max_violation) + "\n";
    *out = r;
    return HJF_OK;
  });
}

void hjf_report_free(hjf_report* report) { delete report; }

int hjf_report_passed(const hjf_report* report) {
  return report && report->report.all_pass() ? 1 : 0;
}

size_t hjf_report_row_count(const hjf_report* report) {
  return report ? report->report.rows.size() : 0;
}

size_t hjf_report_failed_count(const hjf_report* report) {
  return report ? report->report.failed() : 0;
}

hjf_status hjf_report_row(const hjf_report* report, size_t index, const char** check,
                          size_t* instance, double* value, double* bound, double* violation,
                          int* pass) {
  if (!report) return fail(HJF_ERR_ARGUMENT, "null argument");
  if (index >= report->report.rows.size()) return fail(HJF_ERR_ARGUMENT, "row index out of range");
  const hjflow::ReportRow& r = report->report.rows[index];
  if (check) *check = r.check.c_str();
  if (instance) *instance = r.instance;
  if (value) *value = r.value;
  if (bound) *bound = r.bound;
  if (violation) *violation = r.violation;
  if (pass) *pass = r.pass ? 1 : 0;
  return HJF_OK;
}

const char* hjf_report_output_dir(const hjf_report* report) {
  return report ? report->output_dir.c_str() : "";
}
const char* hjf_report_csv(const hjf_report* report) { return report ? report->csv.c_str() : ""; }
const char* hjf_report_json(const hjf_report* report) {
  return report ? report->json.c_str() : "";
}
const char* hjf_report_summary(const hjf_report* report) {
  return report ? report->summary.c_str() : "";
}

hjf_status hjf_report_write(const hjf_report* report, const char* dir, const char* format) {
  if (!report || !dir || !format) return fail(HJF_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    hjflow::emit_report(report->report, dir, hjflow::report_format_from_string(format));
    return HJF_OK;
  });
}

}  // extern "C"
