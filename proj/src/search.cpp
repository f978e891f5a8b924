#include "artdelay/search.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace artdelay {

namespace {

const char* status_name(FeasStatus s) {
  switch (s) {
    case FeasStatus::Feasible: return "feasible";
    case FeasStatus::Infeasible: return "infeasible";
    default: return "inconclusive";
  }
}

struct ProbeResult {
  ProbeRecord record;
  std::optional<Certificate> certificate;
  bool feasible() const { return record.status == FeasStatus::Feasible; }
};

// One feasibility probe; inconclusive solves count as infeasible for the
// search but keep their note.
template <typename BuildLmi>
ProbeResult run_probe(double value, std::vector<int> q, BuildLmi&& build,
                      const SolverSettings& solver) {
  ProbeResult res;
  res.record.value = value;
  res.record.q = std::move(q);
  AffineLmi lmi;
  try {
    lmi = build();
  } catch (const std::exception& e) {
    res.record.status = FeasStatus::Infeasible;
    res.record.note = std::string("condition not built: ") + e.what();
    return res;
  }
  FeasibilityOutcome out = solve_feasibility(lmi, solver);
  res.record.status = out.status;
  res.record.lambda = out.best_lambda;
  if (out.status == FeasStatus::Inconclusive)
    res.record.note = "treated as infeasible: " + out.message;
  if (out.status == FeasStatus::Feasible) res.certificate = std::move(out.certificate);
  return res;
}

// Shared bisection-for-maximum driver. probe(value) evaluates feasibility at
// a parameter value; the feasible set is assumed (and then validated) to be
// an interval attached to `lo`.
template <typename Probe>
SearchReport bisect_max(const std::string& parameter, double lo, double hi,
                        const SearchSettings& st, Probe&& probe) {
  if (!(lo >= 0) || !(hi > lo))
    throw std::invalid_argument("search: invalid range");

  SearchReport rep;
  rep.parameter = parameter;

  auto record = [&](ProbeResult&& r) -> bool {
    rep.probes.push_back(r.record);
    if (r.feasible() && r.record.value >= rep.best) {
      rep.best = r.record.value;
      rep.best_q = r.record.q;
      rep.certificate = std::move(r.certificate);
    }
    return r.record.status == FeasStatus::Feasible;
  };

  // upper end first: if feasible the whole range is accepted
  if (record(probe(hi))) {
    rep.found = true;
    rep.bracket_lo = rep.bracket_hi = hi;
    rep.message = "feasible at the upper end of the range";
    return rep;
  }
  if (!record(probe(lo))) {
    rep.found = false;
    rep.bracket_lo = lo;
    rep.bracket_hi = hi;
    rep.message = "infeasible at the lower end of the range";
    return rep;
  }

  double flo = lo, fhi = hi;  // feasible .. infeasible bracket
  const double tol_floor = parameter == "sigma" ? 1e-6 : 0.0;
  while (fhi - flo > st.rel_tol * std::max(flo, tol_floor)) {
    const double mid = 0.5 * (flo + fhi);
    if (record(probe(mid)))
      flo = mid;
    else
      fhi = mid;
  }
  rep.found = true;
  rep.best = flo;
  rep.bracket_lo = flo;
  rep.bracket_hi = fhi;

  // interior validation probes guard against disconnected feasible sets
  for (int i = 1; i <= st.validation_probes; ++i) {
    const double v = lo + (flo - lo) * i / (st.validation_probes + 1);
    if (v <= lo || v >= flo) continue;
    record(probe(v));
  }
  std::vector<ProbeRecord> sorted = rep.probes;
  std::sort(sorted.begin(), sorted.end(),
            [](const ProbeRecord& a, const ProbeRecord& b) { return a.value < b.value; });
  int changes = 0;
  for (size_t i = 1; i < sorted.size(); ++i) {
    const bool a = sorted[i - 1].status == FeasStatus::Feasible;
    const bool b = sorted[i].status == FeasStatus::Feasible;
    if (a != b) ++changes;
  }
  if (changes > 1) {
    rep.local_boundary = true;
    rep.message = "feasibility is not monotone over the probed range; the reported "
                  "boundary is local";
  } else {
    rep.message = "boundary located by bisection";
  }
  return rep;
}

}  // namespace

SearchReport max_h(const LtiPlant& plant, const DerivativeController& ideal,
                   double alpha, const DelayRule& rule,
                   std::pair<double, double> h_range, double sigma,
                   const SearchSettings& settings) {
  auto probe = [&](double h) {
    std::vector<int> q;
    try {
      q = rule.rule_based ? choose_delays(h, ideal.r()) : rule.fixed;
    } catch (const std::exception& e) {
      ProbeResult res;
      res.record.value = h;
      res.record.status = FeasStatus::Infeasible;
      res.record.note = std::string("delay rule failed: ") + e.what();
      return res;
    }
    return run_probe(
        h, q,
        [&, q]() {
          SampledController ctrl = map_gains(ideal, h, q);
          return sigma > 0 ? build_phi_e(plant, ctrl, alpha, sigma)
                           : build_phi(plant, ctrl, alpha);
        },
        settings.solver);
  };
  return bisect_max("h", h_range.first, h_range.second, settings, probe);
}

SearchReport max_h(const PidPlant& plant, const PidController& ideal, double alpha,
                   int q, double sigma, std::pair<double, double> h_range,
                   const SearchSettings& settings) {
  if (q < 1) throw std::invalid_argument("max_h: q must be >= 1");
  auto probe = [&](double h) {
    return run_probe(
        h, {q},
        [&]() {
          SampledPidController ctrl = map_pid_gains(ideal, h, q, sigma);
          return build_psi(plant, ctrl, alpha);
        },
        settings.solver);
  };
  return bisect_max("h", h_range.first, h_range.second, settings, probe);
}

SearchReport max_sigma(const LtiPlant& plant, const DerivativeController& ideal,
                       double h, const std::vector<int>& q, double alpha,
                       std::pair<double, double> sigma_range,
                       const SearchSettings& settings) {
  if (sigma_range.second >= 1)
    throw std::invalid_argument("max_sigma: range must stay below 1");
  SampledController ctrl = map_gains(ideal, h, q);
  auto probe = [&](double sigma) {
    return run_probe(
        sigma, q,
        [&]() {
          return sigma > 0 ? build_phi_e(plant, ctrl, alpha, sigma)
                           : build_phi(plant, ctrl, alpha);
        },
        settings.solver);
  };
  return bisect_max("sigma", sigma_range.first, sigma_range.second, settings, probe);
}

SearchReport max_sigma(const PidPlant& plant, const PidController& ideal, double h,
                       int q, double alpha, std::pair<double, double> sigma_range,
                       const SearchSettings& settings) {
  if (sigma_range.second >= 1)
    throw std::invalid_argument("max_sigma: range must stay below 1");
  auto probe = [&](double sigma) {
    return run_probe(
        sigma, {q},
        [&]() {
          SampledPidController ctrl = map_pid_gains(ideal, h, q, sigma);
          return build_psi(plant, ctrl, alpha);
        },
        settings.solver);
  };
  return bisect_max("sigma", sigma_range.first, sigma_range.second, settings, probe);
}

SweepReport sweep_q(const PidPlant& plant, const PidController& ideal, double alpha,
                    double sigma, std::pair<int, int> q_range,
                    std::pair<double, double> h_range,
                    const SearchSettings& settings) {
  if (q_range.first < 1 || q_range.second < q_range.first)
    throw std::invalid_argument("sweep_q: invalid q range");
  SweepReport rep;
  for (int q = q_range.first; q <= q_range.second; ++q) {
    SearchReport r = max_h(plant, ideal, alpha, q, sigma, h_range, settings);
    SweepRow row;
    row.q = q;
    row.found = r.found;
    row.best_h = r.found ? r.best : 0.0;
    row.message = r.message;
    if (r.found && (!rep.found || row.best_h > rep.best_h)) {
      rep.found = true;
      rep.best_q = q;
      rep.best_h = row.best_h;
      rep.best = std::move(r);
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

nlohmann::json SearchReport::to_json() const {
  nlohmann::json j;
  j["parameter"] = parameter;
  j["found"] = found;
  j["best"] = best;
  j["best_q"] = best_q;
  j["bracket"] = {bracket_lo, bracket_hi};
  j["local_boundary"] = local_boundary;
  j["message"] = message;
  nlohmann::json ps = nlohmann::json::array();
  for (const auto& p : probes) {
    ps.push_back({{"value", p.value},
                  {"q", p.q},
                  {"status", status_name(p.status)},
                  {"lambda", p.lambda},
                  {"note", p.note}});
  }
  j["probes"] = std::move(ps);
  if (certificate) j["certificate"] = certificate->to_json();
  return j;
}

std::string SearchReport::to_csv() const {
  std::ostringstream os;
  os << "value,status,lambda,q,note\n";
  os.precision(17);
  for (const auto& p : probes) {
    os << p.value << ',' << status_name(p.status) << ',' << p.lambda << ',';
    for (size_t i = 0; i < p.q.size(); ++i) os << (i ? " " : "") << p.q[i];
    os << ',' << '"' << p.note << '"' << '\n';
  }
  return os.str();
}

nlohmann::json SweepReport::to_json() const {
  nlohmann::json j;
  j["found"] = found;
  j["best_q"] = best_q;
  j["best_h"] = best_h;
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& r : rows)
    rs.push_back({{"q", r.q}, {"found", r.found}, {"best_h", r.best_h}, {"message", r.message}});
  j["rows"] = std::move(rs);
  if (best) j["best_search"] = best->to_json();
  return j;
}

std::string SweepReport::to_csv() const {
  std::ostringstream os;
  os << "q,found,best_h,message\n";
  os.precision(17);
  for (const auto& r : rows)
    os << r.q << ',' << (r.found ? 1 : 0) << ',' << r.best_h << ',' << '"'
       << r.message << '"' << '\n';
  return os.str();
}

}  // namespace artdelay
