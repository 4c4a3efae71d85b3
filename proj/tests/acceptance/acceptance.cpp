// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Optional arguments select criteria by number.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "frechet/evaluate.hpp"
#include "properties.hpp"

using namespace frechet;

namespace {

constexpr int kReplications = 100;
constexpr std::uint64_t kSeed = 20240521;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string interval(const std::string& name, double v, double lo, double hi) {
  return name + "=" + fmt("%.4g", v) + " in [" + fmt("%g", lo) + ", " + fmt("%g", hi) + "]";
}

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

// Experiments are cached so criterion 5 reuses the n = 500 runs.
class Runs {
 public:
  const ExperimentResult& get(ModelId model, int n, const std::vector<Method>& methods,
                              PmPolicy policy = PmPolicy::shared) {
    const auto key = std::make_tuple(model, n, policy);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      bool covers = true;
      for (Method m : methods) covers = covers && it->second.find(m) != nullptr;
      if (covers) return it->second;
    }
    SimulationSpec s = SimulationSpec::defaults(model, 2);
    s.n = n;
    s.seed = kSeed;
    s.pm_policy = policy;
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult r = run_experiment(s, methods, kReplications);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "  model %s n=%d (%s): %.1fs\n", std::string(to_string(model)).c_str(), n,
                 std::string(to_string(policy)).c_str(), secs);
    for (const auto& m : r.methods) {
      if (m.failures > 0) {
        std::fprintf(stderr, "  %s: %d failed replications\n", std::string(to_string(m.method)).c_str(), m.failures);
      }
    }
    return cache_[key] = std::move(r);
  }

 private:
  std::map<std::tuple<ModelId, int, PmPolicy>, ExperimentResult> cache_;
};

double mse_m(const ExperimentResult& r, Method m) { return r.find(m)->mse_m.mean; }

bool no_failures(const ExperimentResult& r, Outcome& o) {
  int f = 0;
  for (const auto& m : r.methods) f += m.failures;
  o.check(f == 0, "failed fits=" + std::to_string(f));
  return f == 0;
}

const std::vector<Method> kAll{Method::lfr, Method::nlfr, Method::snlfr};

const SpaceSpec kSpaces[] = {{SpaceKind::wasserstein, 20, kDefaultSpdEps},
                             {SpaceKind::spd_frobenius, 3, kDefaultSpdEps},
                             {SpaceKind::spd_cholesky, 3, kDefaultSpdEps}};

Outcome criterion1(Runs& runs) {
  Outcome o;
  const ExperimentResult& r = runs.get(ModelId::m1_1, 500, kAll);
  no_failures(r, o);
  double lo = 1e300, hi = 0.0;
  for (Method m : kAll) {
    const double v = mse_m(r, m);
    o.check(in(v, 0.005, 0.025), interval(std::string(to_string(m)), v, 0.005, 0.025));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // Every pairwise ratio lies in [0.7, 1.4] iff max/min does not exceed 1.4 and min/max is at least 0.7.
  o.check(hi / lo <= 1.4 && lo / hi >= 0.7, "max/min ratio=" + fmt("%.3f", hi / lo) + " <= 1.4");
  return o;
}

Outcome criterion2(Runs& runs) {
  Outcome o;
  const ExperimentResult& r = runs.get(ModelId::m1_2, 500, kAll);
  no_failures(r, o);
  const double nl = mse_m(r, Method::nlfr), l = mse_m(r, Method::lfr);
  o.check(in(nl, 0.005, 0.05), interval("NLFR", nl, 0.005, 0.05));
  o.check(in(l, 3.4, 7.2), interval("LFR", l, 3.4, 7.2));
  o.check(l / nl >= 50.0, "LFR/NLFR=" + fmt("%.1f", l / nl) + " >= 50");
  o.detail += "; SNLFR=" + fmt("%.4g", mse_m(r, Method::snlfr)) + " (info)";
  return o;
}

Outcome criterion3(Runs& runs) {
  Outcome o;
  const ExperimentResult& r = runs.get(ModelId::m1_3, 500, kAll);
  no_failures(r, o);
  const double nl = mse_m(r, Method::nlfr), l = mse_m(r, Method::lfr);
  o.check(in(nl, 0.005, 0.05), interval("NLFR", nl, 0.005, 0.05));
  o.check(in(l, 6.5, 14.0), interval("LFR", l, 6.5, 14.0));
  o.check(!r.find(Method::snlfr)->present, "SNLFR absent");
  return o;
}

Outcome criterion4(Runs& runs) {
  Outcome o;
  const std::vector<Method> methods{Method::lfr, Method::nlfr};
  const ExperimentResult& r = runs.get(ModelId::m2_2, 500, methods, PmPolicy::independent_test);
  o.check(r.metric == "spd_cholesky", "metric=" + r.metric);
  no_failures(r, o);
  const double nl = mse_m(r, Method::nlfr), l = mse_m(r, Method::lfr);
  o.check(in(nl, 0.75, 1.5), interval("NLFR", nl, 0.75, 1.5));
  o.check(in(l, 1.15, 2.2), interval("LFR", l, 1.15, 2.2));
  int wins = 0;
  const auto& rl = r.find(Method::lfr)->replications;
  const auto& rn = r.find(Method::nlfr)->replications;
  for (int k = 0; k < kReplications; ++k) wins += rn[k].ok && rl[k].ok && rn[k].mse_m < rl[k].mse_m;
  o.check(wins >= 90, "NLFR<LFR in " + std::to_string(wins) + "/100 >= 90");
  const ExperimentResult& shared = runs.get(ModelId::m2_2, 500, methods, PmPolicy::shared);
  o.detail += "; shared P_m (info): NLFR=" + fmt("%.4g", mse_m(shared, Method::nlfr)) +
              " LFR=" + fmt("%.4g", mse_m(shared, Method::lfr));
  return o;
}

Outcome criterion5(Runs& runs) {
  Outcome o;
  for (ModelId model : {ModelId::m1_2, ModelId::m1_3}) {
    const std::string name = std::string(to_string(model));
    std::vector<double> mse, ase;
    for (int n : {100, 200, 500}) {
      const std::vector<Method> methods = n == 500 ? kAll : std::vector<Method>{Method::nlfr};
      const ExperimentResult& r = runs.get(model, n, methods);
      const MethodResult* m = r.find(Method::nlfr);
      mse.push_back(m->mse_m.mean);
      ase.push_back(m->ase_beta.value_or(-1.0));
    }
    o.check(mse[0] > mse[1] && mse[1] > mse[2],
            name + " MSE_m " + fmt("%.4g", mse[0]) + " > " + fmt("%.4g", mse[1]) + " > " + fmt("%.4g", mse[2]));
    o.check(ase[2] >= 0.0 && ase[2] <= 0.5 * ase[0],
            name + " ASE_beta(500)=" + fmt("%.4g", ase[2]) + " <= 0.5*" + fmt("%.4g", ase[0]));
  }
  return o;
}

Outcome criterion6(Runs&) {
  Outcome o;
  for (const SpaceSpec& s : kSpaces) {
    const double w = property::reduction_identity(s, 10, 50, kSeed + 6);
    o.check(w <= 1e-8, std::string(to_string(s.kind)) + " max d=" + fmt("%.2e", w) + " <= 1e-8");
  }
  return o;
}

Outcome criterion7(Runs&) {
  Outcome o;
  for (const SpaceSpec& s : kSpaces) {
    const double w = property::center_rule(s, 20, kSeed + 7);
    o.check(w <= 1e-10, std::string(to_string(s.kind)) + " max d=" + fmt("%.2e", w) + " <= 1e-10");
  }
  return o;
}

Outcome criterion8(Runs&) {
  Outcome o;
  const int iso = property::isotonic_mismatches(6, -2, 2);
  o.check(iso == 0, "isotonic mismatches=" + std::to_string(iso));
  const double clip = property::clip_optimality(3, 100, 100, kSeed + 8);
  o.check(clip <= 1e-12, "clip excess=" + fmt("%.2e", clip) + " <= 1e-12");
  for (const SpaceSpec& s : kSpaces) {
    const double a = property::metric_axioms(s, 200, kSeed + 8);
    o.check(a <= 1e-12, std::string(to_string(s.kind)) + " axiom violation=" + fmt("%.2e", a));
  }
  const double w = property::weight_mean(50, kSeed + 8);
  o.check(w <= 1e-12, "weight mean |mean-1|=" + fmt("%.2e", w) + " <= 1e-12");
  return o;
}

Outcome criterion9(Runs&) {
  Outcome o;
  Vector x(2);
  x << 0.4, -0.3;
  for (ModelId model : {ModelId::m1_2, ModelId::m2_1}) {
    const property::VMoments v = property::v_moments(model, x, 100000, kSeed + 9);
    const std::string name = std::string(to_string(model));
    o.check(v.mean_rel_err <= 0.01, name + " E[V|x] rel err=" + fmt("%.2e", v.mean_rel_err) + " <= 0.01");
    o.check(v.var_rel_err <= 0.05, name + " Var(V|x) rel err=" + fmt("%.2e", v.var_rel_err) + " <= 0.05");
  }
  const double pm = property::pm_spectrum_error(50, kSeed + 9);
  o.check(pm <= 1e-10, "P_m spectrum err=" + fmt("%.2e", pm) + " <= 1e-10");
  for (ModelId model : {ModelId::m1_1, ModelId::m1_2, ModelId::m1_3, ModelId::m2_3}) {
    const double res = property::derive_links_residual(model, 50, kSeed + 9);
    o.check(res <= 1e-6, std::string(to_string(model)) + " link residual=" + fmt("%.2e", res) + " <= 1e-6");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome(Runs&)>> criteria{criterion1, criterion2, criterion3,
                                                            criterion4, criterion5, criterion6,
                                                            criterion7, criterion8, criterion9};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  Runs runs;
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k](runs);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
