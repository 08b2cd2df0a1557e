#include "dol/us_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "dol/error.hpp"
#include "dol/numerics.hpp"
#include "dol/rng.hpp"

namespace dol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(x e^A + 1) for x > 0 without overflow.
double log_scaled_plus_one(double log_x_plus_a) {
  return log_x_plus_a > 0.0 ? log_x_plus_a + std::log1p(std::exp(-log_x_plus_a))
                            : std::log1p(std::exp(log_x_plus_a));
}

// s / (B' k), the ramp time constant.
double ramp_scale(const UsParams& p, double z, double rate) {
  return std::exp(p.w * z) / (p.b_prime() * rate);
}

}  // namespace

void validate(const UsParams& p) {
  if (!std::isfinite(p.A) || !std::isfinite(p.B) || !(p.B > 0.0) || !(p.w > 0.0) ||
      !(p.tau_m > 0.0)) {
    throw DomainError("US parameters need finite A, B > 0, w > 0, tau_M > 0");
  }
}

double us_failure_time_ramp(const UsParams& p, double z, double rate) {
  if (!(rate > 0.0)) throw DomainError("ramp rate must be positive");
  const double c = ramp_scale(p, z, rate);
  return c * log_scaled_plus_one(p.A - std::log(c));
}

double us_damage_at_hold_end(const UsParams& p, double z, const ConstantProfile& h) {
  const double s = std::exp(p.w * z);
  const double c = ramp_scale(p, z, h.rate);
  const double e = p.b_prime() * h.level / s;
  return (h.end_time - h.ramp_end()) * std::exp(-p.A + e) + std::exp(-p.A) * c * std::expm1(e);
}

ConstantLoadOutcome us_failure_time_constant(const UsParams& p, double z,
                                             const ConstantProfile& h) {
  const double t0 = h.ramp_end();
  const double tr = us_failure_time_ramp(p, z, h.rate);
  if (tr <= t0) return {Phase::ramp, tr, 1.0};
  const double s = std::exp(p.w * z);
  const double c = ramp_scale(p, z, h.rate);
  const double e = p.b_prime() * h.level / s;
  const double alpha0 = std::exp(-p.A) * c * std::expm1(e);
  const double hold_rate = std::exp(-p.A + e);
  const double tf = t0 + (1.0 - alpha0) / hold_rate;
  if (tf <= h.end_time) return {Phase::hold, tf, 1.0};
  return {Phase::survived, h.end_time, alpha0 + hold_rate * (h.end_time - t0)};
}

double us_failure_time_rcr(const UsParams& p, double z, const RcrProfile& r, double damage_at_t1) {
  if (!(damage_at_t1 < 1.0)) throw DomainError("specimen already failed before the reload");
  const double c = ramp_scale(p, z, r.reload_rate);
  const double remaining = std::max(0.0, 1.0 - damage_at_t1);
  if (remaining == 0.0) return r.hold.end_time;
  return r.hold.end_time + c * log_scaled_plus_one(p.A + std::log(remaining) - std::log(c));
}

std::optional<double> us_failure_time(const UsParams& p, double z, const LoadProfile& profile) {
  if (const auto* r = std::get_if<RampProfile>(&profile)) return us_failure_time_ramp(p, z, r->rate);
  if (const auto* c = std::get_if<ConstantProfile>(&profile)) {
    const auto o = us_failure_time_constant(p, z, *c);
    if (o.phase == Phase::survived) return std::nullopt;
    return o.time;
  }
  if (const auto* r = std::get_if<RcrProfile>(&profile)) {
    const auto o = us_failure_time_constant(p, z, r->hold);
    if (o.phase != Phase::survived) return o.time;
    return us_failure_time_rcr(p, z, *r, o.damage);
  }
  const auto& pw = std::get<PiecewiseProfile>(profile);
  const double s = std::exp(p.w * z);
  double alpha = 0.0;
  for (std::size_t j = 0; j < pw.size(); ++j) {
    const double len = pw.end_of(j) - pw.starts()[j];
    const double v = pw.values()[j];
    if (v <= 0.0 || len <= 0.0) continue;
    const double rate = std::exp(-p.A + p.b_prime() * v / s);
    if (alpha + rate * len >= 1.0) return pw.starts()[j] + (1.0 - alpha) / rate;
    alpha += rate * len;
  }
  return std::nullopt;
}

std::vector<FailureRecord> us_simulate(const UsParams& p, const GroupConfig& group, int n,
                                       std::uint64_t seed, Execution execution,
                                       const std::string& id_prefix) {
  validate(p);
  std::vector<FailureRecord> out(static_cast<std::size_t>(std::max(0, n)));
  const std::uint64_t group_seed = derive_seed(seed, streams::us_specimen, group.id);
  for_each_index(out.size(), execution, [&](std::size_t i) {
    Engine eng(derive_seed(group_seed, streams::us_specimen, i));
    std::normal_distribution<double> normal;
    const double z = normal(eng);
    FailureRecord rec;
    rec.specimen_id = id_prefix + std::to_string(i);
    rec.group = group.id;
    rec.time = us_failure_time(p, z, group.profile);
    rec.outcome = classify(group.profile, rec.time);
    out[i] = std::move(rec);
  });
  return out;
}

// ---------------------------------------------------------------------------

double reference_median_strength(const std::vector<FailureRecord>& records,
                                 const DatasetManifest& manifest) {
  for (const auto& g : manifest.groups) {
    const auto* r = std::get_if<RampProfile>(&g.profile);
    if (!r || std::fabs(r->rate / kReferenceRate - 1.0) > 1e-9) continue;
    std::vector<double> loads;
    for (const auto& rec : records) {
      if (rec.group == g.id && rec.time) loads.push_back(r->rate * *rec.time);
    }
    if (loads.empty()) break;
    const double half[] = {0.5};
    return quantiles(loads, half)[0];
  }
  throw DataError("no reference-rate ramp group with failures");
}

namespace {

enum class Equation { ramp, hold, reload };

struct FitRecord {
  std::size_t index;  // into the input records
  Equation eq;
  double z;
  double rate;     // ramp rate (initial ramp) or reload rate
  double level;    // tau_c
  double t0, t1;   // hold start and end
  double hold_rate;
  double observed;  // log of T_f, or log(T_f - T1) on the reload
};

// Log model time for the record's equation; NaN when a log argument is
// nonpositive.
double log_model_time(const FitRecord& r, double a, double b, double w, double tau_m) {
  const double bp = b / tau_m;
  const double s = std::exp(w * r.z);
  switch (r.eq) {
    case Equation::ramp: {
      const double c = s / (bp * r.rate);
      return std::log(c) + std::log(log_scaled_plus_one(a - std::log(c)));
    }
    case Equation::hold: {
      const double c = s / (bp * r.hold_rate);
      const double e = bp * r.level / s;
      const double tf = r.t0 - c + std::exp(-e) * c + std::exp(a - e);
      return tf > 0.0 ? std::log(tf) : std::numeric_limits<double>::quiet_NaN();
    }
    case Equation::reload: {
      const double ch = s / (bp * r.hold_rate);
      const double e = bp * r.level / s;
      const double alpha1 = (r.t1 - r.t0) * std::exp(-a + e) + std::exp(-a) * ch * std::expm1(e);
      // the reload log argument exceeds 1 only while alpha(T1) < 1
      if (!(alpha1 < 1.0)) return std::numeric_limits<double>::quiet_NaN();
      const double c = s / (bp * r.rate);
      return std::log(c) + std::log(log_scaled_plus_one(a + std::log1p(-alpha1) - std::log(c)));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

bool solve3(Mat3 m, Vec3 b, Vec3& x) {
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r) {
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    }
    if (!(std::fabs(m[piv][c]) > 0.0)) return false;
    std::swap(m[c], m[piv]);
    std::swap(b[c], b[piv]);
    for (int r = c + 1; r < 3; ++r) {
      const double f = m[r][c] / m[c][c];
      for (int k = c; k < 3; ++k) m[r][k] -= f * m[c][k];
      b[r] -= f * b[c];
    }
  }
  for (int c = 2; c >= 0; --c) {
    double s = b[c];
    for (int k = c + 1; k < 3; ++k) s -= m[c][k] * x[k];
    x[c] = s / m[c][c];
  }
  return true;
}

bool invert3(const Mat3& m, Mat3& inv) {
  for (int j = 0; j < 3; ++j) {
    Vec3 e{0.0, 0.0, 0.0};
    e[j] = 1.0;
    Vec3 col{};
    if (!solve3(m, e, col)) return false;
    for (int i = 0; i < 3; ++i) inv[i][j] = col[i];
  }
  return true;
}

class WeightedProblem {
 public:
  WeightedProblem(const std::vector<FitRecord>& recs, std::vector<double> weights, double tau_m)
      : recs_(recs), weights_(std::move(weights)), tau_m_(tau_m) {}

  // Returns false when any residual is undefined.
  bool residuals(const Vec3& th, std::vector<double>& r) const {
    r.resize(recs_.size());
    for (std::size_t i = 0; i < recs_.size(); ++i) {
      const double m = log_model_time(recs_[i], th[0], th[1], th[2], tau_m_);
      if (!std::isfinite(m)) return false;
      r[i] = weights_[i] * (recs_[i].observed - m);
    }
    return true;
  }

  double cost(const Vec3& th) const {
    std::vector<double> r;
    if (!residuals(th, r)) return kInf;
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
  }

  bool jacobian(const Vec3& th, const std::vector<double>& r0, std::vector<Vec3>& jac) const {
    jac.assign(recs_.size(), Vec3{});
    std::vector<double> rp, rm;
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-6 * std::max(1.0, std::fabs(th[k]));
      Vec3 tp = th, tm = th;
      tp[k] += h;
      tm[k] -= h;
      const bool okp = residuals(tp, rp);
      const bool okm = residuals(tm, rm);
      for (std::size_t i = 0; i < recs_.size(); ++i) {
        if (okp && okm) {
          jac[i][k] = (rp[i] - rm[i]) / (2.0 * h);
        } else if (okp) {
          jac[i][k] = (rp[i] - r0[i]) / h;
        } else if (okm) {
          jac[i][k] = (r0[i] - rm[i]) / h;
        } else {
          return false;
        }
      }
    }
    return true;
  }

  std::size_t size() const { return recs_.size(); }

 private:
  const std::vector<FitRecord>& recs_;
  std::vector<double> weights_;
  double tau_m_;
};

struct LmResult {
  Vec3 theta;
  double cost;
};

LmResult levenberg_marquardt(const WeightedProblem& prob, Vec3 th, int max_iter) {
  std::vector<double> r;
  if (!prob.residuals(th, r)) throw FitError("US fit: starting point has undefined residuals");
  double cost = 0.0;
  for (double v : r) cost += v * v;
  double lambda = 1e-3;
  std::vector<Vec3> jac;
  for (int it = 0; it < max_iter; ++it) {
    if (!prob.jacobian(th, r, jac)) throw FitError("US fit: Jacobian undefined");
    Mat3 jtj{};
    Vec3 jtr{};
    for (std::size_t i = 0; i < prob.size(); ++i) {
      for (int a = 0; a < 3; ++a) {
        jtr[a] += jac[i][a] * r[i];
        for (int b = 0; b < 3; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
      }
    }
    bool improved = false;
    double new_cost = cost;
    Vec3 next = th;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Mat3 m = jtj;
      for (int a = 0; a < 3; ++a) m[a][a] += lambda * std::max(jtj[a][a], 1e-12);
      Vec3 neg{-jtr[0], -jtr[1], -jtr[2]};
      Vec3 d{};
      if (solve3(m, neg, d)) {
        next = {th[0] + d[0], th[1] + d[1], th[2] + d[2]};
        new_cost = next[2] > 0.0 && next[1] > 0.0 ? prob.cost(next) : kInf;
        if (new_cost < cost) {
          improved = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (!improved) break;
    const double rel = std::max({std::fabs(next[0] - th[0]) / std::max(1.0, std::fabs(th[0])),
                                 std::fabs(next[1] - th[1]) / std::max(1.0, std::fabs(th[1])),
                                 std::fabs(next[2] - th[2]) / std::max(1.0, std::fabs(th[2]))});
    const double drop = cost - new_cost;
    th = next;
    cost = new_cost;
    prob.residuals(th, r);
    lambda = std::max(lambda / 10.0, 1e-12);
    if (rel < 1e-12 || drop <= 1e-15 * std::max(1.0, cost)) break;
  }
  return {th, cost};
}

}  // namespace

UsFitResult us_nls_fit(const std::vector<FailureRecord>& records, const DatasetManifest& manifest,
                       double tau_m, const UsFitConfig& cfg) {
  if (!(tau_m > 0.0)) throw DomainError("tau_M must be positive");
  UsFitResult result;
  std::vector<FitRecord> all;

  for (const auto& g : manifest.groups) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].group == g.id) idx.push_back(i);
    }
    if (idx.empty()) continue;
    // rank by failure time; censored specimens are the strongest
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const double ta = records[a].time.value_or(kInf);
      const double tb = records[b].time.value_or(kInf);
      return ta < tb;
    });
    const int n = static_cast<int>(idx.size());
    const auto z = cfg.order_stats == OrderStatMode::exact ? expected_normal_order_stats(n)
                                                            : blom_scores(n);
    const ConstantProfile* hold = nullptr;
    const RcrProfile* rcr = std::get_if<RcrProfile>(&g.profile);
    if (rcr) hold = &rcr->hold;
    if (const auto* c = std::get_if<ConstantProfile>(&g.profile)) hold = c;
    for (int rank = 0; rank < n; ++rank) {
      const auto& rec = records[idx[rank]];
      check_consistent(rec, g);
      FitRecord fr{};
      fr.index = idx[rank];
      fr.z = z[rank];
      if (!rec.time) {
        result.unusable_ids.push_back(rec.specimen_id);
        continue;
      }
      const double t = *rec.time;
      if (const auto* r = std::get_if<RampProfile>(&g.profile)) {
        fr.eq = Equation::ramp;
        fr.rate = r->rate;
        fr.observed = std::log(t);
      } else {
        fr.level = hold->level;
        fr.t0 = hold->ramp_end();
        fr.t1 = hold->end_time;
        fr.hold_rate = hold->rate;
        if (rec.outcome == Outcome::failed_ramp) {
          fr.eq = Equation::ramp;
          fr.rate = hold->rate;
          fr.observed = std::log(t);
        } else if (rec.outcome == Outcome::failed_constant) {
          fr.eq = Equation::hold;
          fr.observed = std::log(t);
        } else {
          fr.eq = Equation::reload;
          fr.rate = rcr->reload_rate;
          fr.observed = std::log(t - hold->end_time);
        }
      }
      all.push_back(fr);
    }
  }
  if (all.size() < 4) throw FitError("US fit needs at least 4 usable records");

  // coarse grid start on the unweighted problem
  Vec3 theta{68.0, 80.0, 0.4};
  if (cfg.start) {
    theta = {cfg.start->A, cfg.start->B, cfg.start->w};
  } else {
    double best = kInf;
    std::vector<FitRecord> sub;
    for (std::size_t i = 0; i < all.size(); i += std::max<std::size_t>(1, all.size() / 400)) {
      sub.push_back(all[i]);
    }
    for (double a = 10.0; a <= 150.0; a += 5.0) {
      for (double b = 10.0; b <= 160.0; b += 5.0) {
        for (double w : {0.1, 0.2, 0.3, 0.45, 0.6, 0.8}) {
          double c = 0.0;
          for (const auto& r : sub) {
            const double m = log_model_time(r, a, b, w, tau_m);
            if (!std::isfinite(m)) continue;  // exclusions do not disqualify a start
            c += (r.observed - m) * (r.observed - m);
          }
          if (c < best) {
            best = c;
            theta = {a, b, w};
          }
        }
      }
    }
  }

  std::vector<FitRecord> used;
  std::vector<double> weights;
  for (int outer = 1; outer <= cfg.max_outer_iterations; ++outer) {
    used.clear();
    weights.clear();
    std::vector<std::string> excluded;
    const double bp = theta[1] / tau_m;
    for (const auto& r : all) {
      if (!std::isfinite(log_model_time(r, theta[0], theta[1], theta[2], tau_m))) {
        excluded.push_back(records[r.index].specimen_id);
        continue;
      }
      used.push_back(r);
      const bool weighted =
          r.eq == Equation::hold || (cfg.weight_rcr && r.eq == Equation::reload);
      weights.push_back(weighted ? 1.0 / (bp * r.level) : 1.0);
    }
    if (used.size() < 4) throw FitError("US fit: too many excluded records");
    WeightedProblem prob(used, weights, tau_m);
    const LmResult lm = levenberg_marquardt(prob, theta, cfg.max_inner_iterations);
    double rel = 0.0;
    for (int k = 0; k < 3; ++k) {
      rel = std::max(rel, std::fabs(lm.theta[k] - theta[k]) / std::max(1e-12, std::fabs(theta[k])));
    }
    theta = lm.theta;
    result.trace.push_back({outer, theta[0], theta[1], theta[2], lm.cost,
                            static_cast<int>(excluded.size())});
    result.excluded_ids = std::move(excluded);
    result.iterations = outer;
    if (rel < cfg.rel_tol && outer > 1) break;
    if (outer == cfg.max_outer_iterations) {
      std::string tail;
      for (std::size_t k = result.trace.size() - std::min<std::size_t>(4, result.trace.size());
           k < result.trace.size(); ++k) {
        const auto& t = result.trace[k];
        tail += " (" + std::to_string(t.A) + ", " + std::to_string(t.B) + ", " + std::to_string(t.w) +
                "; excluded " + std::to_string(t.excluded) + ")";
      }
      throw ConvergenceError("US fit did not settle within the outer iteration budget; last iterates" + tail);
    }
  }

  WeightedProblem prob(used, weights, tau_m);
  std::vector<double> r;
  prob.residuals(theta, r);
  std::vector<Vec3> jac;
  if (!prob.jacobian(theta, r, jac)) throw FitError("US fit: Jacobian undefined at the estimate");
  Mat3 jtj{};
  double rss = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    rss += r[i] * r[i];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
    }
  }
  Mat3 cov{};
  if (!invert3(jtj, cov)) throw FitError("US fit: singular information matrix");
  const double sigma2 = rss / static_cast<double>(r.size() - 3);
  result.estimate = UsParams{theta[0], theta[1], theta[2], tau_m};
  result.se_A = std::sqrt(sigma2 * cov[0][0]);
  result.se_B = std::sqrt(sigma2 * cov[1][1]);
  result.se_w = std::sqrt(sigma2 * cov[2][2]);
  result.records_used = static_cast<int>(used.size());
  return result;
}

}  // namespace dol
