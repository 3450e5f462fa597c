#include "prefopt/model.hpp"

#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "prefopt/error.hpp"

namespace prefopt {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid_input";
    case ErrorCode::kPrecondition: return "precondition_failed";
    case ErrorCode::kInstanceTooLarge: return "instance_too_large";
    case ErrorCode::kTimeLimitExceeded: return "time_limit_exceeded";
    case ErrorCode::kEmptyInstance: return "empty_instance";
    case ErrorCode::kParseFailure: return "parse_failure";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kAllBackendsFailed: return "all_backends_failed";
    case ErrorCode::kUnknownSpotId: return "unknown_spot_id";
    case ErrorCode::kUnknownCandidateId: return "unknown_candidate_id";
    case ErrorCode::kMissingBinding: return "missing_binding";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kApiUnavailable: return "api_unavailable";
    case ErrorCode::kBackendError: return "backend_error";
    case ErrorCode::kStorageError: return "storage_error";
  }
  return "unknown";
}

// ---- ProblemInstance ------------------------------------------------------

std::vector<std::string> ProblemInstance::Validate() const {
  std::vector<std::string> out;
  if (constraint_values.size() != thresholds.size()) {
    out.push_back("constraint count mismatch: " + std::to_string(constraint_values.size()) +
                  " constraint maps, " + std::to_string(thresholds.size()) + " thresholds");
  }
  for (const auto& item : items) {
    if (!objective_values.contains(item)) out.push_back("missing objective value: " + item);
    for (std::size_t l = 0; l < constraint_values.size(); ++l) {
      if (!constraint_values[l].contains(item)) {
        out.push_back("missing constraint value " + std::to_string(l) + ": " + item);
      }
    }
  }
  return out;
}

double ProblemInstance::Objective(const std::set<std::string>& selected) const {
  double total = 0.0;
  for (const auto& item : selected) total += objective_values.at(item);
  return total;
}

bool ProblemInstance::IsFeasible(const std::set<std::string>& selected) const {
  for (std::size_t l = 0; l < thresholds.size(); ++l) {
    double used = 0.0;
    for (const auto& item : selected) used += constraint_values[l].at(item);
    if (used > thresholds[l]) return false;
  }
  return true;
}

// ---- TimeMatrix -----------------------------------------------------------

TimeMatrix::TimeMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), data_(std::move(row_major)) {
  if (data_.size() != n_ * n_) {
    throw Error(ErrorCode::kInvalidInput, "travel matrix is not square");
  }
}

TimeMatrix TimeMatrix::Select(std::span<const std::size_t> keep) const {
  TimeMatrix out(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t j = 0; j < keep.size(); ++j) out(i, j) = (*this)(keep[i], keep[j]);
  }
  return out;
}

// ---- OpInstance -----------------------------------------------------------

std::optional<std::size_t> OpInstance::IndexOf(const SpotId& id) const {
  for (std::size_t i = 0; i < spots.size(); ++i) {
    if (spots[i].id == id) return i;
  }
  return std::nullopt;
}

const char* SolveStatusName(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kEmpty: return "empty";
    case SolveStatus::kTimeLimit: return "time_limit";
    case SolveStatus::kFeasible: return "feasible";
    case SolveStatus::kOverBudget: return "over_budget";
  }
  return "unknown";
}

std::optional<SolveStatus> ParseSolveStatus(const std::string& name) {
  for (auto s : {SolveStatus::kOptimal, SolveStatus::kEmpty, SolveStatus::kTimeLimit,
                 SolveStatus::kFeasible, SolveStatus::kOverBudget}) {
    if (name == SolveStatusName(s)) return s;
  }
  return std::nullopt;
}

std::vector<std::string> ValidateInstance(const OpInstance& inst) {
  std::vector<std::string> out;
  const std::size_t n = inst.spots.size();
  if (n == 0) {
    out.push_back("instance has no spots");
    return out;
  }
  if (inst.depot_index >= n) out.push_back("depot index out of range");

  std::unordered_set<std::string> ids;
  for (const auto& s : inst.spots) {
    if (s.id.empty()) out.push_back("empty spot id");
    if (!ids.insert(s.id).second) out.push_back("duplicate spot id: " + s.id);
    if (!(s.lat >= -90.0 && s.lat <= 90.0)) out.push_back("latitude out of range: " + s.id);
    if (!(s.lon >= -180.0 && s.lon <= 180.0)) out.push_back("longitude out of range: " + s.id);
  }

  if (inst.travel_time.size() != n) {
    out.push_back("travel matrix dimension " + std::to_string(inst.travel_time.size()) +
                  " does not match spot count " + std::to_string(n));
  } else {
    bool negative = false, diagonal = false, non_finite = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double t = inst.travel_time(i, j);
        if (!std::isfinite(t)) non_finite = true;
        else if (t < 0.0) negative = true;
        if (i == j && t != 0.0) diagonal = true;
      }
    }
    if (negative) out.push_back("negative travel time");
    if (non_finite) out.push_back("non-finite travel time");
    if (diagonal) out.push_back("non-zero travel matrix diagonal");
  }

  if (inst.score.size() != n) out.push_back("score count does not match spot count");
  if (inst.duration.size() != n) out.push_back("duration count does not match spot count");
  for (std::size_t i = 0; i < std::min(n, inst.score.size()); ++i) {
    if (!(inst.score[i] >= kMinScore && inst.score[i] <= kMaxScore)) {
      out.push_back("score out of [0,10]: " + inst.spots[i].id);
    }
  }
  for (std::size_t i = 0; i < std::min(n, inst.duration.size()); ++i) {
    if (!(inst.duration[i] >= 0.0) || !std::isfinite(inst.duration[i])) {
      out.push_back("negative duration: " + inst.spots[i].id);
    }
  }
  if (inst.depot_index < n) {
    if (inst.depot_index < inst.score.size() && inst.score[inst.depot_index] != 0.0) {
      out.push_back("depot score must be 0");
    }
    if (inst.depot_index < inst.duration.size() && inst.duration[inst.depot_index] != 0.0) {
      out.push_back("depot duration must be 0");
    }
  }
  if (!(inst.budget_minutes > 0.0) || !std::isfinite(inst.budget_minutes)) {
    out.push_back("budget must be positive");
  }
  if (!(inst.lambda_v >= 0.0) || !std::isfinite(inst.lambda_v)) {
    out.push_back("lambda_v must be non-negative");
  }
  if (!(inst.lambda_t >= 0.0) || !std::isfinite(inst.lambda_t)) {
    out.push_back("lambda_t must be non-negative");
  }
  return out;
}

OpInstance ReduceInstance(const OpInstance& inst) {
  const std::size_t d = inst.depot_index;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (i == d) {
      keep.push_back(i);
      continue;
    }
    if (inst.score[i] <= 0.0) continue;
    // Same fold order as EvaluateRoute on [depot, i, depot].
    double round_trip = 0.0;
    round_trip += inst.travel_time(d, i) + inst.duration[i];
    round_trip += inst.travel_time(i, d) + inst.duration[d];
    if (round_trip > inst.budget_minutes) continue;
    keep.push_back(i);
  }
  if (keep.size() == inst.size()) return inst;

  OpInstance out;
  out.budget_minutes = inst.budget_minutes;
  out.lambda_v = inst.lambda_v;
  out.lambda_t = inst.lambda_t;
  out.travel_time = inst.travel_time.Select(keep);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const std::size_t i = keep[k];
    if (i == d) out.depot_index = k;
    out.spots.push_back(inst.spots[i]);
    out.score.push_back(inst.score[i]);
    out.duration.push_back(inst.duration[i]);
  }
  return out;
}

double Objective(const OpInstance& inst, double reward, double total_minutes) {
  return inst.lambda_v * reward - inst.lambda_t * (total_minutes / kMinutesPerHour);
}

Itinerary EvaluateRoute(const OpInstance& inst, std::span<const SpotId> route) {
  Itinerary out;
  if (route.empty()) {
    out.status = SolveStatus::kEmpty;
    return out;
  }
  std::vector<std::size_t> idx;
  idx.reserve(route.size() + 1);
  for (const auto& id : route) {
    auto i = inst.IndexOf(id);
    if (!i) throw Error(ErrorCode::kUnknownSpotId, "unknown spot id in route: " + id);
    idx.push_back(*i);
  }
  if (idx.front() != inst.depot_index) idx.insert(idx.begin(), inst.depot_index);
  if (idx.size() == 1 || idx.back() != inst.depot_index) idx.push_back(inst.depot_index);
  if (idx.size() == 2) {
    out.status = SolveStatus::kEmpty;
    return out;
  }

  for (std::size_t i : idx) out.route.push_back(inst.spots[i].id);
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    const std::size_t a = idx[k], b = idx[k + 1];
    const double travel = inst.travel_time(a, b);
    const double stay = inst.duration[b];
    out.legs.push_back({inst.spots[a].id, inst.spots[b].id, travel});
    if (b != inst.depot_index) {
      out.stays.push_back({inst.spots[b].id, stay});
      out.total_reward += inst.score[b];
    }
    out.total_minutes += travel + stay;
  }
  out.objective = Objective(inst, out.total_reward, out.total_minutes);
  out.status = out.total_minutes <= inst.budget_minutes ? SolveStatus::kFeasible
                                                        : SolveStatus::kOverBudget;
  return out;
}

EvalMetrics ComputeMetrics(const Itinerary& it, double budget_minutes) {
  EvalMetrics m;
  m.time_deviation_hours = std::abs(budget_minutes - it.total_minutes) / kMinutesPerHour;
  m.success = it.total_minutes <= budget_minutes;
  m.total_reward = it.total_reward;
  m.poi_count = it.poi_count();
  return m;
}

ProblemInstance ToProblemInstance(const OpInstance& inst) {
  ProblemInstance p;
  p.constraint_values.resize(1);
  p.thresholds.push_back(inst.budget_minutes);
  for (std::size_t s = 0; s < inst.size(); ++s) {
    for (std::size_t t = 0; t < inst.size(); ++t) {
      if (s == t) continue;
      std::string item = inst.spots[s].id + "->" + inst.spots[t].id;
      p.items.push_back(item);
      p.objective_values[item] = inst.score[t];
      p.constraint_values[0][item] = inst.duration[t] + inst.travel_time(s, t);
    }
  }
  return p;
}

std::string FormatDuration(double minutes) {
  const long long total = static_cast<long long>(std::floor(minutes + 0.5));
  const long long h = total / 60;
  const long long m = total % 60;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%lld hour%s %lld minute%s", h, h == 1 ? "" : "s", m,
                m == 1 ? "" : "s");
  return buf;
}

// ---- MealInstance ---------------------------------------------------------

std::vector<std::string> MealInstance::Validate() const {
  std::vector<std::string> out;
  if (!(calorie_limit > 0.0) || !std::isfinite(calorie_limit)) {
    out.push_back("calorie limit must be positive");
  }
  std::set<std::string> names;
  for (const auto& m : must_have) {
    if (!(m.kcal >= 0.0) || !std::isfinite(m.kcal)) out.push_back("negative calories: " + m.name);
    if (!(m.quantity >= 0.0)) out.push_back("negative quantity: " + m.name);
    if (!names.insert(m.name).second) out.push_back("duplicate must-have: " + m.name);
  }
  names.clear();
  for (const auto& o : optional) {
    if (!(o.kcal >= 0.0) || !std::isfinite(o.kcal)) out.push_back("negative calories: " + o.name);
    if (!(o.priority >= 0.0) || !std::isfinite(o.priority)) {
      out.push_back("negative priority: " + o.name);
    }
    if (!names.insert(o.name).second) out.push_back("duplicate optional: " + o.name);
  }
  return out;
}

}  // namespace prefopt
