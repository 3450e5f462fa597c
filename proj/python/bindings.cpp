// Python bindings. Instances and results cross the boundary as JSON text in
// the on-disk formats; the pure-Python wrapper turns them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "prefopt/error.hpp"
#include "prefopt/eval.hpp"
#include "prefopt/instance_io.hpp"
#include "prefopt/knapsack.hpp"
#include "prefopt/op_solver.hpp"
#include "prefopt/providers.hpp"
#include "prefopt/report.hpp"

namespace py = pybind11;
using namespace prefopt;

namespace {

OpInstance Op(const std::string& text) { return OpInstanceFromJson(ParseJson(text)); }

SolverConfig Config(const std::string& method, std::optional<long long> time_limit_ms) {
  SolverConfig c;
  const auto m = ParseSolveMethod(method);
  if (!m) throw Error(ErrorCode::kInvalidInput, "unknown solver method: " + method);
  c.method = *m;
  if (time_limit_ms) c.time_limit = std::chrono::milliseconds(*time_limit_ms);
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  // Raised errors carry the stable error-code name in `.code`.
  static PyObject* error_type = py::register_exception<Error>(m, "Error", PyExc_RuntimeError).ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(py::str(e.what()));
      exc.attr("code") = std::string(ErrorCodeName(e.code()));
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.def("solve", [](const std::string& instance, const std::string& method,
                    std::optional<long long> time_limit_ms) {
    return DumpJson(ItineraryToJson(Solve(ReduceInstance(Op(instance)), Config(method, time_limit_ms))));
  }, py::arg("instance"), py::arg("method") = "subset_dp", py::arg("time_limit_ms") = py::none(),
     py::call_guard<py::gil_scoped_release>());

  m.def("canonical_op", [](const std::string& instance) { return DumpJson(OpInstanceToJson(Op(instance))); });
  m.def("canonical_meal", [](const std::string& meal) {
    return DumpJson(MealInstanceToJson(MealInstanceFromJson(ParseJson(meal))));
  });

  m.def("evaluate_route", [](const std::string& instance, const std::vector<std::string>& route) {
    return DumpJson(ItineraryToJson(EvaluateRoute(Op(instance), route)));
  });

  m.def("validate_instance", [](const std::string& instance) { return ValidateInstance(Op(instance)); });

  m.def("reduce_instance", [](const std::string& instance) {
    return DumpJson(OpInstanceToJson(ReduceInstance(Op(instance))));
  });

  m.def("format_itinerary", [](const std::string& instance, const std::string& itinerary) {
    return FormatItinerary(Op(instance), ItineraryFromJson(ParseJson(itinerary)));
  });

  m.def("plan_meal", [](const std::string& meal, const std::string& method, double granularity) {
    KnapsackConfig c;
    if (method == "dp") {
      c.method = KnapsackMethod::kDp;
    } else if (method == "brute_force") {
      c.method = KnapsackMethod::kBruteForce;
    } else {
      throw Error(ErrorCode::kInvalidInput, "unknown knapsack method: " + method);
    }
    c.calorie_granularity = granularity;
    return DumpJson(MealPlanToJson(PlanMeal(MealInstanceFromJson(ParseJson(meal)), c)));
  }, py::arg("meal"), py::arg("method") = "dp", py::arg("granularity") = 1.0);

  m.def("generate_instance", [](std::uint64_t seed, std::size_t n_spots, double budget_policy) {
    GenOptions o;
    o.seed = seed;
    o.n_spots = n_spots;
    o.budget_policy = budget_policy;
    return DumpJson(OpInstanceToJson(GenerateInstance(o)));
  }, py::arg("seed"), py::arg("n_spots") = 8, py::arg("budget_policy") = 0.5);

  m.def("haversine_km", [](double lat1, double lon1, double lat2, double lon2) {
    return HaversineKm({lat1, lon1}, {lat2, lon2});
  });
}
