#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "racediag/analyzers.hpp"
#include "racediag/cli.hpp"
#include "racediag/diagnosis.hpp"
#include "racediag/generate.hpp"
#include "racediag/lockset.hpp"
#include "racediag/relations.hpp"
#include "racediag/report.hpp"
#include "racediag/validate.hpp"

namespace py = pybind11;
using namespace racediag;

namespace {

py::dict race_dict(const Trace& t, const RacePair& p) {
  py::dict d;
  d["first"] = p.first;
  d["second"] = p.second;
  d["first_event"] = t.describe(p.first);
  d["second_event"] = t.describe(p.second);
  d["category"] = std::string(to_string(p.category));
  d["var"] = t.var_name(p.var);
  return d;
}

py::list race_list(const Trace& t, const std::vector<RacePair>& races) {
  py::list out;
  for (const auto& r : races) out.append(race_dict(t, r));
  return out;
}

PerturbMode perturb_mode(const std::string& m) {
  if (m == "rw") return PerturbMode::RW;
  if (m == "rr") return PerturbMode::RR;
  throw py::value_error("mode must be 'rw' or 'rr'");
}

}  // namespace

PYBIND11_MODULE(_racediag, m) {
  m.doc() = "Data race prediction and guaranteed/maybe race diagnosis over recorded traces";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<TraceError>(m, "TraceError", PyExc_ValueError);
  py::register_exception<GenConfigError>(m, "GenConfigError", PyExc_ValueError);
  py::register_exception<CandidateProductTooLarge>(m, "CandidateProductTooLarge", PyExc_RuntimeError);

  py::class_<Trace>(m, "Trace")
      .def_static("parse", [](const std::string& text) { return parse_trace(std::string_view(text)); },
                  py::arg("text"))
      .def_static("load", &load_trace, py::arg("path"))
      .def("serialize", [](const Trace& t) { return serialize_trace(t); })
      .def("__len__", &Trace::size)
      .def("__eq__", [](const Trace& a, const Trace& b) { return a == b; })
      .def("describe", [](const Trace& t, std::size_t pos) { return t.describe(pos); }, py::arg("pos"))
      .def_property_readonly("thread_count", &Trace::thread_count)
      .def_property_readonly("meta", [](const Trace& t) {
        const auto m = t.meta();
        py::dict d;
        d["events"] = m.events;
        d["threads"] = m.threads;
        d["vars"] = m.vars;
        d["locks"] = m.locks;
        d["reads"] = m.reads;
        d["writes"] = m.writes;
        d["syncs"] = m.syncs;
        return d;
      });

  m.def(
      "validate",
      [](const Trace& t, const std::string& level) {
        if (level != "strict" && level != "lenient")
          throw py::value_error("level must be 'strict' or 'lenient'");
        const auto lvl = level == "strict" ? ValidityLevel::Strict : ValidityLevel::Lenient;
        py::list out;
        for (const auto& v : validate(t, lvl).violations) {
          py::dict d;
          d["kind"] = std::string(to_string(v.kind));
          d["pos"] = v.pos;
          out.append(d);
        }
        return out;
      },
      py::arg("trace"), py::arg("level") = "lenient");

  m.def("hb_races", [](const Trace& t) { return race_list(t, run_hb_partner(t)); }, py::arg("trace"));
  m.def("shb_races", [](const Trace& t) { return race_list(t, run_shb_partner(t)); }, py::arg("trace"));
  m.def(
      "fasttrack",
      [](const Trace& t) {
        py::list out;
        for (const auto& r : run_fasttrack(t).races)
          out.append(py::make_tuple(r.pos, r.partner, std::string(to_string(r.category))));
        return out;
      },
      py::arg("trace"));

  m.def(
      "diagnose",
      [](const Trace& t, bool lockset_filter, unsigned jobs) {
        DiagnoseOptions opts;
        opts.jobs = jobs;
        auto report = diagnose_all(t, opts);
        if (lockset_filter) report = lockset_flags(std::move(report), compute_locksets(t));
        py::list out;
        for (const auto& c : report.classifications) {
          auto d = race_dict(t, c.pair);
          d["verdict"] = std::string(to_string(c.verdict));
          d["lockset_fp"] = c.lockset_fp;
          d["unresolved"] = c.unresolved;
          d["witness"] = c.witness;
          out.append(d);
        }
        return out;
      },
      py::arg("trace"), py::arg("lockset_filter") = false, py::arg("jobs") = 1);

  m.def(
      "oracle_classify",
      [](const Trace& t, std::size_t a, std::size_t b, std::uint64_t cap) {
        return std::string(to_string(oracle_classify(t, make_race_pair(t, a, b), cap)));
      },
      py::arg("trace"), py::arg("first"), py::arg("second"), py::arg("cap") = kDefaultCandidateCap);

  m.def(
      "gen_trace",
      [](std::size_t threads, std::size_t vars, std::size_t locks, std::size_t events,
         double lock_discipline, bool ensure_initial_writes, double read_ratio, std::uint64_t seed) {
        return gen_trace({threads, vars, locks, events, lock_discipline, ensure_initial_writes,
                          read_ratio, seed});
      },
      py::arg("threads") = 2, py::arg("vars") = 2, py::arg("locks") = 1, py::arg("events") = 20,
      py::arg("lock_discipline") = 0.5, py::arg("ensure_initial_writes") = true,
      py::arg("read_ratio") = 0.5, py::arg("seed") = 1);

  m.def(
      "perturb",
      [](const Trace& t, const std::string& mode, std::uint64_t seed, std::optional<std::size_t> swaps) {
        return perturb(t, perturb_mode(mode), seed, swaps);
      },
      py::arg("trace"), py::arg("mode") = "rw", py::arg("seed") = 1, py::arg("swaps") = py::none());

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one command line; returns (exit code, stdout, stderr).");
}
