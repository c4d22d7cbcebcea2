#include "uwbdetect/report.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "uwbdetect/binary_io.hpp"

namespace uwbdetect {

using ojson = nlohmann::ordered_json;

namespace {

ojson params_json(const ParamMap& params) {
  ojson j = ojson::object();
  for (const auto& p : params.items()) {
    std::visit([&](const auto& v) { j[p.name] = v; }, p.value);
  }
  return j;
}

ParamMap params_from_json(const ojson& j) {
  if (!j.is_object()) throw FormatError("params must be an object");
  ParamMap params;
  for (const auto& [key, value] : j.items()) {
    if (value.is_number_integer()) {
      params.set(key, value.get<std::int64_t>());
    } else if (value.is_number()) {
      params.set(key, value.get<double>());
    } else if (value.is_string()) {
      params.set(key, value.get<std::string>());
    } else {
      throw FormatError("param '" + key + "' has an unsupported type");
    }
  }
  return params;
}

ojson report_json(const EvalReport& r) {
  ojson j;
  j["dataset"] = r.dataset_id;
  j["estimator"] = std::string(short_name(r.kind));
  j["failed"] = r.failed;
  j["error"] = r.error;
  j["selected_params"] = params_json(r.selected_params);
  j["selected_s_min"] = r.selected_s_min;
  j["validation_accuracy"] = r.validation_accuracy;
  j["test_accuracy"] = r.test_accuracy;
  j["confusion"] = {{"classes", r.confusion.classes}, {"counts", r.confusion.counts}};
  j["timings_ms"] = {{"grid_search", r.grid_search_ms}, {"fit", r.fit_ms}, {"predict", r.predict_ms}};
  j["n_train"] = r.n_train;
  j["n_valid"] = r.n_valid;
  j["n_test"] = r.n_test;
  ojson cands = ojson::array();
  for (const auto& c : r.candidates) {
    cands.push_back({{"params", params_json(c.params)}, {"fold_scores", c.fold_scores}, {"s_min", c.s_min}});
  }
  j["candidates"] = std::move(cands);
  return j;
}

EvalReport report_from_json(const ojson& j) {
  EvalReport r;
  r.dataset_id = j.at("dataset").get<std::string>();
  r.kind = estimator_kind_from_string(j.at("estimator").get<std::string>());
  r.failed = j.at("failed").get<bool>();
  r.error = j.at("error").get<std::string>();
  r.selected_params = params_from_json(j.at("selected_params"));
  r.selected_s_min = j.at("selected_s_min").get<double>();
  r.validation_accuracy = j.at("validation_accuracy").get<double>();
  r.test_accuracy = j.at("test_accuracy").get<double>();
  r.confusion.classes = j.at("confusion").at("classes").get<std::vector<Label>>();
  r.confusion.counts = j.at("confusion").at("counts").get<std::vector<std::vector<std::int64_t>>>();
  r.grid_search_ms = j.at("timings_ms").at("grid_search").get<double>();
  r.fit_ms = j.at("timings_ms").at("fit").get<double>();
  r.predict_ms = j.at("timings_ms").at("predict").get<double>();
  r.n_train = j.at("n_train").get<std::size_t>();
  r.n_valid = j.at("n_valid").get<std::size_t>();
  r.n_test = j.at("n_test").get<std::size_t>();
  for (const auto& c : j.at("candidates")) {
    CandidateScore s;
    s.params = params_from_json(c.at("params"));
    s.fold_scores = c.at("fold_scores").get<std::vector<double>>();
    s.s_min = c.at("s_min").get<double>();
    r.candidates.push_back(std::move(s));
  }
  return r;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string run_report_to_json(const RunReport& run, int indent) {
  ojson j;
  j["format"] = "uwbdetect-run";
  j["version"] = 1;
  j["dataset"] = run.dataset_id;
  j["reports"] = ojson::array();
  for (const auto& r : run.reports) j["reports"].push_back(report_json(r));
  return j.dump(indent) + "\n";
}

RunReport run_report_from_json(std::string_view text) {
  try {
    const auto j = ojson::parse(text.begin(), text.end());
    if (j.at("format") != "uwbdetect-run") throw FormatError("not a run report");
    if (j.at("version") != 1) throw FormatError("unsupported run report version");
    RunReport run;
    run.dataset_id = j.at("dataset").get<std::string>();
    for (const auto& r : j.at("reports")) run.reports.push_back(report_from_json(r));
    return run;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed run report: ") + e.what());
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("malformed run report: ") + e.what());
  }
}

std::vector<RunReport> load_run_reports(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InputNotFound(dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunReport> runs;
  for (const auto& f : files) {
    try {
      runs.push_back(run_report_from_json(read_file(f.string())));
    } catch (const FormatError& e) {
      throw FormatError(f.string() + ": " + e.what());
    }
  }
  if (runs.empty()) throw InputNotFound((dir / "*.json").string());
  return sort_runs(std::move(runs));
}

std::vector<RunReport> sort_runs(std::vector<RunReport> runs) {
  for (auto& run : runs) {
    std::stable_sort(run.reports.begin(), run.reports.end(),
                     [](const EvalReport& a, const EvalReport& b) { return kind_index(a.kind) < kind_index(b.kind); });
  }
  std::stable_sort(runs.begin(), runs.end(),
                   [](const RunReport& a, const RunReport& b) { return a.dataset_id < b.dataset_id; });
  return runs;
}

std::string aggregate_csv(const std::vector<RunReport>& unsorted) {
  const auto runs = sort_runs(unsorted);
  std::set<std::size_t> present;
  for (const auto& run : runs) {
    for (const auto& r : run.reports) present.insert(kind_index(r.kind));
  }
  std::ostringstream out;
  out << "dataset";
  for (const auto k : present) out << ',' << short_name(kAllEstimators[k]);
  out << '\n';
  for (const auto& run : runs) {
    out << csv_field(run.dataset_id);
    for (const auto k : present) {
      out << ',';
      for (const auto& r : run.reports) {
        if (kind_index(r.kind) == k && !r.failed) {
          out << format_double(r.test_accuracy);
          break;
        }
      }
    }
    out << '\n';
  }
  return out.str();
}

std::vector<EvalReport> rank_reports(const std::vector<EvalReport>& reports) {
  auto ranked = reports;
  std::stable_sort(ranked.begin(), ranked.end(), [](const EvalReport& a, const EvalReport& b) {
    if (a.failed != b.failed) return !a.failed;
    if (!a.failed && a.test_accuracy != b.test_accuracy) return a.test_accuracy > b.test_accuracy;
    return kind_index(a.kind) < kind_index(b.kind);
  });
  return ranked;
}

std::string ranking_csv(const std::vector<RunReport>& unsorted) {
  std::ostringstream out;
  out << "dataset,rank,estimator,test_accuracy,validation_accuracy,status\n";
  for (const auto& run : sort_runs(unsorted)) {
    int rank = 0;
    for (const auto& r : rank_reports(run.reports)) {
      out << csv_field(run.dataset_id) << ',' << ++rank << ',' << short_name(r.kind) << ',';
      if (r.failed) {
        out << ",,failed\n";
      } else {
        out << format_double(r.test_accuracy) << ',' << format_double(r.validation_accuracy) << ",ok\n";
      }
    }
  }
  return out.str();
}

std::string ranking_text(const std::vector<RunReport>& unsorted) {
  std::ostringstream out;
  for (const auto& run : sort_runs(unsorted)) {
    out << run.dataset_id << '\n';
    int rank = 0;
    for (const auto& r : rank_reports(run.reports)) {
      out << "  " << std::setw(2) << ++rank << ". " << std::left << std::setw(4) << short_name(r.kind) << std::right;
      if (r.failed) {
        out << "  failed: " << r.error << '\n';
      } else {
        out << "  test " << std::fixed << std::setprecision(2) << std::setw(6) << r.test_accuracy << "%  valid "
            << std::setw(6) << r.validation_accuracy << "%  " << r.selected_params.to_string() << '\n';
        out.unsetf(std::ios::fixed);
      }
    }
  }
  return out.str();
}

}  // namespace uwbdetect
