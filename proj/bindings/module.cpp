#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "phytosub/categorize.hpp"
#include "phytosub/corpus.hpp"
#include "phytosub/enrich.hpp"
#include "phytosub/error.hpp"
#include "phytosub/eval.hpp"
#include "phytosub/filtration.hpp"
#include "phytosub/finetune.hpp"
#include "phytosub/gateway.hpp"
#include "phytosub/normalize.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace phytosub;

namespace {

py::object json_to_py(const json& value) {
  switch (value.type()) {
    case json::value_t::null:
      return py::none();
    case json::value_t::boolean:
      return py::bool_(value.get<bool>());
    case json::value_t::number_integer:
      return py::int_(value.get<std::int64_t>());
    case json::value_t::number_unsigned:
      return py::int_(value.get<std::uint64_t>());
    case json::value_t::number_float:
      return py::float_(value.get<double>());
    case json::value_t::string:
      return py::str(value.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const auto& item : value) out.append(json_to_py(item));
      return out;
    }
    case json::value_t::object: {
      py::dict out;
      for (const auto& [key, item] : value.items()) {
        out[py::str(key)] = json_to_py(item);
      }
      return out;
    }
    default:
      return py::none();
  }
}

py::list messages_to_py(const gateway::MessageList& messages) {
  py::list out;
  for (const auto& message : messages) {
    py::dict entry;
    entry["role"] = message.role;
    entry["content"] = message.content;
    out.append(entry);
  }
  return out;
}

enrich::NetworkSet networks_from_py(const std::vector<std::string>& names) {
  if (names.empty()) return enrich::all_networks();
  enrich::NetworkSet out;
  for (const auto& name : names) out.insert(enrich::network_from_string(name));
  return out;
}

json py_script_to_json(const py::object& script) {
  if (py::isinstance<py::str>(script)) {
    return json::parse(script.cast<std::string>());
  }
  return json::parse(py::module_::import("json")
                         .attr("dumps")(script)
                         .cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_phytosub, m) {
  m.doc() = "Ingredient-substitution dataset tooling";

  py::register_exception<Error>(m, "PhytosubError");

  // corpus
  py::class_<corpus::IngredientLine>(m, "IngredientLine")
      .def(py::init<>())
      .def_readwrite("raw_line", &corpus::IngredientLine::raw_line)
      .def_readwrite("name", &corpus::IngredientLine::name)
      .def("__repr__", [](const corpus::IngredientLine& line) {
        return "IngredientLine(name=" + line.name + ")";
      });

  py::class_<corpus::Recipe>(m, "Recipe")
      .def(py::init<>())
      .def_readwrite("id", &corpus::Recipe::id)
      .def_readwrite("title", &corpus::Recipe::title)
      .def_readwrite("ingredients", &corpus::Recipe::ingredients)
      .def_readwrite("instructions", &corpus::Recipe::instructions)
      .def("__repr__", [](const corpus::Recipe& recipe) {
        return "Recipe(id=" + recipe.id + ", title=" + recipe.title + ")";
      });

  py::class_<corpus::SubstitutionRecord>(m, "SubstitutionRecord")
      .def(py::init([](const std::string& recipe_id, const std::string& source,
                       const std::string& target, const std::string& split) {
             return corpus::SubstitutionRecord{recipe_id, source, target,
                                               corpus::split_from_string(split)};
           }),
           py::arg("recipe_id"), py::arg("source"), py::arg("target"),
           py::arg("split") = "train")
      .def_readwrite("recipe_id", &corpus::SubstitutionRecord::recipe_id)
      .def_readwrite("source", &corpus::SubstitutionRecord::source)
      .def_readwrite("target", &corpus::SubstitutionRecord::target)
      .def_property(
          "split",
          [](const corpus::SubstitutionRecord& record) {
            return corpus::to_string(record.split);
          },
          [](corpus::SubstitutionRecord& record, const std::string& value) {
            record.split = corpus::split_from_string(value);
          })
      .def("__repr__", [](const corpus::SubstitutionRecord& record) {
        return "SubstitutionRecord(" + record.source + " -> " + record.target +
               ")";
      });

  py::class_<corpus::SplitStats>(m, "SplitStats")
      .def_readonly("train", &corpus::SplitStats::train)
      .def_readonly("validation", &corpus::SplitStats::validation)
      .def_readonly("test", &corpus::SplitStats::test)
      .def_readonly("total", &corpus::SplitStats::total)
      .def("__repr__", [](const corpus::SplitStats& stats) {
        return "SplitStats(train=" + std::to_string(stats.train) +
               ", validation=" + std::to_string(stats.validation) +
               ", test=" + std::to_string(stats.test) +
               ", total=" + std::to_string(stats.total) + ")";
      });

  m.def(
      "load_recipes",
      [](const std::string& path, const std::string& format) {
        return corpus::load_recipes(
            path, format == "legacy" ? corpus::RecipeFormat::legacy_recipe1m_json
                                     : corpus::RecipeFormat::json_lines);
      },
      py::arg("path"), py::arg("format") = "jsonl");
  m.def("load_substitutions",
        [](const std::string& path) { return corpus::load_substitutions(path); },
        py::arg("path"));
  m.def("compute_split_stats",
        [](const std::vector<corpus::SubstitutionRecord>& records) {
          return corpus::compute_split_stats(records);
        },
        py::arg("records"));
  m.def("write_dataset",
        [](const std::vector<corpus::SubstitutionRecord>& records,
           const std::string& path) { corpus::write_dataset(records, path); },
        py::arg("records"), py::arg("path"));

  // normalize
  m.def("normalize_name",
        [](const std::string& raw) { return normalize::normalize_name(raw); },
        py::arg("raw"));
  m.def("fold_plural",
        [](const std::string& normalized) {
          return normalize::fold_plural(normalized);
        },
        py::arg("normalized"));

  py::class_<normalize::CuratedGroups>(m, "CuratedGroups")
      .def(py::init<>())
      .def_static("load", [](const std::string& path) {
        return normalize::CuratedGroups::load(path);
      })
      .def_static("from_rows",
                  [](const std::vector<std::pair<std::string, std::string>>& rows) {
                    return normalize::CuratedGroups::from_rows(rows);
                  });

  py::class_<normalize::IngredientClustering>(m, "IngredientClustering")
      .def("cluster_of", &normalize::IngredientClustering::cluster_of)
      .def("same_cluster",
           [](const normalize::IngredientClustering& clustering,
              const std::string& a, const std::string& b) {
             return clustering.same_cluster(a, b);
           })
      .def("to_dict", [](const normalize::IngredientClustering& clustering) {
        return json_to_py(clustering.to_json());
      });

  m.def(
      "cluster_ingredients",
      [](const std::vector<std::string>& names,
         const normalize::CuratedGroups& curated) {
        return normalize::cluster_ingredients(names, curated);
      },
      py::arg("names"), py::arg("curated") = normalize::CuratedGroups());
  m.def("same_cluster",
        [](const std::string& a, const std::string& b,
           const normalize::IngredientClustering& clustering) {
          return clustering.same_cluster(a, b);
        },
        py::arg("a"), py::arg("b"), py::arg("clustering"));

  // gateway mock (offline reproduction)
  py::class_<gateway::MockBackend>(m, "MockBackend")
      .def(py::init([](const py::object& script, std::uint64_t seed) {
             return gateway::MockBackend(py_script_to_json(script), seed);
           }),
           py::arg("script"), py::arg("seed") = 0);

  // filtration
  m.def("build_validity_prompt",
        [](const corpus::SubstitutionRecord& record, const corpus::Recipe& recipe) {
          return messages_to_py(filtration::build_validity_prompt(record, recipe));
        },
        py::arg("record"), py::arg("recipe"));
  m.def("parse_validity_label", [](const std::string& response) {
    return filtration::to_string(filtration::parse_validity_label(response));
  });
  m.def(
      "run_filtration_mock",
      [](const std::vector<corpus::SubstitutionRecord>& records,
         const std::vector<corpus::Recipe>& recipes, const py::object& script,
         int runs) {
        corpus::RecipeIndex index(recipes);
        json script_json = py_script_to_json(script);
        filtration::BackendFactory factory = [&script_json](int run_index) {
          return std::make_unique<gateway::MockBackend>(
              script_json, static_cast<std::uint64_t>(run_index));
        };
        filtration::FiltrationParams params;
        params.runs = runs;
        gateway::VirtualClock clock;
        gateway::GatewayConfig config;
        auto result = filtration::run_filtration(records, index, factory, config,
                                                 params, clock);
        py::list out;
        for (const auto& run : result) out.append(json_to_py(run.to_json()));
        return out;
      },
      py::arg("records"), py::arg("recipes"), py::arg("script"),
      py::arg("runs") = 5);

  // categorize
  m.def("category_names", [] {
    std::vector<std::string> names;
    for (const char* name : categorize::category_names()) names.emplace_back(name);
    return names;
  });
  m.def("build_category_prompt", [](const std::string& name) {
    return messages_to_py(categorize::build_category_prompt(name));
  });
  m.def("parse_category", [](const std::string& response) {
    auto parsed = categorize::parse_category(response);
    py::dict out;
    out["category"] = std::string(categorize::to_string(parsed.category));
    out["flagged"] = parsed.flagged;
    return out;
  });

  // finetune
  m.def(
      "emit_manifest",
      [](const std::string& model, const std::string& variant) {
        return json_to_py(
            finetune::emit_manifest(finetune::model_kind_from_string(model),
                                    finetune::variant_from_string(variant))
                .to_json());
      },
      py::arg("model"), py::arg("variant"));
  m.def("estimate_token_length", [](const std::string& text) {
    return finetune::estimate_token_length(text);
  });
  m.def(
      "export_prompt_completion",
      [](const std::vector<corpus::SubstitutionRecord>& records,
         const std::vector<corpus::Recipe>& recipes, const std::string& out_path) {
        corpus::RecipeIndex index(recipes);
        auto summary = finetune::export_prompt_completion(records, index, out_path);
        py::dict out;
        out["records"] = summary.records;
        out["over_limit"] = summary.over_limit;
        return out;
      },
      py::arg("records"), py::arg("recipes"), py::arg("out_path"));
  m.def(
      "export_chat",
      [](const std::vector<corpus::SubstitutionRecord>& records,
         const std::vector<corpus::Recipe>& recipes, const std::string& out_path) {
        corpus::RecipeIndex index(recipes);
        auto summary = finetune::export_chat(records, index, out_path);
        py::dict out;
        out["records"] = summary.records;
        out["over_limit"] = summary.over_limit;
        return out;
      },
      py::arg("records"), py::arg("recipes"), py::arg("out_path"));

  // eval
  py::class_<eval::EvaluationReport>(m, "EvaluationReport")
      .def_readonly("n_records", &eval::EvaluationReport::n_records)
      .def_readonly("n_hits", &eval::EvaluationReport::n_hits)
      .def_readonly("hit_at_1", &eval::EvaluationReport::hit_at_1)
      .def_readonly("per_run", &eval::EvaluationReport::per_run)
      .def_readonly("mean", &eval::EvaluationReport::mean)
      .def_readonly("std", &eval::EvaluationReport::std_dev)
      .def_readonly("single_run", &eval::EvaluationReport::single_run)
      .def("to_dict", [](const eval::EvaluationReport& report) {
        return json_to_py(report.to_json());
      });

  m.def(
      "parse_predictions",
      [](const std::string& path, const std::string& format) {
        auto records = eval::parse_predictions(
            path, format == "tsv" ? eval::PredictionFormat::tsv
                                  : eval::PredictionFormat::json_lines);
        py::list out;
        for (const auto& record : records) {
          out.append(py::make_tuple(record.original, record.truth,
                                    record.predicted));
        }
        return out;
      },
      py::arg("path"), py::arg("format") = "jsonl");
  m.def(
      "hit_at_1",
      [](const std::vector<std::tuple<std::string, std::string, std::string>>&
             triples,
         const normalize::IngredientClustering& clustering) {
        std::vector<eval::PredictionRecord> records;
        for (const auto& [original, truth, predicted] : triples) {
          records.push_back(
              eval::make_prediction_record(original, truth, predicted));
        }
        return eval::hit_at_1(records, clustering);
      },
      py::arg("records"), py::arg("clustering"));
  m.def("aggregate_runs", [](const std::vector<double>& values) {
    auto aggregate = eval::aggregate_runs(values);
    return py::make_tuple(aggregate.mean, aggregate.std_dev);
  });

  py::class_<eval::FrequencyBaseline>(m, "FrequencyBaseline")
      .def_static("train",
                  [](const std::vector<corpus::SubstitutionRecord>& records) {
                    return eval::FrequencyBaseline::train(records);
                  })
      .def("predict", [](const eval::FrequencyBaseline& baseline,
                         const std::string& source) -> py::object {
        auto predicted = baseline.predict(normalize::normalize_name(source));
        if (!predicted) return py::none();
        return py::str(*predicted);
      });

  // enrich
  py::class_<enrich::PhytoTable>(m, "PhytoTable")
      .def(py::init<>())
      .def("score",
           [](const enrich::PhytoTable& table, const std::string& name,
              const std::vector<std::string>& networks) {
             return table.score(name, networks_from_py(networks));
           },
           py::arg("name"), py::arg("networks") = std::vector<std::string>{})
      .def("__len__", &enrich::PhytoTable::size);

  m.def("load_phyto_table", [](const std::string& path) {
    return enrich::PhytoTable::load(path);
  });
  m.def(
      "recipe_phyto_score",
      [](const corpus::Recipe& recipe, const enrich::PhytoTable& table,
         const std::vector<std::string>& networks) {
        return enrich::recipe_phyto_score(recipe, table,
                                          networks_from_py(networks));
      },
      py::arg("recipe"), py::arg("table"),
      py::arg("networks") = std::vector<std::string>{});
  m.def("filter_salads", [](const std::vector<corpus::Recipe>& recipes) {
    return enrich::filter_salads(recipes);
  });
  m.def(
      "rank_recipes",
      [](const std::vector<corpus::Recipe>& recipes,
         const enrich::PhytoTable& table,
         const std::vector<std::string>& networks) {
        py::list out;
        for (const auto& entry :
             enrich::rank_recipes(recipes, table, networks_from_py(networks))) {
          out.append(py::make_tuple(entry.recipe_id, entry.title, entry.score));
        }
        return out;
      },
      py::arg("recipes"), py::arg("table"),
      py::arg("networks") = std::vector<std::string>{});
  m.def(
      "enrich_corpus",
      [](const std::vector<corpus::Recipe>& recipes,
         const std::map<std::string, std::string>& mapping,
         const enrich::PhytoTable& table, const std::vector<std::string>& networks,
         bool salad_only) {
        json mapping_json = json::object();
        for (const auto& [key, value] : mapping) mapping_json[key] = value;
        enrich::ScriptedSubstitutions backend(mapping_json);
        auto outcome = enrich::enrich_corpus(recipes, backend, table,
                                             networks_from_py(networks),
                                             salad_only);
        py::dict out;
        out["report"] = json_to_py(outcome.report.to_json());
        py::list enriched;
        for (const auto& entry : outcome.recipes) {
          enriched.append(json_to_py(entry.to_json()));
        }
        out["recipes"] = enriched;
        return out;
      },
      py::arg("recipes"), py::arg("mapping"), py::arg("table"),
      py::arg("networks") = std::vector<std::string>{},
      py::arg("salad_only") = false);

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "0.1.0";
#endif
}
