/**
 * Copyright 2026 The tabkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "tabkit/augment.hpp"
#include "tabkit/errors.hpp"
#include "tabkit/html.hpp"
#include "tabkit/ingest.hpp"
#include "tabkit/io.hpp"
#include "tabkit/metrics.hpp"
#include "tabkit/sgcl/check.hpp"
#include "tabkit/taskgen.hpp"

namespace fs = std::filesystem;
using namespace tabkit;

namespace {

constexpr int kUsageError = 2;

int workers_from_env() {
  const char* v = std::getenv("TABKIT_WORKERS");
  if (!v || !*v) return 1;
  const int n = std::atoi(v);
  if (n < 1) throw Error(std::string("TABKIT_WORKERS must be a positive integer, got '") + v + "'");
  return n;
}

void sort_by_id(std::vector<TableAnnotation>& anns) {
  std::stable_sort(anns.begin(), anns.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
}

BBox parse_query(const std::string& s) {
  BBox b;
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf,%lf", &b.x1, &b.y1, &b.x2, &b.y2) != 4 || !is_valid(b))
    throw Error("--query needs four normalized coordinates x1,y1,x2,y2, got '" + s + "'");
  return b;
}

std::vector<TextLine> text_lines(const TableAnnotation& ann) {
  std::vector<TextLine> out;
  for (const Cell* c : cells_in_logical_order(ann))
    if (c->bbox && !c->content.empty()) out.push_back({*c->bbox, c->content});
  return out;
}

// An eval record is an annotation ("cells"), a generated label ("target"
// from html_parse) or a bare {"id", "html", "boxes", "scores"} sample.
EvalSample eval_sample(const json& j) {
  EvalSample s;
  if (j.contains("cells")) {
    const TableAnnotation ann = annotation_from_json(j);
    s.id = ann.id;
    s.html = serialize(grid_to_html(ann));
    for (const Cell* c : cells_in_logical_order(ann))
      if (c->bbox) s.boxes.push_back(*c->bbox);
    return s;
  }
  s.id = j.at("id").get<std::string>();
  if (j.contains("html")) s.html = j["html"].get<std::string>();
  else if (j.contains("target")) s.html = j["target"].get<std::string>();
  if (j.contains("boxes"))
    for (const auto& b : j["boxes"]) s.boxes.push_back(box_from_json(b));
  if (j.contains("scores")) s.scores = j["scores"].get<std::vector<double>>();
  return s;
}

std::vector<EvalSample> read_eval(const std::string& path) {
  std::vector<EvalSample> out;
  for (const auto& j : read_jsonl(path)) out.push_back(eval_sample(j));
  return out;
}

std::vector<std::string> list_fixtures(const std::string& dir) {
  std::vector<std::string> stems;
  if (!fs::is_directory(dir)) return stems;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".tensors") stems.push_back((e.path().parent_path() / e.path().stem()).string());
  std::sort(stems.begin(), stems.end());
  return stems;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tabkit: table annotation, label generation and evaluation toolkit"};
  app.require_subcommand(1);

  std::string in, out, report, source_kind, task = "html_parse", format = "html", query = "0,0,1,1";
  std::string pred, gt, metric = "teds", fixtures;
  int per_table = 1, bins = 1000, points = 100, instances = 100, count = 3;
  std::uint64_t seed = 0;
  double tolerance = 1e-4;
  bool text_only = false, exclude_span = false;

  auto* convert = app.add_subcommand("convert", "Convert foreign annotations to the unified JSONL format");
  convert->add_option("--source-kind", source_kind, "pubtabnet | grid | spotting")
      ->required()
      ->check(CLI::IsMember({"pubtabnet", "grid", "spotting"}));
  convert->add_option("--in", in, "Input JSONL, one foreign record per line")->required();
  convert->add_option("--out", out, "Output JSONL of unified annotations")->required();

  auto* clean_cmd = app.add_subcommand("clean", "Drop or repair annotations that break the cleaning rules");
  clean_cmd->add_option("--in", in)->required();
  clean_cmd->add_option("--out", out)->required();
  clean_cmd->add_option("--report", report, "Text report, one 'id, rule, detail' line per event");

  auto* augment = app.add_subcommand("augment", "Sample sub-tables from annotations");
  augment->add_option("--in", in)->required();
  augment->add_option("--out", out)->required();
  augment->add_option("--per-table", per_table, "Sub-tables drawn per input table")->check(CLI::NonNegativeNumber);
  augment->add_option("--seed", seed, "Base random seed");

  auto* genlabels = app.add_subcommand("genlabels", "Generate task prompts and targets");
  genlabels->add_option("--task", task)
      ->required()
      ->check(CLI::IsMember({"cell_detect", "span_cell_detect", "row_col_detect", "structure_parse", "html_parse",
                             "spot_ordered", "spot_boxquery"}));
  genlabels->add_option("--in", in)->required();
  genlabels->add_option("--out", out)->required();
  genlabels->add_option("--bins", bins, "Coordinate bins")->check(CLI::PositiveNumber);
  genlabels->add_option("--format", format, "structure_parse output: html | markdown")
      ->check(CLI::IsMember({"html", "markdown"}));
  genlabels->add_option("--query", query, "spot_boxquery region x1,y1,x2,y2 (normalized)");
  genlabels->add_flag("--text-only", text_only, "Spotting targets without boxes");
  genlabels->add_flag("--exclude-span", exclude_span, "cell_detect without span cells");

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--metric", metric, "teds | ap50 | teds,ap50")
      ->check(CLI::Validator(
          [](const std::string& v) {
            return v == "teds" || v == "ap50" || v == "teds,ap50" || v == "ap50,teds" ? std::string{}
                                                                                     : "unknown metric: " + v;
          },
          "METRIC"));
  eval->add_option("--pred", pred)->required();
  eval->add_option("--gt", gt)->required();
  eval->add_option("--report", report, "Write the per-sample report here instead of stdout");

  auto* check = app.add_subcommand("sgcl-check", "Run the SGCL gradient and invariant suite on fixtures");
  check->add_option("--fixtures", fixtures, "Directory of <stem>.json + <stem>.tensors fixtures")->required();
  check->add_option("--tolerance", tolerance, "Relative error bound for gradient checks");
  check->add_option("--points", points, "Smooth points per gradient check")->check(CLI::PositiveNumber);
  check->add_option("--instances", instances, "Random instances for the invariant checks")->check(CLI::PositiveNumber);
  check->add_option("--seed", seed, "Seed for points and instances");

  auto* fixture = app.add_subcommand("sgcl-fixture", "Write random SGCL toy fixtures");
  fixture->add_option("--out", out, "Output directory")->required();
  fixture->add_option("--count", count)->check(CLI::PositiveNumber);
  fixture->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    const int workers = workers_from_env();

    if (*convert) {
      const SourceKind kind = *parse_source_kind(source_kind);
      std::vector<TableAnnotation> anns;
      std::size_t line = 0;
      for (const auto& rec : read_jsonl(in)) {
        ++line;
        try {
          anns.push_back(unify(rec, kind));
        } catch (const std::exception& e) {
          throw Error(in + ": record " + std::to_string(line) + ": " + e.what());
        }
      }
      sort_by_id(anns);
      write_annotations(out, anns);
      std::cerr << "converted " << anns.size() << " records\n";
    } else if (*clean_cmd) {
      auto anns = read_annotations(in);
      sort_by_id(anns);
      const CleanResult r = clean(std::move(anns));
      write_annotations(out, r.kept);
      if (!report.empty()) write_text(report, r.report());
      std::cerr << "kept " << r.kept.size() << ", dropped " << r.dropped.size() << ", collapsed "
                << r.collapsed.size() << "\n";
    } else if (*augment) {
      auto anns = read_annotations(in);
      sort_by_id(anns);
      AugmentConfig cfg;
      cfg.samples_per_table = per_table;
      cfg.rng_seed = seed;
      auto subs = augment_corpus(anns, cfg);
      sort_by_id(subs);
      write_annotations(out, subs);
      std::cerr << "sampled " << subs.size() << " sub-tables from " << anns.size() << " tables\n";
    } else if (*genlabels) {
      auto anns = read_annotations(in);
      sort_by_id(anns);
      const Task t = *parse_task(task);
      const DiscretizationConfig dc{bins};
      const BBox q = parse_query(query);
      std::vector<json> records;
      for (const auto& ann : anns) {
        TaskSample s;
        try {
          switch (t) {
            case Task::kCellDetect: s = gen_cell_detect(ann, dc, exclude_span); break;
            case Task::kSpanCellDetect: s = gen_span_cell_detect(ann, dc); break;
            case Task::kRowColDetect: s = gen_row_col_detect(ann, dc); break;
            case Task::kStructureParse:
              s = gen_structure_parse(ann, format == "markdown" ? StructureFormat::kMarkdown : StructureFormat::kHtml);
              break;
            case Task::kHtmlParse: s = gen_html_parse(ann); break;
            case Task::kSpotOrdered: s = gen_spot_ordered(text_lines(ann), !text_only, dc); break;
            case Task::kSpotBoxQuery: s = gen_spot_boxquery(text_lines(ann), q, !text_only, dc); break;
          }
        } catch (const std::exception& e) {
          throw Error("table '" + ann.id + "': " + e.what());
        }
        json rec{{"id", ann.id}, {"task", to_string(s.task)}, {"prompt", s.prompt}, {"target", s.target}};
        if (t == Task::kHtmlParse) {
          json boxes = json::array();
          for (const Cell* c : cells_in_logical_order(ann))
            if (c->bbox) boxes.push_back(box_to_json(*c->bbox));
          rec["boxes"] = boxes;
        }
        records.push_back(std::move(rec));
      }
      write_jsonl(out, records);
    } else if (*eval) {
      const bool with_teds = metric.find("teds") != std::string::npos;
      const bool with_ap = metric.find("ap50") != std::string::npos;
      const CorpusReport r = corpus_eval(read_eval(pred), read_eval(gt), with_teds, with_ap, workers);
      const std::string text = r.format();
      if (report.empty()) std::cout << text;
      else {
        write_text(report, text);
        std::cout << text.substr(text.rfind("mean,"));
      }
    } else if (*check) {
      const auto stems = list_fixtures(fixtures);
      if (stems.empty()) {
        std::cerr << "sgcl-check: no fixtures (*.tensors) found in '" << fixtures << "'\n";
        return kUsageError;
      }
      sgcl::SuiteOptions opts;
      opts.points = points;
      opts.instances = instances;
      opts.tolerance = tolerance;
      opts.seed = seed ? seed : opts.seed;
      std::vector<sgcl::CheckLine> lines;
      for (const auto& stem : stems) {
        auto [inst, params] = sgcl::load_fixture(stem);
        const std::string name = fs::path(stem).filename().string();
        for (auto l : sgcl::gradient_checks(inst, opts)) {
          l.name = name + ": " + l.name;
          lines.push_back(std::move(l));
        }
        auto smoke = sgcl::descent_smoke_check(inst, params, opts.seed);
        smoke.name = name + ": " + smoke.name;
        lines.push_back(std::move(smoke));
      }
      for (auto& l : sgcl::invariant_checks(opts)) lines.push_back(std::move(l));
      lines.push_back(sgcl::loss_composition_check());
      bool ok = true;
      for (const auto& l : lines) {
        std::printf("%-4s  %-40s  %s\n", l.passed ? "PASS" : "FAIL", l.name.c_str(), l.detail.c_str());
        ok = ok && l.passed;
      }
      return ok ? 0 : 1;
    } else if (*fixture) {
      fs::create_directories(out);
      std::mt19937_64 rng(seed);
      for (int k = 0; k < count; ++k) {
        const auto inst = sgcl::make_toy_instance(sgcl::toy_layout(), sgcl::toy_config(), rng);
        const auto params = sgcl::random_params(sgcl::toy_config(), rng);
        char name[32];
        std::snprintf(name, sizeof name, "toy_%03d", k);
        sgcl::save_fixture((fs::path(out) / name).string(), inst, params);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
