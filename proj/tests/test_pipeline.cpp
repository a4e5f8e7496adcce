#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "pog/pipeline.hpp"
#include "test_util.hpp"

using namespace pog;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// One shared dataset directory with a trained feature model and banks, built
// once because generate + train dominate the runtime of this file.
struct Workspace {
  testutil::TempDir tmp;
  scenario::DatasetConfig cfg;
  std::string data_dir;
  json gen;
  json sda;
  json rf_raw;
  json rf_raw_t1;
  json rf_reduced;
  json eval;

  Workspace() {
    cfg.grid_spec = grid::GridSpec::desk_default(16);
    cfg.scene_count = 8;
    cfg.train_count = 5;
    cfg.horizon = 2.0;
    cfg.kappa = 2;
    cfg.max_participants = 2;
    data_dir = (tmp.path() / "data").string();

    pipeline::GenerateOptions gen_opt;
    gen_opt.dataset = cfg;
    gen_opt.seed = 7;
    gen_opt.out_dir = data_dir;
    gen = pipeline::run_generate(gen_opt);

    pipeline::TrainSdaOptions sda_opt;
    sda_opt.data_dir = data_dir;
    sda_opt.stack.layer_sizes = {32, 8};
    sda_opt.stack.train.max_iterations = 3;
    sda_opt.stack.train.batch_size = 4;
    sda = pipeline::run_train_sda(sda_opt);

    pipeline::TrainRfOptions rf_opt;
    rf_opt.data_dir = data_dir;
    rf_opt.t_pred = 2.0;
    rf_opt.params.tree_count = 2;
    rf_opt.params.min_samples_leaf = 2;
    rf_raw = pipeline::run_train_rf(rf_opt);

    rf_opt.t_pred = 1.0;
    rf_opt.bank_file = "bank_raw_t1.bin";
    rf_raw_t1 = pipeline::run_train_rf(rf_opt);

    rf_opt.variant = forest::BankVariant::kReducedFeatures;
    rf_opt.t_pred = 2.0;
    rf_opt.bank_file.clear();
    rf_reduced = pipeline::run_train_rf(rf_opt);

    pipeline::EvaluateOptions ev;
    ev.data_dir = data_dir;
    ev.bank_files = {"bank_raw.bin", "bank_reduced.bin"};
    ev.image_count = 1;
    eval = pipeline::run_evaluate(ev);
  }
};

const Workspace& workspace() {
  static const Workspace w;
  return w;
}

bool same_vec2(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }

bool same_participant(const scenario::TrafficParticipant& a,
                      const scenario::TrafficParticipant& b) {
  return a.id == b.id && a.state.x == b.state.x && a.state.y == b.state.y &&
         a.state.speed == b.state.speed && a.state.heading == b.state.heading &&
         a.state.ego_lane_slope == b.state.ego_lane_slope && a.accel_long == b.accel_long &&
         a.accel_lat == b.accel_lat && a.footprint.length == b.footprint.length &&
         a.footprint.width == b.footprint.width;
}

}  // namespace

TEST_CASE("scene files round-trip exactly") {
  testutil::TempDir tmp;
  const scenario::Scene scene = testutil::make_junction_scene();
  const std::string path = (tmp.path() / "scene.json").string();
  pipeline::save_scene(scene, path);
  const scenario::Scene back = pipeline::load_scene(path);

  CHECK(back.grid_spec == scene.grid_spec);
  CHECK(back.horizon == scene.horizon);
  CHECK(back.kappa == scene.kappa);
  CHECK(back.seed == scene.seed);
  CHECK(back.t0 == scene.t0);
  REQUIRE(back.road.lanes.size() == scene.road.lanes.size());
  for (std::size_t l = 0; l < scene.road.lanes.size(); ++l) {
    REQUIRE(back.road.lanes[l].size() == scene.road.lanes[l].size());
    for (std::size_t p = 0; p < scene.road.lanes[l].size(); ++p)
      CHECK(same_vec2(back.road.lanes[l][p], scene.road.lanes[l][p]));
  }
  REQUIRE(back.road.drivable.size() == scene.road.drivable.size());
  for (std::size_t d = 0; d < scene.road.drivable.size(); ++d) {
    REQUIRE(back.road.drivable[d].size() == scene.road.drivable[d].size());
    for (std::size_t p = 0; p < scene.road.drivable[d].size(); ++p)
      CHECK(same_vec2(back.road.drivable[d][p], scene.road.drivable[d][p]));
  }
  REQUIRE(back.road.infrastructure_cells.size() == scene.road.infrastructure_cells.size());
  for (std::size_t c = 0; c < scene.road.infrastructure_cells.size(); ++c) {
    CHECK(back.road.infrastructure_cells[c].i == scene.road.infrastructure_cells[c].i);
    CHECK(back.road.infrastructure_cells[c].j == scene.road.infrastructure_cells[c].j);
  }
  CHECK(same_participant(back.ego, scene.ego));
  REQUIRE(back.participants.size() == scene.participants.size());
  for (std::size_t p = 0; p < scene.participants.size(); ++p)
    CHECK(same_participant(back.participants[p], scene.participants[p]));

  SUBCASE("unsupported version is rejected") {
    json j = pipeline::scene_to_json(scene);
    j["version"] = 2;
    CHECK_THROWS_AS(pipeline::scene_from_json(j), DataError);
  }
  SUBCASE("missing fields are rejected") {
    json j = pipeline::scene_to_json(scene);
    j.erase("ego");
    CHECK_THROWS_AS(pipeline::scene_from_json(j), DataError);
  }
  SUBCASE("malformed JSON is rejected") {
    const std::string bad = (tmp.path() / "bad.json").string();
    std::ofstream(bad) << "{not json";
    CHECK_THROWS_AS(pipeline::load_scene(bad), DataError);
  }
  SUBCASE("missing file is rejected") {
    CHECK_THROWS_AS(pipeline::load_scene((tmp.path() / "nope.json").string()), DataError);
  }
}

TEST_CASE("csv matrices round-trip at full precision") {
  testutil::TempDir tmp;
  const std::string path = (tmp.path() / "m.csv").string();

  Eigen::MatrixXd m(3, 4);
  m << 0.1234567890123456789, -1e300, 1e-300, 0.0,
      3.141592653589793, -0.0, 42.0, 1.0 / 3.0,
      -7.25, 5e-324, 1e16 + 1, -0.1;
  pipeline::write_csv_matrix(path, m);
  const Eigen::MatrixXd back = pipeline::read_csv_matrix(path);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 4);
  CHECK(testutil::bitwise_equal(back, m));

  SUBCASE("single cell") {
    pipeline::write_csv_matrix(path, Eigen::MatrixXd::Constant(1, 1, -2.5));
    const Eigen::MatrixXd one = pipeline::read_csv_matrix(path);
    CHECK(one.rows() == 1);
    CHECK(one.cols() == 1);
    CHECK(one(0, 0) == -2.5);
  }
  SUBCASE("ragged rows are rejected") {
    std::ofstream(path) << "1,2\n3\n";
    CHECK_THROWS_AS(pipeline::read_csv_matrix(path), DataError);
  }
  SUBCASE("malformed numbers are rejected") {
    std::ofstream(path) << "1,zap,3\n";
    CHECK_THROWS_AS(pipeline::read_csv_matrix(path), DataError);
  }
  SUBCASE("empty file is rejected") {
    std::ofstream(path) << "";
    CHECK_THROWS_AS(pipeline::read_csv_matrix(path), DataError);
  }
  SUBCASE("missing file is rejected") {
    CHECK_THROWS_AS(pipeline::read_csv_matrix((tmp.path() / "no.csv").string()), DataError);
  }
}

TEST_CASE("template library round-trips through the manifest") {
  testutil::TempDir tmp;
  const auto spec = grid::GridSpec::desk_default(32);
  const situation::TemplateLibrary lib = situation::make_default_templates(spec);
  const std::string dir = (tmp.path() / "templates").string();
  pipeline::write_templates(lib, dir);

  CHECK(fs::exists(fs::path(dir) / "templates.json"));
  for (const auto& e : lib.entries)
    CHECK(fs::exists(fs::path(dir) / ("template_" + e.label + ".pgm")));

  const situation::TemplateLibrary back =
      pipeline::load_templates((fs::path(dir) / "templates.json").string());
  REQUIRE(back.entries.size() == lib.entries.size());
  for (std::size_t k = 0; k < lib.entries.size(); ++k) {
    CHECK(back.entries[k].label == lib.entries[k].label);
    REQUIRE(back.entries[k].image.rows == lib.entries[k].image.rows);
    REQUIRE(back.entries[k].image.cols == lib.entries[k].image.cols);
    CHECK(back.entries[k].image.pixels == lib.entries[k].image.pixels);
  }

  SUBCASE("missing manifest is rejected") {
    CHECK_THROWS_AS(pipeline::load_templates((tmp.path() / "none.json").string()), DataError);
  }
  SUBCASE("unsupported manifest version is rejected") {
    json manifest = pipeline::load_json((fs::path(dir) / "templates.json").string());
    manifest["version"] = 9;
    const std::string bad = (tmp.path() / "bad_manifest.json").string();
    pipeline::save_json(manifest, bad);
    // Image paths resolve relative to the manifest, so point it at the
    // originals to isolate the version check.
    CHECK_THROWS_AS(pipeline::load_templates(bad), DataError);
  }
}

TEST_CASE("run_generate writes a complete dataset directory") {
  const Workspace& ws = workspace();
  const fs::path dir(ws.data_dir);

  CHECK(ws.gen.at("version").get<int>() == 1);
  CHECK(ws.gen.at("seed").get<std::uint64_t>() == 7);
  CHECK(ws.gen.at("train_indices").size() == 5);
  CHECK(ws.gen.at("test_indices").size() == 3);
  CHECK(ws.gen.at("scene_files").size() == 8);
  const auto instants = ws.gen.at("instants").get<std::vector<double>>();
  REQUIRE(instants.size() == 2);
  CHECK(instants[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(instants[1] == doctest::Approx(2.0).epsilon(1e-15));

  for (const char* name :
       {"manifest.json", "aog_train.csv", "aog_test.csv", "pog_train_t1.csv",
        "pog_train_t2.csv", "pog_test_t1.csv", "pog_test_t2.csv", "timing.log"})
    CHECK(fs::exists(dir / name));
  for (int n = 0; n < 8; ++n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scenario_%04d.json", n);
    CHECK(fs::exists(dir / buf));
  }

  const Eigen::MatrixXd aog_train = pipeline::read_csv_matrix((dir / "aog_train.csv").string());
  CHECK(aog_train.rows() == 5);
  CHECK(aog_train.cols() == 16 * 16 * 5);
  const Eigen::MatrixXd aog_test = pipeline::read_csv_matrix((dir / "aog_test.csv").string());
  CHECK(aog_test.rows() == 3);
  const Eigen::MatrixXd pog1 = pipeline::read_csv_matrix((dir / "pog_train_t1.csv").string());
  CHECK(pog1.rows() == 5);
  CHECK(pog1.cols() == 16 * 16);

  SUBCASE("stored rows match a recomputation from the scenario file") {
    const int first_train = ws.gen.at("train_indices")[0].get<int>();
    const std::string file =
        ws.gen.at("scene_files")[static_cast<std::size_t>(first_train)].get<std::string>();
    const scenario::Scene scene = pipeline::load_scene((dir / file).string());
    const auto flat = grid::flatten(scenario::encode_aog(scene));
    REQUIRE(static_cast<Eigen::Index>(flat.size()) == aog_train.cols());
    for (Eigen::Index c = 0; c < aog_train.cols(); ++c)
      CHECK(aog_train(0, c) == flat[static_cast<std::size_t>(c)]);

    const auto hypos = scenario::generate_hypotheses(scene, ws.cfg.hypothesis);
    const auto pog = scenario::oracle_pog(scene, hypos, 1.0);
    for (Eigen::Index c = 0; c < pog1.cols(); ++c)
      CHECK(pog1(0, c) == pog.probs[static_cast<std::size_t>(c)]);
  }
  SUBCASE("an output directory is required") {
    pipeline::GenerateOptions opt;
    opt.dataset = ws.cfg;
    CHECK_THROWS_AS(pipeline::run_generate(opt), UsageError);
  }
}

TEST_CASE("run_generate is reproducible byte for byte") {
  testutil::TempDir tmp;
  pipeline::GenerateOptions opt;
  opt.dataset.grid_spec = grid::GridSpec::desk_default(8);
  opt.dataset.scene_count = 4;
  opt.dataset.train_count = 3;
  opt.dataset.kappa = 2;
  opt.dataset.max_participants = 2;
  opt.seed = 11;

  opt.out_dir = (tmp.path() / "a").string();
  pipeline::run_generate(opt);
  opt.out_dir = (tmp.path() / "b").string();
  pipeline::run_generate(opt);

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(tmp.path() / "a")) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name == "timing.log") continue;  // wall times differ by design
    CAPTURE(name);
    CHECK(testutil::read_file_bytes(entry.path().string()) ==
          testutil::read_file_bytes((tmp.path() / "b" / name).string()));
    ++compared;
  }
  CHECK(compared >= 10);
  CHECK(fs::exists(tmp.path() / "a" / "timing.log"));
  CHECK(fs::exists(tmp.path() / "b" / "timing.log"));
}

TEST_CASE("run_train_sda reports and persists the feature model") {
  const Workspace& ws = workspace();
  const fs::path dir(ws.data_dir);

  CHECK(ws.sda.at("model_file").get<std::string>() == "sda_model.bin");
  CHECK(ws.sda.at("layer_sizes").get<std::vector<int>>() == std::vector<int>{32, 8});
  REQUIRE(ws.sda.at("final_layer_losses").size() == 2);
  for (const auto& loss : ws.sda.at("final_layer_losses")) CHECK(loss.get<double>() > 0.0);
  CHECK(ws.sda.at("mean_reconstruction_error_train").get<double>() >= 0.0);
  CHECK(ws.sda.at("mean_reconstruction_error_test").get<double>() >= 0.0);
  CHECK(ws.sda.at("mean_abs_cell_value_train").get<double>() > 0.0);
  CHECK(ws.sda.at("train").at("max_iterations").get<int>() == 3);

  CHECK(fs::exists(dir / "sda_model.bin"));
  CHECK(fs::exists(dir / "sda_train_report.json"));
  CHECK(pipeline::load_json((dir / "sda_train_report.json").string()) == ws.sda);

  const Eigen::MatrixXd trace = pipeline::read_csv_matrix((dir / "sda_loss_trace.csv").string());
  CHECK(trace.rows() == 3);  // one row per epoch
  CHECK(trace.cols() == 2);  // one column per layer

  const sda::SdaModel model = sda::load_model((dir / "sda_model.bin").string());
  CHECK(model.input_dim == 16 * 16 * 5);
  CHECK(model.feature_dim() == 8);
}

TEST_CASE("run_train_rf trains raw and reduced banks") {
  const Workspace& ws = workspace();
  const fs::path dir(ws.data_dir);

  CHECK(ws.rf_raw.at("variant").get<std::string>() == "raw");
  CHECK(ws.rf_raw.at("bank_file").get<std::string>() == "bank_raw.bin");
  CHECK(ws.rf_raw.at("t_pred").get<double>() == 2.0);
  CHECK(ws.rf_raw.at("feature_dim").get<int>() == 16 * 16 * 5);
  CHECK(ws.rf_raw.at("trained_cells").get<int>() + ws.rf_raw.at("zero_cells").get<int>() ==
        16 * 16);
  CHECK(ws.rf_raw.at("params").at("tree_count").get<int>() == 2);

  CHECK(ws.rf_raw_t1.at("bank_file").get<std::string>() == "bank_raw_t1.bin");
  CHECK(ws.rf_raw_t1.at("t_pred").get<double>() == 1.0);

  CHECK(ws.rf_reduced.at("variant").get<std::string>() == "reduced");
  CHECK(ws.rf_reduced.at("bank_file").get<std::string>() == "bank_reduced.bin");
  CHECK(ws.rf_reduced.at("feature_dim").get<int>() == 8);

  for (const char* name : {"bank_raw.bin", "bank_raw_t1.bin", "bank_reduced.bin",
                           "rf_train_report_raw.json", "rf_train_report_reduced.json"})
    CHECK(fs::exists(dir / name));

  const forest::ForestBank bank = forest::load_bank((dir / "bank_raw.bin").string());
  CHECK(bank.spec == ws.cfg.grid_spec);
  CHECK(bank.t_pred == 2.0);
  CHECK(bank.variant == forest::BankVariant::kRawAog);

  SUBCASE("t_pred must be a prediction instant") {
    pipeline::TrainRfOptions opt;
    opt.data_dir = ws.data_dir;
    opt.t_pred = 0.7;
    opt.params.tree_count = 1;
    CHECK_THROWS_AS(pipeline::run_train_rf(opt), DataError);
  }
}

TEST_CASE("run_evaluate compares banks and writes the summary table") {
  const Workspace& ws = workspace();
  const fs::path dir(ws.data_dir);

  CHECK(ws.eval.at("data_dir").get<std::string>() == ws.data_dir);
  CHECK(ws.eval.at("recon_test_file").get<std::string>() == "recon_test.csv");
  CHECK(ws.eval.at("mean_reconstruction_error_test").get<double>() >= 0.0);
  REQUIRE(ws.eval.at("variants").size() == 2);
  const json& raw = ws.eval.at("variants")[0];
  const json& reduced = ws.eval.at("variants")[1];
  CHECK(raw.at("variant").get<std::string>() == "raw");
  CHECK(reduced.at("variant").get<std::string>() == "reduced");
  for (const json* v : {&raw, &reduced}) {
    CHECK(v->at("scene_count").get<int>() == 3);
    CHECK(v->at("t_pred").get<double>() == 2.0);
    CHECK(std::isfinite(v->at("mean_error").get<double>()));
    CHECK(v->at("mean_error").get<double>() >= 0.0);
    CHECK(v->at("fallback_count").get<int>() >= 0);
    CHECK(v->at("defined_bands").contains("low"));
    CHECK(v->at("defined_bands").contains("mid"));
    CHECK(v->at("defined_bands").contains("high"));
  }

  for (const char* name : {"evaluate_report.json", "table1.csv", "recon_test.csv",
                           "pog_truth_0000.pgm", "pog_pred_raw_0000.pgm",
                           "pog_pred_reduced_0000.pgm"})
    CHECK(fs::exists(dir / name));

  const std::string table = testutil::read_file_bytes((dir / "table1.csv").string());
  std::vector<std::string> lines;
  std::istringstream ts(table);
  for (std::string line; std::getline(ts, line);) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "input,eps_low,eps_mid,eps_high");
  CHECK(lines[1].rfind("raw,", 0) == 0);
  CHECK(lines[2].rfind("reduced,", 0) == 0);

  const Eigen::MatrixXd recon = pipeline::read_csv_matrix((dir / "recon_test.csv").string());
  CHECK(recon.rows() == 3);
  CHECK(recon.cols() == 1);

  SUBCASE("at least one bank is required") {
    pipeline::EvaluateOptions opt;
    opt.data_dir = ws.data_dir;
    CHECK_THROWS_AS(pipeline::run_evaluate(opt), UsageError);
  }
  SUBCASE("a manifest is required") {
    testutil::TempDir tmp;
    pipeline::EvaluateOptions opt;
    opt.data_dir = tmp.path().string();
    opt.bank_files = {"bank_raw.bin"};
    CHECK_THROWS_AS(pipeline::run_evaluate(opt), DataError);
  }
}

TEST_CASE("run_classify reports road label and relevance verdicts") {
  testutil::TempDir tmp;
  const scenario::Scene scene = testutil::make_junction_scene();
  const std::string scene_file = (tmp.path() / "scene.json").string();
  pipeline::save_scene(scene, scene_file);

  const auto lib = situation::make_default_templates(scene.grid_spec);
  const std::string tdir = (tmp.path() / "templates").string();
  pipeline::write_templates(lib, tdir);
  const std::string manifest = (fs::path(tdir) / "templates.json").string();

  pipeline::ClassifyOptions opt;
  opt.scene_file = scene_file;
  opt.template_manifest = manifest;
  opt.intent = situation::IntendedPath::kStraight;
  opt.report_file = (tmp.path() / "classify.json").string();
  const json report = pipeline::run_classify(opt);

  CHECK(report.at("scene_file").get<std::string>() == scene_file);
  CHECK(report.at("road").at("label").get<std::string>() == "tee_south");
  CHECK(report.at("road").at("distance").get<double>() >= 0.0);
  CHECK(report.at("intent").get<std::string>() == "straight");
  REQUIRE(report.at("participants").size() == 2);
  const json& crosser = report.at("participants")[0];
  const json& oncoming = report.at("participants")[1];
  CHECK(crosser.at("id").get<int>() == 1);
  CHECK(crosser.at("constellation").get<std::string>() == "crossing_from_right");
  CHECK(crosser.at("relevant").get<bool>());
  CHECK(oncoming.at("id").get<int>() == 2);
  CHECK(oncoming.at("constellation").get<std::string>() == "oncoming");
  CHECK(oncoming.at("relevant").get<bool>());
  CHECK(fs::exists(opt.report_file));
  CHECK(pipeline::load_json(opt.report_file) == report);

  SUBCASE("a right turn drops the oncoming vehicle") {
    opt.intent = situation::IntendedPath::kRight;
    opt.report_file.clear();
    const json right = pipeline::run_classify(opt);
    CHECK(right.at("intent").get<std::string>() == "right");
    CHECK(right.at("participants")[0].at("relevant").get<bool>());
    CHECK_FALSE(right.at("participants")[1].at("relevant").get<bool>());
  }
}

TEST_CASE("run_plan selects a safe candidate") {
  testutil::TempDir tmp;
  const scenario::Scene scene = testutil::make_junction_scene();
  const std::string scene_file = (tmp.path() / "scene.json").string();
  pipeline::save_scene(scene, scene_file);

  pipeline::PlanOptions opt;
  opt.scene_file = scene_file;
  opt.report_file = (tmp.path() / "plan.json").string();
  const json report = pipeline::run_plan(opt);

  CHECK(report.at("source").get<std::string>() == "oracle");
  const auto instants = report.at("instants").get<std::vector<double>>();
  REQUIRE(instants.size() == 3);
  CHECK(instants[2] == doctest::Approx(1.5).epsilon(1e-15));
  REQUIRE(report.at("candidates").size() == 15);
  for (std::size_t i = 0; i < 15; ++i) {
    const json& cand = report.at("candidates")[i];
    CHECK(cand.at("index").get<int>() == static_cast<int>(i));
    CHECK_FALSE(cand.at("tag").get<std::string>().empty());
    REQUIRE(cand.at("costs").size() == 3);
    for (const auto& c : cand.at("costs")) {
      CHECK(c.get<double>() >= 0.0);
      CHECK(std::isfinite(c.get<double>()));
    }
  }
  const json& sel = report.at("selection");
  const int idx = sel.at("index").get<int>();
  REQUIRE(idx >= 0);
  REQUIRE(idx < 15);
  CHECK(sel.at("tag") == report.at("candidates")[static_cast<std::size_t>(idx)].at("tag"));
  const auto costs =
      report.at("candidates")[static_cast<std::size_t>(idx)].at("costs").get<std::vector<double>>();
  double worst = 0.0, total = 0.0;
  for (double c : costs) {
    worst = std::max(worst, c);
    total += c;
  }
  CHECK(sel.at("worst_cost").get<double>() == doctest::Approx(worst).epsilon(1e-12));
  CHECK(sel.at("total_cost").get<double>() == doctest::Approx(total).epsilon(1e-12));
  CHECK(fs::exists(opt.report_file));

  SUBCASE("banks drive the prediction when given") {
    const Workspace& ws = workspace();
    const fs::path dir(ws.data_dir);
    const std::string file = ws.gen.at("scene_files")[0].get<std::string>();

    pipeline::PlanOptions banks;
    banks.scene_file = (dir / file).string();
    banks.oracle = false;
    banks.bank_files = {(dir / "bank_raw_t1.bin").string(), (dir / "bank_raw.bin").string()};
    const json br = pipeline::run_plan(banks);
    CHECK(br.at("source").get<std::string>() == "banks");
    CHECK(br.at("instants").get<std::vector<double>>().size() == 2);
    CHECK(br.at("candidates").size() == 15);
    const int bidx = br.at("selection").at("index").get<int>();
    CHECK(bidx >= 0);
    CHECK(bidx < 15);
  }
  SUBCASE("mixing raw and reduced banks is rejected") {
    const Workspace& ws = workspace();
    const fs::path dir(ws.data_dir);
    pipeline::PlanOptions banks;
    banks.scene_file = (dir / ws.gen.at("scene_files")[0].get<std::string>()).string();
    banks.oracle = false;
    banks.bank_files = {(dir / "bank_raw_t1.bin").string(),
                        (dir / "bank_reduced.bin").string()};
    CHECK_THROWS_AS(pipeline::run_plan(banks), DataError);
  }
  SUBCASE("reduced banks need a feature model") {
    const Workspace& ws = workspace();
    const fs::path dir(ws.data_dir);
    pipeline::PlanOptions banks;
    banks.scene_file = (dir / ws.gen.at("scene_files")[0].get<std::string>()).string();
    banks.oracle = false;
    banks.bank_files = {(dir / "bank_reduced.bin").string()};
    CHECK_THROWS_AS(pipeline::run_plan(banks), UsageError);
  }
  SUBCASE("every prediction instant needs a bank") {
    const Workspace& ws = workspace();
    const fs::path dir(ws.data_dir);
    pipeline::PlanOptions banks;
    banks.scene_file = (dir / ws.gen.at("scene_files")[0].get<std::string>()).string();
    banks.oracle = false;
    banks.bank_files = {(dir / "bank_reduced.bin").string()};
    banks.model_file = (dir / "sda_model.bin").string();
    CHECK_THROWS_AS(pipeline::run_plan(banks), DataError);
  }
  SUBCASE("without banks or oracle the request is rejected") {
    pipeline::PlanOptions bad;
    bad.scene_file = scene_file;
    bad.oracle = false;
    CHECK_THROWS_AS(pipeline::run_plan(bad), UsageError);
  }
}
