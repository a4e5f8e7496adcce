#include "pog/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pog/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pog::pipeline {

namespace {

json vec2_to_json(const Vec2& v) { return json::array({v.x, v.y}); }

Vec2 vec2_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw DataError("scenario file: expected [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

json grid_to_json(const grid::GridSpec& g) {
  return {{"rows", g.rows},
          {"cols", g.cols},
          {"cell_length", g.cell_length},
          {"cell_width", g.cell_width},
          {"origin", vec2_to_json(g.origin)},
          {"ego_cg", vec2_to_json(g.ego_cg)}};
}

grid::GridSpec grid_from_json(const json& j) {
  grid::GridSpec g;
  g.rows = j.at("rows").get<int>();
  g.cols = j.at("cols").get<int>();
  g.cell_length = j.at("cell_length").get<double>();
  g.cell_width = j.at("cell_width").get<double>();
  g.origin = vec2_from_json(j.at("origin"));
  g.ego_cg = vec2_from_json(j.at("ego_cg"));
  g.validate();
  return g;
}

json participant_to_json(const scenario::TrafficParticipant& p) {
  return {{"id", p.id},
          {"state",
           {{"x", p.state.x},
            {"y", p.state.y},
            {"speed", p.state.speed},
            {"heading", p.state.heading},
            {"ego_lane_slope", p.state.ego_lane_slope}}},
          {"accel_long", p.accel_long},
          {"accel_lat", p.accel_lat},
          {"footprint", {{"length", p.footprint.length}, {"width", p.footprint.width}}}};
}

scenario::TrafficParticipant participant_from_json(const json& j) {
  scenario::TrafficParticipant p;
  p.id = j.at("id").get<int>();
  const json& s = j.at("state");
  p.state.x = s.at("x").get<double>();
  p.state.y = s.at("y").get<double>();
  p.state.speed = s.at("speed").get<double>();
  p.state.heading = s.at("heading").get<double>();
  p.state.ego_lane_slope = s.at("ego_lane_slope").get<double>();
  p.accel_long = j.at("accel_long").get<double>();
  p.accel_lat = j.at("accel_lat").get<double>();
  if (j.contains("footprint")) {
    p.footprint.length = j.at("footprint").at("length").get<double>();
    p.footprint.width = j.at("footprint").at("width").get<double>();
  }
  return p;
}

json polyline_to_json(const std::vector<Vec2>& poly) {
  json out = json::array();
  for (const auto& p : poly) out.push_back(vec2_to_json(p));
  return out;
}

std::vector<Vec2> polyline_from_json(const json& j) {
  std::vector<Vec2> out;
  for (const auto& p : j) out.push_back(vec2_from_json(p));
  return out;
}

}  // namespace

json scene_to_json(const scenario::Scene& scene) {
  json road;
  road["lanes"] = json::array();
  for (const auto& lane : scene.road.lanes) road["lanes"].push_back(polyline_to_json(lane));
  road["drivable"] = json::array();
  for (const auto& poly : scene.road.drivable)
    road["drivable"].push_back(polyline_to_json(poly));
  road["infrastructure_cells"] = json::array();
  for (const auto& c : scene.road.infrastructure_cells)
    road["infrastructure_cells"].push_back(json::array({c.i, c.j}));

  return {{"version", 1},
          {"grid", grid_to_json(scene.grid_spec)},
          {"horizon", scene.horizon},
          {"kappa", scene.kappa},
          {"seed", scene.seed},
          {"t0", scene.t0},
          {"road", road},
          {"ego", participant_to_json(scene.ego)},
          {"participants", [&] {
             json arr = json::array();
             for (const auto& p : scene.participants) arr.push_back(participant_to_json(p));
             return arr;
           }()}};
}

scenario::Scene scene_from_json(const json& j) {
  try {
    if (j.at("version").get<int>() != 1)
      throw DataError("scenario file: unsupported version");
    scenario::Scene scene;
    scene.grid_spec = grid_from_json(j.at("grid"));
    scene.horizon = j.at("horizon").get<double>();
    scene.kappa = j.at("kappa").get<int>();
    scene.seed = j.at("seed").get<std::uint64_t>();
    scene.t0 = j.at("t0").get<double>();
    const json& road = j.at("road");
    for (const auto& lane : road.at("lanes"))
      scene.road.lanes.push_back(polyline_from_json(lane));
    for (const auto& poly : road.at("drivable"))
      scene.road.drivable.push_back(polyline_from_json(poly));
    for (const auto& c : road.at("infrastructure_cells"))
      scene.road.infrastructure_cells.push_back(
          {c.at(0).get<int>(), c.at(1).get<int>()});
    scene.ego = participant_from_json(j.at("ego"));
    for (const auto& p : j.at("participants"))
      scene.participants.push_back(participant_from_json(p));
    scene.validate();
    return scene;
  } catch (const json::exception& e) {
    throw DataError(std::string("scenario file: ") + e.what());
  }
}

void save_scene(const scenario::Scene& scene, const std::string& path) {
  save_json(scene_to_json(scene), path);
}

scenario::Scene load_scene(const std::string& path) { return scene_from_json(load_json(path)); }

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream f(path);
  if (!f) throw DataError("csv: cannot open " + path + " for writing");
  char buf[40];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      if (c) f << ',';
      f << buf;
    }
    f << '\n';
  }
  if (!f) throw DataError("csv: write failed for " + path);
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.c_str();
    char* end = nullptr;
    while (*p) {
      const double v = std::strtod(p, &end);
      if (end == p) throw DataError("csv: malformed number in " + path);
      row.push_back(v);
      p = end;
      if (*p == ',') ++p;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError("csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("csv: empty file " + path);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return m;
}

void write_templates(const situation::TemplateLibrary& lib, const std::string& dir) {
  if (lib.entries.empty()) throw DataError("templates: empty library");
  fs::create_directories(dir);
  json manifest;
  manifest["version"] = 1;
  manifest["rows"] = lib.entries.front().image.rows;
  manifest["cols"] = lib.entries.front().image.cols;
  manifest["entries"] = json::array();
  for (std::size_t k = 0; k < lib.entries.size(); ++k) {
    const std::string file = "template_" + lib.entries[k].label + ".pgm";
    situation::write_binary_pgm(lib.entries[k].image, (fs::path(dir) / file).string());
    manifest["entries"].push_back({{"file", file}, {"label", lib.entries[k].label}});
  }
  save_json(manifest, (fs::path(dir) / "templates.json").string());
}

situation::TemplateLibrary load_templates(const std::string& manifest_path) {
  const json manifest = load_json(manifest_path);
  situation::TemplateLibrary lib;
  try {
    if (manifest.at("version").get<int>() != 1)
      throw DataError("templates: unsupported version");
    const fs::path dir = fs::path(manifest_path).parent_path();
    const int rows = manifest.at("rows").get<int>();
    const int cols = manifest.at("cols").get<int>();
    for (const auto& entry : manifest.at("entries")) {
      situation::TemplateLibrary::Entry e;
      e.label = entry.at("label").get<std::string>();
      e.image = situation::read_binary_pgm((dir / entry.at("file").get<std::string>()).string());
      if (e.image.rows != rows || e.image.cols != cols)
        throw DataError("templates: image size mismatch for " + e.label);
      lib.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("templates: ") + e.what());
  }
  if (lib.entries.empty()) throw DataError("templates: manifest lists no entries");
  return lib;
}

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw DataError("malformed JSON in " + path + ": " + e.what());
  }
}

void save_json(const json& j, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f << j.dump(2) << '\n';
  if (!f) throw DataError("write failed for " + path);
}

void log_timing(const std::string& dir, const std::string& label, double seconds) {
  std::ofstream f(fs::path(dir) / "timing.log", std::ios::app);
  if (!f) return;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", seconds);
  f << label << ": " << buf << " s\n";
}

namespace {

json hypothesis_to_json(const scenario::HypothesisConfig& h) {
  return {{"accels", h.accels},
          {"turn_curvature", h.turn_curvature},
          {"heading_gain", h.heading_gain},
          {"lane_capture_distance", h.lane_capture_distance},
          {"lane_capture_angle", h.lane_capture_angle},
          {"substeps_per_instant", h.substeps_per_instant}};
}

json dataset_to_json(const scenario::DatasetConfig& d) {
  return {{"grid", grid_to_json(d.grid_spec)},
          {"scene_count", d.scene_count},
          {"train_count", d.train_count},
          {"horizon", d.horizon},
          {"kappa", d.kappa},
          {"speed_min_kmh", d.speed_min_kmh},
          {"speed_max_kmh", d.speed_max_kmh},
          {"position_jitter", d.position_jitter},
          {"accel_jitter", d.accel_jitter},
          {"ego_speed_kmh", d.ego_speed_kmh},
          {"max_participants", d.max_participants},
          {"hypothesis", hypothesis_to_json(d.hypothesis)}};
}

std::vector<double> instants_of(double horizon, int kappa) {
  std::vector<double> out(static_cast<std::size_t>(kappa));
  for (int k = 0; k < kappa; ++k) out[static_cast<std::size_t>(k)] = horizon * (k + 1) / kappa;
  return out;
}

std::string scene_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scenario_%04d.json", index);
  return buf;
}

// Rows of the flattened AOGs / POGs for the given scene indices.
struct SplitMatrices {
  Eigen::MatrixXd aogs;
  std::vector<Eigen::MatrixXd> pogs;  // one matrix per instant
};

SplitMatrices build_split(const scenario::Dataset& ds, const std::vector<int>& indices,
                          const scenario::DatasetConfig& cfg) {
  const auto instants = instants_of(cfg.horizon, cfg.kappa);
  SplitMatrices out;
  out.aogs.resize(static_cast<Eigen::Index>(indices.size()), cfg.grid_spec.flat_size());
  out.pogs.assign(instants.size(),
                  Eigen::MatrixXd(static_cast<Eigen::Index>(indices.size()),
                                  cfg.grid_spec.cell_count()));
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const scenario::Scene& scene = ds.scenes[static_cast<std::size_t>(indices[r])];
    const auto flat = grid::flatten(scenario::encode_aog(scene));
    for (Eigen::Index c = 0; c < out.aogs.cols(); ++c)
      out.aogs(static_cast<Eigen::Index>(r), c) = flat[static_cast<std::size_t>(c)];
    const auto hypos = scenario::generate_hypotheses(scene, cfg.hypothesis);
    for (std::size_t k = 0; k < instants.size(); ++k) {
      const auto pog = scenario::oracle_pog(scene, hypos, instants[k]);
      for (Eigen::Index c = 0; c < out.pogs[k].cols(); ++c)
        out.pogs[k](static_cast<Eigen::Index>(r), c) = pog.probs[static_cast<std::size_t>(c)];
    }
  }
  return out;
}

std::string pog_file_name(const std::string& split, int instant_index) {
  return "pog_" + split + "_t" + std::to_string(instant_index + 1) + ".csv";
}

}  // namespace

json run_generate(const GenerateOptions& opt) {
  if (opt.out_dir.empty()) throw UsageError("generate: output directory required");
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);

  scenario::Dataset ds = scenario::sample_dataset(opt.dataset, opt.seed);

  json manifest;
  manifest["version"] = 1;
  manifest["seed"] = opt.seed;
  manifest["dataset"] = dataset_to_json(opt.dataset);
  manifest["instants"] = instants_of(opt.dataset.horizon, opt.dataset.kappa);
  manifest["train_indices"] = ds.train_indices;
  manifest["test_indices"] = ds.test_indices;

  json files;
  json scene_files = json::array();
  for (std::size_t n = 0; n < ds.scenes.size(); ++n) {
    const std::string name = scene_file_name(static_cast<int>(n));
    save_scene(ds.scenes[n], (dir / name).string());
    scene_files.push_back(name);
  }
  manifest["scene_files"] = scene_files;

  const SplitMatrices train = build_split(ds, ds.train_indices, opt.dataset);
  const SplitMatrices test = build_split(ds, ds.test_indices, opt.dataset);
  write_csv_matrix((dir / "aog_train.csv").string(), train.aogs);
  write_csv_matrix((dir / "aog_test.csv").string(), test.aogs);
  files["aog_train"] = "aog_train.csv";
  files["aog_test"] = "aog_test.csv";
  json pog_train = json::array(), pog_test = json::array();
  for (int k = 0; k < opt.dataset.kappa; ++k) {
    write_csv_matrix((dir / pog_file_name("train", k)).string(),
                     train.pogs[static_cast<std::size_t>(k)]);
    write_csv_matrix((dir / pog_file_name("test", k)).string(),
                     test.pogs[static_cast<std::size_t>(k)]);
    pog_train.push_back(pog_file_name("train", k));
    pog_test.push_back(pog_file_name("test", k));
  }
  files["pog_train"] = pog_train;
  files["pog_test"] = pog_test;
  manifest["files"] = files;

  save_json(manifest, (dir / "manifest.json").string());
  log_timing(opt.out_dir, "generate",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return manifest;
}

namespace {

struct LoadedManifest {
  json manifest;
  grid::GridSpec grid_spec;
  std::vector<double> instants;
  fs::path dir;
};

LoadedManifest load_manifest(const std::string& data_dir) {
  LoadedManifest lm;
  lm.dir = fs::path(data_dir);
  lm.manifest = load_json((lm.dir / "manifest.json").string());
  try {
    if (lm.manifest.at("version").get<int>() != 1)
      throw DataError("manifest: unsupported version");
    lm.grid_spec = grid_from_json(lm.manifest.at("dataset").at("grid"));
    lm.instants = lm.manifest.at("instants").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
  return lm;
}

int instant_index(const std::vector<double>& instants, double t_pred) {
  for (std::size_t k = 0; k < instants.size(); ++k)
    if (std::abs(instants[k] - t_pred) <= 1e-9) return static_cast<int>(k);
  throw DataError("t_pred " + std::to_string(t_pred) + " is not a prediction instant");
}

}  // namespace

json run_train_sda(const TrainSdaOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  const LoadedManifest lm = load_manifest(opt.data_dir);
  const Eigen::MatrixXd train_rows =
      read_csv_matrix((lm.dir / lm.manifest.at("files").at("aog_train").get<std::string>())
                          .string());
  const Eigen::MatrixXd test_rows = read_csv_matrix(
      (lm.dir / lm.manifest.at("files").at("aog_test").get<std::string>()).string());

  // Samples are stored as rows on disk but consumed as columns.
  const Eigen::MatrixXd train_cols = train_rows.transpose();
  const sda::SdaModel model = sda::train_stack(train_cols, opt.stack);
  sda::save_model(model, (lm.dir / opt.model_file).string());

  const auto mean_recon = [&](const Eigen::MatrixXd& rows) {
    double sum = 0.0;
    for (Eigen::Index r = 0; r < rows.rows(); ++r)
      sum += sda::reconstruction_error(model, rows.row(r).transpose());
    return sum / static_cast<double>(rows.rows());
  };

  json report;
  report["model_file"] = opt.model_file;
  report["layer_sizes"] = opt.stack.layer_sizes;
  report["train"] = {{"noise_std", opt.stack.train.noise_std},
                     {"learning_rate", opt.stack.train.learning_rate},
                     {"weight_decay", opt.stack.train.weight_decay},
                     {"momentum", opt.stack.train.momentum},
                     {"max_iterations", opt.stack.train.max_iterations},
                     {"batch_size", opt.stack.train.batch_size},
                     {"seed", opt.stack.train.seed}};
  json final_losses = json::array();
  for (const auto& trace : model.traces)
    final_losses.push_back(trace.loss_per_epoch.empty() ? 0.0 : trace.loss_per_epoch.back());
  report["final_layer_losses"] = final_losses;
  report["mean_reconstruction_error_train"] = mean_recon(train_rows);
  report["mean_reconstruction_error_test"] = mean_recon(test_rows);
  report["mean_abs_cell_value_train"] = train_rows.array().abs().mean();

  save_json(report, (lm.dir / "sda_train_report.json").string());
  if (!model.traces.empty()) {
    Eigen::MatrixXd trace(static_cast<Eigen::Index>(model.traces.front().loss_per_epoch.size()),
                          static_cast<Eigen::Index>(model.traces.size()));
    for (std::size_t l = 0; l < model.traces.size(); ++l)
      for (std::size_t e = 0; e < model.traces[l].loss_per_epoch.size(); ++e)
        trace(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(l)) =
            model.traces[l].loss_per_epoch[e];
    if (trace.rows() > 0) write_csv_matrix((lm.dir / "sda_loss_trace.csv").string(), trace);
  }
  log_timing(opt.data_dir, "train-sda",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return report;
}

json run_train_rf(const TrainRfOptions& opt) {
  const LoadedManifest lm = load_manifest(opt.data_dir);
  const int k = instant_index(lm.instants, opt.t_pred);
  const Eigen::MatrixXd aog_train = read_csv_matrix(
      (lm.dir / lm.manifest.at("files").at("aog_train").get<std::string>()).string());
  const Eigen::MatrixXd targets = read_csv_matrix(
      (lm.dir / lm.manifest.at("files").at("pog_train").at(static_cast<std::size_t>(k))
                    .get<std::string>())
          .string());

  Eigen::MatrixXd x;
  if (opt.variant == forest::BankVariant::kRawAog) {
    x = aog_train;
  } else {
    const sda::SdaModel model = sda::load_model((lm.dir / opt.model_file).string());
    const Eigen::MatrixXd cols = aog_train.transpose();
    x = sda::extract_features(model, cols).transpose();
  }

  forest::BankTrainReport train_report;
  const forest::ForestBank bank = forest::fit_bank(x, targets, lm.grid_spec, opt.t_pred,
                                                   opt.variant, opt.params, &train_report);
  const std::string bank_file =
      opt.bank_file.empty() ? "bank_" + forest::to_string(opt.variant) + ".bin" : opt.bank_file;
  forest::save_bank(bank, (lm.dir / bank_file).string());

  json report;
  report["bank_file"] = bank_file;
  report["variant"] = forest::to_string(opt.variant);
  report["t_pred"] = opt.t_pred;
  report["feature_dim"] = bank.feature_dim;
  report["trained_cells"] = train_report.trained_cells;
  report["zero_cells"] = train_report.zero_cells;
  report["params"] = {{"tree_count", opt.params.tree_count},
                      {"m_try", opt.params.m_try},
                      {"max_depth", opt.params.max_depth},
                      {"min_samples_leaf", opt.params.min_samples_leaf},
                      {"seed", opt.params.seed}};
  save_json(report, (lm.dir / ("rf_train_report_" + forest::to_string(opt.variant) + ".json"))
                        .string());
  log_timing(opt.data_dir, "train-rf " + forest::to_string(opt.variant),
             train_report.wall_seconds);
  return report;
}

json run_evaluate(const EvaluateOptions& opt) {
  if (opt.bank_files.empty()) throw UsageError("evaluate: at least one bank file required");
  const LoadedManifest lm = load_manifest(opt.data_dir);
  const Eigen::MatrixXd aog_test = read_csv_matrix(
      (lm.dir / lm.manifest.at("files").at("aog_test").get<std::string>()).string());

  json report;
  report["data_dir"] = opt.data_dir;
  json variants = json::array();
  std::string table = "input,eps_low,eps_mid,eps_high\n";

  // Per-scene reconstruction errors of the feature model on the test split
  // (histogram source data), whenever the model file is present.
  if (fs::exists(lm.dir / opt.model_file)) {
    const sda::SdaModel model = sda::load_model((lm.dir / opt.model_file).string());
    Eigen::MatrixXd recon(aog_test.rows(), 1);
    for (Eigen::Index r = 0; r < aog_test.rows(); ++r)
      recon(r, 0) = sda::reconstruction_error(model, aog_test.row(r).transpose());
    write_csv_matrix((lm.dir / "recon_test.csv").string(), recon);
    report["recon_test_file"] = "recon_test.csv";
    report["mean_reconstruction_error_test"] = recon.col(0).mean();
  }

  bool truth_images_written = false;
  for (const auto& bank_file : opt.bank_files) {
    const forest::ForestBank bank = forest::load_bank((lm.dir / bank_file).string());
    if (!(bank.spec == lm.grid_spec))
      throw DataError("evaluate: bank grid does not match the dataset grid");
    const int k = instant_index(lm.instants, bank.t_pred);
    const Eigen::MatrixXd truth = read_csv_matrix(
        (lm.dir / lm.manifest.at("files").at("pog_test").at(static_cast<std::size_t>(k))
                      .get<std::string>())
            .string());

    Eigen::MatrixXd x;
    if (bank.variant == forest::BankVariant::kRawAog) {
      x = aog_test;
    } else {
      const sda::SdaModel model = sda::load_model((lm.dir / opt.model_file).string());
      if (model.feature_dim() != bank.feature_dim)
        throw DataError("evaluate: model feature dim does not match the bank");
      const Eigen::MatrixXd cols = aog_test.transpose();
      x = sda::extract_features(model, cols).transpose();
    }

    double err_sum = 0.0;
    int fallback_count = 0;
    double low_sum = 0.0, mid_sum = 0.0, high_sum = 0.0;
    int low_n = 0, mid_n = 0, high_n = 0;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      grid::PredictedOccupancyGrid truth_pog(lm.grid_spec, bank.t_pred);
      for (Eigen::Index c = 0; c < truth.cols(); ++c)
        truth_pog.probs[static_cast<std::size_t>(c)] = truth(r, c);
      const grid::PredictedOccupancyGrid pred = forest::predict_pog(bank, x.row(r));

      const metrics::PogError overall = metrics::pog_error(truth_pog, pred);
      err_sum += overall.error;
      fallback_count += overall.fallback ? 1 : 0;
      const metrics::BandedErrors bands = metrics::banded_errors(truth_pog, pred);
      if (bands.low) {
        low_sum += bands.low->error;
        ++low_n;
      }
      if (bands.mid) {
        mid_sum += bands.mid->error;
        ++mid_n;
      }
      if (bands.high) {
        high_sum += bands.high->error;
        ++high_n;
      }

      if (static_cast<int>(r) < opt.image_count) {
        char name[64];
        if (!truth_images_written) {
          std::snprintf(name, sizeof name, "pog_truth_%04d.pgm", static_cast<int>(r));
          grid::write_pgm_file(truth_pog, (lm.dir / name).string());
        }
        std::snprintf(name, sizeof name, "pog_pred_%s_%04d.pgm",
                      forest::to_string(bank.variant).c_str(), static_cast<int>(r));
        grid::write_pgm_file(pred, (lm.dir / name).string());
      }
    }
    if (opt.image_count > 0) truth_images_written = true;

    const double n = static_cast<double>(x.rows());
    json v;
    v["bank_file"] = bank_file;
    v["variant"] = forest::to_string(bank.variant);
    v["t_pred"] = bank.t_pred;
    v["scene_count"] = x.rows();
    v["mean_error"] = err_sum / n;
    v["fallback_count"] = fallback_count;
    v["mean_error_low"] = low_n ? json(low_sum / low_n) : json();
    v["mean_error_mid"] = mid_n ? json(mid_sum / mid_n) : json();
    v["mean_error_high"] = high_n ? json(high_sum / high_n) : json();
    v["defined_bands"] = {{"low", low_n}, {"mid", mid_n}, {"high", high_n}};
    variants.push_back(v);

    char row[160];
    std::snprintf(row, sizeof row, "%s,%.6f,%.6f,%.6f\n",
                  forest::to_string(bank.variant).c_str(), low_n ? low_sum / low_n : 0.0,
                  mid_n ? mid_sum / mid_n : 0.0, high_n ? high_sum / high_n : 0.0);
    table += row;
  }
  report["variants"] = variants;

  std::ofstream tf(lm.dir / "table1.csv");
  if (!tf) throw DataError("evaluate: cannot write table1.csv");
  tf << table;
  tf.close();
  save_json(report, (lm.dir / "evaluate_report.json").string());
  return report;
}

json run_classify(const ClassifyOptions& opt) {
  const scenario::Scene scene = load_scene(opt.scene_file);
  const situation::TemplateLibrary lib = load_templates(opt.template_manifest);
  const situation::BinaryImage image =
      situation::render_road_image(scene.road, scene.grid_spec);
  const situation::RoadClassification road =
      situation::classify_road(image, lib, opt.k, opt.delta);

  const auto hypos = scenario::generate_hypotheses(scene);
  const auto verdicts = situation::select_relevant(scene, hypos, opt.intent);

  json report;
  report["scene_file"] = opt.scene_file;
  report["road"] = {{"label", road.label},
                    {"template_index", road.template_index},
                    {"distance", road.distance}};
  report["intent"] = situation::to_string(opt.intent);
  json parts = json::array();
  for (const auto& v : verdicts)
    parts.push_back({{"id", v.participant_id},
                     {"constellation", situation::to_string(v.constellation)},
                     {"relevant", v.relevant}});
  report["participants"] = parts;
  if (!opt.report_file.empty()) save_json(report, opt.report_file);
  return report;
}

json run_plan(const PlanOptions& opt) {
  const scenario::Scene scene = load_scene(opt.scene_file);
  const auto instants = instants_of(scene.horizon, scene.kappa);

  std::vector<grid::PredictedOccupancyGrid> pogs;
  if (opt.oracle) {
    const auto hypos = scenario::generate_hypotheses(scene, opt.hypothesis);
    for (double t : instants) pogs.push_back(scenario::oracle_pog(scene, hypos, t));
  } else {
    if (opt.bank_files.empty())
      throw UsageError("plan: either --oracle or at least one --bank is required");
    std::vector<forest::ForestBank> banks;
    for (const auto& file : opt.bank_files) banks.push_back(forest::load_bank(file));
    for (std::size_t b = 1; b < banks.size(); ++b)
      if (banks[b].variant != banks.front().variant)
        throw DataError("plan: banks mix raw and reduced variants");
    const auto flat = grid::flatten(scenario::encode_aog(scene));
    Eigen::VectorXd raw(static_cast<Eigen::Index>(flat.size()));
    for (std::size_t c = 0; c < flat.size(); ++c)
      raw(static_cast<Eigen::Index>(c)) = flat[c];
    Eigen::RowVectorXd x;
    if (banks.front().variant == forest::BankVariant::kRawAog) {
      x = raw.transpose();
    } else {
      if (opt.model_file.empty())
        throw UsageError("plan: reduced banks need --model");
      const sda::SdaModel model = sda::load_model(opt.model_file);
      x = sda::extract_features(model, raw).transpose();
    }
    for (double t : instants) {
      const forest::ForestBank* match = nullptr;
      for (const auto& bank : banks)
        if (std::abs(bank.t_pred - t) <= 1e-9) match = &bank;
      if (!match)
        throw DataError("plan: no bank for prediction instant " + std::to_string(t));
      if (!(match->spec == scene.grid_spec))
        throw DataError("plan: bank grid does not match the scene grid");
      pogs.push_back(forest::predict_pog(*match, x));
    }
  }

  const auto candidates = planner::generate_candidates(scene, opt.planner);
  std::vector<std::vector<double>> costs;
  costs.reserve(candidates.size());
  for (const auto& cand : candidates)
    costs.push_back(planner::occupancy_costs(cand, pogs, scene.ego.footprint));
  const planner::Selection sel = planner::select_safe(costs);

  json report;
  report["scene_file"] = opt.scene_file;
  report["source"] = opt.oracle ? "oracle" : "banks";
  report["instants"] = instants;
  json cands = json::array();
  for (const auto& cand : candidates)
    cands.push_back({{"index", cand.index},
                     {"tag", cand.tag},
                     {"accel", cand.accel},
                     {"curvature", cand.curvature},
                     {"costs", costs[static_cast<std::size_t>(cand.index)]}});
  report["candidates"] = cands;
  report["selection"] = {{"index", sel.index},
                         {"tag", candidates[static_cast<std::size_t>(sel.index)].tag},
                         {"worst_cost", sel.worst_cost},
                         {"total_cost", sel.total_cost}};
  if (!opt.report_file.empty()) save_json(report, opt.report_file);
  return report;
}

}  // namespace pog::pipeline
