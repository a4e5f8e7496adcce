#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pog/common.hpp"
#include "pog/forest.hpp"
#include "pog/planner.hpp"
#include "pog/scenario.hpp"
#include "pog/sda.hpp"
#include "pog/situation.hpp"

namespace pog::pipeline {

/// Scenario file round-trip (versioned JSON).
nlohmann::json scene_to_json(const scenario::Scene& scene);
scenario::Scene scene_from_json(const nlohmann::json& j);
void save_scene(const scenario::Scene& scene, const std::string& path);
scenario::Scene load_scene(const std::string& path);

/// Plain numeric CSV with full double precision; one matrix row per line.
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_csv_matrix(const std::string& path);

/// Template library on disk: a manifest JSON naming one PGM per entry.
void write_templates(const situation::TemplateLibrary& lib, const std::string& dir);
situation::TemplateLibrary load_templates(const std::string& manifest_path);

nlohmann::json load_json(const std::string& path);
void save_json(const nlohmann::json& j, const std::string& path);

/// Appends a wall-time line to the sidecar timing log; the log is the only
/// output that may differ between identical runs.
void log_timing(const std::string& dir, const std::string& label, double seconds);

struct GenerateOptions {
  scenario::DatasetConfig dataset{};
  std::uint64_t seed{42};
  std::string out_dir;
};

/// Samples the dataset and writes scenario files, flattened AOGs,
/// ground-truth POGs per prediction instant, and the manifest.
nlohmann::json run_generate(const GenerateOptions& opt);

struct TrainSdaOptions {
  std::string data_dir;
  sda::StackConfig stack{};
  std::string model_file{"sda_model.bin"};
};

nlohmann::json run_train_sda(const TrainSdaOptions& opt);

struct TrainRfOptions {
  std::string data_dir;
  forest::BankVariant variant{forest::BankVariant::kRawAog};
  double t_pred{2.0};
  forest::ForestParams params{};
  std::string model_file{"sda_model.bin"};
  std::string bank_file;  ///< empty: bank_<variant>.bin
};

nlohmann::json run_train_rf(const TrainRfOptions& opt);

struct EvaluateOptions {
  std::string data_dir;
  std::vector<std::string> bank_files;
  std::string model_file{"sda_model.bin"};
  int image_count{0};  ///< POG image pairs to export per variant
};

nlohmann::json run_evaluate(const EvaluateOptions& opt);

struct ClassifyOptions {
  std::string scene_file;
  std::string template_manifest;
  situation::IntendedPath intent{situation::IntendedPath::kStraight};
  int k{1};
  int delta{2};
  std::string report_file;
};

nlohmann::json run_classify(const ClassifyOptions& opt);

struct PlanOptions {
  std::string scene_file;
  bool oracle{true};
  std::vector<std::string> bank_files;
  std::string model_file;
  planner::PlannerConfig planner{};
  scenario::HypothesisConfig hypothesis{};
  std::string report_file;
};

nlohmann::json run_plan(const PlanOptions& opt);

}  // namespace pog::pipeline
