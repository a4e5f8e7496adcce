// Command-line front end: scene generation, model training, evaluation,
// situation classification and trajectory selection.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pog/pipeline.hpp"

namespace {

using nlohmann::json;

pog::grid::GridSpec grid_for(int cells) {
  return cells > 0 ? pog::grid::GridSpec::desk_default(cells)
                   : pog::grid::GridSpec::paper_default();
}

void add_generate(CLI::App& app) {
  auto* cmd = app.add_subcommand("generate", "Sample a scene dataset and its ground truth");
  auto opt = std::make_shared<pog::pipeline::GenerateOptions>();
  auto grid_cells = std::make_shared<int>(0);
  cmd->add_option("--out", opt->out_dir, "Output directory")->required();
  cmd->add_option("--seed", opt->seed, "Master seed");
  cmd->add_option("--scenes", opt->dataset.scene_count, "Total number of scenes");
  cmd->add_option("--train", opt->dataset.train_count, "Scenes in the training split");
  cmd->add_option("--grid", *grid_cells, "Grid cells per side (default: 80, 0.5 m cells)");
  cmd->add_option("--horizon", opt->dataset.horizon, "Prediction horizon in seconds");
  cmd->add_option("--kappa", opt->dataset.kappa, "Number of prediction instants");
  cmd->add_option("--max-participants", opt->dataset.max_participants,
                  "Maximum traffic participants per scene");
  cmd->callback([opt, grid_cells] {
    opt->dataset.grid_spec = grid_for(*grid_cells);
    const json report = pog::pipeline::run_generate(*opt);
    std::printf("generated %zu scenes (%zu train, %zu test) in %s\n",
                report.at("scene_files").size(), report.at("train_indices").size(),
                report.at("test_indices").size(), opt->out_dir.c_str());
  });
}

void add_templates(CLI::App& app) {
  auto* cmd = app.add_subcommand("templates", "Write the canonical road template library");
  auto out_dir = std::make_shared<std::string>();
  auto grid_cells = std::make_shared<int>(0);
  cmd->add_option("--out", *out_dir, "Output directory")->required();
  cmd->add_option("--grid", *grid_cells, "Grid cells per side (default: 80, 0.5 m cells)");
  cmd->callback([out_dir, grid_cells] {
    const auto lib = pog::situation::make_default_templates(grid_for(*grid_cells));
    pog::pipeline::write_templates(lib, *out_dir);
    std::printf("wrote %zu templates to %s\n", lib.entries.size(), out_dir->c_str());
  });
}

void add_train_sda(CLI::App& app) {
  auto* cmd = app.add_subcommand("train-sda", "Train the stacked denoising autoencoder");
  auto opt = std::make_shared<pog::pipeline::TrainSdaOptions>();
  cmd->add_option("--data", opt->data_dir, "Dataset directory")->required();
  cmd->add_option("--layers", opt->stack.layer_sizes, "Hidden layer sizes");
  cmd->add_option("--epochs", opt->stack.train.max_iterations, "Training epochs per layer");
  cmd->add_option("--batch", opt->stack.train.batch_size, "Minibatch size");
  cmd->add_option("--lr", opt->stack.train.learning_rate, "Learning rate");
  cmd->add_option("--weight-decay", opt->stack.train.weight_decay, "L2 penalty coefficient");
  cmd->add_option("--momentum", opt->stack.train.momentum, "Momentum coefficient");
  cmd->add_option("--noise", opt->stack.train.noise_std, "Corruption noise std deviation");
  cmd->add_option("--seed", opt->stack.train.seed, "Training seed");
  cmd->add_option("--model", opt->model_file, "Model file name inside the dataset directory");
  cmd->callback([opt] {
    const json report = pog::pipeline::run_train_sda(*opt);
    std::printf("trained %zu layers; reconstruction error train %.6f, test %.6f\n",
                report.at("final_layer_losses").size(),
                report.at("mean_reconstruction_error_train").get<double>(),
                report.at("mean_reconstruction_error_test").get<double>());
  });
}

pog::forest::BankVariant parse_variant(const std::string& name) {
  if (name == "raw") return pog::forest::BankVariant::kRawAog;
  if (name == "reduced") return pog::forest::BankVariant::kReducedFeatures;
  throw pog::UsageError("unknown variant '" + name + "' (expected raw or reduced)");
}

void add_train_rf(CLI::App& app) {
  auto* cmd = app.add_subcommand("train-rf", "Train a per-cell random forest bank");
  auto opt = std::make_shared<pog::pipeline::TrainRfOptions>();
  auto variant = std::make_shared<std::string>("raw");
  cmd->add_option("--data", opt->data_dir, "Dataset directory")->required();
  cmd->add_option("--variant", *variant, "Feature variant: raw or reduced")
      ->check(CLI::IsMember({"raw", "reduced"}));
  cmd->add_option("--t-pred", opt->t_pred, "Prediction instant in seconds");
  cmd->add_option("--trees", opt->params.tree_count, "Trees per cell forest");
  cmd->add_option("--m-try", opt->params.m_try, "Features tried per split (0: sqrt rule)");
  cmd->add_option("--max-depth", opt->params.max_depth, "Depth limit (0: unlimited)");
  cmd->add_option("--min-leaf", opt->params.min_samples_leaf, "Minimum samples per leaf");
  cmd->add_option("--seed", opt->params.seed, "Training seed");
  cmd->add_option("--model", opt->model_file, "Feature model file (reduced variant)");
  cmd->add_option("--bank", opt->bank_file, "Bank file name inside the dataset directory");
  cmd->callback([opt, variant] {
    opt->variant = parse_variant(*variant);
    const json report = pog::pipeline::run_train_rf(*opt);
    std::printf("trained %s bank (%d forests, %d zero cells) -> %s\n",
                report.at("variant").get<std::string>().c_str(),
                report.at("trained_cells").get<int>(), report.at("zero_cells").get<int>(),
                report.at("bank_file").get<std::string>().c_str());
  });
}

void add_evaluate(CLI::App& app) {
  auto* cmd = app.add_subcommand("evaluate", "Evaluate forest banks on the test split");
  auto opt = std::make_shared<pog::pipeline::EvaluateOptions>();
  cmd->add_option("--data", opt->data_dir, "Dataset directory")->required();
  cmd->add_option("--bank", opt->bank_files, "Bank file (repeatable)")->required();
  cmd->add_option("--model", opt->model_file, "Feature model file (reduced variant)");
  cmd->add_option("--images", opt->image_count, "Export this many POG image pairs");
  cmd->callback([opt] {
    const json report = pog::pipeline::run_evaluate(*opt);
    for (const auto& v : report.at("variants")) {
      std::printf("%-8s mean error %.6f over %d scenes", v.at("variant").get<std::string>().c_str(),
                  v.at("mean_error").get<double>(), v.at("scene_count").get<int>());
      if (!v.at("mean_error_low").is_null())
        std::printf("  low %.4f", v.at("mean_error_low").get<double>());
      if (!v.at("mean_error_mid").is_null())
        std::printf("  mid %.4f", v.at("mean_error_mid").get<double>());
      if (!v.at("mean_error_high").is_null())
        std::printf("  high %.4f", v.at("mean_error_high").get<double>());
      std::printf("\n");
    }
  });
}

pog::situation::IntendedPath parse_intent(const std::string& name) {
  if (name == "straight") return pog::situation::IntendedPath::kStraight;
  if (name == "left") return pog::situation::IntendedPath::kLeft;
  if (name == "right") return pog::situation::IntendedPath::kRight;
  throw pog::UsageError("unknown intent '" + name + "' (expected straight, left or right)");
}

void add_classify(CLI::App& app) {
  auto* cmd = app.add_subcommand("classify", "Classify the situation of one scene");
  auto opt = std::make_shared<pog::pipeline::ClassifyOptions>();
  auto intent = std::make_shared<std::string>("straight");
  cmd->add_option("--scene", opt->scene_file, "Scenario file")->required();
  cmd->add_option("--templates", opt->template_manifest, "Template manifest JSON")->required();
  cmd->add_option("--intent", *intent, "Intended path: straight, left or right")
      ->check(CLI::IsMember({"straight", "left", "right"}));
  cmd->add_option("-k,--neighbours", opt->k, "Nearest neighbours for the road vote");
  cmd->add_option("--delta", opt->delta, "Pixel deformation window radius");
  cmd->add_option("--report", opt->report_file, "Write the report JSON here");
  cmd->callback([opt, intent] {
    opt->intent = parse_intent(*intent);
    const json report = pog::pipeline::run_classify(*opt);
    std::printf("road: %s (distance %.1f)\n",
                report.at("road").at("label").get<std::string>().c_str(),
                report.at("road").at("distance").get<double>());
    for (const auto& p : report.at("participants"))
      std::printf("participant %d: %s, %s\n", p.at("id").get<int>(),
                  p.at("constellation").get<std::string>().c_str(),
                  p.at("relevant").get<bool>() ? "relevant" : "not relevant");
  });
}

void add_plan(CLI::App& app) {
  auto* cmd = app.add_subcommand("plan", "Select the safest EGO trajectory for one scene");
  auto opt = std::make_shared<pog::pipeline::PlanOptions>();
  auto force_oracle = std::make_shared<bool>(false);
  cmd->add_option("--scene", opt->scene_file, "Scenario file")->required();
  cmd->add_flag("--oracle", *force_oracle,
                "Use ground-truth occupancy instead of forest banks");
  cmd->add_option("--bank", opt->bank_files, "Bank file, one per prediction instant");
  cmd->add_option("--model", opt->model_file, "Feature model file (reduced banks)");
  cmd->add_option("--report", opt->report_file, "Write the report JSON here");
  cmd->callback([opt, force_oracle] {
    opt->oracle = *force_oracle || opt->bank_files.empty();
    const json report = pog::pipeline::run_plan(*opt);
    const json& sel = report.at("selection");
    std::printf("selected candidate %d (%s): worst cost %.6f, total %.6f\n",
                sel.at("index").get<int>(), sel.at("tag").get<std::string>().c_str(),
                sel.at("worst_cost").get<double>(), sel.at("total_cost").get<double>());
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predicted-occupancy-grid pipeline"};
  app.require_subcommand(1);
  add_generate(app);
  add_templates(app);
  add_train_sda(app);
  add_train_rf(app);
  add_evaluate(app);
  add_classify(app);
  add_plan(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const pog::UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const pog::DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const pog::NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 3;
  }
  return 0;
}
